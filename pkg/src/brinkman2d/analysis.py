"""Regime studies and verification: Da sweeps, conditioning, spectra,
manufactured-solution convergence, and limit consistency checks.

The sweep reuses one normalized permeability field and varies only the
control number anna = viscosity_ratio * Da, mirroring a fixed-contrast
experiment.  Condition numbers are computed on the pressure-pinned
matrix by default; the unpinned matrix has an exact constant-pressure
nullspace and its kappa is only meaningful with that mode excluded.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._util import atomic_write_text
from .discretization import (
    BoundaryData,
    ForcingField,
    assemble_divergence,
    assemble_monolithic,
)
from .grid import StaggeredGrid, boundary_velocity_mask, build_grid
from .media import NormalizedPermeability, PermeabilityField, normalize, uniform_kstar
from .scaling import Regime, classify_regime
from .solvers import SolverConfig, direct_solve, gmres_solve

#: Largest matrix decomposed densely for kappa / spectra.
DENSE_DECOMP_LIMIT = 3000
#: |eigenvalue| at or below this counts as the numerical nullspace.
NULLSPACE_TOL = 1e-10
#: sigma_min below this fraction of sigma_max flags numerical singularity.
SINGULAR_RTOL = 1e-14


class UnsupportedSizeError(ValueError):
    """Matrix too large for the dense decomposition path."""


@dataclass(frozen=True)
class ConditionReport:
    kappa: float
    numerically_singular: bool


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    min_abs: float
    min_abs_nonzero: float


@dataclass
class RegimeRow:
    da: float
    anna: float
    kappa: float | None
    kappa_flag: str
    iterations: int
    final_relres: float
    converged: bool
    regime: Regime
    divergence_max: float
    velocity_norm: float
    wall_time: float


@dataclass
class RegimeTable:
    rows: list[RegimeRow]
    metadata: dict = field(default_factory=dict)


@dataclass
class ConvergenceStudy:
    sizes: tuple[int, ...]
    velocity_errors: np.ndarray
    pressure_errors: np.ndarray
    velocity_orders: np.ndarray
    pressure_orders: np.ndarray


@dataclass
class LimitCheckReport:
    darcy_rel_diff: float
    stokes_rel_diff: float


def _dense(matrix, limit: int = DENSE_DECOMP_LIMIT) -> np.ndarray:
    if sp.issparse(matrix):
        n, m = matrix.shape
    else:
        matrix = np.asarray(matrix, dtype=float)
        n, m = matrix.shape
    if n != m:
        raise ValueError(f"matrix must be square, got shape {(n, m)}")
    if n > limit:
        raise UnsupportedSizeError(f"dense decomposition limited to n <= {limit}, got {n}")
    return matrix.toarray() if sp.issparse(matrix) else np.array(matrix, dtype=float)


def condition_number(matrix) -> ConditionReport:
    """kappa = sigma_max / sigma_min from a dense SVD."""
    dense = _dense(matrix)
    sigma = np.linalg.svd(dense, compute_uv=False)
    s_max, s_min = float(sigma[0]), float(sigma[-1])
    singular = s_min < SINGULAR_RTOL * s_max
    kappa = math.inf if s_min == 0.0 else s_max / s_min
    return ConditionReport(kappa, singular)


def eigen_spectrum(matrix, exclude_nullspace: bool = False) -> SpectrumReport:
    """Dense eigendecomposition with the distance of the spectrum from 0.

    With ``exclude_nullspace`` the single smallest-magnitude eigenvalue
    (the constant-pressure mode of an unpinned system) is dropped from
    ``min_abs_nonzero``; otherwise eigenvalues below ``NULLSPACE_TOL``
    in magnitude are excluded.
    """
    dense = _dense(matrix)
    eigenvalues = np.linalg.eigvals(dense)
    mags = np.sort(np.abs(eigenvalues))
    min_abs = float(mags[0])
    if exclude_nullspace:
        rest = mags[1:]
    else:
        rest = mags[mags > NULLSPACE_TOL]
    min_nonzero = float(rest[0]) if rest.size else math.nan
    return SpectrumReport(eigenvalues, min_abs, min_nonzero)


def check_divergence(grid: StaggeredGrid, velocity) -> float:
    """Max cell magnitude of the discrete divergence of a face velocity field."""
    u = np.asarray(velocity, dtype=float).ravel()
    if u.size != grid.n_velocity:
        raise ValueError(f"velocity has {u.size} entries, expected {grid.n_velocity}")
    div = assemble_divergence(grid) @ u
    return float(np.abs(div).max())


def sweep_darcy(
    grid: StaggeredGrid,
    field_: PermeabilityField,
    da_values,
    viscosity_ratio: float,
    bc: BoundaryData,
    config: SolverConfig,
    pin_pressure: bool = False,
    compute_kappa: bool = True,
) -> RegimeTable:
    """GMRES behavior across a Darcy-number sweep with one fixed field.

    Each point assembles the system at anna = viscosity_ratio * da and
    solves it; kappa (when requested and the size permits) is measured
    on the pressure-pinned matrix.  A non-converged point is recorded
    and the sweep continues.
    """
    da = [float(v) for v in da_values]
    if not da:
        raise ValueError("da_values must be nonempty")
    if any(v <= 0.0 for v in da):
        raise ValueError("da_values must be positive")
    if any(b <= a for a, b in zip(da, da[1:])):
        raise ValueError("da_values must be strictly ascending")

    kstar = normalize(field_)
    rows: list[RegimeRow] = []
    for value in da:
        anna = viscosity_ratio * value
        system = assemble_monolithic(grid, kstar, anna, bc, pin_pressure=pin_pressure)
        t0 = time.perf_counter()
        x, report = gmres_solve(system.matrix, system.rhs, config)
        wall = time.perf_counter() - t0

        kappa: float | None = None
        kappa_flag = "omitted"
        if compute_kappa and grid.n_total <= DENSE_DECOMP_LIMIT:
            pinned = system if pin_pressure else assemble_monolithic(
                grid, kstar, anna, bc, pin_pressure=True
            )
            cond = condition_number(pinned.matrix)
            kappa = cond.kappa
            kappa_flag = "pinned-singular" if cond.numerically_singular else "pinned"

        velocity = x[: grid.n_velocity]
        rows.append(
            RegimeRow(
                da=value,
                anna=anna,
                kappa=kappa,
                kappa_flag=kappa_flag,
                iterations=report.iterations,
                final_relres=report.final_relres,
                converged=report.converged,
                regime=classify_regime(anna),
                divergence_max=check_divergence(grid, velocity),
                velocity_norm=float(np.linalg.norm(velocity)),
                wall_time=wall,
            )
        )

    metadata = {
        "nx": grid.nx,
        "ny": grid.ny,
        "contrast_x": field_.contrast_x,
        "contrast_y": field_.contrast_y,
        "viscosity_ratio": viscosity_ratio,
        "tol": config.tol,
        "maxit": config.maxit,
        "restart": config.restart,
        "preconditioner": config.preconditioner,
        "pin_pressure": pin_pressure,
        "kappa_convention": "pinned",
    }
    return RegimeTable(rows, metadata)


def write_regime_csv(table: RegimeTable, path, timings: bool = True) -> None:
    """Write the sweep table; with ``timings=False`` wall_ms is zeroed so
    repeated runs produce byte-identical files."""
    lines = ["da,anna,kappa,kappa_flag,iterations,relres,regime,wall_ms"]
    for row in table.rows:
        kappa = "" if row.kappa is None else f"{row.kappa:.5e}"
        wall_ms = row.wall_time * 1e3 if timings else 0.0
        lines.append(
            f"{row.da:.5e},{row.anna:.5e},{kappa},{row.kappa_flag},"
            f"{row.iterations},{row.final_relres:.5e},{row.regime.value},{wall_ms:.5e}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_spectrum_csv(eigenvalues, path) -> None:
    lines = ["re,im"]
    for lam in np.asarray(eigenvalues):
        lines.append(f"{lam.real:.5e},{lam.imag:.5e}")
    atomic_write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Manufactured solution: a divergence-free velocity from the stream function
# psi = sin^2(pi x) sin^2(pi y) / pi, with p = cos(pi x) cos(pi y).
# ---------------------------------------------------------------------------

def mms_velocity(x, y):
    u = np.sin(np.pi * x) ** 2 * np.sin(2.0 * np.pi * y)
    v = -np.sin(2.0 * np.pi * x) * np.sin(np.pi * y) ** 2
    return u, v


def mms_pressure(x, y):
    return np.cos(np.pi * x) * np.cos(np.pi * y)


def mms_velocity_laplacian(x, y):
    pi = np.pi
    lap_u = 2.0 * pi**2 * np.cos(2.0 * pi * x) * np.sin(2.0 * pi * y) \
        - 4.0 * pi**2 * np.sin(pi * x) ** 2 * np.sin(2.0 * pi * y)
    lap_v = 4.0 * pi**2 * np.sin(2.0 * pi * x) * np.sin(pi * y) ** 2 \
        - 2.0 * pi**2 * np.sin(2.0 * pi * x) * np.cos(2.0 * pi * y)
    return lap_u, lap_v


def mms_pressure_gradient(x, y):
    pi = np.pi
    return -pi * np.sin(pi * x) * np.cos(pi * y), -pi * np.cos(pi * x) * np.sin(pi * y)


def mms_forcing(grid: StaggeredGrid, anna: float, kstar_value: float) -> ForcingField:
    """Force density that makes the manufactured pair an exact solution."""

    def f_u(x, y):
        u, _ = mms_velocity(x, y)
        lap_u, _ = mms_velocity_laplacian(x, y)
        dpdx, _ = mms_pressure_gradient(x, y)
        return -anna * lap_u + u / kstar_value + dpdx

    def f_v(x, y):
        _, v = mms_velocity(x, y)
        _, lap_v = mms_velocity_laplacian(x, y)
        _, dpdy = mms_pressure_gradient(x, y)
        return -anna * lap_v + v / kstar_value + dpdy

    return ForcingField.from_functions(grid, f_u, f_v)


def _solution_errors(grid: StaggeredGrid, solution: np.ndarray) -> tuple[float, float]:
    xu, yu = grid.u_coords()
    xv, yv = grid.v_coords()
    u_ex, _ = mms_velocity(xu, yu)
    _, v_ex = mms_velocity(xv, yv)
    du = solution[: grid.n_u] - u_ex
    dv = solution[grid.n_u: grid.n_velocity] - v_ex
    area = grid.dx * grid.dy
    vel_err = math.sqrt(area * (float(du @ du) + float(dv @ dv)))

    xp, yp = grid.p_coords()
    dp = solution[grid.n_velocity:] - mms_pressure(xp, yp)
    dp = dp - dp.mean()  # pressure is defined up to a constant
    p_err = math.sqrt(area * float(dp @ dp))
    return vel_err, p_err


def manufactured_run(grid_sizes, anna: float, kstar_value: float = 1.0) -> ConvergenceStudy:
    """Refinement study against the manufactured solution (pinned direct solves)."""
    sizes = tuple(int(n) for n in grid_sizes)
    if len(sizes) < 3:
        raise ValueError(f"need at least 3 grid levels, got {len(sizes)}")

    vel_errors = []
    p_errors = []
    for n in sizes:
        grid = build_grid(n, n)
        kstar = NormalizedPermeability(
            np.full(grid.n_p, float(kstar_value)),
            np.full(grid.n_p, float(kstar_value)),
            kmax=1.0,
        )
        forcing = mms_forcing(grid, anna, kstar_value)
        bc = BoundaryData.uniform(grid, 0.0, 0.0)  # manufactured velocity vanishes on walls
        system = assemble_monolithic(grid, kstar, anna, bc, forcing=forcing, pin_pressure=True)
        solution = direct_solve(system.matrix, system.rhs)
        ve, pe = _solution_errors(grid, solution)
        vel_errors.append(ve)
        p_errors.append(pe)

    vel_errors = np.asarray(vel_errors)
    p_errors = np.asarray(p_errors)
    ratios = np.array([math.log(a / b) for a, b in zip(sizes, sizes[1:])])
    vel_orders = np.log(vel_errors[1:] / vel_errors[:-1]) / ratios
    p_orders = np.log(p_errors[1:] / p_errors[:-1]) / ratios
    return ConvergenceStudy(sizes, vel_errors, p_errors, vel_orders, p_orders)


def limit_checks(
    grid: StaggeredGrid,
    field_: PermeabilityField,
    bc: BoundaryData,
    darcy_anna: float = 1e-8,
    stokes_anna: float = 1e4,
    stokes_bc: BoundaryData | None = None,
) -> LimitCheckReport:
    """Consistency with the two limiting models.

    Darcy: the heterogeneous system at a vanishing anna against the
    anna = 0 assembly (pure drag; the viscous wall coupling drops out),
    compared on interior velocity DOFs.  Stokes: the uniform-K* system
    at a large anna against the same assembly with the drag block
    removed.  Both use pinned direct solves.  ``stokes_bc`` lets the
    Stokes comparison run under tangential (e.g. lid-driven) data, which
    exercises it more than a uniform through-flow does; it defaults to
    ``bc``.
    """
    interior = ~boundary_velocity_mask(grid)

    kstar = normalize(field_)
    full = assemble_monolithic(grid, kstar, darcy_anna, bc, pin_pressure=True)
    oracle = assemble_monolithic(grid, kstar, 0.0, bc, pin_pressure=True)
    x_full = direct_solve(full.matrix, full.rhs)[: grid.n_velocity][interior]
    x_oracle = direct_solve(oracle.matrix, oracle.rhs)[: grid.n_velocity][interior]
    darcy_rel = float(np.linalg.norm(x_full - x_oracle) / np.linalg.norm(x_oracle))

    ones = uniform_kstar(grid)
    sbc = bc if stokes_bc is None else stokes_bc
    full_s = assemble_monolithic(grid, ones, stokes_anna, sbc, pin_pressure=True)
    oracle_s = assemble_monolithic(
        grid, ones, stokes_anna, sbc, pin_pressure=True, include_drag=False
    )
    u_full = direct_solve(full_s.matrix, full_s.rhs)[: grid.n_velocity]
    u_oracle = direct_solve(oracle_s.matrix, oracle_s.rhs)[: grid.n_velocity]
    stokes_rel = float(np.linalg.norm(u_full - u_oracle) / np.linalg.norm(u_oracle))

    return LimitCheckReport(darcy_rel, stokes_rel)
