"""Scalar diagnostics: tomographic IPR family, subsystem linear entropy,
fidelity, and the two-mode synchronization indicator.

The inverse participation ratio of a tomogram slice, eta(theta) = integral of
w^2 dX, is large for localized and small for delocalized quadrature
distributions.  Combining subsystem and joint IPRs gives an entanglement
indicator per angle pair,

    eps(theta_A, theta_B) = 1 - [eta_A + eta_B - eta_AB],

and averaging over a quorum of angle pairs removes the angle dependence.
The subsystem IPRs are computed from the reduced density matrices directly;
marginalizing the joint tomogram instead gives the same numbers and is kept
as a test oracle.

The synchronization indicator is the reciprocal of the summed variances of
the difference quadratures q_- = (q_1 - q_2)/sqrt(2), p_- analogously; the
variances come from operator moments in Fock space, not from tomogram grids,
so no quadrature error enters a reciprocal quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import (
    DensityMatrix,
    StateVector,
    expectation,
    lift_operator,
    partial_trace,
    quadrature_operators,
)
from .tomography import (
    QuadratureGrid,
    Tomogram2D,
    oscillator_table,
    phase_table,
    tomogram_single,
    tomogram_two_mode_parts,
)

_SLICE_NORM_ATOL = 1e-4


@dataclass(frozen=True)
class AngleQuorum:
    """Angle pairs (theta_A, theta_B) used for the quorum average."""

    pairs: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.pairs:
            raise ValueError("quorum must contain at least one angle pair")
        pairs = tuple((float(a), float(b)) for a, b in self.pairs)
        for a, b in pairs:
            if not (0.0 <= a < math.pi and 0.0 <= b < math.pi):
                raise ValueError(f"angles must lie in [0, pi), got ({a}, {b})")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def default(cls, per_axis: int = 5) -> "AngleQuorum":
        """per_axis^2 equispaced pairs, {k pi/per_axis} on each axis."""
        th = [k * math.pi / per_axis for k in range(per_axis)]
        return cls(tuple((a, b) for a in th for b in th))

    def axis_angles(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """Distinct angles per axis, in first-appearance order."""
        seen_a: dict[float, None] = {}
        seen_b: dict[float, None] = {}
        for a, b in self.pairs:
            seen_a.setdefault(a)
            seen_b.setdefault(b)
        return tuple(seen_a), tuple(seen_b)


_SERIES_NAMES = ("sle", "xi_ipr", "s_c", "fidelity")


@dataclass(frozen=True)
class IndicatorSeries:
    """Time-indexed scalar indicator with its identifying name."""

    name: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.name not in _SERIES_NAMES:
            raise ValueError(f"name must be one of {_SERIES_NAMES}, got {self.name!r}")
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.shape != v.shape:
            raise ValueError("times and values must have equal length")
        if self.name in ("sle", "fidelity") and (v.min() < -1e-10 or v.max() > 1.0 + 1e-10):
            raise ValueError(f"{self.name} values outside [0, 1]")
        if self.name == "s_c" and v.min() <= 0.0:
            raise ValueError("s_c values must be positive")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def grid_for_dm(rho_dim: int, spacing: float = 0.05) -> QuadratureGrid:
    """Default grid for a mode truncated at ``rho_dim`` levels."""
    return QuadratureGrid.for_level(rho_dim - 1, spacing=spacing)


def ipr_single(w_slice: np.ndarray, grid: QuadratureGrid) -> float:
    """eta = integral of w^2 over the quadrature, trapezoid rule."""
    w = np.asarray(w_slice, dtype=float)
    norm = np.trapezoid(w, dx=grid.spacing)
    if abs(norm - 1.0) > _SLICE_NORM_ATOL:
        raise ValueError(f"tomogram slice not normalized: integral = {norm:.6f}")
    return float(np.trapezoid(w * w, dx=grid.spacing))


def ipr_two_mode(t2: Tomogram2D) -> float:
    """eta_AB = double integral of w^2."""
    w2 = t2.values * t2.values
    return float(np.trapezoid(np.trapezoid(w2, dx=t2.grid_b.spacing, axis=1),
                              dx=t2.grid_a.spacing))


def _subsystem_iprs(rho_red: DensityMatrix, thetas, grid: QuadratureGrid) -> dict[float, float]:
    tom = tomogram_single(rho_red, list(thetas), grid)
    return {th: ipr_single(tom.values[i], grid)
            for i, th in enumerate(tom.theta_values)}


def _pure_parts(rho_ab: DensityMatrix) -> list[np.ndarray]:
    """Matrices P_k with rho = sum_k P_k P_k†, from the eigendecomposition."""
    da, db = rho_ab.dims
    evals, evecs = np.linalg.eigh(rho_ab.elements)
    return [math.sqrt(lam) * vec.reshape(da, db)
            for lam, vec in zip(evals, evecs.T) if lam > 1e-14]


def eps_ipr(rho_ab: DensityMatrix, theta_a: float, theta_b: float,
            grid_a: QuadratureGrid | None = None,
            grid_b: QuadratureGrid | None = None) -> float:
    """Entanglement indicator at one angle pair: 1 - [eta_A + eta_B - eta_AB]."""
    if len(rho_ab.dims) != 2:
        raise ValueError(f"expected a two-mode density matrix, got dims {rho_ab.dims}")
    da, db = rho_ab.dims
    grid_a = grid_a or grid_for_dm(da)
    grid_b = grid_b or grid_for_dm(db)
    eta_a = _subsystem_iprs(partial_trace(rho_ab, (0,)), [theta_a], grid_a)[theta_a]
    eta_b = _subsystem_iprs(partial_trace(rho_ab, (1,)), [theta_b], grid_b)[theta_b]
    t2 = tomogram_two_mode_parts(_pure_parts(rho_ab), theta_a, theta_b, grid_a, grid_b)
    return 1.0 - (eta_a + eta_b - ipr_two_mode(t2))


def xi_ipr(rho_ab: DensityMatrix, quorum: AngleQuorum | None = None,
           grid_a: QuadratureGrid | None = None,
           grid_b: QuadratureGrid | None = None) -> float:
    """Quorum-averaged entanglement indicator (unweighted mean of eps_ipr)."""
    if len(rho_ab.dims) != 2:
        raise ValueError(f"expected a two-mode density matrix, got dims {rho_ab.dims}")
    quorum = quorum or AngleQuorum.default()
    da, db = rho_ab.dims
    grid_a = grid_a or grid_for_dm(da)
    grid_b = grid_b or grid_for_dm(db)
    return xi_ipr_parts(_pure_parts(rho_ab), quorum, grid_a, grid_b,
                        rho_a=partial_trace(rho_ab, (0,)),
                        rho_b=partial_trace(rho_ab, (1,)))


def xi_ipr_parts(parts, quorum: AngleQuorum, grid_a: QuadratureGrid,
                 grid_b: QuadratureGrid, rho_a: DensityMatrix | None = None,
                 rho_b: DensityMatrix | None = None) -> float:
    """xi_ipr for rho = sum_k P_k P_k† given the component matrices.

    Avoids ever forming the joint density matrix, which matters once the
    two-mode dimension grows into the thousands.  Eigenfunction tables are
    built once per grid and reused across every pair in the quorum.
    """
    parts = [np.asarray(p, dtype=complex) for p in parts]
    da, db = parts[0].shape
    if rho_a is None:
        rho_a = DensityMatrix(sum(p @ p.conj().T for p in parts), (da,))
    if rho_b is None:
        rho_b = DensityMatrix(sum(p.conj().T @ p for p in parts).T.conj(), (db,))
    th_a, th_b = quorum.axis_angles()
    eta_a = _subsystem_iprs(rho_a, th_a, grid_a)
    eta_b = _subsystem_iprs(rho_b, th_b, grid_b)
    total = 0.0
    for a, b in quorum.pairs:
        t2 = tomogram_two_mode_parts(parts, a, b, grid_a, grid_b)
        total += 1.0 - (eta_a[a] + eta_b[b] - ipr_two_mode(t2))
    return total / len(quorum.pairs)


def sle(rho_full: DensityMatrix, keep) -> float:
    """Subsystem linear entropy 1 - Tr(rho_reduced^2), in [0, 1 - 1/d]."""
    red = partial_trace(rho_full, keep)
    return 1.0 - red.purity()


def fidelity(psi0: StateVector, psit: StateVector) -> float:
    """|<psi0|psit>|^2, clamped only by construction (both states unit norm)."""
    return abs(psi0.overlap(psit)) ** 2


def sync_indicator(rho_fields: DensityMatrix) -> float:
    """Reciprocal of Var(q_-) + Var(p_-) for a two-mode state.

    q_- = (q_1 - q_2)/sqrt(2) and p_- likewise; for any product of identical
    coherent states both variances are 1/2 and the indicator is exactly 1.
    """
    if len(rho_fields.dims) != 2:
        raise ValueError(f"expected a two-mode density matrix, got dims {rho_fields.dims}")
    var = _difference_variances(rho_fields, rho_fields.dims)
    if var <= 0.0:
        raise ValueError(f"nonpositive variance sum {var:.3e}: broken density matrix")
    return 1.0 / var


def sync_indicator_pure(state: StateVector, field_modes: tuple[int, int] = (0, 1)) -> float:
    """Synchronization indicator straight from a pure multipartite state.

    Equals sync_indicator of the reduced two-field density matrix; moments of
    field operators ignore the remaining subsystems automatically.
    """
    var = _difference_variances(state, state.dims, field_modes)
    if var <= 0.0:
        raise ValueError(f"nonpositive variance sum {var:.3e}: broken state")
    return 1.0 / var


def _difference_variances(state, dims, modes: tuple[int, int] = (0, 1)) -> float:
    q1, p1 = quadrature_operators(dims[modes[0]])
    q2, p2 = quadrature_operators(dims[modes[1]])
    qm = (lift_operator(q1, modes[0], dims) - lift_operator(q2, modes[1], dims)) / math.sqrt(2.0)
    pm = (lift_operator(p1, modes[0], dims) - lift_operator(p2, modes[1], dims)) / math.sqrt(2.0)
    total = 0.0
    for op in (qm, pm):
        mean = expectation(op, state).real
        second = expectation(op @ op, state).real
        total += second - mean * mean
    return total


def local_minima(values) -> list[int]:
    """Indices strictly below both neighbors; a flat run counts once, at its
    first index, provided the values on both sides of the run are larger."""
    v = np.asarray(values, dtype=float)
    out: list[int] = []
    i = 1
    while i < v.size - 1:
        j = i
        while j < v.size - 1 and v[j + 1] == v[i]:
            j += 1
        if j < v.size - 1 and v[i] < v[i - 1] and v[i] < v[j + 1]:
            out.append(i)
        i = j + 1
    return out
