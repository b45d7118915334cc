"""Optical tomograms and Wigner functions from truncated-basis states.

A homodyne tomogram is the probability density w(X, theta) of measuring the
rotated quadrature X_theta = (a† e^{i theta} + a e^{-i theta})/sqrt(2);
theta = 0 is the x quadrature and theta = pi/2 the p quadrature.  In the
number basis the quadrature eigenstates are <X, theta|n> = e^{-i n theta}
psi_n(X) with psi_n the harmonic-oscillator eigenfunctions, so

    w(X, theta) = sum_{m,n} rho_mn e^{-i(m-n) theta} psi_m(X) psi_n(X).

The sign of the phase is pinned by the coherent-state ridge, which must sit
at X(theta) = sqrt(2) Re(alpha e^{-i theta}).

All integrals use the composite trapezoid rule on a uniform symmetric grid.
With spacing h the rule is exact (to machine precision) as long as the
integrand's spectral content stays below the pi/h Nyquist limit, which the
default 0.05 spacing guarantees for every level used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import DensityMatrix, StateVector

# The normalized three-term recursion stays accurate to ~1e-10 well past
# n = 2000; refuse anything beyond that rather than return garbage.
OSCILLATOR_LEVEL_BUDGET = 2000

DEFAULT_SPACING = 0.05
GRID_MARGIN = 6.0

_NEG_ATOL = 1e-12
_NORM_ATOL_1D = 1e-6
_NORM_ATOL_2D = 1e-5
_NORM_ATOL_WIGNER = 1e-4


def oscillator_eigenfunction(n: int, x_values: np.ndarray) -> np.ndarray:
    """psi_n(x) = H_n(x) e^{-x^2/2} / (pi^{1/4} 2^{n/2} sqrt(n!)).

    Evaluated by the normalized recursion
        psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1},
    never through raw Hermite values, so it stays finite for every level
    inside the budget.
    """
    if n < 0:
        raise ValueError(f"level must be nonnegative, got {n}")
    if n >= OSCILLATOR_LEVEL_BUDGET:
        raise ValueError(f"level {n} beyond stability budget {OSCILLATOR_LEVEL_BUDGET}")
    return oscillator_table(n + 1, x_values)[n]


def oscillator_table(n_levels: int, x_values: np.ndarray) -> np.ndarray:
    """Rows 0..n_levels-1 of psi_n evaluated on ``x_values``, shape (n_levels, nx)."""
    if n_levels < 1:
        raise ValueError("need at least one level")
    if n_levels > OSCILLATOR_LEVEL_BUDGET:
        raise ValueError(f"{n_levels} levels beyond stability budget {OSCILLATOR_LEVEL_BUDGET}")
    x = np.asarray(x_values, dtype=float)
    out = np.empty((n_levels, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_levels > 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for m in range(1, n_levels - 1):
        out[m + 1] = math.sqrt(2.0 / (m + 1)) * x * out[m] - math.sqrt(m / (m + 1.0)) * out[m - 1]
    return out


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform symmetric quadrature grid, x in [-x_max, x_max], odd point count."""

    x_max: float
    n_points: int

    def __post_init__(self) -> None:
        if self.x_max <= 0:
            raise ValueError("x_max must be positive")
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ValueError("n_points must be odd and >= 3 (grid contains X = 0)")

    @property
    def x_min(self) -> float:
        return -self.x_max

    @property
    def spacing(self) -> float:
        return 2.0 * self.x_max / (self.n_points - 1)

    def points(self) -> np.ndarray:
        return np.linspace(-self.x_max, self.x_max, self.n_points)

    @classmethod
    def for_amplitude(cls, alpha_max: float, spacing: float = DEFAULT_SPACING,
                      margin: float = GRID_MARGIN) -> "QuadratureGrid":
        """Grid sized as x_max = sqrt(2)|alpha| + margin with spacing <= ``spacing``."""
        x_max = math.sqrt(2.0) * abs(alpha_max) + margin
        n_half = math.ceil(x_max / spacing)
        return cls(x_max=n_half * spacing, n_points=2 * n_half + 1)

    @classmethod
    def for_level(cls, n_top: int, spacing: float = DEFAULT_SPACING) -> "QuadratureGrid":
        """Grid covering a basis truncated above level ``n_top`` (amplitude sqrt(n_top))."""
        return cls.for_amplitude(math.sqrt(max(n_top, 0)), spacing=spacing)


def _integrate(values: np.ndarray, spacing: float, axis: int = -1) -> np.ndarray:
    return np.trapezoid(values, dx=spacing, axis=axis)


@dataclass(frozen=True)
class Tomogram:
    """w(X, theta) on a theta x X grid; theta is the slow (row) axis."""

    theta_values: np.ndarray
    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        th = np.array(self.theta_values, dtype=float)
        v = np.array(self.values, dtype=float)
        if v.shape != (th.size, self.grid.n_points):
            raise ValueError(f"values shape {v.shape} != (n_theta, n_x) = ({th.size}, {self.grid.n_points})")
        if v.min() < -_NEG_ATOL:
            raise ValueError(f"negative tomogram value {v.min():.3e}")
        norms = _integrate(v, self.grid.spacing, axis=1)
        worst = np.abs(norms - 1.0).max()
        if worst > _NORM_ATOL_1D:
            raise ValueError(f"per-theta integral off by {worst:.3e} (> {_NORM_ATOL_1D:g})")
        th.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "theta_values", th)
        object.__setattr__(self, "values", v)

    def slice_at(self, i: int) -> np.ndarray:
        """Row i: w(X, theta_i) over the quadrature grid."""
        return self.values[i]


@dataclass(frozen=True)
class Tomogram2D:
    """Joint quadrature density at one angle pair; values indexed [X_A, X_B]."""

    theta_a: float
    theta_b: float
    grid_a: QuadratureGrid
    grid_b: QuadratureGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid_a.n_points, self.grid_b.n_points):
            raise ValueError(f"values shape {v.shape} does not match grids")
        if v.min() < -_NEG_ATOL:
            raise ValueError(f"negative tomogram value {v.min():.3e}")
        total = _integrate(_integrate(v, self.grid_b.spacing, axis=1), self.grid_a.spacing, axis=0)
        if abs(total - 1.0) > _NORM_ATOL_2D:
            raise ValueError(f"double integral off by {abs(total - 1.0):.3e}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class WignerGrid:
    """W(beta1, beta2) with beta = (x, p)/sqrt(2); normalized to unit integral."""

    beta1_axis: np.ndarray
    beta2_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        b1 = np.array(self.beta1_axis, dtype=float)
        b2 = np.array(self.beta2_axis, dtype=float)
        v = np.array(self.values, dtype=float)
        if v.shape != (b1.size, b2.size):
            raise ValueError(f"values shape {v.shape} != ({b1.size}, {b2.size})")
        total = np.trapezoid(np.trapezoid(v, b2, axis=1), b1, axis=0)
        if abs(total - 1.0) > _NORM_ATOL_WIGNER:
            raise ValueError(f"Wigner integral off by {abs(total - 1.0):.3e}")
        for a in (b1, b2, v):
            a.setflags(write=False)
        object.__setattr__(self, "beta1_axis", b1)
        object.__setattr__(self, "beta2_axis", b2)
        object.__setattr__(self, "values", v)


def phase_table(n_levels: int, theta: float, table: np.ndarray) -> np.ndarray:
    """U[m, x] = e^{-i m theta} psi_m(x) for a precomputed eigenfunction table."""
    phases = np.exp(-1j * np.arange(n_levels) * theta)
    return phases[:, None] * table


def _require_modes(rho: DensityMatrix, n_modes: int, what: str) -> None:
    if len(rho.dims) != n_modes:
        raise ValueError(f"{what} expects a {n_modes}-mode density matrix, got dims {rho.dims}")


def tomogram_single(rho: DensityMatrix, thetas, grid: QuadratureGrid,
                    method: str = "direct") -> Tomogram:
    """Tomogram of a single-mode density matrix at the given angles.

    ``method='direct'`` contracts the double sum over rho_mn; ``'eigen'``
    expands rho in its eigenbasis and sums squared pure-state amplitudes.
    Both agree to machine precision.
    """
    _require_modes(rho, 1, "tomogram_single")
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    x = grid.points()
    d = rho.dim
    tab = oscillator_table(d, x)
    rows = np.empty((thetas.size, x.size))
    if method == "direct":
        for i, th in enumerate(thetas):
            u = phase_table(d, th, tab)
            rows[i] = np.einsum("mx,mn,nx->x", u, rho.elements, u.conj(), optimize=True).real
    elif method == "eigen":
        evals, evecs = np.linalg.eigh(rho.elements)
        sel = evals > 1e-14
        evals, evecs = evals[sel], evecs[:, sel]
        for i, th in enumerate(thetas):
            u = phase_table(d, th, tab)
            amps = evecs.T @ u  # (rank, nx)
            rows[i] = (evals[:, None] * np.abs(amps) ** 2).sum(axis=0)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Tomogram(thetas, grid, rows)


def tomogram_single_pure(psi: StateVector, thetas, grid: QuadratureGrid) -> Tomogram:
    """Single coherent-sum tomogram w = |sum_m c_m e^{-i m theta} psi_m(X)|^2.

    Cheaper than the density-matrix double sum for pure states, and equal to
    it within roundoff.
    """
    if len(psi.dims) != 1:
        raise ValueError(f"tomogram_single_pure expects a single-mode state, got dims {psi.dims}")
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    x = grid.points()
    tab = oscillator_table(psi.dim, x)
    rows = np.empty((thetas.size, x.size))
    for i, th in enumerate(thetas):
        amp = (phase_table(psi.dim, th, tab) * psi.amplitudes[:, None]).sum(axis=0)
        rows[i] = np.abs(amp) ** 2
    return Tomogram(thetas, grid, rows)


def tomogram_two_mode_parts(parts, theta_a: float, theta_b: float,
                            grid_a: QuadratureGrid, grid_b: QuadratureGrid) -> Tomogram2D:
    """Two-mode tomogram of rho = sum_k P_k P_k† given the (d_a, d_b) matrices P_k.

    This is the workhorse for reduced states of pure multipartite states,
    where the slices over the traced-out subsystem provide the P_k directly
    and the rank never exceeds that subsystem's dimension.
    """
    parts = [np.asarray(p, dtype=complex) for p in parts]
    da, db = parts[0].shape
    xa, xb = grid_a.points(), grid_b.points()
    ua = phase_table(da, theta_a, oscillator_table(da, xa))
    ub = phase_table(db, theta_b, oscillator_table(db, xb))
    w = np.zeros((xa.size, xb.size))
    for p in parts:
        amp = (ua.T @ p) @ ub  # (n_xa, n_xb)
        w += np.abs(amp) ** 2
    return Tomogram2D(theta_a, theta_b, grid_a, grid_b, w)


def tomogram_two_mode(rho: DensityMatrix, theta_a: float, theta_b: float,
                      grid_a: QuadratureGrid, grid_b: QuadratureGrid,
                      method: str = "auto") -> Tomogram2D:
    """Joint tomogram of a two-mode density matrix at one angle pair.

    ``'direct'`` evaluates the quadruple sum by staged contraction;
    ``'eigen'`` decomposes rho into pure components first, which is much
    faster whenever the rank is small (reduced states of pure tripartite
    states have rank <= the traced subsystem dimension).
    """
    _require_modes(rho, 2, "tomogram_two_mode")
    da, db = rho.dims
    if method == "auto":
        method = "eigen" if da * db > 64 else "direct"
    xa, xb = grid_a.points(), grid_b.points()
    if method == "direct":
        ua = phase_table(da, theta_a, oscillator_table(da, xa))
        ub = phase_table(db, theta_b, oscillator_table(db, xb))
        r4 = rho.elements.reshape(da, db, da, db)
        t1 = np.einsum("mx,mjnl,nx->jlx", ua, r4, ua.conj(), optimize=True)
        w = np.einsum("jy,jlx,ly->xy", ub, t1, ub.conj(), optimize=True).real
        return Tomogram2D(theta_a, theta_b, grid_a, grid_b, w)
    if method == "eigen":
        evals, evecs = np.linalg.eigh(rho.elements)
        sel = evals > 1e-14
        parts = [math.sqrt(lam) * vec.reshape(da, db)
                 for lam, vec in zip(evals[sel], evecs[:, sel].T)]
        return tomogram_two_mode_parts(parts, theta_a, theta_b, grid_a, grid_b)
    raise ValueError(f"unknown method {method!r}")


def reduce_tomogram(t2: Tomogram2D, keep: str = "A") -> np.ndarray:
    """Integrate out the other mode's quadrature; returns the kept marginal.

    The result does not depend on the discarded mode's angle (to quadrature
    accuracy), mirroring the partial-trace path.
    """
    if keep == "A":
        return _integrate(t2.values, t2.grid_b.spacing, axis=1)
    if keep == "B":
        return _integrate(t2.values, t2.grid_a.spacing, axis=0)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def _wigner_xp(rho: np.ndarray, x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """W(x, p) normalized to unit integral over dx dp (vacuum peak 1/pi).

    Fock-basis kernel grouped by diagonal offset b = m - n:

        W = (e^{-r^2}/pi) Re sum_b (sqrt(2) A)^b / sqrt(b!)
                              sum_n c_bn LL_n^b(2 r^2)

    with A = x + i p, c_bn the b-th upper diagonal of rho (doubled for
    b > 0), and LL_n^b = (-1)^n sqrt(b! n!/(b+n)!) L_n^b the square-root
    normalized associated Laguerre values.  The growth of A^b is folded
    into a Horner-style accumulation over b so nothing overflows before
    the final e^{-r^2} damping.
    """
    d = rho.shape[0]
    X, P = np.meshgrid(x, p, indexing="ij")
    a2 = math.sqrt(2.0) * (X + 1j * P)
    z = np.abs(a2) ** 2  # 2 r^2
    acc = np.zeros_like(a2)
    for b in range(d - 1, -1, -1):
        coeffs = np.diag(rho, b).copy()
        if b > 0:
            coeffs *= 2.0
        acc = _laguerre_series(b, z, coeffs) + acc * a2 / math.sqrt(b + 1.0)
    return acc.real * np.exp(-0.5 * z) / math.pi


def _laguerre_series(b: int, z: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """sum_n coeffs[n] * (-1)^n sqrt(b! n!/(b+n)!) L_n^b(z), by forward recursion."""
    total = np.full_like(z, complex(coeffs[0]), dtype=complex)
    if coeffs.size == 1:
        return total
    prev = np.ones_like(z)                     # LL_0^b = 1
    cur = (z - b - 1.0) / math.sqrt(b + 1.0)   # LL_1^b
    total += coeffs[1] * cur
    for n in range(1, coeffs.size - 1):
        nxt = ((z - 2.0 * n - b - 1.0) * cur - math.sqrt(n * (n + b)) * prev) \
            / math.sqrt((n + 1.0) * (n + b + 1.0))
        prev, cur = cur, nxt
        total += coeffs[n + 1] * cur
    return total


def wigner(rho: DensityMatrix, beta1_axis, beta2_axis) -> WignerGrid:
    """Wigner function on the beta plane, beta1 = x/sqrt(2), beta2 = p/sqrt(2).

    Normalized so the integral over d(beta1) d(beta2) is 1; the vacuum then
    peaks at 2/pi and the |1> Fock state reaches -2/pi at the origin.
    """
    _require_modes(rho, 1, "wigner")
    b1 = np.asarray(beta1_axis, dtype=float)
    b2 = np.asarray(beta2_axis, dtype=float)
    w = 2.0 * _wigner_xp(rho.elements, math.sqrt(2.0) * b1, math.sqrt(2.0) * b2)
    return WignerGrid(b1, b2, w)
