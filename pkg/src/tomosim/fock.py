"""Truncated Fock-space backbone: pure states, density matrices, ladder
operators, tensor products, partial traces, and expectation values.

Conventions fixed here and used everywhere else in the package:

* multi-mode amplitude arrays are flat and C-ordered over ``dims``,
* subsystem order is field modes first, atomic subsystem last,
* hbar = 1; quadratures are q = (a + a†)/sqrt(2), p = (a - a†)/(i sqrt(2)).

All containers are immutable after construction (their arrays are marked
read-only), so values can be shared freely between workers.  Reductions use
numpy's fixed contraction order, which keeps results run-to-run identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Maximum coherent-state probability mass allowed above the truncation.
TAIL_EPSILON = 1e-10

_NORM_ATOL = 1e-9
_HERM_ATOL = 1e-12
_TRACE_ATOL = 1e-10
_EIG_ATOL = 1e-10


class TruncationError(ValueError):
    """A state does not fit (to tolerance) in the requested truncated basis."""


def required_truncation(alpha: complex, eps: float = TAIL_EPSILON) -> int:
    """Smallest ``n_max`` whose Poisson tail mass falls below ``eps``.

    The photon-number distribution of a coherent state with amplitude
    ``alpha`` is Poissonian with mean |alpha|^2; the truncation rule keeps
    sum_{k >= n_max} e^{-|alpha|^2} |alpha|^{2k} / k!  below ``eps``,
    evaluated by direct tail summation.
    """
    lam = abs(alpha) ** 2
    if lam == 0.0:
        return 1
    # generous upper bound: mean + 40 sigma + 40 covers eps down to ~1e-200
    hi = int(lam + 40.0 * math.sqrt(lam) + 40)
    ks = np.arange(hi + 1)
    logpmf = ks * math.log(lam) - lam - np.array([math.lgamma(k + 1.0) for k in ks])
    pmf = np.exp(logpmf)
    tail = pmf[::-1].cumsum()[::-1]  # tail[n] = sum_{k >= n} pmf[k]
    idx = np.nonzero(tail < eps)[0]
    if idx.size == 0:
        raise TruncationError(f"tail rule not satisfiable below n_max={hi} for alpha={alpha!r}")
    return int(idx[0])


def _poisson_tail(lam: float, n: int) -> float:
    """Tail mass sum_{k >= n} of Poisson(lam), by direct summation."""
    if lam == 0.0:
        return 0.0 if n > 0 else 1.0
    hi = max(n, int(lam + 40.0 * math.sqrt(lam) + 40))
    ks = np.arange(n, hi + 1)
    logpmf = ks * math.log(lam) - lam - np.array([math.lgamma(k + 1.0) for k in ks])
    return float(np.exp(logpmf).sum())


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex, order="C", copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state over a truncated multi-mode Fock basis.

    ``amplitudes`` is flat with length prod(dims); entry index
    ``i = sum_k n_k * stride_k`` follows C order over ``dims``.
    """

    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"dims must be nonempty with every entry >= 1, got {dims}")
        amp = _freeze(np.asarray(self.amplitudes).reshape(-1))
        if amp.size != math.prod(dims):
            raise ValueError(f"amplitude length {amp.size} != prod(dims) = {math.prod(dims)}")
        nrm = np.linalg.norm(amp)
        if abs(nrm - 1.0) > _NORM_ATOL:
            raise ValueError(f"state not normalized: |norm - 1| = {abs(nrm - 1.0):.3e}")
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def reshaped(self) -> np.ndarray:
        """Amplitudes as a read-only array of shape ``dims``."""
        return self.amplitudes.reshape(self.dims)

    def overlap(self, other: "StateVector") -> complex:
        if self.dims != other.dims:
            raise ValueError(f"dims mismatch: {self.dims} vs {other.dims}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix over a truncated basis."""

    elements: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        el = _freeze(np.asarray(self.elements))
        d = math.prod(dims)
        if el.shape != (d, d):
            raise ValueError(f"elements shape {el.shape} != ({d}, {d}) from dims {dims}")
        herm_err = np.abs(el - el.conj().T).max()
        if herm_err > _HERM_ATOL:
            raise ValueError(f"not Hermitian: max |rho - rho^†| = {herm_err:.3e}")
        tr = el.trace()
        if abs(tr - 1.0) > _TRACE_ATOL:
            raise ValueError(f"trace != 1: |tr - 1| = {abs(tr - 1.0):.3e}")
        lo = float(np.linalg.eigvalsh(el).min())
        if lo < -_EIG_ATOL:
            raise ValueError(f"negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "elements", el)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def purity(self) -> float:
        return float(np.real(np.vdot(self.elements, self.elements.T)))


@dataclass(frozen=True)
class FockOperator:
    """Operator on a single truncated mode."""

    matrix: np.ndarray
    dim: int

    def __post_init__(self) -> None:
        m = _freeze(np.asarray(self.matrix))
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"matrix shape {m.shape} != ({self.dim}, {self.dim})")
        object.__setattr__(self, "matrix", m)

    def dag(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T, self.dim)


def annihilator(dim: int) -> FockOperator:
    """Annihilation operator: <n-1| a |n> = sqrt(n)."""
    m = np.zeros((dim, dim), dtype=complex)
    n = np.arange(1, dim)
    m[n - 1, n] = np.sqrt(n)
    return FockOperator(m, dim)


def creator(dim: int) -> FockOperator:
    return annihilator(dim).dag()


def number_operator(dim: int) -> FockOperator:
    return FockOperator(np.diag(np.arange(dim, dtype=complex)), dim)


def quadrature_operators(dim: int) -> tuple[FockOperator, FockOperator]:
    """(q, p) with q = (a + a†)/sqrt(2), p = (a - a†)/(i sqrt(2))."""
    a = annihilator(dim).matrix
    q = (a + a.conj().T) / math.sqrt(2.0)
    p = (a - a.conj().T) / (1j * math.sqrt(2.0))
    return FockOperator(q, dim), FockOperator(p, dim)


def fock_state(n: int, n_max: int) -> StateVector:
    """Number state |n> in a basis truncated at n_max levels (0 .. n_max-1)."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if n >= n_max:
        raise TruncationError(f"fock level n={n} does not fit in truncation n_max={n_max}")
    amp = np.zeros(n_max, dtype=complex)
    amp[n] = 1.0
    return StateVector(amp, (n_max,))


def coherent_state(alpha: complex, n_max: int | None = None) -> StateVector:
    """Coherent state with amplitudes proportional to alpha^k / sqrt(k!).

    ``n_max=None`` picks the smallest truncation obeying the tail rule;
    an explicit ``n_max`` that leaves more than TAIL_EPSILON of probability
    above the truncation raises TruncationError.  The retained amplitudes
    are renormalized to unit norm.
    """
    needed = required_truncation(alpha)
    if n_max is None:
        n_max = needed
    elif _poisson_tail(abs(alpha) ** 2, n_max) >= TAIL_EPSILON:
        raise TruncationError(
            f"truncation n_max={n_max} leaves tail mass >= {TAIL_EPSILON:g} for "
            f"|alpha|^2 = {abs(alpha) ** 2:g}; need n_max >= {needed}"
        )
    if alpha == 0:
        return fock_state(0, n_max)
    k = np.arange(n_max)
    lgf = np.array([math.lgamma(kk + 1.0) for kk in k])
    logmag = -abs(alpha) ** 2 / 2.0 + k * math.log(abs(alpha)) - 0.5 * lgf
    amp = np.exp(logmag) * np.exp(1j * np.angle(alpha) * k)
    amp /= np.linalg.norm(amp)
    return StateVector(amp, (n_max,))


def tensor(parts: list[StateVector] | tuple[StateVector, ...]) -> StateVector:
    """Kronecker product of normalized parts, dims concatenated in order."""
    if len(parts) == 0:
        raise ValueError("tensor of an empty list")
    amp = parts[0].amplitudes
    dims: tuple[int, ...] = parts[0].dims
    for p in parts[1:]:
        amp = np.kron(amp, p.amplitudes)
        dims = dims + p.dims
    return StateVector(amp, dims)


def _check_keep(keep, n_subsystems: int) -> tuple[int, ...]:
    ks = tuple(sorted(set(int(k) for k in keep)))
    if not ks:
        raise ValueError("keep must be a nonempty subset of subsystem indices")
    if any(k < 0 or k >= n_subsystems for k in ks):
        raise ValueError(f"keep {ks} out of range for {n_subsystems} subsystems")
    if len(ks) == n_subsystems:
        raise ValueError("keep must be a proper subset (nothing would be traced out)")
    return ks


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every subsystem not in ``keep``.

    Kept subsystems retain their original relative order.
    """
    ks = _check_keep(keep, len(rho.dims))
    n = len(rho.dims)
    resh = rho.elements.reshape(rho.dims + rho.dims)
    # einsum labels: traced subsystems share a row/col label and are summed
    row = list(range(n))
    col = [n + i for i in range(n)]
    for i in range(n):
        if i not in ks:
            col[i] = row[i]
    out_labels = [row[i] for i in ks] + [col[i] for i in ks]
    red = np.einsum(resh, row + col, out_labels)
    kept_dims = tuple(rho.dims[i] for i in ks)
    d = math.prod(kept_dims)
    return DensityMatrix(red.reshape(d, d), kept_dims)


def reduced_density(state: StateVector, keep) -> DensityMatrix:
    """Partial trace of |psi><psi| without forming the full outer product."""
    ks = _check_keep(keep, len(state.dims))
    n = len(state.dims)
    psi = state.reshaped()
    perm = list(ks) + [i for i in range(n) if i not in ks]
    d_keep = math.prod(state.dims[i] for i in ks)
    m = psi.transpose(perm).reshape(d_keep, -1)
    kept_dims = tuple(state.dims[i] for i in ks)
    return DensityMatrix(m @ m.conj().T, kept_dims)


def lift_operator(op: FockOperator | np.ndarray, mode: int, dims) -> np.ndarray:
    """Embed a single-mode operator at position ``mode`` of a multi-mode space."""
    dims = tuple(int(d) for d in dims)
    m = op.matrix if isinstance(op, FockOperator) else np.asarray(op, dtype=complex)
    if m.shape != (dims[mode], dims[mode]):
        raise ValueError(f"operator shape {m.shape} does not match dims[{mode}] = {dims[mode]}")
    out = np.eye(1, dtype=complex)
    for i, d in enumerate(dims):
        out = np.kron(out, m if i == mode else np.eye(d, dtype=complex))
    return out


def expectation(op: FockOperator | np.ndarray, state: DensityMatrix | StateVector) -> complex:
    """Tr(rho O), or <psi|O|psi> for a pure state.

    The result is real to ~1e-10 whenever O is Hermitian; no rounding is
    applied here so callers can assert that themselves.
    """
    m = op.matrix if isinstance(op, FockOperator) else np.asarray(op, dtype=complex)
    if isinstance(state, StateVector):
        if m.shape != (state.dim, state.dim):
            raise ValueError(f"operator shape {m.shape} != state dim {state.dim}")
        return complex(np.vdot(state.amplitudes, m @ state.amplitudes))
    if m.shape != (state.dim, state.dim):
        raise ValueError(f"operator shape {m.shape} != density-matrix dim {state.dim}")
    # Tr(rho O) with a fixed elementwise contraction order
    return complex(np.sum(state.elements.T * m))
