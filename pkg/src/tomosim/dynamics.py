"""Exact time evolution for the three model Hamiltonians.

All three models are time independent and block diagonal in a conserved
quantity, so evolution is done by per-block eigendecomposition, never by ODE
stepping.  Times handed to the engines are the scaled times used throughout
(lambda*t for the single-mode nonlinear medium, g*t for the field-oscillator
pair, kappa*t for the three-level-atom model).

Models:

* single field mode in a nonlinear (intensity-dependent) medium,
  H = lambda a†^2 a^2, diagonal in the number basis with phases
  e^{-i lambda k(k-1) t}; full revivals at multiples of pi/lambda.

* field mode coupled to a multilevel atom modelled as an oscillator,
  H = omega a†a + omega0 b†b + gamma b†^2 b^2 + g(a†b + a b†); the total
  quantum number N is conserved, each (N+1)-dimensional block is real
  symmetric tridiagonal.

* three-level atom (levels e1, e2, e3; e1<->e2 forbidden) coupled to two
  field modes with equal Kerr-type nonlinearity chi and coupling kappa.
  With the atom starting in e1 and both fields coherent, the dynamics
  closes on 3x3 blocks spanned by {|e1; m; n>, |e3; m-1; n>, |e2; m-1; n+1>}
  plus 1x1 blocks |e1; 0; n>.  Evolution is computed in the rotating frame
  where only the detunings, chi, and kappa enter; the bare atomic and field
  frequencies are bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import (
    StateVector,
    DensityMatrix,
    TruncationError,
    coherent_state,
    reduced_density,
    required_truncation,
)


@dataclass(frozen=True)
class KerrParams:
    """Nonlinear-medium strength and initial coherent amplitude."""

    lambda_chi3: float
    alpha: complex
    n_max: int | None = None  # None: tail rule decides

    def __post_init__(self) -> None:
        if self.lambda_chi3 <= 0:
            raise ValueError("lambda_chi3 must be positive")

    @property
    def revival_time(self) -> float:
        return math.pi / self.lambda_chi3

    def truncation(self) -> int:
        return self.n_max if self.n_max is not None else required_truncation(self.alpha)


def kerr_evolve(params: KerrParams, t: float) -> StateVector:
    """State at time t: coherent amplitudes with phases e^{-i lambda k(k-1) t}."""
    psi0 = coherent_state(params.alpha, params.truncation())
    k = np.arange(psi0.dim)
    phases = np.exp(-1j * params.lambda_chi3 * k * (k - 1.0) * t)
    return StateVector(psi0.amplitudes * phases, psi0.dims)


def revival_times(params: KerrParams, subpackets: int, count: int = 8) -> np.ndarray:
    """First ``count`` instants j*pi/(lambda*p) of p-subpacket fractional revivals."""
    if subpackets < 1:
        raise ValueError("subpackets must be >= 1")
    if count < 1:
        raise ValueError("count must be >= 1")
    j = np.arange(1, count + 1)
    return j * math.pi / (params.lambda_chi3 * subpackets)


@dataclass(frozen=True)
class APParams:
    """Field-oscillator model constants and truncations."""

    omega_field: float
    omega_atom: float
    gamma_nl: float
    g_coupling: float
    n_max: int
    atom_levels: int

    def __post_init__(self) -> None:
        if self.g_coupling <= 0:
            raise ValueError("g_coupling must be positive")
        if self.n_max < 1 or self.atom_levels < 1:
            raise ValueError("truncations must be >= 1")


def ap_block_hamiltonian(params: APParams, N: int) -> np.ndarray:
    """(N+1)x(N+1) block over the basis {|N-m; m>, m = 0..N}.

    Real symmetric: diagonal omega(N-m) + omega0 m + gamma m(m-1),
    off-diagonal g sqrt((N-m)(m+1)) coupling m <-> m+1.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    m = np.arange(N + 1, dtype=float)
    h = np.diag(params.omega_field * (N - m) + params.omega_atom * m
                + params.gamma_nl * m * (m - 1.0))
    off = params.g_coupling * np.sqrt((N - m[:-1]) * (m[:-1] + 1.0))
    h += np.diag(off, 1) + np.diag(off, -1)
    return h


def ap_diagonalize(params: APParams, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and orthonormal eigenvectors of the total-quanta-N block."""
    return np.linalg.eigh(ap_block_hamiltonian(params, N))


@dataclass(frozen=True)
class EvolutionResult:
    """States sampled on a scaled-time grid, plus basis metadata."""

    times: np.ndarray
    states: tuple[StateVector, ...]
    dims: tuple[int, ...]
    time_unit: str  # "lambda_t" | "g_t" | "kappa_t" | "t"

    def __post_init__(self) -> None:
        t = np.array(self.times, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) != t.size:
            raise ValueError("one state per time required")
        for s in self.states:
            if s.dims != tuple(self.dims):
                raise ValueError("state dims disagree with result dims")


def ap_evolve(params: APParams, initial: StateVector, t_grid) -> EvolutionResult:
    """Evolve a (field, atom) product-basis state; ``t_grid`` holds g*t values.

    The initial state must lie entirely inside blocks that the truncation
    represents completely (total quanta N <= min(n_max, atom_levels) - 1),
    otherwise the block evolution would be silently wrong.
    """
    dims = (params.n_max, params.atom_levels)
    if initial.dims != dims:
        raise ValueError(f"initial dims {initial.dims} != params truncation {dims}")
    gt = np.atleast_1d(np.asarray(t_grid, dtype=float))
    psi0 = initial.reshaped()
    n_block_max = min(params.n_max, params.atom_levels) - 1

    occupied = []
    for N in range(params.n_max + params.atom_levels - 1):
        m = np.arange(max(0, N - params.n_max + 1), min(N, params.atom_levels - 1) + 1)
        amp = psi0[N - m, m]
        if np.any(np.abs(amp) > 1e-14):
            if N > n_block_max:
                raise TruncationError(
                    f"initial state occupies total-quanta block N={N}, which the "
                    f"truncation (n_max={params.n_max}, atom_levels={params.atom_levels}) "
                    "cannot represent completely"
                )
            occupied.append(N)

    out = np.zeros((gt.size,) + dims, dtype=complex)
    for N in occupied:
        m = np.arange(N + 1)
        evals, evecs = ap_diagonalize(params, N)
        c0 = evecs.T @ psi0[N - m, m]
        # phases use g*t directly: exp(-i E t) = exp(-i (E/g) * gt)
        ph = np.exp(-1j * np.outer(evals / params.g_coupling, gt))
        block_t = evecs @ (ph * c0[:, None])  # (N+1, n_times)
        out[:, N - m, m] += block_t.T
    states = tuple(StateVector(out[i].reshape(-1), dims) for i in range(gt.size))
    return EvolutionResult(gt, states, dims, "g_t")


@dataclass(frozen=True)
class LambdaParams:
    """Three-level-atom model constants; detunings are derived, not stored."""

    omega_atomic: tuple[float, float, float]
    Omega_fields: tuple[float, float]
    chi_nl: float
    kappa: float

    def __post_init__(self) -> None:
        if len(self.omega_atomic) != 3 or len(self.Omega_fields) != 2:
            raise ValueError("need three atomic and two field frequencies")
        object.__setattr__(self, "omega_atomic", tuple(float(w) for w in self.omega_atomic))
        object.__setattr__(self, "Omega_fields", tuple(float(w) for w in self.Omega_fields))

    @property
    def detunings(self) -> tuple[float, float]:
        """Delta_i = omega_3 - omega_i - Omega_i."""
        w1, w2, w3 = self.omega_atomic
        o1, o2 = self.Omega_fields
        return (w3 - w1 - o1, w3 - w2 - o2)

    @classmethod
    def resonant(cls, chi_nl: float, kappa: float) -> "LambdaParams":
        """Bookkeeping frequencies chosen so both detunings vanish."""
        return cls(omega_atomic=(1.0, 1.0, 2.0), Omega_fields=(1.0, 1.0),
                   chi_nl=chi_nl, kappa=kappa)


def _lambda_block_hamiltonian(params: LambdaParams, m: int, n: int) -> np.ndarray:
    """3x3 block over {|e1; m; n>, |e3; m-1; n>, |e2; m-1; n+1>}, m >= 1.

    Rotating-frame energies: only detunings and the nonlinearity chi appear
    on the diagonal; kappa couples the triple.
    """
    d1, d2 = params.detunings
    chi = params.chi_nl
    k = params.kappa
    e_a = chi * (m * (m - 1.0) + n * (n - 1.0))
    e_b = d1 + chi * ((m - 1.0) * (m - 2.0) + n * (n - 1.0))
    e_c = (d1 - d2) + chi * ((m - 1.0) * (m - 2.0) + n * (n + 1.0))
    return np.array([
        [e_a, k * math.sqrt(m), 0.0],
        [k * math.sqrt(m), e_b, k * math.sqrt(n + 1.0)],
        [0.0, k * math.sqrt(n + 1.0), e_c],
    ])


def lambda_evolve(params: LambdaParams, alpha1: complex, alpha2: complex,
                  t_grid, n_max: tuple[int | None, int | None] = (None, None),
                  scaled: bool = True) -> EvolutionResult:
    """Evolve |e1> x |alpha1> x |alpha2> on the given time grid.

    Subsystem order of the result is (field 1, field 2, atom) with atomic
    index 0, 1, 2 for e1, e2, e3.  With ``scaled=True`` (the default) the
    grid holds tau = kappa*t; ``scaled=False`` takes raw times, which also
    permits kappa = 0 (decoupled fields, purely diagonal blocks).

    Field 2 gets one extra basis level beyond its initial support because
    the e2 member of each block carries n+1 photons.
    """
    ts = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if scaled:
        if params.kappa <= 0:
            raise ValueError("scaled times require kappa > 0; pass scaled=False for kappa = 0")
        ts_raw = ts / params.kappa
    else:
        ts_raw = ts

    need1 = required_truncation(alpha1)
    need2 = required_truncation(alpha2) + 1  # headroom for |e2; m-1; n+1>
    n1 = need1 if n_max[0] is None else int(n_max[0])
    n2 = need2 if n_max[1] is None else int(n_max[1])
    if n1 < need1 or n2 < need2:
        raise TruncationError(
            f"truncation ({n1}, {n2}) insufficient for alpha1={alpha1!r}, "
            f"alpha2={alpha2!r}; need at least ({need1}, {need2})"
        )

    c1 = coherent_state(alpha1, n1).amplitudes
    c2 = np.zeros(n2, dtype=complex)
    c2[: n2 - 1] = coherent_state(alpha2, n2 - 1).amplitudes

    dims = (n1, n2, 3)
    out = np.zeros((ts.size,) + dims, dtype=complex)

    # 1x1 blocks |e1; 0; n>: pure nonlinear phase
    ns = np.arange(n2)
    ph0 = np.exp(-1j * params.chi_nl * np.outer(ts_raw, ns * (ns - 1.0)))
    out[:, 0, :, 0] = ph0 * (c1[0] * c2)[None, :]

    for m in range(1, n1):
        for n in range(n2 - 1):
            a0 = c1[m] * c2[n]
            if abs(a0) < 1e-300:
                continue
            h = _lambda_block_hamiltonian(params, m, n)
            evals, evecs = np.linalg.eigh(h)
            c0 = evecs.T @ np.array([a0, 0.0, 0.0], dtype=complex)
            ph = np.exp(-1j * np.outer(evals, ts_raw))
            amps = evecs @ (ph * c0[:, None])  # (3, n_times)
            out[:, m, n, 0] += amps[0]
            out[:, m - 1, n, 2] += amps[1]
            out[:, m - 1, n + 1, 1] += amps[2]

    states = tuple(StateVector(out[i].reshape(-1), dims) for i in range(ts.size))
    return EvolutionResult(ts, states, dims, "kappa_t" if scaled else "t")


def reduced_field_state(result: EvolutionResult, keep) -> list[DensityMatrix]:
    """Reduced density matrix over the kept subsystems, one per reported time."""
    return [reduced_density(s, keep) for s in result.states]
