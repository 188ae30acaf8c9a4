"""Truncated Fock-space states and model parameters.

The cavity field lives in the number basis |0> .. |n_max>, represented by a
dense complex density matrix.  Every constructor here returns a Hermitian,
unit-trace (up to a declared truncation tail) matrix; factorial weights are
accumulated through log-gamma so amplitudes stay finite well past n = 128.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

DEFAULT_EPS_TRUNC = 1e-12
TRUNCATION_MARGIN = 20

HERMITICITY_TOL = 1e-12
DIAG_NEG_TOL = 1e-12
TRACE_UPPER_TOL = 1e-12


class TruncationError(ValueError):
    """Raised when the requested Fock cutoff cannot hold the state."""


def complex_matrix_to_text(matrix: np.ndarray) -> str:
    """'fock-dm v1' wire format: header, then dim rows of re,im pairs.

    Shared by density matrices and the (non-Hermitian) coherence blocks of
    joint states; repr-precision floats round-trip bit-exactly.
    """
    m = np.asarray(matrix, dtype=complex)
    lines = [f"fock-dm v1 dim={m.shape[0]}"]
    for row in m:
        lines.append(" ".join(f"{float(v.real)!r},{float(v.imag)!r}" for v in row))
    return "\n".join(lines) + "\n"


def complex_matrix_from_text(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("fock-dm v1"):
        raise ValueError("not a fock-dm v1 payload")
    try:
        dim = int(lines[0].split("dim=")[1])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad fock-dm header: {lines[0]!r}") from exc
    if len(lines) - 1 != dim:
        raise ValueError(f"expected {dim} rows, found {len(lines) - 1}")
    m = np.empty((dim, dim), dtype=complex)
    for i, ln in enumerate(lines[1:]):
        pairs = ln.split()
        if len(pairs) != dim:
            raise ValueError(f"row {i}: expected {dim} entries, found {len(pairs)}")
        for j, pair in enumerate(pairs):
            re, im = pair.split(",")
            m[i, j] = complex(float(re), float(im))
    return m


@dataclass(frozen=True)
class ModelParams:
    """Model parameters, all angular frequencies.

    ``coupling`` is the atom-field coupling constant and sets the frequency
    unit; ``detuning`` (atomic transition minus cavity frequency) and
    ``kerr`` (photon-pair phase rate of the nonlinear medium) are quoted in
    units of the coupling.  The optional carrier frequencies are only used
    for the rotating-wave sanity check and must satisfy
    detuning = omega_atom - omega_cavity when both are given.
    """

    coupling: float = 1.0
    detuning: float = 0.0
    kerr: float = 0.0
    omega_cavity: float | None = None
    omega_atom: float | None = None

    def __post_init__(self):
        if not self.coupling > 0.0:
            raise ValueError(f"coupling must be strictly positive, got {self.coupling}")
        if self.kerr < 0.0:
            raise ValueError(f"kerr strength must be nonnegative, got {self.kerr}")
        if (self.omega_cavity is None) != (self.omega_atom is None):
            raise ValueError("omega_cavity and omega_atom must be given together")
        if self.omega_cavity is not None:
            implied = self.omega_atom - self.omega_cavity
            scale = max(1.0, abs(self.detuning), abs(implied))
            if abs(self.detuning - implied) > 1e-12 * scale:
                raise ValueError(
                    "inconsistent carriers: omega_atom - omega_cavity = "
                    f"{implied!r} but detuning = {self.detuning!r}"
                )


@dataclass(frozen=True)
class FieldState:
    """Density matrix of the cavity mode in the truncated number basis.

    ``eps_trunc`` is the declared bound on the probability mass lost to
    truncation; the trace must lie in [1 - eps_trunc, 1 + 1e-12].  The
    matrix is frozen read-only, so instances are safe to share across
    workers.
    """

    matrix: np.ndarray
    eps_trunc: float = DEFAULT_EPS_TRUNC

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"matrix must be square, got shape {m.shape}")
        herm = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if herm > HERMITICITY_TOL:
            raise ValueError(f"matrix not Hermitian: max |rho - rho^dag| = {herm:.3e}")
        diag = np.diagonal(m)
        if np.min(diag.real) < -DIAG_NEG_TOL:
            raise ValueError(f"negative diagonal entry: {np.min(diag.real):.3e}")
        tr = float(np.sum(diag.real))
        if not (1.0 - self.eps_trunc - 1e-15 <= tr <= 1.0 + TRACE_UPPER_TOL):
            raise ValueError(
                f"trace {tr!r} outside [1 - {self.eps_trunc:.3e}, 1 + 1e-12]"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_max(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def leakage(self) -> float:
        """Probability mass lost to the truncation, 1 - trace."""
        return max(0.0, 1.0 - self.trace)

    def to_text(self) -> str:
        """Serialize as 'fock-dm v1': header then dim rows of re,im pairs."""
        return complex_matrix_to_text(self.matrix)

    @staticmethod
    def from_text(text: str) -> "FieldState":
        m = complex_matrix_from_text(text)
        tr = float(np.trace(m).real)
        eps = max(DEFAULT_EPS_TRUNC, 1.0 - tr + 1e-13)
        return FieldState(m, eps_trunc=eps)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @staticmethod
    def load(path) -> "FieldState":
        with open(path) as fh:
            return FieldState.from_text(fh.read())


@dataclass(frozen=True)
class AtomState:
    """2x2 atomic density matrix in the {excited, ground} basis."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"atom state must be 2x2, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise ValueError("atom state not Hermitian")
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"atom state trace {tr!r} differs from 1 beyond 1e-10")
        d = np.diagonal(m).real
        if d.min() < -1e-12 or d.max() > 1.0 + 1e-12:
            raise ValueError(f"atom populations out of range: {d}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def excited_population(self) -> float:
        return float(self.matrix[0, 0].real)

    @property
    def ground_population(self) -> float:
        return float(self.matrix[1, 1].real)

    @property
    def inversion(self) -> float:
        return self.excited_population - self.ground_population


@dataclass(frozen=True)
class CatSpec:
    """Superposition of two opposite coherent amplitudes.

    The state is N^(1/2) (|amplitude> + e^(i relative_phase) |-amplitude>)
    with N = 1 / (2 (1 + e^(-2|amplitude|^2) cos(relative_phase))).  The
    normalization is always recomputed from the stored fields.
    """

    amplitude: complex
    relative_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "relative_phase", float(self.relative_phase) % (2.0 * math.pi))

    @property
    def normalization(self) -> float:
        overlap = math.exp(-2.0 * abs(self.amplitude) ** 2)
        return 0.5 / (1.0 + overlap * math.cos(self.relative_phase))


def coherent_amplitudes(alpha: complex, n_max: int) -> np.ndarray:
    """Number-basis amplitudes <n|alpha> for n = 0..n_max.

    Magnitudes are assembled as exp(-|alpha|^2/2 + n log|alpha| - lgamma(n+1)/2)
    so nothing overflows; phases are exact multiples of arg(alpha).
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    alpha = complex(alpha)
    n = np.arange(n_max + 1)
    if alpha == 0:
        amps = np.zeros(n_max + 1, dtype=complex)
        amps[0] = 1.0
        return amps
    logmag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def pure_state(amplitudes: np.ndarray, eps_trunc: float | None = None) -> FieldState:
    """Density matrix |psi><psi| of a (possibly truncated) pure state."""
    amps = np.asarray(amplitudes, dtype=complex)
    norm = float(np.sum(np.abs(amps) ** 2))
    if eps_trunc is None:
        eps_trunc = max(DEFAULT_EPS_TRUNC, 1.0 - norm + 1e-13)
    return FieldState(np.outer(amps, amps.conj()), eps_trunc=eps_trunc)


def coherent_state(alpha: complex, n_max: int) -> FieldState:
    """Coherent state |alpha><alpha| truncated at n_max.

    Rejects truncations that hold less than 99% of the state.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    amps = coherent_amplitudes(alpha, n_max)
    norm = float(np.sum(np.abs(amps) ** 2))
    if norm < 0.99:
        raise TruncationError(
            f"n_max={n_max} keeps only trace {norm:.6f} of coherent state "
            f"|alpha|^2={abs(alpha)**2:.3f}; raise the cutoff"
        )
    return pure_state(amps)


def mixture_state(alpha: complex, n_max: int) -> FieldState:
    """Equal-weight statistical mixture of |alpha> and |-alpha>.

    Entries carry the parity factor (1 + (-1)^(n+m))/2, so every element
    with n + m odd is exactly zero and the diagonal coincides with the
    coherent-state diagonal.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    amps = coherent_amplitudes(alpha, n_max)
    norm = float(np.sum(np.abs(amps) ** 2))
    if norm < 0.99:
        raise TruncationError(
            f"n_max={n_max} keeps only trace {norm:.6f} of the two-component "
            "mixture; raise the cutoff"
        )
    n = np.arange(n_max + 1)
    parity = 0.5 * (1.0 + (-1.0) ** (n[:, None] + n[None, :]))
    m = np.outer(amps, amps.conj()) * parity
    return FieldState(m, eps_trunc=max(DEFAULT_EPS_TRUNC, 1.0 - norm + 1e-13))


def cat_state(spec: CatSpec, n_max: int) -> FieldState:
    """Normalized superposition of |amplitude> and |-amplitude>."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    base = coherent_amplitudes(spec.amplitude, n_max)
    n = np.arange(n_max + 1)
    # (-alpha)^n = (-1)^n alpha^n keeps the even/odd structure exact
    amps = math.sqrt(spec.normalization) * base * (
        1.0 + np.exp(1j * spec.relative_phase) * (-1.0) ** n
    )
    norm = float(np.sum(np.abs(amps) ** 2))
    if norm < 0.99:
        raise TruncationError(
            f"n_max={n_max} keeps only trace {norm:.6f} of the cat state; "
            "raise the cutoff"
        )
    return pure_state(amps)


def fock_state(n: int, n_max: int) -> FieldState:
    """Number state |n><n|."""
    if not 0 <= n <= n_max:
        raise ValueError(f"need 0 <= n <= n_max, got n={n}, n_max={n_max}")
    m = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    m[n, n] = 1.0
    return FieldState(m)


def thermal_state(nbar: float, n_max: int, eps_trunc: float = DEFAULT_EPS_TRUNC) -> FieldState:
    """Thermal state with mean occupation nbar: P_n = nbar^n / (nbar+1)^(n+1).

    The geometric tail beyond n_max must stay below eps_trunc.
    """
    if nbar < 0.0:
        raise ValueError(f"nbar must be nonnegative, got {nbar}")
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if nbar == 0.0:
        return fock_state(0, max(n_max, 1))
    q = nbar / (nbar + 1.0)
    tail = q ** (n_max + 1)  # sum_{n > n_max} P_n in closed form
    if tail >= eps_trunc:
        raise TruncationError(
            f"thermal tail {tail:.3e} beyond n_max={n_max} exceeds eps_trunc={eps_trunc:.1e}"
        )
    n = np.arange(n_max + 1)
    logp = n * math.log(nbar) - (n + 1.0) * math.log(nbar + 1.0)
    m = np.diag(np.exp(logp).astype(complex))
    return FieldState(m, eps_trunc=max(eps_trunc, tail + 1e-15))


def _poisson_cutoff(mean: float, eps_trunc: float) -> int:
    """Smallest N with sum_{n > N} Poisson(mean) < eps_trunc."""
    if mean == 0.0:
        return 0
    # generous horizon, then an exact backward tail sum in float
    horizon = int(mean + 40.0 * math.sqrt(mean) + 80)
    n = np.arange(horizon + 1)
    logp = -mean + n * math.log(mean) - gammaln(n + 1.0)
    p = np.exp(logp)
    tail = np.cumsum(p[::-1])[::-1]  # tail[k] = sum_{n >= k} p_n
    below = np.nonzero(tail < eps_trunc)[0]
    if below.size == 0:
        raise ValueError("truncation horizon too small; eps_trunc unreachably tight")
    return int(below[0]) - 1  # tail beyond N is tail[N+1]


def choose_truncation(
    alpha: complex | None = None,
    nbar: float | None = None,
    eps_trunc: float = DEFAULT_EPS_TRUNC,
    margin: int = TRUNCATION_MARGIN,
) -> int:
    """Pick n_max so the neglected tail stays below eps_trunc, plus a margin.

    Exactly one of ``alpha`` (Poissonian photon statistics) or ``nbar``
    (geometric statistics) selects the distribution.  The margin absorbs the
    one-level couplings of the evolution and the tail amplification of
    phase-space sums.
    """
    if not 0.0 < eps_trunc < 1.0:
        raise ValueError(f"eps_trunc must lie in (0, 1), got {eps_trunc}")
    if (alpha is None) == (nbar is None):
        raise ValueError("give exactly one of alpha or nbar")
    if alpha is not None:
        base = _poisson_cutoff(abs(complex(alpha)) ** 2, eps_trunc)
    else:
        if nbar < 0.0:
            raise ValueError(f"nbar must be nonnegative, got {nbar}")
        if nbar == 0.0:
            base = 0
        else:
            q = nbar / (nbar + 1.0)
            base = max(0, math.ceil(math.log(eps_trunc) / math.log(q) - 1.0))
            while q ** (base + 1) >= eps_trunc:
                base += 1
            while base > 0 and q ** base < eps_trunc:
                base -= 1
    return base + margin
