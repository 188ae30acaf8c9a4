"""Closed-form time evolution of the atom-field state.

With the atom starting excited, each number level n evolves inside the
two-dimensional manifold {|e,n>, |g,n+1>}.  The scalar data per level are a
Kerr phase E_n(t), the amplitude A_n(t) to stay excited and the amplitude
B_n(t) to flip to the ground state, built from the generalized Rabi
frequency.  Everything downstream (field matrix, reduced atom, joint state)
is an outer-product combination of those vectors.

A dense-Hamiltonian oracle is included for verification: it exponentiates
the full Hamiltonian (cavity + atom + Kerr + exchange coupling) exactly via
eigendecomposition and rotates the result into the interaction picture of
the free cavity-plus-atom part, so it is directly comparable to the closed
form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import (
    AtomState,
    FieldState,
    ModelParams,
    complex_matrix_from_text,
    complex_matrix_to_text,
)

ORACLE_MAX_LEVELS = 64
DEFAULT_ORACLE_CARRIER = 32.0


def effective_detuning(n: int, params: ModelParams) -> float:
    """Detuning seen by level n once the Kerr medium shifts the ladder:
    detuning - 2 * kerr * n."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return params.detuning - 2.0 * params.kerr * n


def rabi_frequency(n: int, params: ModelParams) -> float:
    """Generalized Rabi frequency of the n-th manifold,
    sqrt(effective_detuning^2 + 4 coupling^2 (n+1)).  Strictly positive."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    gam = effective_detuning(n, params)
    return float(np.sqrt(gam * gam + 4.0 * params.coupling**2 * (n + 1.0)))


@dataclass(frozen=True)
class Coefficients:
    """Evolution scalars of one manifold at one time."""

    kerr_phase: complex   # e^{-i kerr n^2 t}
    stay_amp: complex     # amplitude to remain excited
    flip_amp: complex     # amplitude to drop to the ground state
    rabi: float
    eff_detuning: float


def coefficient_arrays(t: float, params: ModelParams, n_max: int):
    """Vectorized (kerr_phase, stay_amp, flip_amp) for n = 0..n_max."""
    n = np.arange(n_max + 1)
    gam = params.detuning - 2.0 * params.kerr * n
    rabi = np.sqrt(gam * gam + 4.0 * params.coupling**2 * (n + 1.0))
    half = 0.5 * rabi * t
    sin_over = np.sin(half) / rabi
    kerr_phase = np.exp(-1j * params.kerr * (n.astype(float) ** 2) * t)
    stay = np.cos(half) - 1j * gam * sin_over
    flip = 2j * params.coupling * np.sqrt(n + 1.0) * sin_over
    return kerr_phase, stay, flip


def coefficients(n: int, t: float, params: ModelParams) -> Coefficients:
    """Evolution scalars for a single manifold index."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if t < 0:
        raise ValueError("t must be nonnegative")
    e, a, b = coefficient_arrays(t, params, n)
    return Coefficients(
        kerr_phase=complex(e[n]),
        stay_amp=complex(a[n]),
        flip_amp=complex(b[n]),
        rabi=rabi_frequency(n, params),
        eff_detuning=effective_detuning(n, params),
    )


def evolve_field(state: FieldState, t: float, params: ModelParams) -> FieldState:
    """Reduced field state at time t for an initially excited atom.

    Entry (n, m) combines the input entry (n, m) through the stay amplitudes
    with the input entry (n-1, m-1) through the flip amplitudes; the flip
    term is absent on the n = 0 / m = 0 edge, where there is no level below.
    The sums are cut at n_max without renormalization; the lost mass shows
    up as trace leakage and widens the state's declared truncation bound.
    """
    rho = state.matrix
    kerr_phase, stay, flip = coefficient_arrays(t, params, state.n_max)
    es = kerr_phase * stay
    ef = kerr_phase * flip
    out = np.outer(es, es.conj()) * rho
    out[1:, 1:] += np.outer(ef[:-1], ef[:-1].conj()) * rho[:-1, :-1]
    leak = max(0.0, state.trace - float(np.trace(out).real))
    return FieldState(out, eps_trunc=state.eps_trunc + leak + 1e-14)


def evolve_atom(state: FieldState, t: float, params: ModelParams) -> AtomState:
    """Reduced atomic state at time t for an initially excited atom."""
    rho = state.matrix
    kerr_phase, stay, flip = coefficient_arrays(t, params, state.n_max)
    p = np.diagonal(rho).real
    pop_e = float(np.sum(p * np.abs(stay) ** 2))
    pop_g = float(np.sum(p * np.abs(flip) ** 2))
    # coherence couples neighbouring diagonals rho_{n+1,n}
    n = np.arange(state.n_max)
    sub = np.diagonal(rho, offset=-1)  # rho_{n+1,n}
    phase = np.exp(-1j * params.kerr * (2 * n + 1.0) * t)
    coh = -np.sum(sub * phase * stay[1:] * np.conj(flip[:-1]))
    m = np.array([[pop_e, coh], [np.conj(coh), pop_g]], dtype=complex)
    return AtomState(m)


@dataclass(frozen=True)
class JointState:
    """Atom-field state as four field-dimension blocks.

    ``ee``/``gg`` are the field matrices conditioned on the atom being
    excited/ground; ``eg``/``ge`` hold the atom coherences.  ``ge`` must be
    the adjoint of ``eg`` and the two populations together carry the input
    trace (up to edge truncation of the ground block).
    """

    ee: np.ndarray
    eg: np.ndarray
    ge: np.ndarray
    gg: np.ndarray

    def __post_init__(self):
        for name in ("ee", "eg", "ge", "gg"):
            m = np.array(getattr(self, name), dtype=complex)
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        if self.ee.shape != self.eg.shape or self.ee.shape != self.gg.shape:
            raise ValueError("all four blocks must share one shape")
        dev = np.max(np.abs(self.ge - self.eg.conj().T))
        if dev > 1e-12:
            raise ValueError(f"ge block is not the adjoint of eg: max dev {dev:.3e}")

    @property
    def total_trace(self) -> float:
        return float(np.trace(self.ee).real + np.trace(self.gg).real)

    def reduced_field(self) -> FieldState:
        m = self.ee + self.gg
        eps = max(1e-12, 1.0 - float(np.trace(m).real) + 1e-13)
        return FieldState(m, eps_trunc=eps)

    def reduced_atom(self) -> AtomState:
        # the eg block is stored as an operator matrix (photon shift already
        # in the column index), so the field trace is its main diagonal
        coh = complex(np.trace(self.eg))
        m = np.array(
            [
                [np.trace(self.ee), coh],
                [np.conj(coh), np.trace(self.gg)],
            ],
            dtype=complex,
        )
        return AtomState(m)

    def save(self, prefix) -> list:
        """Write the four blocks as '<prefix>.<block>.fockdm' files."""
        paths = []
        for name in ("ee", "eg", "ge", "gg"):
            path = f"{prefix}.{name}.fockdm"
            with open(path, "w") as fh:
                fh.write(complex_matrix_to_text(getattr(self, name)))
            paths.append(path)
        return paths

    @staticmethod
    def load(prefix) -> "JointState":
        blocks = {}
        for name in ("ee", "eg", "ge", "gg"):
            with open(f"{prefix}.{name}.fockdm") as fh:
                blocks[name] = complex_matrix_from_text(fh.read())
        return JointState(**blocks)


def evolve_joint(state: FieldState, t: float, params: ModelParams) -> JointState:
    """All four atom-basis blocks of the evolved joint state.

    Block structure: the excited block keeps field indices (n, m); the
    coherence blocks shift one side by a photon (entries |n><m+1| and
    |n+1><m|); the ground block shifts both.  Shifted entries that would
    exceed n_max are dropped, consistently with ``evolve_field``.
    """
    rho = state.matrix
    kerr_phase, stay, flip = coefficient_arrays(t, params, state.n_max)
    es = kerr_phase * stay
    ef = kerr_phase * flip
    ee = np.outer(es, es.conj()) * rho
    eg = np.zeros_like(rho)
    eg[:, 1:] = -(np.outer(es, ef.conj()) * rho)[:, :-1]
    ge = np.zeros_like(rho)
    ge[1:, :] = -(np.outer(ef, es.conj()) * rho)[:-1, :]
    gg = np.zeros_like(rho)
    gg[1:, 1:] = (np.outer(ef, ef.conj()) * rho)[:-1, :-1]
    return JointState(ee=ee, eg=eg, ge=ge, gg=gg)


def hamiltonian_oracle(
    state: FieldState,
    t: float,
    params: ModelParams,
    n_max: int | None = None,
    carrier: float | None = None,
) -> JointState:
    """Independent verification route via dense matrix exponentiation.

    Builds the full Hamiltonian

        H = w0 n + weg sz/2 + kerr adag^2 a^2 + coupling (adag sm + a sp)

    in the product basis {|e>, |g>} x {|0> .. }, conjugates
    |e><e| x rho by the exact propagator (eigendecomposition of the
    Hermitian H), and rotates into the interaction picture generated by
    w0 (n + sz/2) so the result matches the closed-form blocks.  The result
    is independent of the carrier w0; one is only needed to build H.

    One guard level is appended internally so the topmost excitation
    manifold closes; without it the |e, n_max> component could not reach
    |g, n_max + 1> and the comparison would be limited by the input's tail
    mass rather than arithmetic.  Dense cost grows as the cube of the
    dimension, hence the n_max <= 64 guard.
    """
    if n_max is None:
        n_max = state.n_max
    if n_max > ORACLE_MAX_LEVELS:
        raise ValueError(
            f"oracle is desk-scale only: n_max={n_max} exceeds {ORACLE_MAX_LEVELS}"
        )
    if state.n_max > n_max:
        raise ValueError("state does not fit in the requested oracle space")
    if carrier is None:
        carrier = params.omega_cavity if params.omega_cavity is not None else DEFAULT_ORACLE_CARRIER
    omega_atom = carrier + params.detuning

    d = n_max + 2  # one guard level closes the top manifold
    nvec = np.arange(d, dtype=float)
    a = np.diag(np.sqrt(nvec[1:]), 1)
    ad = a.conj().T
    number = ad @ a
    kerr_op = ad @ ad @ a @ a
    sz = np.diag([1.0, -1.0])
    sp = np.array([[0.0, 1.0], [0.0, 0.0]])  # |e><g|
    sm = sp.T
    eye2 = np.eye(2)
    eyef = np.eye(d)

    h = (
        carrier * np.kron(eye2, number)
        + 0.5 * omega_atom * np.kron(sz, eyef)
        + params.kerr * np.kron(eye2, kerr_op)
        + params.coupling * (np.kron(sm, ad) + np.kron(sp, a))
    )
    w, v = np.linalg.eigh(h)
    u = (v * np.exp(-1j * w * t)) @ v.conj().T

    rho_full = np.zeros((2 * d, 2 * d), dtype=complex)
    rho_full[: state.dim, : state.dim] = state.matrix  # excited block, field padded
    rho_t = u @ rho_full @ u.conj().T

    h0_diag = carrier * (np.concatenate([nvec, nvec]) + 0.5 * np.concatenate([np.ones(d), -np.ones(d)]))
    phase = np.exp(1j * h0_diag * t)
    rho_i = rho_t * np.outer(phase, phase.conj())

    k = state.dim
    return JointState(
        ee=rho_i[:d, :d][:k, :k],
        eg=rho_i[:d, d:][:k, :k],
        ge=rho_i[d:, :d][:k, :k],
        gg=rho_i[d:, d:][:k, :k],
    )
