"""Large-detuning (dispersive) analytics and the mixture-to-cat identity.

When the detuning dominates every populated vacuum-Rabi splitting, the
exchange coupling reduces to number-dependent phase shifts.  The evolution
of an initially excited atom with a coherent field then has explicit
amplitudes, the initial state recurs at the revival time, and at half the
revival time the quarter-cycle phase identity

    e^{-i pi n^2 / 2} = (1 + i)(e^{-i pi n} - i) / 2

splits the state into exactly two coherent components with relative factor
-i.  These closed forms cross-check the full numerical pipeline.

The mixture identity addresses why only even and odd superpositions emerge
from a two-component statistical mixture: a mixture of the two cats reached
from |alpha> and |-alpha> equals the single pure cat precisely when the
relative phase is an integer multiple of pi.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import effective_detuning, evolve_field, rabi_frequency
from .fock import CatSpec, FieldState, ModelParams, cat_state, coherent_amplitudes, pure_state
from .observables import field_fidelity

DISPERSIVE_PROB_FLOOR = 1e-6
DISPERSIVE_MARGIN = 5.0


@dataclass(frozen=True)
class DressedPair:
    """Eigen-pair of one excitation manifold {|e,n>, |g,n+1>}.

    ``sin_mix``/``cos_mix`` give the mixing angle of the dressed vectors;
    ``energy_plus``/``energy_minus`` are the exact eigenvalues and the
    ``dispersive_*`` fields their large-detuning approximations (NaN at zero
    detuning, where that limit is undefined).
    """

    n: int
    sin_mix: float
    cos_mix: float
    energy_plus: float
    energy_minus: float
    dispersive_plus: float
    dispersive_minus: float

    def __post_init__(self):
        res = abs(self.sin_mix**2 + self.cos_mix**2 - 1.0)
        if res > 1e-13:
            raise ValueError(f"mixing angle not normalized: residue {res:.3e}")


def dressed_states(n: int, params: ModelParams) -> DressedPair:
    """Dressed pair of the n-th manifold.

    Exact eigenvalues: omega_cavity (n + 1/2) + kerr n^2 +- Omega_n / 2,
    with mixing sin = w / hyp, cos = (Omega_n - gamma_n) / hyp where
    w = 2 coupling sqrt(n+1) and hyp closes the right triangle.  Energies
    are measured with omega_cavity = 0 unless carriers are configured.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    w0 = params.omega_cavity if params.omega_cavity is not None else 0.0
    gam = effective_detuning(n, params)
    omega_n = rabi_frequency(n, params)
    w = 2.0 * params.coupling * math.sqrt(n + 1.0)
    hyp = math.hypot(omega_n - gam, w)
    base = w0 * (n + 0.5)
    common = base + params.kerr * float(n) ** 2
    if params.detuning != 0.0:
        absd = abs(params.detuning)
        shift = params.coupling**2 * (n + 1.0) / absd
        disp_plus = base + 0.5 * absd + params.kerr * n * (n - 1.0) + shift
        disp_minus = base - 0.5 * absd + params.kerr * n * (n + 1.0) - shift
    else:
        disp_plus = disp_minus = math.nan
    return DressedPair(
        n=n,
        sin_mix=w / hyp,
        cos_mix=(omega_n - gam) / hyp,
        energy_plus=common + 0.5 * omega_n,
        energy_minus=common - 0.5 * omega_n,
        dispersive_plus=disp_plus,
        dispersive_minus=disp_minus,
    )


def dispersive_evolve(alpha: complex, t: float, params: ModelParams, n_max: int) -> np.ndarray:
    """Amplitudes of the dispersive-limit evolved field, atom initially excited.

    c_n(t) = c_n e^{-i kerr n^2 t} e^{+i kerr n t} e^{-i (coupling^2/detuning) n t};
    the overall n-independent phase is dropped.  Normalization is that of
    the truncated coherent input.
    """
    if params.detuning == 0.0:
        raise ValueError("dispersive limit undefined at zero detuning")
    n = np.arange(n_max + 1, dtype=float)
    shift = params.coupling**2 / params.detuning
    phases = np.exp(1j * (-params.kerr * n**2 + params.kerr * n - shift * n) * t)
    return coherent_amplitudes(alpha, n_max) * phases


def dispersive_cat_amplitudes(alpha: complex, params: ModelParams, n_max: int) -> np.ndarray:
    """Closed two-component form of the dispersive state at half revival.

    At t = pi / (2 kerr) the quarter-cycle identity turns the amplitude
    series into (|a> - i |-a>) / sqrt(2) with
    a = -i e^{-i (pi/2) coupling^2/(detuning kerr)} alpha: two coherent
    components on the rotated imaginary axis with relative factor -i.
    """
    if params.kerr <= 0.0:
        raise ValueError("half-revival form needs a positive kerr strength")
    if params.detuning == 0.0:
        raise ValueError("dispersive limit undefined at zero detuning")
    rot = cmath.exp(-0.5j * math.pi * params.coupling**2 / (params.detuning * params.kerr))
    a = -1j * rot * complex(alpha)
    comp = coherent_amplitudes(a, n_max)
    n = np.arange(n_max + 1)
    # (-a)^n = (-1)^n a^n keeps the two components phase-coherent exactly
    comp_neg = comp * (-1.0) ** n
    return (comp - 1j * comp_neg) / math.sqrt(2.0)


def dispersive_vs_exact(alpha: complex, params: ModelParams, t: float, n_max: int = 128) -> float:
    """Fidelity between the dispersive-limit state and the exact evolution.

    Close to 1 deep in the dispersive regime; degrades (and is reported,
    not asserted) when the detuning only just exceeds the Rabi splittings.
    """
    disp = pure_state(dispersive_evolve(alpha, t, params, n_max))
    exact = evolve_field(pure_state(coherent_amplitudes(alpha, n_max)), t, params)
    return field_fidelity(disp, exact)


def in_dispersive_regime(
    state: FieldState,
    params: ModelParams,
    prob_floor: float = DISPERSIVE_PROB_FLOOR,
    margin: float = DISPERSIVE_MARGIN,
) -> bool:
    """Whether every populated level sits deep in the dispersive regime.

    Every n carrying probability above ``prob_floor`` must satisfy
    |detuning| > margin * 2 coupling sqrt(n+1).  The floor and margin are
    explicit, documented choices.
    """
    p = np.diagonal(state.matrix).real
    populated = np.nonzero(p > prob_floor)[0]
    if populated.size == 0:
        return True
    n_top = int(populated.max())
    return abs(params.detuning) > margin * 2.0 * params.coupling * math.sqrt(n_top + 1.0)


def mixture_cat_identity(atilde: complex, theta: float, n_max: int = 128) -> float:
    """Hilbert-Schmidt distance between the two candidate collapse states.

    rho  = (cat(atilde, theta) + cat(-atilde, -theta)) / 2   -- the pure cat,
           written symmetrically over the two mixture branches;
    rho' = (cat(atilde, theta) + cat(atilde, -theta)) / 2    -- the actual
           mixture of the two branch outcomes.

    The distance vanishes exactly at theta = k pi (even and odd cats) and is
    of order |sin theta| otherwise.
    """
    if abs(atilde) == 0.0:
        raise ValueError("need a nonzero cat amplitude")
    rho = 0.5 * (
        cat_state(CatSpec(atilde, theta), n_max).matrix
        + cat_state(CatSpec(-atilde, -theta), n_max).matrix
    )
    rho_mix = 0.5 * (
        cat_state(CatSpec(atilde, theta), n_max).matrix
        + cat_state(CatSpec(atilde, -theta), n_max).matrix
    )
    return float(np.linalg.norm(rho - rho_mix))
