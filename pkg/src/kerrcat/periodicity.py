"""Critical detuning, revival time, Rabi-ladder analysis and cat fitting.

Treating the generalized Rabi frequency as a function of a continuous level
index n, the dynamics is periodic exactly when every derivative beyond the
first vanishes.  For the Kerr-filled cavity that happens at the critical
detuning delta_c = coupling^2/(2 kerr) - 2 kerr, where the frequency ladder
becomes exactly linear, Omega_n = delta_c + 2 kerr (n + 2), and the revival
time collapses to pi / kerr.  At half that time the field passes through a
two-component superposition whose relative phase is recovered here by a
fidelity scan against explicit cat states.

``REFERENCE_MEAN_PHOTON`` and ``REFERENCE_CAT_FIT`` hold the benchmark
operating points (detuning/Kerr pairs quoted as exact rationals) together
with the published half-revival mean photon numbers, cat phases and
fidelities that the pipeline is expected to reproduce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .dynamics import evolve_field
from .fock import CatSpec, FieldState, ModelParams, cat_state, coherent_state
from .observables import field_fidelity, mean_photon

DEFAULT_SCAN_RESOLUTION = 0.005 * math.pi
PERIODICITY_TOL = 1e-9
MEAN_PHOTON_TOL = 0.002
FIDELITY_TOL = 0.005


def critical_detuning(params: ModelParams) -> float:
    """Detuning that makes the Rabi ladder exactly linear:
    coupling^2 / (2 kerr) - 2 kerr."""
    if params.kerr == 0.0:
        raise ValueError("no finite critical detuning for kerr = 0")
    return params.coupling**2 / (2.0 * params.kerr) - 2.0 * params.kerr


def _rabi_continuous(n: float, params: ModelParams) -> float:
    gam = params.detuning - 2.0 * params.kerr * n
    return math.sqrt(gam * gam + 4.0 * params.coupling**2 * (n + 1.0))


def revival_time(params: ModelParams, nbar: float) -> float:
    """Revival time pi |Omega(nbar) / (coupling^2 - kerr * gamma(nbar))|.

    Two adjacent rungs of the Rabi ladder rephase by 2 pi after this time.
    When detuning = delta_c the expression reduces exactly to pi / kerr.
    """
    gam = params.detuning - 2.0 * params.kerr * nbar
    slope_core = params.coupling**2 - params.kerr * gam
    if slope_core == 0.0:
        raise ValueError("revival time diverges: flat Rabi ladder at this nbar")
    return math.pi * abs(_rabi_continuous(nbar, params) / slope_core)


# central stencils (offsets, weights, power of h) for derivative orders 3..6
_STENCILS = {
    3: ((2, 1, -1, -2), (1.0, -2.0, 2.0, -1.0), 3, 2.0),
    4: ((2, 1, 0, -1, -2), (1.0, -4.0, 6.0, -4.0, 1.0), 4, 1.0),
    5: ((3, 2, 1, -1, -2, -3), (1.0, -4.0, 5.0, -5.0, 4.0, -1.0), 5, 2.0),
    6: ((3, 2, 1, 0, -1, -2, -3), (1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0), 6, 1.0),
}


def _mp_derivative(params: ModelParams, nbar: float, order: int, h: float = 0.01) -> float:
    """Richardson-extrapolated central difference, evaluated in mpmath.

    Extended precision removes cancellation noise, which in doubles would
    swamp the 1e-9 periodicity threshold for orders >= 3.
    """
    with mpmath.workdps(40):
        delta = mpmath.mpf(params.detuning)
        kerr = mpmath.mpf(params.kerr)
        coup = mpmath.mpf(params.coupling)
        n0 = mpmath.mpf(nbar)

        def f(n):
            g = delta - 2 * kerr * n
            return mpmath.sqrt(g * g + 4 * coup * coup * (n + 1))

        offs, weights, hpow, denom = _STENCILS[order]

        def stencil(step):
            acc = mpmath.mpf(0)
            for o, w in zip(offs, weights):
                acc += w * f(n0 + o * step)
            return acc / (denom * step**hpow)

        h1 = mpmath.mpf(h)
        coarse = stencil(h1)
        fine = stencil(h1 / 2)
        return float((4 * fine - coarse) / 3)


@dataclass(frozen=True)
class PeriodicityReport:
    """Derivatives of the Rabi ladder at the expansion point.

    ``derivative_table[k]`` is the k-th derivative of the generalized Rabi
    frequency with respect to the continuous level index, evaluated at
    ``nbar``; the dynamics is periodic when everything from k = 2 up
    vanishes (below 1e-9 in coupling units).
    """

    delta_c: float
    t_r: float
    nbar: float
    derivative_table: dict
    is_periodic: bool


def rabi_taylor(params: ModelParams, nbar: float, k_max: int = 4) -> PeriodicityReport:
    """Expand the Rabi ladder around ``nbar``.

    Orders 0..2 use the closed forms (value, 2 Delta / Omega and
    4 (kerr^2 Omega^2 - Delta^2) / Omega^3 with Delta = coupling^2 -
    kerr * gamma); orders 3..k_max come from high-accuracy numerical
    differentiation in the continuous level index.
    """
    if not 0 <= k_max <= 6:
        raise ValueError("k_max must lie in 0..6")
    omega = _rabi_continuous(nbar, params)
    gam = params.detuning - 2.0 * params.kerr * nbar
    slope_core = params.coupling**2 - params.kerr * gam
    table = {0: omega}
    if k_max >= 1:
        table[1] = 2.0 * slope_core / omega
    if k_max >= 2:
        table[2] = 4.0 * (params.kerr**2 * omega**2 - slope_core**2) / omega**3
    for k in range(3, k_max + 1):
        table[k] = _mp_derivative(params, nbar, k)
    try:
        t_r = revival_time(params, nbar)
    except ValueError:
        t_r = math.inf
    delta_c = critical_detuning(params) if params.kerr > 0.0 else math.nan
    is_periodic = all(
        abs(table[k]) < PERIODICITY_TOL * params.coupling for k in range(2, k_max + 1)
    )
    return PeriodicityReport(
        delta_c=delta_c, t_r=t_r, nbar=nbar, derivative_table=table, is_periodic=is_periodic
    )


@dataclass(frozen=True)
class CatFitResult:
    """Best cat-state match to a collapse-time field.

    ``amplitude_sq`` is the squared cat amplitude, set to the half-revival
    mean photon number; ``phase`` is the amplitude argument (pi/2: the two
    components sit on the imaginary axis).  ``theta_star`` maximizes the
    overlap fidelity, which is ``fidelity_star``.
    """

    theta_star: float
    fidelity_star: float
    amplitude_sq: float
    phase: float = math.pi / 2

    def cat_spec(self) -> CatSpec:
        amp = math.sqrt(self.amplitude_sq) * complex(math.cos(self.phase), math.sin(self.phase))
        return CatSpec(amplitude=amp, relative_phase=self.theta_star)


def _golden_max(f, lo: float, hi: float, tol: float = 1e-4):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv * (hi - lo)
    d = lo + inv * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - inv * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv * (hi - lo)
            fd = f(d)
    mid = 0.5 * (lo + hi)
    return mid, f(mid)


def fit_cat_phase(
    rho_half: FieldState,
    nbar_half: float,
    scan_resolution: float = DEFAULT_SCAN_RESOLUTION,
) -> CatFitResult:
    """Recover the relative phase of the collapse-time superposition.

    The cat amplitude is pinned by the state itself (|amplitude|^2 equals
    the supplied mean photon number, argument pi/2) and only the relative
    phase is scanned over [0, 2 pi), followed by a golden-section polish to
    1e-4 rad.  The returned fidelity is the scan maximum.
    """
    if not 0.0 < scan_resolution <= 0.01 * math.pi:
        raise ValueError("scan_resolution must lie in (0, 0.01 pi]")
    amp = 1j * math.sqrt(nbar_half)
    n_max = rho_half.n_max

    def objective(theta: float) -> float:
        return field_fidelity(cat_state(CatSpec(amp, theta), n_max), rho_half)

    thetas = np.arange(0.0, 2.0 * math.pi, scan_resolution)
    fids = np.array([objective(t) for t in thetas])
    k = int(np.argmax(fids))
    theta0, f0 = float(thetas[k]), float(fids[k])
    theta_ref, f_ref = _golden_max(objective, theta0 - scan_resolution, theta0 + scan_resolution)
    if f_ref >= f0:
        theta_star, f_star = theta_ref % (2.0 * math.pi), f_ref
    else:
        theta_star, f_star = theta0, f0
    return CatFitResult(theta_star=theta_star, fidelity_star=f_star, amplitude_sq=nbar_half)


# ---------------------------------------------------------------------------
# benchmark operating points
# ---------------------------------------------------------------------------

def _pt(chi: Fraction, delta: Fraction):
    return float(chi), float(delta)

_PAIRS = [
    _pt(Fraction(0), Fraction(0)),
    _pt(Fraction(1, 2), Fraction(0)),
    _pt(Fraction(2, 5), Fraction(9, 20)),
    _pt(Fraction(3, 10), Fraction(16, 15)),
    _pt(Fraction(1, 5), Fraction(21, 10)),
    _pt(Fraction(8, 75), Fraction(5369, 1200)),
    _pt(Fraction(1, 10), Fraction(24, 5)),
    _pt(Fraction(1, 20), Fraction(99, 10)),
    _pt(Fraction(1, 100), Fraction(2499, 50)),
    _pt(Fraction(1, 200), Fraction(9999, 100)),
]

# (chi, delta, half-revival mean photon number)
REFERENCE_MEAN_PHOTON = tuple(
    (chi, delta, ref)
    for (chi, delta), ref in zip(
        _PAIRS,
        [25.500, 25.074, 25.110, 25.179, 25.316, 25.493, 25.495, 25.324, 25.020, 25.005],
    )
)

# (chi, delta, theta/pi, tolerance on theta/pi, fidelity); the phase
# tolerance is half the last quoted digit, with the structurally exact
# entries 0 and pi read at one-decimal precision
REFERENCE_CAT_FIT = tuple(
    (chi, delta, theta, tol, fid)
    for (chi, delta), (theta, tol, fid) in zip(
        _PAIRS,
        [
            (1.21, 0.005, 0.7872),
            (0.45, 0.005, 0.9674),
            (0.52, 0.005, 0.9418),
            (0.40, 0.05, 0.9231),
            (0.70, 0.05, 0.8751),
            (1.00, 0.05, 0.9883),
            (0.00, 0.05, 0.9924),
            (1.23, 0.005, 0.9318),
            (1.49, 0.005, 0.9897),
            (1.50, 0.05, 0.9973),
        ],
    )
)


@dataclass(frozen=True)
class TableRow:
    delta: float
    chi: float
    quantity: str
    ref_value: float
    computed: float
    abs_dev: float
    tol: float

    @property
    def passed(self) -> bool:
        return math.isnan(self.ref_value) or self.abs_dev <= self.tol


def _circular_dev(a: float, b: float) -> float:
    """Distance between two angles in units of pi, on the circle."""
    d = (a - b) % 2.0
    return min(d, 2.0 - d)


def _half_state(delta: float, chi: float, alpha: float, n_max: int):
    params = ModelParams(detuning=delta, kerr=chi)
    t_r = revival_time(params, abs(alpha) ** 2)  # expansion point: initial mean
    return evolve_field(coherent_state(alpha, n_max), 0.5 * t_r, params)


def reproduce_table1(pairs=None, alpha: float = 5.0, n_max: int = 128) -> list[TableRow]:
    """Half-revival mean photon number for each operating point."""
    refs = {(c, d): r for c, d, r in REFERENCE_MEAN_PHOTON}
    if pairs is None:
        pairs = [(d, c) for c, d, _ in REFERENCE_MEAN_PHOTON]
    rows = []
    for delta, chi in pairs:
        computed = mean_photon(_half_state(delta, chi, alpha, n_max))
        ref = refs.get((chi, delta), math.nan)
        dev = abs(computed - ref) if not math.isnan(ref) else math.nan
        rows.append(TableRow(delta, chi, "mean_photon_half_revival", ref, computed, dev, MEAN_PHOTON_TOL))
    return rows


def reproduce_table2(pairs=None, alpha: float = 5.0, n_max: int = 128) -> list[TableRow]:
    """Cat-phase fit at the half-revival time for each operating point.

    Emits two rows per point: the fitted relative phase (in units of pi,
    compared on the circle) and the fidelity maximum.
    """
    refs = {(c, d): (th, tol, f) for c, d, th, tol, f in REFERENCE_CAT_FIT}
    if pairs is None:
        pairs = [(d, c) for c, d, _, _, _ in REFERENCE_CAT_FIT]
    rows = []
    for delta, chi in pairs:
        rho_half = _half_state(delta, chi, alpha, n_max)
        fit = fit_cat_phase(rho_half, mean_photon(rho_half))
        theta_ref, theta_tol, fid_ref = refs.get((chi, delta), (math.nan, math.nan, math.nan))
        theta_pi = fit.theta_star / math.pi
        theta_dev = _circular_dev(theta_pi, theta_ref) if not math.isnan(theta_ref) else math.nan
        fid_dev = abs(fit.fidelity_star - fid_ref) if not math.isnan(fid_ref) else math.nan
        rows.append(TableRow(delta, chi, "theta_over_pi", theta_ref, theta_pi, theta_dev, theta_tol))
        rows.append(TableRow(delta, chi, "fidelity", fid_ref, fit.fidelity_star, fid_dev, FIDELITY_TOL))
    return rows


def table_to_csv(rows: list[TableRow], path_or_buf, meta: dict | None = None) -> None:
    """CSV with columns delta,chi[,quantity],ref_value,computed,abs_dev.

    The quantity column appears only when rows mix quantities (phase and
    fidelity); single-quantity tables keep the plain five-column layout.
    """
    own = isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__")
    fh = open(path_or_buf, "w") if own else path_or_buf
    try:
        if meta:
            for k, v in meta.items():
                fh.write(f"# {k}={v}\n")
        quantities = {r.quantity for r in rows}
        mixed = len(quantities) > 1
        if mixed:
            fh.write("delta,chi,quantity,ref_value,computed,abs_dev\n")
        else:
            fh.write("delta,chi,ref_value,computed,abs_dev\n")
        for r in rows:
            cols = [repr(r.delta), repr(r.chi)]
            if mixed:
                cols.append(r.quantity)
            cols += [repr(r.ref_value), repr(r.computed), repr(r.abs_dev)]
            fh.write(",".join(cols) + "\n")
    finally:
        if own:
            fh.close()
