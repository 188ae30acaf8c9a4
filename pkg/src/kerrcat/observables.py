"""Scalar diagnostics of the evolved field and their time series.

Atomic inversion, linear entropy, photon statistics and the overlap-style
field fidelity.  Time series carry both absolute time (units of the inverse
coupling) and time normalized to the revival time, which is how collapse
and revival structure is usually read.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from ._pool import parallel_map
from .dynamics import coefficient_arrays, evolve_field
from .fock import FieldState, ModelParams

POINTS_PER_REVIVAL = 2000


def atomic_inversion(state: FieldState, t: float, params: ModelParams) -> float:
    """Excited minus ground population at time t, atom initially excited.

    W(t) = sum_n P_n (|stay_n|^2 - |flip_n|^2) with P_n the initial photon
    number distribution; always within [-1, 1].
    """
    p = np.diagonal(state.matrix).real
    _, stay, flip = coefficient_arrays(t, params, state.n_max)
    return float(np.sum(p * (np.abs(stay) ** 2 - np.abs(flip) ** 2)))


def linear_entropy(state: FieldState) -> float:
    """1 - Tr rho^2; zero for pure states, at most 1."""
    return 1.0 - float(np.sum(np.abs(state.matrix) ** 2))


def mean_photon(state: FieldState) -> float:
    """Mean photon number sum_n n P_n."""
    p = np.diagonal(state.matrix).real
    return float(np.sum(np.arange(state.dim) * p))


def photon_distribution(state: FieldState, t: float, params: ModelParams) -> np.ndarray:
    """Evolved photon number distribution
    P_n(t) = P_n |stay_n|^2 + P_{n-1} |flip_{n-1}|^2."""
    p = np.diagonal(state.matrix).real
    _, stay, flip = coefficient_arrays(t, params, state.n_max)
    out = p * np.abs(stay) ** 2
    out[1:] += p[:-1] * np.abs(flip[:-1]) ** 2
    return out


def field_fidelity(ref: FieldState, other: FieldState) -> float:
    """Overlap fidelity Tr(rho_ref rho_other).

    For a pure reference this is the usual transition probability; for two
    mixed states it is the plain trace product, not the Uhlmann fidelity.
    Symmetric in its arguments and real for Hermitian inputs (any imaginary
    residue beyond 1e-12 is an error).
    """
    if ref.dim != other.dim:
        raise ValueError(f"dimension mismatch: {ref.dim} vs {other.dim}")
    val = complex(np.sum(ref.matrix.T * other.matrix))
    if abs(val.imag) > 1e-12:
        raise ValueError(f"fidelity not real: imaginary residue {val.imag:.3e}")
    return float(val.real)


@dataclass(frozen=True)
class TimeSeries:
    """Sampled scalar observable with times in 1/coupling and in t/t_r."""

    times: np.ndarray
    t_over_tr: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        u = np.asarray(self.t_over_tr, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if not (t.ndim == 1 and t.shape == u.shape == v.shape):
            raise ValueError("times, t_over_tr and values must be equal-length 1-d arrays")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        for name, arr in (("times", t), ("t_over_tr", u), ("values", v)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def to_csv(self, path_or_buf, meta: dict | None = None) -> None:
        """Write 't,t_over_tr,value' rows; meta entries become '# k=v' lines."""
        own = isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__")
        fh = open(path_or_buf, "w") if own else path_or_buf
        try:
            if meta:
                for k, v in meta.items():
                    fh.write(f"# {k}={v}\n")
            fh.write("t,t_over_tr,value\n")
            for t, u, v in zip(self.times, self.t_over_tr, self.values):
                fh.write(f"{float(t)!r},{float(u)!r},{float(v)!r}\n")
        finally:
            if own:
                fh.close()

    def to_csv_text(self, meta: dict | None = None) -> str:
        buf = io.StringIO()
        self.to_csv(buf, meta=meta)
        return buf.getvalue()


def default_time_grid(t_end: float, t_r: float, t_start: float = 0.0) -> np.ndarray:
    """Uniform grid with POINTS_PER_REVIVAL samples per revival time."""
    n = max(2, int(round(POINTS_PER_REVIVAL * (t_end - t_start) / t_r)) + 1)
    return np.linspace(t_start, t_end, n)


_QUANTITIES = {
    "inversion": lambda state, t, params: atomic_inversion(state, t, params),
    "entropy": lambda state, t, params: linear_entropy(evolve_field(state, t, params)),
    "mean_photon": lambda state, t, params: mean_photon(evolve_field(state, t, params)),
}


def _series_chunk(args):
    name_or_fn, state, params, chunk = args
    fn = _QUANTITIES[name_or_fn] if isinstance(name_or_fn, str) else name_or_fn
    return [fn(state, t, params) for t in chunk]


def series(
    quantity,
    state: FieldState,
    params: ModelParams,
    t_grid,
    t_r: float | None = None,
    jobs: int = 1,
) -> TimeSeries:
    """Sample a scalar observable over a time grid.

    ``quantity`` is one of 'inversion', 'entropy', 'mean_photon' or any
    callable (state, t, params) -> float.  Evaluation at distinct times is
    independent, so the grid may fan out over ``jobs`` workers; results are
    reassembled by time index.  If ``t_r`` is not given it is derived from
    the state's initial mean photon number.
    """
    if isinstance(quantity, str) and quantity not in _QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}; pick from {sorted(_QUANTITIES)}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_r is None:
        from .periodicity import revival_time

        t_r = revival_time(params, mean_photon(state))
    chunks = np.array_split(t_grid, max(1, min(jobs, t_grid.size)))
    parts = parallel_map(
        _series_chunk,
        [(quantity, state, params, chunk) for chunk in chunks if chunk.size],
        jobs=jobs,
    )
    values = np.concatenate([np.asarray(p, dtype=float) for p in parts])
    return TimeSeries(times=t_grid, t_over_tr=t_grid / t_r, values=values)
