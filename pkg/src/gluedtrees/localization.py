"""Localization lengths: Lloyd closed form, transfer matrices, eigenstate fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import SpectralDecomposition
from .eigen import _jit
from .line import DisorderSpec, sample_disorder
from . import rng

SQRT8 = math.sqrt(8.0)
RENORM_EVERY = 16
N_BATCHES = 32
MIN_TM_STEPS = 10_000
MIN_SCALING_STEPS = 1_000_000
_CHUNK = 1 << 20


class ConsistencyError(ArithmeticError):
    pass


class Extended:
    """Tag for an infinite localization length (extended state)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "EXTENDED"

    def __float__(self):
        return math.inf

    def __reduce__(self):
        return (Extended, ())


EXTENDED = Extended()


def thouless_inverse_length(E, gamma: float, delta: float):
    """1/l from the Lloyd formula, vectorized over E; 0 means extended.

    cosh(1/l) = [sqrt((sqrt8 g + e)^2 + d^2) + sqrt((sqrt8 g - e)^2 + d^2)] / (sqrt32 g)
    with e = E - 3g.  The excess of the right-hand side over 1 is formed
    without cancellation so tiny widths stay resolvable.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if not delta >= 0:
        raise ValueError("delta must be >= 0")
    e = np.asarray(E, dtype=float) - 3.0 * gamma
    a = np.abs(SQRT8 * gamma + e)
    b = np.abs(SQRT8 * gamma - e)
    d2 = float(delta) ** 2
    A = np.hypot(a, delta)
    B = np.hypot(b, delta)
    with np.errstate(invalid="ignore", divide="ignore"):
        ta = np.where(A + a > 0, d2 / (A + a), 0.0)
        tb = np.where(B + b > 0, d2 / (B + b), 0.0)
    x = (ta + tb + (a + b - 2.0 * SQRT8 * gamma)) / (4.0 * math.sqrt(2.0) * gamma)
    if np.any(x < -1e-15):
        raise ConsistencyError("Lloyd right-hand side fell below 1")
    x = np.maximum(x, 0.0)
    lam = np.log1p(x + np.sqrt(x * (x + 2.0)))
    return np.where(x <= 1e-15, 0.0, lam)


def thouless_length(E: float, gamma: float, delta: float) -> float | Extended:
    lam = float(thouless_inverse_length(E, gamma, delta))
    return EXTENDED if lam == 0.0 else 1.0 / lam


def max_localization_length(gamma: float, delta: float, check_grid: bool = True) -> float | Extended:
    """Largest Lloyd length, attained at the band centre E = 3*gamma.

    For delta << sqrt(8)*gamma this approaches sqrt(8)*gamma/delta.
    """
    if delta == 0:
        return EXTENDED
    if not delta > 0:
        raise ValueError("delta must be positive")
    if check_grid:
        E = 3.0 * gamma + gamma * np.arange(-600, 601) * 0.01
        best = E[int(np.argmin(thouless_inverse_length(E, gamma, delta)))]
        if abs(best - 3.0 * gamma) > 0.01 * gamma + 1e-12:
            raise ConsistencyError(f"Lloyd length peaks at E={best}, not at the band centre")
    return thouless_length(3.0 * gamma, gamma, delta)


def asymptotic_max_length(gamma: float, delta: float) -> float:
    return SQRT8 * gamma / delta


# -- transfer matrices --------------------------------------------------------

@_jit
def _tm_kernel(eps, shift, inv_hop, x, y, every):
    acc = 0.0
    for j in range(eps.shape[0]):
        z = (shift + eps[j]) * inv_hop * x - y
        y = x
        x = z
        if (j + 1) % every == 0 or abs(x) > 1e150:
            r = math.sqrt(x * x + y * y)
            acc += math.log(r)
            x /= r
            y /= r
    return acc, x, y


@dataclass(frozen=True)
class LyapunovEstimate:
    rate: float  # 1/l per site
    stderr: float
    steps: int
    batch_rates: np.ndarray = field(repr=False)

    @property
    def length(self) -> float | Extended:
        return EXTENDED if self.rate <= 0 else 1.0 / self.rate


def lyapunov_exponent(
    E: float, gamma: float, spec: DisorderSpec, steps: int, seed: int, batches: int = N_BATCHES
) -> LyapunovEstimate:
    """Growth rate of psi_{j+1} = ((3g + eps_j - E)/(sqrt2 g)) psi_j - psi_{j-1}.

    One chain of ``steps`` sites, renormalized every 16 steps, split into
    contiguous batches for a batch-means standard error.  Site j draws its
    disorder from counter position j of stream ``seed``.
    """
    if steps < MIN_TM_STEPS:
        raise ValueError(f"steps must be >= {MIN_TM_STEPS}, got {steps}")
    shift = 3.0 * gamma - E
    inv_hop = 1.0 / (math.sqrt(2.0) * gamma)
    edges = np.linspace(0, steps, batches + 1).astype(np.int64)
    x, y = 1.0, 0.0
    rates = np.empty(batches)
    for b in range(batches):
        acc = 0.0
        lo, hi = int(edges[b]), int(edges[b + 1])
        for start in range(lo, hi, _CHUNK):
            count = min(_CHUNK, hi - start)
            eps = sample_disorder(spec, count, seed, offset=start)
            part, x, y = _tm_kernel(eps, shift, inv_hop, x, y, RENORM_EVERY)
            acc += part
        r = math.hypot(x, y)
        acc += math.log(r)
        x, y = x / r, y / r
        rates[b] = acc / (hi - lo)
    weights = np.diff(edges) / steps
    rate = float(np.dot(weights, rates))
    stderr = float(np.std(rates, ddof=1) / math.sqrt(batches))
    return LyapunovEstimate(rate, stderr, steps, rates)


def lyapunov_mean(E: float, gamma: float, spec: DisorderSpec, steps: int, seeds: Sequence[int]) -> LyapunovEstimate:
    """Average of independent chains; the error combines their batch errors."""
    ests = [lyapunov_exponent(E, gamma, spec, steps, s) for s in seeds]
    rates = np.array([e.rate for e in ests])
    if len(ests) > 1:
        stderr = float(np.std(rates, ddof=1) / math.sqrt(len(ests)))
    else:
        stderr = ests[0].stderr
    return LyapunovEstimate(float(rates.mean()), stderr, steps * len(ests), rates)


# -- eigenstate envelopes -----------------------------------------------------

@dataclass(frozen=True)
class LocalizationEstimate:
    center: int
    length: float | Extended
    prefactor: float
    fit_residual: float
    energy: float
    reliable: bool
    reason: str = ""


def _fit_flank(dist: np.ndarray, amp: np.ndarray, floor: float, min_points: int):
    keep = (amp > floor) & (dist > 0)
    if keep.sum() < min_points:
        return None
    xs, ys = dist[keep], np.log(amp[keep])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    return -slope, intercept, float(np.sum(resid**2)), int(keep.sum()), float(xs.max())


def eigenstate_envelope(
    decomp: SpectralDecomposition, index: int, floor: float = 1e-13, min_points: int = 8
) -> LocalizationEstimate:
    """Fit |<E|j>| ~ N exp(-|j - j0|/l) on each side of the peak j0.

    The two flank decay rates are averaged.  The estimate is marked unreliable
    when the fitted envelope does not fall by at least a decade, or when the
    peak sits within 2*l of either end of the chain.
    """
    v = np.abs(decomp.vectors[:, index])
    L = v.shape[0]
    j0 = int(np.argmax(v))
    energy = float(decomp.energies[index])
    j = np.arange(L)
    fits = [f for f in (
        _fit_flank(j0 - j[:j0 + 1], v[:j0 + 1], floor, min_points),
        _fit_flank(j[j0:] - j0, v[j0:], floor, min_points),
    ) if f is not None]
    if not fits:
        return LocalizationEstimate(j0, EXTENDED, float(v[j0]), math.nan, energy, False, "too few points above floor")
    rate = float(np.mean([f[0] for f in fits]))
    prefactor = float(math.exp(np.mean([f[1] for f in fits])))
    npts = sum(f[3] for f in fits)
    residual = math.sqrt(sum(f[2] for f in fits) / npts)
    if rate <= 0:
        return LocalizationEstimate(j0, EXTENDED, prefactor, residual, energy, False, "no exponential decay")
    length = 1.0 / rate
    span = max(f[0] * f[4] for f in fits)
    if span < math.log(10.0):
        return LocalizationEstimate(j0, length, prefactor, residual, energy, False, "less than one decade of decay")
    if min(j0, L - 1 - j0) < 2.0 * length:
        return LocalizationEstimate(j0, length, prefactor, residual, energy, False, "peak within 2l of a chain end")
    return LocalizationEstimate(j0, length, prefactor, residual, energy, True)


# -- scaling with disorder strength -------------------------------------------

@dataclass(frozen=True)
class ScalingResult:
    family: str
    deltas: np.ndarray
    lengths: np.ndarray
    stderrs: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    monotone: bool
    reference: np.ndarray | None = None  # Lloyd lengths, Cauchy only

    def summary(self) -> dict:
        return {
            "family": self.family,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "monotone": self.monotone,
            "n_points": int(self.deltas.shape[0]),
        }


def loglog_fit(x, y) -> tuple[float, float, float]:
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    return float(slope), float(intercept), 1.0 - ss_res / ss_tot


def scaling_exponent(
    family: str,
    gamma: float,
    delta_grid: Sequence[float],
    steps: int = MIN_SCALING_STEPS,
    seeds: Sequence[int] = (0,),
) -> ScalingResult:
    """Band-centre length l(delta) from transfer matrices and its log-log slope."""
    deltas = np.asarray(delta_grid, dtype=float)
    if deltas.ndim != 1 or deltas.shape[0] < 2 or np.any(np.diff(deltas) <= 0) or deltas[0] <= 0:
        raise ValueError("delta grid must be positive and strictly increasing")
    if deltas[-1] / deltas[0] < 10.0 * (1 - 1e-12):
        raise ValueError("delta grid must span at least one decade")
    if steps < MIN_SCALING_STEPS:
        raise ValueError(f"scaling runs need >= {MIN_SCALING_STEPS} steps per point")
    lengths, errs = [], []
    for d in deltas:
        point_seeds = [rng.child_seed(s, family, float(d)) for s in seeds]
        est = lyapunov_mean(3.0 * gamma, gamma, DisorderSpec(family, float(d)), steps, point_seeds)
        lengths.append(1.0 / est.rate)
        errs.append(est.stderr / est.rate**2)
    lengths, errs = np.array(lengths), np.array(errs)
    slope, intercept, r2 = loglog_fit(deltas, lengths)
    # l should fall as delta grows; a rise beyond two combined errors is flagged
    rise = np.diff(lengths) - 2.0 * np.hypot(errs[1:], errs[:-1])
    reference = None
    if family == "cauchy":
        reference = np.array([1.0 / float(thouless_inverse_length(3.0 * gamma, gamma, d)) for d in deltas])
    return ScalingResult(family, deltas, lengths, errs, slope, intercept, r2, bool(np.all(rise <= 0)), reference)
