"""One pointer coupled to the total of an observable over N identical pairs.

Sending N independently pre/post-selected pairs through the interferometers
and coupling a single pointer to the sum of the per-pair observables gives a
post-selected pointer state that factorizes over pairs.  For a two-outcome
observable with branch amplitudes alpha_0, alpha_1 the mixture has N+1 terms,

    c_k = C(N, k) * alpha_1^k * alpha_0^(N-k),   shift_k = g*(k*a1 + (N-k)*a0),

so the 4^N product space is never constructed.  The pointer concentrates at
N times the single-pair weak value with spread O(sqrt(N)); for the Hardy
NO·NO pair observable that mean is -N*g even though every shift is >= 0.

Numerics.  The signed binomial sums behind the closed-form moments cancel to
roughly |<post|pre>|^(2N), i.e. about 2N*log10((|a0|+|a1|)/|a0+a1|) decimal
digits below the largest term; double precision is exhausted near N ~ 25 for
the Hardy values.  Coefficients are therefore kept in log-magnitude/phase
form and all mixture sums run under mpmath at a working precision derived
from that bound (re-checked after the fact, retried wider if the margin was
consumed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.integrate import trapezoid

from .pointer import PointerMixture, SAMPLE_GRID_PADDING
from .prepost import PrePostEnsemble, branch_amplitudes, weak_value
from .qcore import Observable

MODE_GRID_POINTS = 4096
MODE_TOL_FACTOR = 1e-6
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CollectiveSpec:
    """N pairs, one two-outcome observable per pair, one shared pointer."""

    ensemble: PrePostEnsemble
    observable: Observable
    n_pairs: int
    g: float
    delta: float

    def __post_init__(self):
        if len(self.observable.eigenvalues) != 2:
            raise ValueError("collective coupling requires exactly two distinct eigenvalues")
        if self.n_pairs < 0 or int(self.n_pairs) != self.n_pairs:
            raise ValueError("n_pairs must be a non-negative integer")
        for nm, v in (("g", self.g), ("delta", self.delta)):
            if not np.isfinite(v) or v <= 0.0:
                raise ValueError(f"{nm} must be finite and positive, got {v}")
        if self.observable.dim != self.ensemble.dim:
            raise ValueError("observable and ensemble dimensions differ")

    @property
    def alphas(self) -> tuple[complex, complex]:
        """Branch amplitudes (alpha_0, alpha_1) of the single-pair ensemble."""
        return branch_amplitudes(self.observable, self.ensemble)

    @property
    def in_regime(self) -> bool:
        """Collective weak regime: delta at least g*sqrt(N)."""
        return self.delta >= self.g * math.sqrt(max(self.n_pairs, 1))


@dataclass(frozen=True)
class CollectiveMixture:
    """The N+1 term pointer mixture in log-magnitude/phase form."""

    n_pairs: int
    alphas: tuple[complex, complex]
    eigenvalues: tuple[float, float]
    g: float
    delta: float
    log_magnitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        for nm in ("log_magnitudes", "phases"):
            arr = np.array(getattr(self, nm), dtype=float)
            if arr.size != self.n_pairs + 1:
                raise ValueError(f"{nm} must have N+1 entries")
            arr.setflags(write=False)
            object.__setattr__(self, nm, arr)

    @property
    def shifts(self) -> np.ndarray:
        a0, a1 = self.eigenvalues
        k = np.arange(self.n_pairs + 1)
        return self.g * (self.n_pairs * a0 + (a1 - a0) * k)

    def coefficient(self, k: int) -> complex:
        """Materialize c_k as a double; may under/overflow for extreme N."""
        logmag = self.log_magnitudes[k]
        if logmag == -np.inf:
            mag = 0.0
        elif logmag > 709.0:  # above log(float max)
            mag = math.inf
        else:
            mag = math.exp(logmag)
        return mag * complex(math.cos(self.phases[k]), math.sin(self.phases[k]))

    def coefficients(self) -> np.ndarray:
        return np.array([self.coefficient(k) for k in range(self.n_pairs + 1)])

    def to_pointer_mixture(self) -> PointerMixture:
        """Double-precision view; valid while the coefficients fit in floats."""
        return PointerMixture(self.coefficients(), self.shifts, self.delta)


@dataclass(frozen=True)
class CollectiveStats:
    mean: float
    mode: float
    spread: float
    warnings: tuple[str, ...]


def collective_mixture(spec: CollectiveSpec) -> CollectiveMixture:
    """Binomial mixture of the collective coupling; equals pointer.mixture at N=1."""
    if spec.n_pairs < 1:
        raise ValueError("collective_mixture requires n_pairs >= 1")
    alpha0, alpha1 = spec.alphas
    n = spec.n_pairs
    logmag = np.empty(n + 1)
    phase = np.empty(n + 1)
    for k in range(n + 1):
        if (k > 0 and alpha1 == 0) or (k < n and alpha0 == 0):
            logmag[k] = -np.inf
            phase[k] = 0.0
            continue
        logmag[k] = (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
                     + (k * math.log(abs(alpha1)) if k else 0.0)
                     + ((n - k) * math.log(abs(alpha0)) if k < n else 0.0))
        phase[k] = k * np.angle(alpha1) + (n - k) * np.angle(alpha0)
    return CollectiveMixture(
        n_pairs=n,
        alphas=(alpha0, alpha1),
        eigenvalues=(float(spec.observable.eigenvalues[0]),
                     float(spec.observable.eigenvalues[1])),
        g=spec.g,
        delta=spec.delta,
        log_magnitudes=logmag,
        phases=phase,
    )


def collective_weak_value(spec: CollectiveSpec) -> complex:
    """N times the single-pair weak value (additivity, exact)."""
    return spec.n_pairs * weak_value(spec.observable, spec.ensemble).value


def success_probability(spec: CollectiveSpec) -> float:
    """Probability that all N pairs pass post-selection: |<post|pre>|^(2N)."""
    log_p = 2.0 * spec.n_pairs * math.log(abs(spec.ensemble.overlap))
    try:
        return math.exp(log_p)
    except OverflowError:  # pragma: no cover - |overlap| <= 1 keeps log_p <= 0
        return float("inf")


def _required_dps(spec: CollectiveSpec) -> int:
    alpha0, alpha1 = spec.alphas
    ratio = (abs(alpha0) + abs(alpha1)) / abs(alpha0 + alpha1)
    lost = 2.0 * spec.n_pairs * math.log10(max(ratio, 1.0))
    return max(50, int(math.ceil(lost)) + 40)


def _mp_coefficients(spec: CollectiveSpec):
    """Exact-binomial coefficients at the current mpmath precision."""
    alpha0, alpha1 = spec.alphas
    real_case = alpha0.imag == 0.0 and alpha1.imag == 0.0
    if real_case:
        a0, a1 = mp.mpf(alpha0.real), mp.mpf(alpha1.real)
    else:
        a0, a1 = mp.mpc(alpha0), mp.mpc(alpha1)
    n = spec.n_pairs
    coeffs = []
    for k in range(n + 1):
        term = mp.binomial(n, k)
        term = term * a1**k if k else term
        term = term * a0**(n - k) if k < n else term
        coeffs.append(term)
    return coeffs, real_case


def _banded_moments(spec: CollectiveSpec):
    """W, T1, T2 of the pairwise Gaussian-overlap sums, plus the lost-digit count.

    With shifts linear in k the overlap kernel depends only on |i-j|, so the
    (N+1)^2 pair sum collapses to N+1 diagonal bands.
    """
    n = spec.n_pairs
    a0, a1 = (float(e) for e in spec.observable.eigenvalues)
    b = mp.mpf(spec.g) * (a1 - a0)
    delta = mp.mpf(spec.delta)
    coeffs, real_case = _mp_coefficients(spec)
    w_tot = mp.mpf(0)
    t1_tot = mp.mpf(0)
    t2_tot = mp.mpf(0)
    max_abs = mp.mpf(0)
    for d in range(n + 1):
        kd = mp.e**(-(b * d) ** 2 / (2 * delta**2))
        band_w = mp.mpf(0)
        band_t1 = mp.mpf(0)
        band_t2 = mp.mpf(0)
        half_d = mp.mpf(d) / 2
        for i in range(n + 1 - d):
            if real_case:
                w = coeffs[i] * coeffs[i + d]
            else:
                w = (mp.conj(coeffs[i]) * coeffs[i + d]).real
            t = i + half_d
            band_w += w
            band_t1 += w * t
            band_t2 += w * t * t
            aw = abs(w)
            if aw > max_abs:
                max_abs = aw
        mult = 1 if d == 0 else 2
        w_tot += mult * band_w * kd
        t1_tot += mult * band_t1 * kd
        t2_tot += mult * band_t2 * kd
    if w_tot <= 0:
        raise ArithmeticError("normalization came out non-positive; precision exhausted")
    lost_digits = float(mp.log10(max_abs / w_tot)) if max_abs > 0 else 0.0
    return w_tot, t1_tot, t2_tot, lost_digits


def _log_density_fn(spec: CollectiveSpec):
    """log |phi(Q)|^2 up to a constant, as a Horner polynomial in exp(2BQ/d^2).

    Factoring the common Gaussian envelope off the k-th shifted term leaves a
    degree-N polynomial, so each evaluation costs one exp plus N multiply-adds
    at the working precision.
    """
    n = spec.n_pairs
    a0, a1 = (float(e) for e in spec.observable.eigenvalues)
    coeffs, real_case = _mp_coefficients(spec)
    delta = mp.mpf(spec.delta)
    s0 = mp.mpf(spec.g) * n * a0
    b = mp.mpf(spec.g) * (a1 - a0)
    damp_rev = list(reversed(
        [coeffs[k] * mp.e**(-(b * k) ** 2 / delta**2) for k in range(n + 1)]))

    def log_density(q: float) -> mp.mpf:
        qq = mp.mpf(q)
        r = mp.e**(2 * b * (qq - s0) / delta**2)
        acc = mp.mpf(0) if real_case else mp.mpc(0)
        for dk in damp_rev:
            acc = acc * r + dk
        mag = abs(acc)
        if mag == 0:
            return mp.mpf("-inf")
        return -2 * (qq - s0) ** 2 / delta**2 + 2 * mp.log(mag)

    return log_density


def _mode_search(spec: CollectiveSpec) -> float:
    """Global density mode: 4096-point scan, then golden-section refinement."""
    n = spec.n_pairs
    a0, a1 = (float(e) for e in spec.observable.eigenvalues)
    log_density = _log_density_fn(spec)
    shifts = spec.g * (n * a0 + (a1 - a0) * np.arange(n + 1))
    span = float(np.max(np.abs(shifts))) + SAMPLE_GRID_PADDING * spec.delta
    grid = np.linspace(-span, span, MODE_GRID_POINTS)
    values = [log_density(q) for q in grid]
    best = int(np.argmax(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]

    tol = MODE_TOL_FACTOR * spec.delta
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = log_density(x1), log_density(x2)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = log_density(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = log_density(x1)
    return float((lo + hi) / 2.0)


def density_grid(spec: CollectiveSpec,
                 points: int = MODE_GRID_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """Normalized collective position density on a plotting grid.

    Evaluated through the same high-precision log-density as the mode search
    (double precision garbles the signed sums well before N = 25), then
    rescaled so the trapezoid integral over the grid is 1.
    """
    if spec.n_pairs < 1:
        raise ValueError("density_grid requires n_pairs >= 1")
    shifts = collective_mixture(spec).shifts
    span = float(np.max(np.abs(shifts))) + SAMPLE_GRID_PADDING * spec.delta
    grid = np.linspace(-span, span, points)
    with mp.workdps(_required_dps(spec)):
        logp = _log_density_fn(spec)
        values = [logp(q) for q in grid]
    peak = max(values)
    pdf = np.array([float(mp.e**(v - peak)) if mp.isfinite(v) else 0.0 for v in values])
    pdf /= trapezoid(pdf, grid)
    return grid, pdf


def collective_pointer_stats(spec: CollectiveSpec) -> CollectiveStats:
    """Mean, global mode and standard deviation of the collective density.

    Closed-form Gaussian overlap sums evaluated in arbitrary precision; the
    working precision is retried wider whenever the observed cancellation
    eats into the safety margin.  A single-term mixture (one certain branch)
    short-circuits to the exact Gaussian answer.
    """
    if spec.n_pairs < 1:
        raise ValueError("collective_pointer_stats requires n_pairs >= 1")
    warnings: tuple[str, ...] = ()
    if not spec.in_regime:
        warnings = (
            f"delta={spec.delta:g} below collective weak-regime scale "
            f"g*sqrt(N)={spec.g * math.sqrt(spec.n_pairs):g}; "
            "results describe a strong measurement",
        )

    alpha0, alpha1 = spec.alphas
    a0, a1 = (float(e) for e in spec.observable.eigenvalues)
    if alpha0 == 0 or alpha1 == 0:
        eig = a1 if alpha0 == 0 else a0
        center = spec.g * spec.n_pairs * eig
        return CollectiveStats(mean=center, mode=center,
                               spread=spec.delta / 2.0, warnings=warnings)

    dps = _required_dps(spec)
    for _ in range(4):
        with mp.workdps(dps):
            try:
                w_tot, t1_tot, t2_tot, lost = _banded_moments(spec)
            except ArithmeticError:
                dps = 2 * dps
                continue
            if dps - lost < 25.0:
                dps = int(lost) + 60
                continue
            t1 = t1_tot / w_tot
            t2 = t2_tot / w_tot
            bshift = mp.mpf(spec.g) * (a1 - a0)
            mean = mp.mpf(spec.g) * spec.n_pairs * a0 + bshift * t1
            var = bshift**2 * (t2 - t1**2) + mp.mpf(spec.delta) ** 2 / 4
            mode = _mode_search(spec)
            return CollectiveStats(mean=float(mean), mode=mode,
                                   spread=float(mp.sqrt(var)), warnings=warnings)
    raise ArithmeticError("could not reach a stable working precision")
