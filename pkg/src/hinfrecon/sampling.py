"""Classical reconstruction baselines: sinc and consistent-resampling splines.

Implements interpolation kernels, truncated sinc reconstruction, the Gram
(cross-correlation) filter of a sampling/hold kernel pair, its stable
two-sided inversion, and the root classification that decides whether the
inverse admits a causal stable realization.

Inner products use the plain Lebesgue integral and the correlation
convention <x, k(.-nh)> = integral x(tau) k(tau - nh) dtau; for symmetric
kernels this coincides with the convolution form of a sampling device.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Kernel",
    "LaurentFilter",
    "RealizabilityReport",
    "GramNotInvertibleError",
    "bspline_value",
    "kernel_eval",
    "sinc_reconstruct",
    "gram_filter",
    "analyze_roots",
    "invert_gram",
    "causal_inverse",
    "sample_with_kernel",
    "hold_with_kernel",
    "consistency_residual",
]

_ROOT_TOL = 1e-9
_TRIM_TOL = 1e-14

MAX_BSPLINE_ORDER = 7


class GramNotInvertibleError(ValueError):
    """The Gram filter has zeros on the unit circle and cannot be inverted."""

    def __init__(self, report):
        self.report = report
        on = [r for r in report.roots
              if abs(abs(r) - 1.0) <= _ROOT_TOL]
        super().__init__(
            f"Gram filter has {report.on_circle_count} zero(s) on the unit "
            f"circle: {on}"
        )


def bspline_value(order, x):
    """Centered B-spline of the given order at unit scale.

    Order q is the (q+1)-fold convolution of the centered unit box; support
    is [-(q+1)/2, (q+1)/2].  Closed form via truncated powers, exact for
    the supported orders.
    """
    if order < 0 or order > MAX_BSPLINE_ORDER:
        raise ValueError(f"bspline order must be in [0, {MAX_BSPLINE_ORDER}]")
    x = np.asarray(x, dtype=float)
    if order == 0:
        return np.where((x >= -0.5) & (x < 0.5), 1.0, 0.0)
    half = (order + 1) / 2.0
    out = np.zeros_like(x)
    for k in range(order + 2):
        u = x + half - k
        out += ((-1.0) ** k) * math.comb(order + 1, k) * np.where(
            u > 0.0, u, 0.0) ** order
    return out / math.factorial(order)


@dataclass(frozen=True)
class Kernel:
    """Reconstruction / acquisition kernel at scale h (shifts step nh).

    kind is one of 'sinc', 'bspline', 'impulse' or 'table'.  The impulse
    kind is the Dirac mass at zero (the ideal sampler); it has no pointwise
    values but integrates by evaluation.  Table kernels are compactly
    supported sampled functions, evaluated by linear interpolation.
    """

    kind: str
    scale: float
    order: int = 0
    table_values: np.ndarray | None = None
    table_step: float = 0.0
    table_start: float = 0.0

    def __post_init__(self):
        if self.kind not in ("sinc", "bspline", "impulse", "table"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not (self.scale > 0):
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.kind == "bspline" and not (0 <= self.order <= MAX_BSPLINE_ORDER):
            raise ValueError(
                f"bspline order must be in [0, {MAX_BSPLINE_ORDER}], "
                f"got {self.order}"
            )
        if self.kind == "table":
            v = np.asarray(self.table_values, dtype=float)
            if v.ndim != 1 or v.size < 2:
                raise ValueError("table kernel needs >= 2 samples")
            if not (self.table_step > 0):
                raise ValueError("table kernel needs a positive step")
            v = v.copy()
            v.setflags(write=False)
            object.__setattr__(self, "table_values", v)

    @staticmethod
    def sinc(scale):
        return Kernel(kind="sinc", scale=scale)

    @staticmethod
    def bspline(order, scale):
        return Kernel(kind="bspline", scale=scale, order=order)

    @staticmethod
    def impulse(scale):
        return Kernel(kind="impulse", scale=scale)

    @staticmethod
    def table(values, step, scale, start=None):
        values = np.asarray(values, dtype=float)
        if start is None:
            start = -0.5 * step * (values.size - 1)
        return Kernel(kind="table", scale=scale, table_values=values,
                      table_step=step, table_start=start)

    def support(self):
        """(lo, hi) support interval, or None for infinite support."""
        if self.kind == "sinc":
            return None
        if self.kind == "impulse":
            return (0.0, 0.0)
        if self.kind == "bspline":
            half = (self.order + 1) / 2.0 * self.scale
            return (-half, half)
        hi = self.table_start + self.table_step * (self.table_values.size - 1)
        return (self.table_start, hi)

    def label(self):
        if self.kind == "bspline":
            return f"bspline:{self.order}"
        return self.kind


def kernel_eval(kernel, t):
    """Pointwise kernel value(s) at time(s) t (seconds).

    The impulse kind is a distribution: its pointwise value is reported as
    0 everywhere (it contributes through integrals only).
    """
    t = np.asarray(t, dtype=float)
    if kernel.kind == "sinc":
        out = np.sinc(t / kernel.scale)
    elif kernel.kind == "bspline":
        out = bspline_value(kernel.order, t / kernel.scale)
    elif kernel.kind == "impulse":
        out = np.zeros_like(t)
    else:
        pos = (t - kernel.table_start) / kernel.table_step
        out = np.interp(pos, np.arange(kernel.table_values.size),
                        kernel.table_values, left=0.0, right=0.0)
    if out.ndim == 0:
        return float(out)
    return out


def sinc_reconstruct(samples, t, truncation):
    """Truncated cardinal-series value at time(s) t.

    Sums the 2*truncation + 1 sample terms nearest to t; sample n sits at
    samples.start_time + n*step.
    """
    if truncation < 1:
        raise ValueError(f"truncation must be >= 1, got {truncation}")
    values = samples.scalar()
    if values.size == 0:
        raise ValueError("empty sample sequence")
    h = samples.step
    t = np.asarray(t, dtype=float)
    scalar_in = t.ndim == 0
    t = np.atleast_1d(t)
    pos = (t - samples.start_time) / h
    out = np.zeros_like(pos)
    centers = np.rint(pos).astype(int)
    for i, (p, c) in enumerate(zip(pos, centers)):
        lo = max(0, c - truncation)
        hi = min(values.size - 1, c + truncation)
        if lo > hi:
            continue
        n = np.arange(lo, hi + 1)
        out[i] = np.sinc(p - n) @ values[lo:hi + 1]
    return float(out[0]) if scalar_in else out


def _adaptive_simpson(f, a, b, tol):
    """Adaptive Simpson quadrature with absolute tolerance `tol`.

    The first few levels split unconditionally: symmetric integrands can
    make the very first error estimate vanish by coincidence.
    """
    def recurse(a, fa, m, fm, b, fb, whole, tol, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        settled = abs(left + right - whole) <= 15.0 * tol and depth <= 42
        if depth <= 0 or settled:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a, fa, lm, flm, m, fm, left, tol / 2.0, depth - 1)
                + recurse(m, fm, rm, frm, b, fb, right, tol / 2.0, depth - 1))

    if not (b > a):
        return 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return recurse(a, fa, m, fm, b, fb, whole, tol, 48)


@dataclass(frozen=True)
class LaurentFilter:
    """Finite two-sided filter: coefficient c[n] at z^{-n}, n in [n_min, n_max]."""

    coeffs: np.ndarray
    n_min: int
    period: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float)).copy()
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs contain non-finite entries")
        if not np.any(c):
            raise ValueError("at least one coefficient must be nonzero")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if not (self.period > 0):
            raise ValueError(f"period must be positive, got {self.period}")

    @property
    def n_max(self):
        return self.n_min + self.coeffs.size - 1

    def indices(self):
        return np.arange(self.n_min, self.n_max + 1)

    def __getitem__(self, n):
        if self.n_min <= n <= self.n_max:
            return float(self.coeffs[n - self.n_min])
        return 0.0

    def trimmed(self, threshold=0.0):
        """Drop |c| <= threshold coefficients from both ends."""
        c = self.coeffs
        nz = np.nonzero(np.abs(c) > threshold)[0]
        lo, hi = nz[0], nz[-1]
        return LaurentFilter(c[lo:hi + 1], self.n_min + lo, self.period)

    def response(self, theta):
        theta = np.asarray(theta, dtype=float)
        n = self.indices()
        return np.exp(-1j * np.multiply.outer(theta, n)) @ self.coeffs

    def convolve(self, other):
        if not np.isclose(self.period, other.period, rtol=1e-12):
            raise ValueError("period mismatch in convolution")
        coeffs = np.convolve(self.coeffs, other.coeffs)
        return LaurentFilter(coeffs, self.n_min + other.n_min, self.period)


@dataclass(frozen=True)
class RealizabilityReport:
    """Unit-circle classification of the zeros of a Laurent polynomial.

    `causal_stable` holds when every root lies strictly inside the circle
    (the inverse is then a causal stable filter); `noncausal_stable` when
    the inverse is stable only as a two-sided (anticausal-part) expansion.
    `tail_bound` estimates the magnitude dropped by truncating the inverse
    impulse response, when an inversion produced the report.
    """

    roots: np.ndarray
    inside_count: int
    outside_count: int
    on_circle_count: int
    invertible: bool
    causal_stable: bool
    noncausal_stable: bool
    tail_bound: float | None = None


def _classified_roots(flt):
    """z-plane roots of the Laurent polynomial, companion + Newton polish."""
    f = flt.trimmed()
    c = f.coeffs  # descending powers of z: c[0] z^d + ... + c[-1]
    d = c.size - 1
    if d == 0:
        return np.zeros(0, dtype=complex)
    roots = np.roots(c)
    dc = np.polyder(c)
    for _ in range(1):
        val = np.polyval(c, roots)
        der = np.polyval(dc, roots)
        ok = np.abs(der) > 0
        roots[ok] = roots[ok] - val[ok] / der[ok]
    return roots


def analyze_roots(a12):
    """Classify the zeros of a Laurent filter against the unit circle."""
    roots = _classified_roots(a12)
    mags = np.abs(roots)
    on = np.abs(mags - 1.0) <= _ROOT_TOL
    inside = (~on) & (mags < 1.0)
    outside = (~on) & (mags > 1.0)
    invertible = int(on.sum()) == 0
    causal_stable = invertible and int(outside.sum()) == 0
    return RealizabilityReport(
        roots=roots,
        inside_count=int(inside.sum()),
        outside_count=int(outside.sum()),
        on_circle_count=int(on.sum()),
        invertible=invertible,
        causal_stable=causal_stable,
        noncausal_stable=invertible and not causal_stable,
    )


def gram_filter(phi1, phi2, max_lag=64, quad_tol=1e-12):
    """Cross-correlation filter c[n] = <phi1(.-nh), phi2> of a kernel pair.

    Closed forms cover the impulse pairings (evaluation), same-scale
    B-spline pairs (a higher-order B-spline value) and sinc-sinc
    (orthogonality); everything else integrates by adaptive Simpson.
    Coefficients below 1e-14 at the support edges are trimmed; pairings
    with a sinc leg are windowed to |n| <= max_lag since their tails decay
    too slowly to reach the trim threshold.
    """
    h = phi1.scale
    if not np.isclose(phi2.scale, h, rtol=1e-12):
        raise ValueError("kernel scales must agree")
    if phi1.kind == "impulse" and phi2.kind == "impulse":
        raise ValueError("impulse-impulse pairing diverges")

    if phi1.kind == "impulse":
        coeffs, n_min = _finite_lag_values(
            lambda n: kernel_eval(phi2, n * h), phi2.support(), h, max_lag)
    elif phi2.kind == "impulse":
        coeffs, n_min = _finite_lag_values(
            lambda n: kernel_eval(phi1, -n * h), _neg(phi1.support()), h,
            max_lag)
    elif phi1.kind == "bspline" and phi2.kind == "bspline":
        q = phi1.order + phi2.order + 1
        half = (q + 1) // 2 + 1
        coeffs, n_min = (
            h * bspline_value(q, np.arange(-half, half + 1, dtype=float)),
            -half,
        )
    elif phi1.kind == "sinc" and phi2.kind == "sinc":
        coeffs, n_min = np.array([h]), 0
    else:
        coeffs, n_min = _quadrature_gram(phi1, phi2, h, max_lag, quad_tol)

    flt = LaurentFilter(coeffs, n_min, h)
    return flt.trimmed(_TRIM_TOL)


def _neg(support):
    if support is None:
        return None
    lo, hi = support
    return (-hi, -lo)


def _finite_lag_values(value_at, shifted_support, h, max_lag):
    if shifted_support is None:
        lags = np.arange(-max_lag, max_lag + 1)
    else:
        lo, hi = shifted_support
        lags = np.arange(int(np.floor(lo / h)) - 1, int(np.ceil(hi / h)) + 2)
    vals = np.array([value_at(n) for n in lags], dtype=float)
    return vals, int(lags[0])


def _quadrature_gram(phi1, phi2, h, max_lag, quad_tol):
    s1 = phi1.support()
    s2 = phi2.support()
    if s1 is None and s2 is None:
        raise ValueError(
            "at least one kernel must be compactly supported for quadrature"
        )
    if s2 is None:
        n_lo, n_hi = -max_lag, max_lag
    elif s1 is None:
        n_lo, n_hi = -max_lag, max_lag
    else:
        n_lo = int(np.floor((s2[0] - s1[1]) / h)) - 1
        n_hi = int(np.ceil((s2[1] - s1[0]) / h)) + 1

    vals = []
    for n in range(n_lo, n_hi + 1):
        if s1 is not None and s2 is not None:
            lo = max(s1[0] + n * h, s2[0])
            hi = min(s1[1] + n * h, s2[1])
        elif s2 is not None:
            lo, hi = s2
        else:
            lo, hi = s1[0] + n * h, s1[1] + n * h
        if hi <= lo:
            vals.append(0.0)
            continue
        f = lambda tau, n=n: (kernel_eval(phi1, tau - n * h)
                              * kernel_eval(phi2, tau))
        vals.append(_adaptive_simpson(f, lo, hi, quad_tol))
    return np.array(vals), n_lo


def invert_gram(a12, tail_length=64):
    """Stable two-sided inverse of an invertible Gram filter.

    Factors the Laurent polynomial, expands 1/A12 by partial fractions
    (causal series for roots inside the circle, anticausal for roots
    outside), and truncates to `tail_length` coefficients per side.
    Returns (inverse filter, realizability report with tail bound).
    Raises `GramNotInvertibleError` for roots on the unit circle.
    """
    if tail_length < 0:
        raise ValueError(f"tail_length must be >= 0, got {tail_length}")
    flt = a12.trimmed()
    report = analyze_roots(flt)
    if not report.invertible:
        raise GramNotInvertibleError(report)

    c = flt.coeffs
    n_min = flt.n_min
    d = c.size - 1
    T = tail_length
    out = np.zeros(2 * T + 1, dtype=complex)
    tail = 0.0

    if d == 0:
        n = -n_min
        if -T <= n <= T:
            out[n + T] = 1.0 / c[0]
    else:
        # R(u) = sum_i coeffs[i] u^i with u = 1/z; u-roots are the
        # reciprocals of the reported z-roots.
        asc = c
        u_roots = np.roots(asc[::-1])
        dasc = np.polyder(asc[::-1])
        val = np.polyval(asc[::-1], u_roots)
        der = np.polyval(dasc, u_roots)
        ok = np.abs(der) > 0
        u_roots[ok] -= val[ok] / der[ok]
        if _has_repeated(u_roots):
            out_r, tail = _fft_inverse(flt, T)
            inv = LaurentFilter(out_r, -T, a12.period)
            return inv, _with_tail(report, tail)
        der = np.polyval(dasc, u_roots)
        betas = 1.0 / der
        for u_i, beta in zip(u_roots, betas):
            r = abs(u_i)
            if r > 1.0:
                # z-root inside the circle: causal branch
                # term at n = k - n_min is -beta * u_i^{-(k+1)}, k >= 0
                k_lo = max(0, -T + n_min)
                k_hi = T + n_min
                for k in range(k_lo, k_hi + 1):
                    out[k - n_min + T] += -beta * u_i ** (-(k + 1))
                q = 1.0 / r
                tail += abs(beta) * q ** (k_hi + 2) / (1.0 - q)
            else:
                # z-root outside: anticausal branch
                # term at n = -(n_min + k + 1) is beta * u_i^k, k >= 0
                k_lo = max(0, -T - n_min - 1)
                k_hi = T - n_min - 1
                for k in range(k_lo, k_hi + 1):
                    out[-(n_min + k + 1) + T] += beta * u_i ** k
                tail += abs(beta) * r ** (k_hi + 1) / (1.0 - r)

    if np.max(np.abs(out.imag)) > 1e-8 * max(1.0, np.max(np.abs(out.real))):
        raise RuntimeError("partial fraction expansion produced complex taps")
    inv = LaurentFilter(out.real, -T, a12.period)
    return inv, _with_tail(report, float(tail))


def _with_tail(report, tail):
    return RealizabilityReport(
        roots=report.roots,
        inside_count=report.inside_count,
        outside_count=report.outside_count,
        on_circle_count=report.on_circle_count,
        invertible=report.invertible,
        causal_stable=report.causal_stable,
        noncausal_stable=report.noncausal_stable,
        tail_bound=tail,
    )


def _has_repeated(roots, tol=1e-8):
    for i in range(roots.size):
        for j in range(i + 1, roots.size):
            if abs(roots[i] - roots[j]) < tol:
                return True
    return False


def _fft_inverse(flt, T):
    """Fourier-series inverse on the unit circle (repeated-root fallback)."""
    M = 1 << 14
    theta = 2.0 * np.pi * np.arange(M) / M
    vals = 1.0 / flt.response(theta)
    spec = np.fft.ifft(vals)
    out = np.empty(2 * T + 1)
    for n in range(-T, T + 1):
        out[n + T] = spec[n % M].real
    return out, float(np.max(np.abs(spec[T + 1:M - T - 1]))) if M > 2 * T + 2 else 0.0


def causal_inverse(a12, length):
    """Impulse response of the inverse realized causally (long division).

    The expansion ignores the pure index shift z^{n_min}; when the Laurent
    polynomial has roots outside the unit circle the returned sequence
    grows geometrically, which is exactly why such filters are unusable in
    causal form.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    flt = a12.trimmed()
    c = flt.coeffs
    if c[0] == 0.0:
        raise ValueError("leading coefficient vanishes after trimming")
    k = np.zeros(length)
    k[0] = 1.0 / c[0]
    for n in range(1, length):
        acc = 0.0
        for i in range(1, min(n, c.size - 1) + 1):
            acc += c[i] * k[n - i]
        k[n] = -acc / c[0]
    return k


def sample_with_kernel(x, phi1, num_samples, first_index=0):
    """Generalized samples c[n] = <x, phi1(.-nh)> from a dense grid.

    The impulse kernel reduces to grid lookup at t = nh; other kernels are
    integrated by the trapezoid rule on the grid.  Sample n is taken at
    shift (first_index + n) * h on the absolute time axis of `x`.
    """
    sig = x.scalar()
    h = phi1.scale
    dt = x.step
    times = x.times()
    out = np.empty(num_samples)
    if phi1.kind == "impulse":
        for j in range(num_samples):
            t = (first_index + j) * h
            pos = (t - x.start_time) / dt
            idx = int(round(pos))
            if abs(pos - idx) > 1e-6 or not (0 <= idx < sig.size):
                raise ValueError(
                    f"sample time {t!r} does not land on the signal grid"
                )
            out[j] = sig[idx]
        return out
    for j in range(num_samples):
        t = (first_index + j) * h
        w = kernel_eval(phi1, times - t)
        out[j] = np.trapezoid(sig * w, dx=dt)
    return out


def hold_with_kernel(coeffs, phi2, times, first_index=0):
    """Synthesis sum y(t) = sum_n coeffs[n] phi2(t - (first_index+n) h)."""
    coeffs = np.asarray(coeffs, dtype=float)
    times = np.asarray(times, dtype=float)
    h = phi2.scale
    out = np.zeros_like(times)
    for j, cj in enumerate(coeffs):
        if cj == 0.0:
            continue
        out += cj * kernel_eval(phi2, times - (first_index + j) * h)
    return out


def consistency_residual(x_samples, y, phi1, sample_start=0):
    """Largest mismatch between given samples and resampled y.

    Recomputes <y, phi1(.-nh)> by quadrature on the grid of `y` for every
    index n whose kernel support lies fully inside the grid, and returns
    max_n |x_samples[n] - recomputed|.  Requires at least 16 grid points
    per period h.
    """
    x_samples = np.asarray(x_samples, dtype=float)
    h = phi1.scale
    if h / y.step < 16.0 - 1e-9:
        raise ValueError(
            f"grid too coarse: {h / y.step:.3g} points per period, need >= 16"
        )
    t0 = y.start_time
    t1 = t0 + y.step * (len(y) - 1)
    support = phi1.support()
    resampled = sample_with_kernel(y, phi1, x_samples.size, sample_start)

    keep = np.ones(x_samples.size, dtype=bool)
    if support is not None:
        lo, hi = support
        for j in range(x_samples.size):
            t = (sample_start + j) * h
            if t + lo < t0 - 1e-12 or t + hi > t1 + 1e-12:
                keep[j] = False
    if not np.any(keep):
        raise ValueError("no sample index has full kernel support in the grid")
    return float(np.max(np.abs(x_samples[keep] - resampled[keep])))
