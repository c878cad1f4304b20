"""Fitting utilities that turn sampled trajectories into the handful of
numbers the model predicts: the envelope collapse time tau_e, recurrence
suppression time tau_d, classical relaxation time, and the spectral envelope
width.

All fitters work on peak sequences or spectra in log space, where every
model here is linear or quadratic and the fits stay closed-form least
squares. Nothing is iterative, so results are exactly reproducible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import SystemParams


@dataclass(frozen=True)
class BumpFit:
    """Gaussian envelope fit of one collapse/revival bump."""

    tau_e: float
    center: float
    height: float
    n_peaks: int
    residual_rms: float


@dataclass(frozen=True)
class RelaxationFit:
    """Exponential envelope fit of a classical ring-down."""

    decay_time: float
    amplitude: float
    n_peaks: int
    residual_rms: float


@dataclass(frozen=True)
class DecoherenceFit:
    """Fitted coherence-decay time with its extraction route.

    method is "peak-ratio" (recurrence heights) or "cat-overlap"
    (off-diagonal matrix element of a two-component superposition).
    uncertainty is the 1-sigma propagation of the least-squares residual
    onto tau_d; nan when the fit has no spare degrees of freedom.
    """

    tau_d: float
    rate: float
    method: str
    uncertainty: float
    n_points: int
    residual_rms: float


@dataclass(frozen=True)
class SpectrumFit:
    """Gaussian fit of the dominant spectral lobe."""

    center: float
    width: float
    tau_e_estimate: float
    n_bins: int
    residual_rms: float


# ---------------------------------------------------------------------------
# peak extraction


def extract_envelope_peaks(taus, x, floor_frac: float = 1e-3):
    """Local maxima of |x| with parabolic sub-sample refinement.

    Maxima below floor_frac times the global maximum are dropped; that
    removes the numerical noise floor between collapsed revivals. Returns
    (peak_taus, peak_heights) as float arrays.
    """
    t = np.asarray(taus, dtype=float)
    y = np.abs(np.asarray(x))
    if t.size != y.size:
        raise ValueError("taus and x must have the same length")
    if t.size < 3:
        return np.empty(0), np.empty(0)
    floor = floor_frac * float(y.max())
    core = y[1:-1]
    mask = (core > y[:-2]) & (core >= y[2:]) & (core > floor)
    idx = np.nonzero(mask)[0] + 1
    if idx.size == 0:
        return np.empty(0), np.empty(0)
    ym, y0, yp = y[idx - 1], y[idx], y[idx + 1]
    tm, t0, tp = t[idx - 1], t[idx], t[idx + 1]
    curv = ym - 2.0 * y0 + yp
    # parabola apex through the three samples; falls back to the grid point
    # for degenerate (flat) neighborhoods
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.where(curv < 0, 0.25 * (ym - yp) * (tp - tm) / curv, 0.0)
        height = np.where(curv < 0, y0 - 0.125 * (ym - yp) ** 2 / curv, y0)
    shift = np.clip(shift, tm - t0, tp - t0)
    return t0 + shift, np.maximum(height, y0)


# ---------------------------------------------------------------------------
# envelope fits


def fit_ehrenfest_bump(
    peak_taus,
    peak_heights,
    n_bump: int = 0,
    tau_r: float = math.inf,
    free_center: bool = False,
) -> BumpFit:
    """Fit ln(height) = const - (tau - c)^2 / (2 tau_e^2) on one bump.

    The center c is pinned to n_bump * tau_r (the revival comb is set by the
    level curvature, not by the fit); free_center=True releases it as a
    diagnostic. Peaks outside [c - tau_r/2, c + tau_r/2] are ignored when
    tau_r is finite. Needs at least 5 peaks across the bump.
    """
    t = np.asarray(peak_taus, dtype=float)
    h = np.asarray(peak_heights, dtype=float)
    center = n_bump * tau_r if n_bump else 0.0
    if math.isfinite(tau_r):
        keep = np.abs(t - center) <= 0.5 * tau_r
        t, h = t[keep], h[keep]
    if t.size < 5:
        raise ValueError(
            f"need at least 5 peaks across the bump, got {t.size}; "
            "sample more densely or widen the window"
        )
    y = np.log(h)
    if free_center:
        coef = np.polynomial.polynomial.polyfit(t, y, 2)
        q2, q1 = coef[2], coef[1]
        if q2 >= 0:
            raise ValueError("peak heights are not bump-shaped (no curvature)")
        center = -0.5 * q1 / q2
        tau_e = 1.0 / math.sqrt(-2.0 * q2)
        resid = y - np.polynomial.polynomial.polyval(t, coef)
        height = math.exp(np.polynomial.polynomial.polyval(center, coef))
    else:
        s = (t - center) ** 2
        design = np.stack([np.ones_like(s), s], axis=1)
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        if coef[1] >= 0:
            raise ValueError("peak heights are not bump-shaped (no curvature)")
        tau_e = 1.0 / math.sqrt(-2.0 * coef[1])
        resid = y - design @ coef
        height = math.exp(coef[0])
    return BumpFit(
        tau_e=tau_e,
        center=center,
        height=height,
        n_peaks=int(t.size),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
    )


def fit_recurrence_decay(peak_taus, peak_heights, tau_r: float) -> DecoherenceFit:
    """Coherence decay from the heights of successive revival bumps.

    Peaks are grouped by revival index round(tau/tau_r); each bump
    contributes its tallest peak, and ln(height) against the bump center is
    fit to a line. Needs at least two bumps; for decays too slow to kill a
    revival visibly, prefer the cat-overlap route.
    """
    t = np.asarray(peak_taus, dtype=float)
    h = np.asarray(peak_heights, dtype=float)
    if tau_r <= 0 or not math.isfinite(tau_r):
        raise ValueError(f"tau_r must be positive and finite, got {tau_r}")
    if t.size == 0:
        raise ValueError("no peaks supplied")
    k = np.rint(t / tau_r).astype(int)
    bumps = sorted(set(k.tolist()))
    if len(bumps) < 2:
        raise ValueError(
            "need at least two recurrence bumps to take a height ratio; "
            "integrate past tau_r, or use cat_offdiagonal_rate for decays "
            "too slow to suppress a revival measurably"
        )
    centers = np.array([b * tau_r for b in bumps])
    heights = np.array([h[k == b].max() for b in bumps])
    y = np.log(heights)
    design = np.stack([np.ones_like(centers), centers], axis=1)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    rate = -coef[1]
    if rate <= 0:
        raise ValueError("recurrence heights do not decay")
    resid = y - design @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    if len(bumps) > 2:
        # residual-based 1-sigma of the slope, propagated onto tau_d
        s_xx = float(np.sum((centers - centers.mean()) ** 2))
        sigma = math.sqrt(np.sum(resid**2) / (len(bumps) - 2) / s_xx)
        unc = sigma / rate**2
    else:
        unc = math.nan
    return DecoherenceFit(
        tau_d=1.0 / rate,
        rate=rate,
        method="peak-ratio",
        uncertainty=unc,
        n_points=len(bumps),
        residual_rms=rms,
    )


def fit_relaxation_decay(peak_taus, peak_heights) -> RelaxationFit:
    """Exponential fit ln(height) = ln(amplitude) - tau/decay_time.

    Meant for classical-regime ring-downs where the envelope is a plain
    exponential; the caller should supply a window spanning a couple of
    decay times, and a shorter window triggers a warning.
    """
    t = np.asarray(peak_taus, dtype=float)
    h = np.asarray(peak_heights, dtype=float)
    if t.size < 4:
        raise ValueError(f"need at least 4 peaks, got {t.size}")
    y = np.log(h)
    design = np.stack([np.ones_like(t), t], axis=1)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    if coef[1] >= 0:
        raise ValueError("peak heights do not decay")
    decay = -1.0 / coef[1]
    span = float(t.max() - t.min())
    if span < decay:
        warnings.warn(
            f"fit window ({span:g}) is shorter than the fitted decay time "
            f"({decay:g}); the estimate is extrapolated",
            stacklevel=2,
        )
    resid = y - design @ coef
    return RelaxationFit(
        decay_time=decay,
        amplitude=math.exp(coef[0]),
        n_peaks=int(t.size),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
    )


def gaussian_residual(peak_taus, peak_heights, tau_e: float, center: float = 0.0):
    """RMS log-residual of a fixed-width Gaussian envelope.

    Fits only the overall amplitude of exp(-(tau-center)^2/(2 tau_e^2)) to
    the peaks and returns the root-mean-square residual in ln(height). Used
    to test whether a Gaussian of a prescribed width describes the data at
    all, e.g. against the exponential alternative of fit_relaxation_decay.
    """
    t = np.asarray(peak_taus, dtype=float)
    h = np.asarray(peak_heights, dtype=float)
    if t.size < 2:
        raise ValueError("need at least 2 peaks")
    if tau_e <= 0:
        raise ValueError(f"tau_e must be positive, got {tau_e}")
    r = np.log(h) + (t - center) ** 2 / (2.0 * tau_e * tau_e)
    return float(np.sqrt(np.mean((r - r.mean()) ** 2)))


# ---------------------------------------------------------------------------
# spectra


def discrete_spectrum(taus, x, window: str | None = None):
    """One-sided amplitude spectrum of a uniformly sampled real signal.

    Returns (omegas, amplitudes) with omegas in angular frequency and
    amplitudes |X_k|/N, so an isolated line of the signal
    2 Re[A e^{i w t}] shows up with height about |A|. window=None keeps the
    plain rectangular transform; "hann" tapers the ends to push spectral
    leakage below slowly decaying sidelobes.
    """
    t = np.asarray(taus, dtype=float)
    sig = np.asarray(x, dtype=float)
    if t.size != sig.size:
        raise ValueError("taus and x must have the same length")
    if t.size < 8:
        raise ValueError("need at least 8 samples")
    steps = np.diff(t)
    dt = float(steps.mean())
    if dt <= 0 or float(np.ptp(steps)) > 1e-9 * dt:
        raise ValueError("samples must be uniformly spaced in tau")
    if window == "hann":
        sig = sig * np.hanning(sig.size)
    elif window is not None:
        raise ValueError(f"unknown window {window!r}, expected None or 'hann'")
    amp = np.abs(np.fft.rfft(sig)) / sig.size
    omegas = 2.0 * math.pi * np.fft.rfftfreq(sig.size, d=dt)
    return omegas, amp


def comb_peaks(omegas, amps):
    """Local maxima of a sampled spectrum, parabola-refined.

    For a resolved frequency comb the maxima sit on the line centers and
    their heights trace the comb envelope; feed the result to
    fit_spectral_width. No floor is applied here, the width fitter has its
    own half-maximum threshold.
    """
    return extract_envelope_peaks(omegas, amps, floor_frac=0.0)


def fit_spectral_width(omegas, amps, half_frac: float = 0.5) -> SpectrumFit:
    """Gaussian fit of the dominant lobe of a spectrum.

    Keeps the contiguous run of points above half_frac times the global
    maximum that contains the maximum, fits ln(amplitude) to a parabola in
    omega, and reports its apex (center) and standard-deviation width; the
    inverse width estimates the collapse time tau_e. Warns if points
    outside the dominant lobe also reach above the threshold (multi-modal
    spectrum, the single-lobe numbers are then suspect). Needs at least 7
    points across the lobe.
    """
    w = np.asarray(omegas, dtype=float)
    a = np.asarray(amps, dtype=float)
    if w.size != a.size or w.size == 0:
        raise ValueError("omegas and amps must be equal-length, non-empty")
    i_max = int(np.argmax(a))
    thresh = half_frac * a[i_max]
    above = a >= thresh
    lo = i_max
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = i_max
    while hi < w.size - 1 and above[hi + 1]:
        hi += 1
    lobe = slice(lo, hi + 1)
    n_bins = hi - lo + 1
    if bool(np.any(above[:lo])) or bool(np.any(above[hi + 1:])):
        warnings.warn(
            "spectrum has secondary structure above half maximum outside the "
            "dominant lobe; single-lobe width and center may be misleading",
            stacklevel=2,
        )
    if n_bins < 7:
        raise ValueError(
            f"only {n_bins} points resolve the dominant lobe, need at least "
            "7; sample a longer time window for finer frequency bins"
        )
    ww, y = w[lobe], np.log(a[lobe])
    coef = np.polynomial.polynomial.polyfit(ww, y, 2)
    if coef[2] >= 0:
        raise ValueError("dominant lobe is not peak-shaped in log amplitude")
    width = 1.0 / math.sqrt(-2.0 * coef[2])
    center = -0.5 * coef[1] / coef[2]
    resid = y - np.polynomial.polynomial.polyval(ww, coef)
    return SpectrumFit(
        center=center,
        width=width,
        tau_e_estimate=1.0 / width,
        n_bins=n_bins,
        residual_rms=float(np.sqrt(np.mean(resid**2))),
    )


# ---------------------------------------------------------------------------
# superposition decoherence


def cat_offdiagonal_rate(
    taus,
    overlap,
    t_min: float | None = None,
    t_max: float | None = None,
    drift: bool = True,
) -> DecoherenceFit:
    """Decay rate of the co-moving off-diagonal coherence of a superposition.

    Fits ln|overlap| to const - rate*tau (plus an optional quadratic drift
    term that absorbs slow separation shrinkage and coefficient settling).
    tau_d = 1/rate is the e-folding lifetime of the coherence at the
    separation the overlap was recorded with; to compare against the
    decoherence time of a size-sqrt(I0) superposition, scale it by
    (dx)^2/I0 (see scale_tau_d_to_intensity).
    """
    t = np.asarray(taus, dtype=float)
    f = np.abs(np.asarray(overlap, dtype=complex))
    if t.size != f.size:
        raise ValueError("taus and overlap must have the same length")
    lo = t_min if t_min is not None else t[0] + 0.05 * (t[-1] - t[0])
    hi = t_max if t_max is not None else t[-1]
    keep = (t >= lo) & (t <= hi) & (f > 0)
    t, f = t[keep], f[keep]
    needed = 4 if drift else 3
    if t.size < needed:
        raise ValueError(f"need at least {needed} usable samples, got {t.size}")
    y = np.log(f)
    cols = [np.ones_like(t), t]
    if drift:
        cols.append(t * t)
    design = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    rate = -coef[1]
    if rate <= 0:
        raise ValueError("overlap magnitude does not decay over the window")
    resid = y - design @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    dof = t.size - design.shape[1]
    if dof > 0:
        cov = np.linalg.inv(design.T @ design) * (np.sum(resid**2) / dof)
        sigma_rate = math.sqrt(cov[1, 1])
        unc = sigma_rate / rate**2
    else:
        unc = math.nan
    return DecoherenceFit(
        tau_d=1.0 / rate,
        rate=rate,
        method="cat-overlap",
        uncertainty=unc,
        n_points=int(t.size),
        residual_rms=rms,
    )


def overlap_rate_period_matched(
    taus,
    overlap,
    half_period: float,
    target_span: float,
    floor: float = 1e-10,
) -> DecoherenceFit:
    """Modulation-immune decay rate from log differences across whole
    modulation periods.

    Under the position-only coupling the instantaneous decay rate of a
    rigidly rotating pair oscillates as the squared x-projection of the
    chord, with period pi/Omega_bar. A log difference of the envelope
    across an integer number of those periods cancels the oscillation
    exactly (both its cos^2 and cos*sin quadratures), leaving the secular
    rate. The differencing span is the integer multiple of half_period
    closest to target_span, at least one period and at most the recorded
    window; every sample in the first tenth of the span is paired with its
    partner one span later and the pair slopes are averaged.
    """
    t = np.asarray(taus, dtype=float)
    f = np.abs(np.asarray(overlap, dtype=complex))
    if t.size != f.size:
        raise ValueError("taus and overlap must have the same length")
    if t.size < 8:
        raise ValueError(f"need at least 8 samples, got {t.size}")
    if half_period <= 0 or target_span <= 0:
        raise ValueError("half_period and target_span must be positive")
    dt = float(np.median(np.diff(t)))
    k_avail = int((t[-1] - t[0]) / half_period)
    if k_avail < 1:
        raise ValueError("recorded window is shorter than one modulation period")
    k = min(max(1, round(target_span / half_period)), k_avail)
    m = max(1, round(k * half_period / dt))
    if m >= t.size:
        m = t.size - 1
    span = t[m] - t[0]
    n_starts = max(1, min(int(0.1 * span / dt), t.size - 1 - m))
    i0 = np.arange(n_starts)
    ok = (f[i0] > floor) & (f[i0 + m] > floor)
    if not ok.any():
        raise ValueError(
            "overlap envelope is below the floor across the differencing span"
        )
    i0 = i0[ok]
    slopes = (np.log(f[i0]) - np.log(f[i0 + m])) / span
    rate = float(slopes.mean())
    if rate <= 0:
        raise ValueError("overlap magnitude does not decay over the window")
    spread = float(slopes.std())
    unc = spread / math.sqrt(len(slopes)) / rate**2 if len(slopes) > 1 else math.nan
    return DecoherenceFit(
        tau_d=1.0 / rate,
        rate=rate,
        method="period-matched",
        uncertainty=unc,
        n_points=int(len(slopes)),
        residual_rms=spread * span,
    )


def overlap_rate_modulated(
    taus,
    overlap,
    omega: float,
    theta0: float,
    t_max: float,
    floor: float = 1e-12,
) -> DecoherenceFit:
    """Secular decay rate fitted through the known orbital modulation.

    For a rigidly rotating pair whose chord starts at angle theta0 from the
    x axis, the accumulated decay exponent under a position coupling is a
    combination of the two quadrature integrals

        f(t) = t/2 + [sin(2 theta0) - sin(2 theta0 -+ 2 omega t)] / (4 omega)
        g(t) = [cos(2 theta0 -+ 2 omega t) - cos(2 theta0)] / (4 omega)

    (the sign ambiguity of the rotation direction flips g, which the fit
    absorbs into its free coefficient, and leaves f unchanged). Fitting
    ln|overlap| = c - A f(t) - B g(t) over a window shorter than a couple
    of coherence lifetimes separates the secular rate A/2 from the
    modulation without requiring the window to cover whole periods. Meant
    for the regime where the coherence dies within roughly a period, when
    neither whole-period differencing nor a plain exponential fit is
    usable.
    """
    t = np.asarray(taus, dtype=float)
    env = np.abs(np.asarray(overlap, dtype=complex))
    if t.size != env.size:
        raise ValueError("taus and overlap must have the same length")
    keep = (t <= t_max) & (env > floor)
    t, env = t[keep], env[keep]
    if t.size < 8:
        raise ValueError(f"need at least 8 usable samples, got {t.size}")
    two = 2.0 * theta0
    f = 0.5 * t + (math.sin(two) - np.sin(two - 2.0 * omega * t)) / (4.0 * omega)
    g = (np.cos(two - 2.0 * omega * t) - math.cos(two)) / (4.0 * omega)
    design = np.stack([np.ones_like(t), f, g], axis=1)
    y = np.log(env)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    rate = -0.5 * coef[1]
    if rate <= 0:
        raise ValueError("overlap magnitude does not decay over the window")
    resid = y - design @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    dof = t.size - 3
    if dof > 0:
        cov = np.linalg.inv(design.T @ design) * (np.sum(resid**2) / dof)
        unc = 0.5 * math.sqrt(cov[1, 1]) / rate**2
    else:
        unc = math.nan
    return DecoherenceFit(
        tau_d=1.0 / rate,
        rate=rate,
        method="modulated",
        uncertainty=unc,
        n_points=int(t.size),
        residual_rms=rms,
    )


def predicted_overlap_rate(params: SystemParams, delta_x: float) -> float:
    """Orbit-averaged decay rate 2 B1(Omega_bar) (dx)^2 of the coherence.

    A superposition of coherent states separated by dx decoheres, once the
    orbital rotation of the separation direction is averaged over, at
    2 B1 (dx)^2 under the position-coupled generator; at dx = sqrt(I0) this
    reproduces the analytic decoherence rate I0 gamma Omega_bar
    coth(beta Omega_bar / 2).
    """
    from .kernels import asymptotic_b1_at

    return 2.0 * asymptotic_b1_at(params, params.omega_bar) * delta_x * delta_x


def scale_tau_d_to_intensity(tau_d: float, delta_x: float, intensity: float) -> float:
    """Rescale a separation-dx decoherence time to a size-sqrt(I0) one.

    Rates grow with the squared separation, so
    tau_d(I0) = tau_d(dx) * dx^2 / I0.
    """
    if intensity <= 0:
        raise ValueError(f"intensity must be positive, got {intensity}")
    return tau_d * delta_x * delta_x / intensity
