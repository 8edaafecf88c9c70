"""Time-domain Monte Carlo cross-check of the analytic engine.

The synthesized process is classical but statistically equivalent to the
linearized quantum model: every vacuum mode on the synthesis grid is an
independent circular complex Gaussian amplitude a at absolute frequency f
with

    E|a|^2 = S_q(f) * df / 4,

where S_q is the single-sided noise energy density (h f for vacuum) and
df the per-trial frequency resolution.  With that normalization the real
beat-note current

    I0(t) = sum_n 2 Re[ conj(c_n) sum_modes a_nu e^{-2 pi i (nu - F_n) t} ]

has Welch density sum_n |c_n|^2 S_q around each beat band, which is the
analytic no-demodulation result.  Squeezing mixes mirrored mode pairs
before the beat; the demodulation chain multiplies the series by its
cosines in the time domain.  Nothing downstream of the mode draw knows
about coincidence bookkeeping: coherent summation of coinciding images
has to emerge from the dynamics, which is what makes this an independent
check.

Modes are synthesized in bands of half-width (1 + GUARD_BANDS) * B around
every distinct frequency-matrix entry; the quadratic vacuum x vacuum term
is omitted to match the linearization of the analytic model, so agreement
is exact in expectation rather than approximate.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import signal as _signal

from .errors import (
    AliasedScheme,
    GridMismatch,
    SchemeValidationError,
    TooShort,
)
from .model import DetectionConfig
from .spectrum import EvalContext, SpectrumResult, build_context

#: Guard band per image band, in units of B, so demodulation images and
#: window leakage near the band edge are fully represented.
GUARD_BANDS = 10.0

_WINDOWS = {"hann": "hann", "rectangular": "boxcar"}


@dataclass(frozen=True)
class OracleConfig:
    """Sampling and estimation parameters of the Monte Carlo run."""

    sample_rate_hz: float
    duration_s: float
    n_trials: int = 1
    seed: int = 0
    segment_len: int = 4096
    window: str = "hann"

    def __post_init__(self):
        if self.n_trials < 1:
            raise SchemeValidationError("n_trials must be >= 1")
        if self.segment_len < 2:
            raise SchemeValidationError("segment_len must be >= 2")
        if self.window not in _WINDOWS:
            raise SchemeValidationError(
                f"window must be one of {sorted(_WINDOWS)}, got {self.window!r}"
            )
        if self.sample_rate_hz <= 0 or self.duration_s <= 0:
            raise SchemeValidationError("sample rate and duration must be positive")

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate_hz * self.duration_s))


def auto_oracle_config(
    components,
    demods,
    config: DetectionConfig,
    *,
    n_segments: int = 400,
    segment_len: int | None = None,
    n_trials: int = 1,
    seed: int = 0,
    window: str = "hann",
    min_band_bins: int = 16,
) -> OracleConfig:
    """Pick a sample rate, segment length, and duration that fit the scheme.

    The sample rate clears every post-demodulation image (no folding at
    all), and the segment length resolves [0, B] with at least
    ``min_band_bins`` Welch bins.
    """
    ctx = build_context(components, demods, (), config)
    fmax = float(np.max(np.abs(ctx.matrix.entries)))
    wband = (1.0 + GUARD_BANDS) * config.bandwidth_hz
    sum_d = sum(stage.freq_hz for stage in ctx.demods)
    fs = 2.0 ** int(np.ceil(np.log2(2.1 * (fmax + wband + sum_d))))
    if segment_len is None:
        segment_len = int(
            2.0 ** int(np.ceil(np.log2(min_band_bins * fs / config.bandwidth_hz)))
        )
    freqs = [c.offset_hz for c in ctx.scheme.components if c.offset_hz != 0.0]
    freqs += [stage.freq_hz for stage in ctx.demods]
    per_trial = -(-n_segments // n_trials)  # ceil division
    # scheme frequencies must land on the per-trial synthesis grid
    # (1/duration); take the first segment count >= the request that aligns
    for extra in range(257):
        duration = (per_trial + extra) * segment_len / fs
        if all(abs(f * duration - round(f * duration)) <= 1e-6 for f in freqs):
            per_trial += extra
            break
    else:
        raise SchemeValidationError(
            "no synthesis duration aligns these scheme frequencies; pass an "
            "explicit sample rate and duration"
        )
    duration = per_trial * segment_len / fs
    return OracleConfig(fs, duration, n_trials, seed, segment_len, window)


def _grid_bin(freq_hz: float, duration_s: float, what: str) -> int:
    """Integer synthesis-grid bin of a frequency; refuses off-grid values."""
    k = freq_hz * duration_s
    ki = round(k)
    if abs(k - ki) > 1e-6:
        raise SchemeValidationError(
            f"{what} at {freq_hz:g} Hz does not land on the synthesis grid "
            f"(df = {1.0 / duration_s:g} Hz); adjust duration or sample rate"
        )
    return int(ki)


@dataclass(frozen=True)
class _Plan:
    """Per-scheme synthesis layout, reused across trials."""

    n_samples: int
    df_hz: float
    f0_hz: float
    comp_bins: np.ndarray  # (N,) int
    comp_amps: np.ndarray  # (N,) complex
    demod_bins: np.ndarray  # (M,) int
    demod_phases: np.ndarray  # (M,) float
    mode_bins: np.ndarray  # (K,) int, sorted, signed offsets from f0
    sigma2: np.ndarray  # (K,) float, E|a|^2 per mode
    squeezers: tuple  # (center_bin, halfwidth_bins, TransferSet) triples


def _build_plan(ctx: EvalContext, ocfg: OracleConfig) -> _Plan:
    config = ctx.config
    n = ocfg.n_samples
    duration = n / ocfg.sample_rate_hz
    df = 1.0 / duration
    fmax = float(np.max(np.abs(ctx.matrix.entries)))
    if not ocfg.sample_rate_hz > 2.0 * (fmax + config.bandwidth_hz):
        raise AliasedScheme(
            f"sample rate {ocfg.sample_rate_hz:g} Hz cannot represent beat "
            f"notes up to {fmax + config.bandwidth_hz:g} Hz"
        )
    comp_bins = np.array(
        [
            _grid_bin(c.offset_hz, duration, f"component {i}")
            for i, c in enumerate(ctx.scheme.components)
        ]
    )
    demod_bins = np.array(
        [
            _grid_bin(stage.freq_hz, duration, f"demodulation {i}")
            for i, stage in enumerate(ctx.demods)
        ],
        dtype=int,
    )
    demod_phases = np.array([stage.phase_rad for stage in ctx.demods])

    # snapped matrix-entry bins; the snap must not merge or split the
    # analytic coincidence structure
    m = len(ctx.demods)
    entry_bins = {}
    for nrow in range(ctx.matrix.n_components):
        for d in range(2**m):
            signs = [(1 if (d >> (m - 1 - k)) & 1 else -1) for k in range(m)]
            entry_bins[(nrow, d)] = comp_bins[nrow] + int(
                np.dot(signs, demod_bins) if m else 0
            )
    cluster_bins = []
    for group in ctx.groups:
        bins = {entry_bins[cell] for cell in group.members}
        if len(bins) != 1:
            raise SchemeValidationError(
                "synthesis grid splits a coincidence group; adjust duration "
                "or sample rate"
            )
        cluster_bins.append(bins.pop())
    cluster_bins.extend(entry_bins[cell] for cell in ctx.uniques)
    if len(set(cluster_bins)) != len(cluster_bins):
        raise SchemeValidationError(
            "synthesis grid merges distinct matrix entries; adjust duration "
            "or sample rate"
        )

    halfwidth_bins = int(np.ceil((1.0 + GUARD_BANDS) * config.bandwidth_hz / df))
    spans = sorted(
        (center - halfwidth_bins, center + halfwidth_bins)
        for center in set(entry_bins.values())
    )
    merged = [spans[0]]
    for lo, hi in spans[1:]:
        if lo <= merged[-1][1] + 1:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    mode_bins = np.concatenate(
        [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in merged]
    )
    f_abs = config.f0_hz + mode_bins * df
    if np.any(f_abs <= 0):
        raise SchemeValidationError("synthesis band reaches non-positive frequencies")
    density = config.noise_energy(
        np.full_like(f_abs, config.f0_hz) if config.narrowband else f_abs
    )
    sigma2 = np.asarray(density, dtype=float) * df / 4.0

    # The measured band only depends on squeeze mixing within +-B of the
    # reference, but a hard squeeze edge exactly at B lets the estimator's
    # window mix un-squeezed shoulder power into the band-edge bins.  Apply
    # the mixing a few Welch bins past B (clamped so neighboring squeeze
    # regions stay disjoint); the analytic [0, B] result is unchanged.
    validity_bins = int(round(config.bandwidth_hz / df))
    welch_bin_hz = ocfg.sample_rate_hz / ocfg.segment_len
    extended_bins = min(
        int(round((config.bandwidth_hz + 4.0 * welch_bin_hz) / df)),
        halfwidth_bins,
    )
    centers = {}
    for key, transfers in ctx.transfers.items():
        center = cluster_bins[key[1]] if key[0] == "group" else entry_bins[key[1]]
        centers[int(center)] = transfers
    squeezers = []
    ordered = sorted(centers)
    for i, center in enumerate(ordered):
        half = extended_bins
        if i > 0:
            half = min(half, (center - ordered[i - 1]) // 2 - 1)
        if i + 1 < len(ordered):
            half = min(half, (ordered[i + 1] - center) // 2 - 1)
        if half < validity_bins:
            raise SchemeValidationError("squeezer validity bands overlap")
        squeezers.append((center, half, centers[center]))

    # every beat of every component with every mode must be representable
    max_u = 0
    for k in comp_bins:
        max_u = max(max_u, int(np.max(np.abs(mode_bins - k))))
    if max_u >= n // 2:
        raise AliasedScheme(
            "beat notes exceed the Nyquist bin; raise the sample rate"
        )
    return _Plan(
        n,
        df,
        config.f0_hz,
        comp_bins,
        np.array([c.amplitude for c in ctx.scheme.components], complex),
        demod_bins,
        demod_phases,
        mode_bins,
        sigma2,
        tuple(squeezers),
    )


def _draw_modes(plan: _Plan, ocfg: OracleConfig, trial: int) -> np.ndarray:
    rng = np.random.default_rng([int(ocfg.seed), int(trial)])
    k = plan.mode_bins.size
    amps = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) * np.sqrt(
        plan.sigma2 / 2.0
    )
    for center, half, transfers in plan.squeezers:
        up = np.searchsorted(plan.mode_bins, center + np.arange(half + 1))
        dn = np.searchsorted(plan.mode_bins, center - np.arange(half + 1))
        a_up = amps[up].copy()
        a_dn = amps[dn].copy()
        # absolute frequencies, for (possibly sampled) gain evaluation
        fa_up = plan.f0_hz + plan.mode_bins[up] * plan.df_hz
        fa_dn = plan.f0_hz + plan.mode_bins[dn] * plan.df_hz
        s_up = transfers.t00(fa_up) * a_up + transfers.t01(fa_dn) * np.conj(a_dn)
        s_dn = np.conj(transfers.t10(fa_up)) * np.conj(a_up) + np.conj(
            transfers.t11(fa_dn)
        ) * a_dn
        amps[up] = s_up
        amps[dn[1:]] = s_dn[1:]
    return amps


def synthesize_current(
    components, demods, squeezers, config: DetectionConfig, oracle_config: OracleConfig, trial: int = 0
) -> np.ndarray:
    """One trial of the demodulated beat-note current (real time series).

    Only classical x vacuum cross terms enter; the classical x classical
    beats (which carry no noise) and the quadratic vacuum terms are
    excluded, matching the linearized analytic model.
    """
    ctx = build_context(components, demods, squeezers, config)
    plan = _build_plan(ctx, oracle_config)
    return _synthesize(plan, oracle_config, trial)


def _synthesize(plan: _Plan, ocfg: OracleConfig, trial: int) -> np.ndarray:
    n = plan.n_samples
    amps = _draw_modes(plan, ocfg, trial)
    spec = np.zeros(n // 2 + 1, dtype=complex)
    for k, c in zip(plan.comp_bins, plan.comp_amps):
        u = plan.mode_bins - k
        pos = u > 0
        neg = u < 0
        zer = u == 0
        spec[u[pos]] += np.conj(c) * amps[pos]
        spec[-u[neg]] += c * np.conj(amps[neg])
        if np.any(zer):
            spec[0] += 2.0 * np.sum(np.real(np.conj(c) * amps[zer]))
    series = np.fft.irfft(n * np.conj(spec), n=n)
    del spec
    # harmonic demodulation chain, chunked to bound memory
    chunk = 1 << 20
    for d_bin, phase in zip(plan.demod_bins, plan.demod_phases):
        rate = 2.0 * np.pi * d_bin / n
        for start in range(0, n, chunk):
            idx = np.arange(start, min(start + chunk, n))
            series[start : start + chunk] *= np.cos(rate * idx + phase)
    return series


def estimate_psd(series, oracle_config: OracleConfig, band_hz: float | None = None) -> SpectrumResult:
    """Averaged-periodogram single-sided PSD of a real series, cropped to (0, band].

    Non-overlapping segments with the configured window, normalized so a
    white process of known density is recovered unbiased.  The degenerate
    one-sided DC bin is dropped.
    """
    series = np.asarray(series, dtype=float)
    if series.size < 2 * oracle_config.segment_len:
        raise TooShort(
            f"series of {series.size} samples is shorter than two segments "
            f"of {oracle_config.segment_len}"
        )
    freqs, psd = _signal.welch(
        series,
        fs=oracle_config.sample_rate_hz,
        window=_WINDOWS[oracle_config.window],
        nperseg=oracle_config.segment_len,
        noverlap=0,
        detrend=False,
        scaling="density",
        return_onesided=True,
    )
    mask = freqs > 0
    if band_hz is not None:
        mask &= freqs <= band_hz * (1 + 1e-12)
    return SpectrumResult(freqs[mask], psd[mask], unit="W^2/Hz")


def run_oracle(
    components, demods, squeezers, config: DetectionConfig, oracle_config: OracleConfig
) -> SpectrumResult:
    """Synthesize all trials, estimate, and average into one [0, B] spectrum.

    Per-trial RNG streams derive deterministically from (seed, trial);
    HETSPEC_THREADS caps the worker count, and the fixed-order reduction
    keeps results identical regardless of it.
    """
    ctx = build_context(components, demods, squeezers, config)
    plan = _build_plan(ctx, oracle_config)

    def one(trial: int) -> SpectrumResult:
        series = _synthesize(plan, oracle_config, trial)
        return estimate_psd(series, oracle_config, band_hz=config.bandwidth_hz)

    workers = min(
        max(1, int(os.environ.get("HETSPEC_THREADS", "1") or 1)),
        oracle_config.n_trials,
    )
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(oracle_config.n_trials)))
    else:
        results = [one(trial) for trial in range(oracle_config.n_trials)]
    values = np.mean([r.values for r in results], axis=0)
    # report in the same convention as the analytic engine
    scale = config.output_scale
    if config.rectifier_equivalent:
        scale *= (4.0 / np.pi) ** (2 * len(ctx.demods))
    return SpectrumResult(results[0].freqs_hz, scale * values, unit=config.unit)


@dataclass
class OracleReport:
    """Analytic-versus-estimate comparison on the analytic grid."""

    freqs_hz: np.ndarray
    analytic: np.ndarray
    estimated: np.ndarray
    pointwise_rel_err: np.ndarray
    band_rel_err: float
    max_rel_err: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "band_relative_error": self.band_rel_err,
            "max_pointwise_relative_error": self.max_rel_err,
            "passed": self.passed,
            "band_mean_analytic": float(np.mean(self.analytic)),
            "band_mean_estimated": float(np.mean(self.estimated)),
            "freqs_hz": self.freqs_hz.tolist(),
            "analytic": self.analytic.tolist(),
            "estimated": self.estimated.tolist(),
        }


def compare(
    analytic: SpectrumResult, estimated: SpectrumResult, tolerance: float
) -> OracleReport:
    """Rebin the estimate onto the analytic grid and report relative errors.

    The pass verdict uses the band-averaged error
    |mean(estimate) - mean(analytic)| / mean(analytic), the quantity whose
    statistical uncertainty shrinks with both segment count and bin count.
    """
    if analytic.unit != estimated.unit:
        raise GridMismatch(
            f"cannot compare {analytic.unit} against {estimated.unit}"
        )
    if estimated.freqs_hz.size < 2:
        raise GridMismatch("estimate carries fewer than two frequency bins")
    bin_hz = float(np.median(np.diff(estimated.freqs_hz)))
    if estimated.freqs_hz[-1] + bin_hz < analytic.freqs_hz[-1]:
        raise GridMismatch(
            "estimated spectrum does not cover the analytic frequency grid"
        )
    rebinned = np.interp(analytic.freqs_hz, estimated.freqs_hz, estimated.values)
    with np.errstate(divide="ignore", invalid="ignore"):
        pointwise = np.where(
            analytic.values > 0,
            np.abs(rebinned - analytic.values) / np.where(analytic.values > 0, analytic.values, 1.0),
            np.where(rebinned == 0, 0.0, np.inf),
        )
    mean_ana = float(np.mean(analytic.values))
    mean_est = float(np.mean(rebinned))
    band = abs(mean_est - mean_ana) / mean_ana if mean_ana > 0 else (
        0.0 if mean_est == 0 else float("inf")
    )
    return OracleReport(
        freqs_hz=analytic.freqs_hz,
        analytic=analytic.values,
        estimated=rebinned,
        pointwise_rel_err=pointwise,
        band_rel_err=float(band),
        max_rel_err=float(np.max(pointwise)),
        tolerance=float(tolerance),
        passed=bool(band <= tolerance),
    )
