"""PPG signal preprocessing: detrend, artifact clipping, bandpass, smoothing,
Fourier resampling, min-max normalization."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import signal as sps


class PipelineStageError(RuntimeError):
    """Raised when a preprocessing stage fails; carries the stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class TimeSeries:
    """A sampled 1-D signal with its sample rate.

    samples are stored as a float64 array and must be finite and non-empty.
    """

    samples: np.ndarray
    sample_rate_hz: float
    subject_id: Optional[object] = None

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite (no NaN/Inf)")
        if not (self.sample_rate_hz > 0):
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def with_samples(self, samples: np.ndarray, sample_rate_hz: Optional[float] = None) -> "TimeSeries":
        rate = self.sample_rate_hz if sample_rate_hz is None else sample_rate_hz
        return TimeSeries(samples=samples, sample_rate_hz=rate, subject_id=self.subject_id)


@dataclass(frozen=True)
class PreprocessConfig:
    """Parameters of the six-stage preprocessing pipeline.

    The passband defaults to the 0.7-4 Hz cardiovascular band and the
    resampling factor to 5 (14 Hz recordings become 70 Hz). Smoothing is
    off unless a window is given.
    """

    band_low_hz: float = 0.7
    band_high_hz: float = 4.0
    clip_sigma: float = 3.0
    smoothing_window: Optional[int] = None
    resample_factor: int = 5
    filter_order: int = 4

    def __post_init__(self):
        if not (0 < self.band_low_hz < self.band_high_hz):
            raise ValueError("need 0 < band_low_hz < band_high_hz")
        if not (self.clip_sigma > 0):
            raise ValueError("clip_sigma must be positive")
        if self.resample_factor < 1:
            raise ValueError("resample_factor must be >= 1")
        if self.filter_order < 1:
            raise ValueError("filter_order must be >= 1")
        if self.smoothing_window is not None and self.smoothing_window < 1:
            raise ValueError("smoothing_window must be >= 1 when set")

    def with_overrides(self, **kwargs) -> "PreprocessConfig":
        return replace(self, **kwargs)


def detrend(sig: TimeSeries) -> TimeSeries:
    """Remove the least-squares linear trend from a signal.

    Returns a signal whose best-fit line has slope and intercept ~0.
    Rejects signals shorter than 2 samples (no line to fit).
    """
    x = sig.samples
    if x.size < 2:
        raise ValueError("detrend needs at least 2 samples")
    t = np.arange(x.size, dtype=np.float64)
    t_mean = t.mean()
    x_mean = x.mean()
    slope = np.dot(t - t_mean, x - x_mean) / np.dot(t - t_mean, t - t_mean)
    intercept = x_mean - slope * t_mean
    return sig.with_samples(x - (slope * t + intercept))


def suppress_artifacts(sig: TimeSeries, clip_sigma: float) -> TimeSeries:
    """Clip samples outside mean +/- clip_sigma * std of the input.

    Samples already inside the band pass through unchanged. A zero-variance
    signal is returned as-is (nothing to clip).
    """
    if not (clip_sigma > 0):
        raise ValueError("clip_sigma must be positive")
    x = sig.samples
    mu = x.mean()
    sd = x.std()
    if sd == 0.0:
        return sig.with_samples(x.copy())
    return sig.with_samples(np.clip(x, mu - clip_sigma * sd, mu + clip_sigma * sd))


def bandpass(sig: TimeSeries, low_hz: float, high_hz: float, order: int = 4) -> TimeSeries:
    """Zero-phase Butterworth bandpass (forward-backward application).

    Band edges must sit strictly inside (0, Nyquist). The forward-backward
    pass doubles the magnitude attenuation and cancels the phase response,
    which keeps pulse morphology intact.
    """
    nyq = sig.sample_rate_hz / 2.0
    if not (0 < low_hz < high_hz):
        raise ValueError("need 0 < low_hz < high_hz")
    if high_hz >= nyq:
        raise ValueError(f"band edge {high_hz} Hz at or beyond Nyquist {nyq} Hz")
    if order < 1:
        raise ValueError("filter order must be positive")
    sos = sps.butter(order, [low_hz, high_hz], btype="bandpass", output="sos", fs=sig.sample_rate_hz)
    filtered = sps.sosfiltfilt(sos, sig.samples)
    return sig.with_samples(filtered)


def moving_average(sig: TimeSeries, window: int) -> TimeSeries:
    """Centered moving average with truncated edge windows.

    window=1 is the identity. Even windows extend one sample further to the
    right than to the left.
    """
    x = sig.samples
    n = x.size
    if window < 1:
        raise ValueError("window must be >= 1")
    if window > n:
        raise ValueError(f"window {window} exceeds signal length {n}")
    if window == 1:
        return sig.with_samples(x.copy())
    left = (window - 1) // 2
    right = window // 2
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(n)
    lo = np.maximum(idx - left, 0)
    hi = np.minimum(idx + right, n - 1)
    out = (csum[hi + 1] - csum[lo]) / (hi - lo + 1)
    return sig.with_samples(out)


def resample_fourier(sig: TimeSeries, factor: int) -> TimeSeries:
    """Upsample by an integer factor via symmetric zero-padding of the DFT.

    The spectrum keeps its conjugate symmetry (the Nyquist bin of an
    even-length input is split in half), so the output is real and
    band-limited content passes through exactly.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    x = sig.samples
    if factor == 1:
        return sig.with_samples(x.copy())
    n = x.size
    m = n * factor
    spec = np.fft.fft(x)
    padded = np.zeros(m, dtype=complex)
    if n % 2 == 0:
        half = n // 2
        padded[:half] = spec[:half]
        padded[half] = spec[half] / 2.0
        padded[m - half] = spec[half] / 2.0
        padded[m - half + 1:] = spec[half + 1:]
    else:
        half = (n + 1) // 2
        padded[:half] = spec[:half]
        padded[m - (n - half):] = spec[half:]
    out = np.fft.ifft(padded).real * factor
    return sig.with_samples(out, sample_rate_hz=sig.sample_rate_hz * factor)


def normalize_minmax(sig: TimeSeries) -> TimeSeries:
    """Affinely map the signal onto [0, 1]; a constant signal maps to 0.5."""
    x = sig.samples
    lo = x.min()
    hi = x.max()
    if hi == lo:
        return sig.with_samples(np.full_like(x, 0.5))
    return sig.with_samples((x - lo) / (hi - lo))


STAGE_NAMES = ("raw", "detrended", "artifact_suppressed", "bandpassed",
               "smoothed", "resampled", "normalized")


def preprocess_stages(sig: TimeSeries, cfg: PreprocessConfig) -> dict:
    """Run the full pipeline, returning every intermediate stage by name.

    Order: detrend -> suppress_artifacts -> bandpass -> optional moving
    average -> Fourier resampling -> min-max normalization. The "smoothed"
    key is present only when cfg.smoothing_window is set. Stage failures are
    re-raised as PipelineStageError naming the stage.
    """
    stages = {"raw": sig}

    def run(stage: str, fn, *args):
        try:
            return fn(*args)
        except PipelineStageError:
            raise
        except Exception as exc:
            raise PipelineStageError(stage, exc) from exc

    cur = run("detrended", detrend, sig)
    stages["detrended"] = cur
    cur = run("artifact_suppressed", suppress_artifacts, cur, cfg.clip_sigma)
    stages["artifact_suppressed"] = cur
    cur = run("bandpassed", bandpass, cur, cfg.band_low_hz, cfg.band_high_hz, cfg.filter_order)
    stages["bandpassed"] = cur
    if cfg.smoothing_window is not None:
        cur = run("smoothed", moving_average, cur, cfg.smoothing_window)
        stages["smoothed"] = cur
    cur = run("resampled", resample_fourier, cur, cfg.resample_factor)
    stages["resampled"] = cur
    cur = run("normalized", normalize_minmax, cur)
    stages["normalized"] = cur
    return stages


def preprocess(sig: TimeSeries, cfg: PreprocessConfig) -> TimeSeries:
    """Apply the six-stage pipeline and return the final [0, 1] signal."""
    return preprocess_stages(sig, cfg)["normalized"]
