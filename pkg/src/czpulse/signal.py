"""Control-line transfer function: spectra, filtering, pre-distortion.

The control line is modelled as a one-pole low-pass filter
``H(omega) = omega_c / (omega_c - i omega)`` acting on the *flux* trace (the
physically transmitted signal).  :func:`apply_filter` realizes it exactly in
the time domain for piecewise-linear inputs; :func:`predistort` computes the
input that produces a desired output, either by inverting that discrete
update exactly (time-domain route, ``x = y + y'/omega_c``) or by dividing
the padded spectrum by ``H`` (frequency-domain route).

The filter attenuates every frequency (``|H| <= 1``), so pre-distorted
pulses overshoot the design wherever it has fast features; quantify this
with :func:`overshoot`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .units import mhz

__all__ = [
    "FilterSpec",
    "spectrum",
    "apply_filter",
    "predistort",
    "overshoot",
    "spectral_weight_above",
]


@dataclass(frozen=True)
class FilterSpec:
    """One-pole low-pass cutoff (angular, rad/ns); default 200 MHz."""

    omega_c: float = mhz(200.0)

    def __post_init__(self) -> None:
        if not self.omega_c > 0:
            raise ValueError("cutoff frequency must be positive")

    def response(self, omega: np.ndarray) -> np.ndarray:
        """Complex transfer function at angular frequencies omega."""
        return self.omega_c / (self.omega_c - 1j * np.asarray(omega))


def spectrum(signal: np.ndarray, dt: float, pad_factor: int = 8):
    """Fourier amplitude of a uniformly sampled signal, DC removed.

    Returns ``(freq_GHz, amplitude)``; the transform is zero-padded to
    ``pad_factor`` times the length for display resolution.
    """
    x = np.asarray(signal, dtype=float)
    x = x - np.mean(x)
    n = pad_factor * len(x)
    amp = np.abs(np.fft.rfft(x, n=n)) * dt
    freq = np.fft.rfftfreq(n, d=dt)  # cycles/ns = GHz
    return freq, amp


def apply_filter(x: np.ndarray, filt: FilterSpec, dt: float) -> np.ndarray:
    """Exact one-pole response ``y' = omega_c (x - y)`` with ``y(0) = x(0)``.

    The input is linearly interpolated between samples, for which the update
    has a closed form; DC gain is exactly one.
    """
    x = np.asarray(x, dtype=float)
    a = filt.omega_c * dt
    decay = math.exp(-a)
    rise = 1.0 - decay
    slope_w = 1.0 - rise / a  # weight of the in-step linear change
    held_w = rise - slope_w  # weight of the held left sample
    # y[n] = slope_w x[n] + held_w x[n-1] + decay y[n-1], started at y[0]=x[0]
    y, _ = lfilter(
        [slope_w, held_w], [1.0, -decay], x, zi=[x[0] * (1.0 - slope_w)]
    )
    return y


def _predistort_time(y: np.ndarray, filt: FilterSpec, dt: float) -> np.ndarray:
    """Exact inverse of the discrete one-pole update.

    This is the time-domain inverse ``x = y + y'/omega_c`` realized
    consistently with :func:`apply_filter`: solving its update for the input
    samples reproduces the desired output to rounding error.  The recurrence
    pole sits inside the unit circle, so the inversion is stable.
    """
    y = np.asarray(y, dtype=float)
    a = filt.omega_c * dt
    decay = math.exp(-a)
    rise = 1.0 - decay
    slope_w = 1.0 - rise / a
    held_w = rise - slope_w
    # x[n] = (y[n] - decay y[n-1])/slope_w - (held_w/slope_w) x[n-1]
    x, _ = lfilter(
        [1.0 / slope_w, -decay / slope_w],
        [1.0, held_w / slope_w],
        y,
        zi=[y[0] * (1.0 - 1.0 / slope_w)],
    )
    return x


def _predistort_frequency(
    y: np.ndarray, filt: FilterSpec, dt: float, pad_time: float
) -> np.ndarray:
    """Spectral division by the transfer function, with edge padding."""
    y = np.asarray(y, dtype=float)
    n_pad = int(math.ceil(pad_time / dt))
    padded = np.concatenate(
        [np.full(n_pad, y[0]), y, np.full(n_pad, y[-1])]
    )
    n = len(padded)
    omega = 2.0 * math.pi * np.fft.rfftfreq(n, d=dt)
    # numpy's forward transform uses exp(-i omega t), so the positive-bin
    # transfer function is the conjugate of the physics-convention H
    X = np.fft.rfft(padded) / filt.response(-omega)
    x = np.fft.irfft(X, n=n)
    return x[n_pad : n_pad + len(y)]


def predistort(
    y_desired: np.ndarray,
    filt: FilterSpec,
    dt: float,
    method: str = "time",
    pad_time: float | None = None,
) -> np.ndarray:
    """Input signal whose filtered output reproduces ``y_desired``.

    ``method`` selects the exact time-domain inverse (default) or the
    frequency-domain division; both ends are padded with the boundary values
    for at least ``5/omega_c`` to suppress wrap-around in the spectral
    route.  The two routes agree within 1e-6 on smooth pulses; a
    non-finite time-domain result falls back to the frequency route with a
    warning.
    """
    if pad_time is None:
        pad_time = 5.0 / filt.omega_c
    if method == "frequency":
        return _predistort_frequency(y_desired, filt, dt, pad_time)
    if method != "time":
        raise ValueError(f"unknown predistortion method '{method}'")
    x = _predistort_time(np.asarray(y_desired, dtype=float), filt, dt)
    if not np.all(np.isfinite(x)):
        warnings.warn(
            "time-domain inverse unstable on this input; "
            "falling back to the frequency-domain route",
            RuntimeWarning,
        )
        return _predistort_frequency(y_desired, filt, dt, pad_time)
    return x


def overshoot(x: np.ndarray, y: np.ndarray) -> float:
    """Pre-distortion overshoot: ``max |x - y| / range(y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    span = float(np.max(y) - np.min(y))
    if span == 0.0:
        return float(np.max(np.abs(x - y)))
    return float(np.max(np.abs(x - y)) / span)


def spectral_weight_above(
    signal: np.ndarray, dt: float, cutoff: float
) -> float:
    """Fraction of (DC-removed) spectral amplitude above an angular cutoff."""
    freq, amp = spectrum(signal, dt)
    omega = 2.0 * math.pi * freq
    total = float(np.sum(amp))
    if total == 0.0:
        return 0.0
    return float(np.sum(amp[omega > cutoff]) / total)
