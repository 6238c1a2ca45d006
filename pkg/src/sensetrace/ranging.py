"""RSS and sound-amplitude ranging.

Radio ranging uses the free-space path-loss form
``d = 10^((power_at_1m - rss) / (10 * n))`` and its algebraic inverse.
Sound ranging applies the same form with the chirp's emission amplitude as
the 1-metre reference and a medium-specific exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import SensorKind
from .errors import EmptyWindow, InvalidDistance, InvalidMeasure

# Converted estimates are clamped to keep downstream statistics bounded.
MIN_DISTANCE_M = 0.01
MAX_DISTANCE_M = 1000.0


@dataclass(frozen=True)
class PathLossParams:
    """Calibration of the path-loss model: reference power at 1 m (dBm) and
    the propagation exponent (2 = free space)."""

    power_at_1m: float = -59.0
    exponent: float = 2.0

    def __post_init__(self) -> None:
        if not (self.exponent > 0 and math.isfinite(self.exponent)):
            raise ValueError(f"exponent must be > 0, got {self.exponent}")
        if not -100.0 <= self.power_at_1m <= 0.0:
            raise ValueError(f"power_at_1m must lie in [-100, 0] dBm, got {self.power_at_1m}")


@dataclass(frozen=True)
class ChirpSpec:
    """Audible chirp used for peer sensing: 2-6 kHz, ~20 dB, short duration.

    The amplitude doubles as the 1-metre reference level for sound ranging.
    """

    frequency: float = 4000.0
    amplitude: float = 20.0
    duration_ms: float = 50.0

    def __post_init__(self) -> None:
        if not 2000.0 <= self.frequency <= 6000.0:
            raise ValueError(f"chirp frequency must lie in [2000, 6000] Hz, got {self.frequency}")
        if not 15.0 <= self.amplitude <= 25.0:
            raise ValueError(f"chirp amplitude must lie within 20 +/- 5 dB, got {self.amplitude}")
        if not self.duration_ms > 0:
            raise ValueError("chirp duration must be positive")


@dataclass(frozen=True)
class DistanceEstimate:
    metres: float
    source: SensorKind
    timestamp: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.metres) and self.metres >= 0.0):
            raise ValueError(f"distance must be finite and >= 0, got {self.metres}")


def _clamp(metres: float) -> float:
    return min(max(metres, MIN_DISTANCE_M), MAX_DISTANCE_M)


def distance_from_rss(rss: float, params: PathLossParams) -> float:
    """Estimated distance in metres for a received signal strength in dBm."""
    if not math.isfinite(rss):
        raise InvalidMeasure(f"RSS must be finite, got {rss}")
    return _clamp(10.0 ** ((params.power_at_1m - rss) / (10.0 * params.exponent)))


def rss_from_distance(d: float, params: PathLossParams) -> float:
    """Exact inverse of distance_from_rss (within the clamp range)."""
    if not math.isfinite(d) or d <= 0:
        raise InvalidDistance(f"distance must be finite and > 0, got {d}")
    return params.power_at_1m - 10.0 * params.exponent * math.log10(d)


def sound_distance(
    received_amp: float,
    chirp: ChirpSpec,
    sound_params: PathLossParams,
    tolerance: float = 1.0,
) -> float:
    """Distance from a heard chirp's amplitude in dB.

    The 1-metre reference is the chirp's emission amplitude; only the
    exponent of ``sound_params`` applies (its radio reference field plays
    no role for sound).
    """
    if not math.isfinite(received_amp):
        raise InvalidMeasure(f"received amplitude must be finite, got {received_amp}")
    if received_amp > chirp.amplitude + tolerance:
        raise InvalidMeasure(
            f"received {received_amp} dB exceeds emitted {chirp.amplitude} dB beyond tolerance"
        )
    exponent = sound_params.exponent
    return _clamp(10.0 ** ((chirp.amplitude - received_amp) / (10.0 * exponent)))


def aggregate_window_distance(estimates: Sequence[DistanceEstimate]) -> float:
    """Arithmetic mean of the estimates over a window."""
    if not estimates:
        raise EmptyWindow("cannot aggregate an empty estimate sequence")
    return sum(e.metres for e in estimates) / len(estimates)


def combine_distances(wifi_d: float, sound_d: Optional[float] = None) -> float:
    """Average the WiFi and sound estimates when both exist; otherwise the
    WiFi estimate stands alone (too-noisy-for-sound path)."""
    if not math.isfinite(wifi_d):
        raise InvalidMeasure(f"wifi distance must be finite, got {wifi_d}")
    if sound_d is None:
        return wifi_d
    if not math.isfinite(sound_d):
        raise InvalidMeasure(f"sound distance must be finite, got {sound_d}")
    return (wifi_d + sound_d) / 2.0
