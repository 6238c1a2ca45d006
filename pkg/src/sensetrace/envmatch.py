"""Ambient-environment matching via DTW over magnetic magnitude and air
pressure sequences.

Sequences may have different lengths (sensor rates differ between phones);
DTW aligns them with squared local cost, the accumulated cost is normalized
by the optimal warping path's cell count, and the square root of that score
is compared against a threshold in the sensor's natural unit (hPa or uT).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import ProximityState, SensorKind
from .errors import EmptySequence

ScalarSequence = Sequence[float]


@dataclass(frozen=True)
class EnvThresholds:
    """Similarity thresholds: 0.15 hPa for pressure, 20 uT for magnetism."""

    pressure_hpa: float = 0.15
    magnetic_ut: float = 20.0

    def __post_init__(self) -> None:
        if not (self.pressure_hpa > 0 and self.magnetic_ut > 0):
            raise ValueError("thresholds must be positive")

    def for_sensor(self, sensor: SensorKind) -> float:
        if sensor is SensorKind.BAROMETER:
            return self.pressure_hpa
        if sensor is SensorKind.MAGNETOMETER:
            return self.magnetic_ut
        raise ValueError(f"no environment threshold for {sensor}")


def magnitude(mx: float, my: float, mz: float) -> float:
    """Total scalar magnitude of a 3-axis magnetic reading; independent of
    the phone's orientation."""
    for c in (mx, my, mz):
        if not math.isfinite(c):
            raise ValueError(f"magnetometer component must be finite, got {c}")
    return math.sqrt(mx * mx + my * my + mz * mz)


def local_cost(a: float, b: float) -> float:
    """Squared difference between two scalar measures."""
    d = a - b
    return d * d


def _validate(seq: ScalarSequence, name: str) -> None:
    if len(seq) == 0:
        raise EmptySequence(f"{name} sequence is empty")
    for v in seq:
        if not math.isfinite(v):
            raise ValueError(f"{name} sequence contains non-finite value {v}")


def dtw_score(a: ScalarSequence, b: ScalarSequence) -> float:
    """Normalized DTW score between two scalar sequences.

    Fills the N x M accumulated-cost matrix with
    ``w(i,j) = cost(i,j) + min(w(i-1,j), w(i-1,j-1), w(i,j-1))`` (first row
    and column accumulate along their only direction), then divides the
    terminal cost by the cell count of the optimal warping path. The path is
    recovered by backtracking; ties prefer diagonal, then vertical, then
    horizontal steps, which keeps the result deterministic and favors the
    shortest optimal path.
    """
    _validate(a, "first")
    _validate(b, "second")
    n, m = len(a), len(b)

    acc = [[0.0] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        for j in range(m):
            c = local_cost(ai, b[j])
            if i == 0 and j == 0:
                acc[i][j] = c
            elif i == 0:
                acc[i][j] = c + acc[0][j - 1]
            elif j == 0:
                acc[i][j] = c + acc[i - 1][0]
            else:
                acc[i][j] = c + min(acc[i - 1][j], acc[i - 1][j - 1], acc[i][j - 1])

    # Backtrack to count cells on the optimal path.
    i, j = n - 1, m - 1
    cells = 1
    while i > 0 or j > 0:
        best = None
        if i > 0 and j > 0:
            best = (i - 1, j - 1)
        if i > 0 and (best is None or acc[i - 1][j] < acc[best[0]][best[1]]):
            best = (i - 1, j)
        if j > 0 and (best is None or acc[i][j - 1] < acc[best[0]][best[1]]):
            best = (i, j - 1)
        i, j = best
        cells += 1

    return acc[n - 1][m - 1] / cells


def env_similar(
    a: ScalarSequence,
    b: ScalarSequence,
    sensor: SensorKind,
    thresholds: EnvThresholds,
) -> tuple[float, bool]:
    """Compare two ambient sequences; returns (score, similar).

    The score is the square root of the normalized DTW score, which puts it
    back in the sensor's natural unit so the published thresholds apply.
    """
    score = math.sqrt(dtw_score(a, b))
    return score, score <= thresholds.for_sensor(sensor)


def select_env_sensor(prox_a: ProximityState, prox_b: ProximityState) -> SensorKind:
    """Barometer when both phones sit in open space; magnetometer otherwise
    (a pocketed phone distorts its own air-pressure reading)."""
    if prox_a is ProximityState.FAR and prox_b is ProximityState.FAR:
        return SensorKind.BAROMETER
    return SensorKind.MAGNETOMETER
