"""Power models, overload detection, VM selection and consolidation.

Detectors follow the conventional definitions: a robust-statistics
threshold 1 - s * MAD over the utilization history, and a least-squares
extrapolation one epoch ahead compared against full capacity after a
safety factor. Both abstain (host treated as not overloaded) when the
history is too short. VM selection picks the smallest ram/bw ratio as a
migration-time proxy.
"""

from __future__ import annotations

import statistics
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

DEFAULT_MAD_S = 2.5
DEFAULT_LR_SAFETY = 1.2
DEFAULT_LR_WINDOW = 10
DEFAULT_EPOCH = 300.0


@dataclass(frozen=True)
class PowerModel:
    """Linear interpolation between idle and full draw."""

    p_idle: float
    p_max: float

    def __post_init__(self):
        if not 0 <= self.p_idle <= self.p_max:
            raise ValueError(f"need 0 <= p_idle <= p_max, got ({self.p_idle}, {self.p_max})")

    def power_draw(self, u: float) -> float:
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"utilization {u} outside [0, 1]")
        return self.p_idle + (self.p_max - self.p_idle) * u


class UtilizationHistory:
    """Ring of (time, utilization) samples per host."""

    def __init__(self, capacity: int = 32):
        if capacity < 10:
            raise ValueError(f"history capacity must be >= 10, got {capacity}")
        self._ring: deque[tuple[float, float]] = deque(maxlen=capacity)

    def append(self, time: float, u: float) -> None:
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"utilization {u} outside [0, 1]")
        if self._ring and time < self._ring[-1][0]:
            raise ValueError("samples must be time-ordered")
        self._ring.append((time, u))

    def __len__(self) -> int:
        return len(self._ring)

    @property
    def times(self) -> list[float]:
        return [t for t, _ in self._ring]

    @property
    def utilizations(self) -> list[float]:
        return [u for _, u in self._ring]


def mad_threshold(samples: Sequence[float], s: float) -> Optional[float]:
    """Overload threshold 1 - s * MAD; None when fewer than two samples.

    The median of an even-length series is the mean of the two middle
    order statistics, so MAD(constant series) is exactly 0.
    """
    if len(samples) < 2:
        return None
    med = statistics.median(samples)
    mad = statistics.median([abs(u - med) for u in samples])
    return 1.0 - s * mad


def lr_predict(times: Sequence[float], samples: Sequence[float], window: int,
               epoch: float) -> Optional[float]:
    """Least-squares line over the last ``window`` samples evaluated one
    epoch past the newest sample; None when degenerate or too short."""
    if len(samples) < window or window < 2:
        return None
    xs = list(times[-window:])
    ys = list(samples[-window:])
    try:
        slope, intercept = statistics.linear_regression(xs, ys)
    except statistics.StatisticsError:
        return None
    return slope * (xs[-1] + epoch) + intercept


@dataclass(frozen=True)
class ConsolidationConfig:
    detector: str = "mad"  # "mad" or "lr"
    mad_s: float = DEFAULT_MAD_S
    lr_safety: float = DEFAULT_LR_SAFETY
    lr_window: int = DEFAULT_LR_WINDOW
    selector: str = "mmt"
    epoch: float = DEFAULT_EPOCH

    def __post_init__(self):
        if self.detector not in ("mad", "lr"):
            raise ValueError(f"unknown detector {self.detector!r}")
        if self.selector != "mmt":
            raise ValueError(f"unknown selector {self.selector!r}")
        if self.mad_s <= 0:
            raise ValueError("mad_s must be > 0")
        if self.lr_safety < 1:
            raise ValueError("lr_safety must be >= 1")
        if self.lr_window < 2:
            raise ValueError("lr_window must be >= 2")
        if self.epoch <= 0:
            raise ValueError("epoch must be > 0")


def detect_overload(config: ConsolidationConfig, history: UtilizationHistory,
                    current_u: float) -> tuple[bool, float]:
    """Return (overloaded, utilization bound the host must stay under).

    MAD compares the current utilization to its threshold; LR compares
    the safety-scaled one-epoch prediction to full capacity, so the
    bound while unloading is 1 / safety. An abstaining detector reports
    not-overloaded with bound 1.0.
    """
    if config.detector == "mad":
        threshold = mad_threshold(history.utilizations, config.mad_s)
        if threshold is None:
            return False, 1.0
        return current_u >= threshold, threshold
    prediction = lr_predict(history.times, history.utilizations,
                            config.lr_window, config.epoch)
    if prediction is None:
        return False, 1.0
    return config.lr_safety * prediction >= 1.0, 1.0 / config.lr_safety


def select_vm_mmt(vms: Sequence) -> Optional[object]:
    """Pick the VM with the smallest ram/bw ratio (ties to lowest id)."""
    best = None
    best_key = None
    for vm in vms:
        ratio = vm.ram / vm.bw if vm.bw > 0 else float("inf")
        key = (ratio, vm.id)
        if best_key is None or key < best_key:
            best, best_key = vm, key
    return best


def integrate_power(model: Optional[PowerModel], segments) -> float:
    """Joules over piecewise-constant utilization segments (t0, t1, u)."""
    if model is None:
        return 0.0
    total = 0.0
    for t0, t1, u in segments:
        total += model.power_draw(u) * (t1 - t0)
    return total
