"""Bipolar spike waveform: positive head followed by a negative tail.

A firing neuron drives this waveform on both of its terminals. Head and
tail amplitudes are stored as magnitudes; the emitted tail is negative.
Either segment can be flat or exponential. On its own the spike must stay
inside the device's write dead zone; only the head of one spike landing on
the tail of another produces enough net voltage to move a synapse.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .device import DeviceParams


class HeadStyle(enum.Enum):
    FLAT = "flat"
    EXP_DECAY = "exp"


class TailStyle(enum.Enum):
    FLAT = "flat"
    EXP_RELAX = "exp"


# An exponential segment is considered fully relaxed after three time
# constants; segment time constants therefore default to a third of the
# segment length.
_RELAX_RATIO = 3.0


@dataclass(frozen=True)
class SpikeShape:
    """Spike geometry. Durations in seconds, amplitudes in volts.

    tau_minus is the tail relaxation time constant; when omitted it
    defaults to tail_minus / 3 so the tail has essentially relaxed by the
    end of the spike. An exponential head uses tail_plus / 3 the same way.
    """

    va_plus: float
    va_minus: float
    tail_plus: float
    tail_minus: float
    tau_minus: float | None = None
    head_style: HeadStyle = HeadStyle.FLAT
    tail_style: TailStyle = TailStyle.EXP_RELAX

    def __post_init__(self) -> None:
        if self.va_plus <= 0 or self.va_minus < 0:
            raise ValueError("head amplitude must be positive, tail non-negative")
        if self.tail_plus <= 0 or self.tail_minus < 0:
            raise ValueError("head duration must be positive, tail non-negative")
        if self.tau_minus is None:
            base = self.tail_minus if self.tail_minus > 0 else self.tail_plus
            object.__setattr__(self, "tau_minus", base / _RELAX_RATIO)
        if self.tau_minus <= 0:
            raise ValueError("tau_minus must be positive")

    @property
    def tau_head(self) -> float:
        return self.tail_plus / _RELAX_RATIO


def spike_duration(shape: SpikeShape) -> float:
    return shape.tail_plus + shape.tail_minus


def spike_voltage(shape: SpikeShape, t: float) -> float:
    """Terminal voltage at time t since spike onset; zero outside the spike."""
    if t < 0.0 or t >= spike_duration(shape):
        return 0.0
    if t < shape.tail_plus:
        if shape.head_style is HeadStyle.FLAT:
            return shape.va_plus
        return shape.va_plus * math.exp(-t / shape.tau_head)
    if shape.tail_style is TailStyle.FLAT:
        return -shape.va_minus
    return -shape.va_minus * math.exp(-(t - shape.tail_plus) / shape.tau_minus)


def spike_voltage_many(shape: SpikeShape, t: np.ndarray) -> np.ndarray:
    """Vectorized spike_voltage over an array of sample times."""
    t = np.asarray(t, dtype=float)
    dur = spike_duration(shape)
    in_head = (t >= 0.0) & (t < shape.tail_plus)
    in_tail = (t >= shape.tail_plus) & (t < dur)

    if shape.head_style is HeadStyle.FLAT:
        head = np.full_like(t, shape.va_plus)
    else:
        head = shape.va_plus * np.exp(-np.clip(t, 0.0, None) / shape.tau_head)
    if shape.tail_style is TailStyle.FLAT:
        tail = np.full_like(t, -shape.va_minus)
    else:
        rel = np.clip(t - shape.tail_plus, 0.0, None)
        tail = -shape.va_minus * np.exp(-rel / shape.tau_minus)

    return np.where(in_head, head, np.where(in_tail, tail, 0.0))


@dataclass(frozen=True)
class ShapeCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ShapeReport:
    checks: tuple[ShapeCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> tuple[ShapeCheck, ...]:
        return tuple(c for c in self.checks if not c.passed)


def validate_shape(shape: SpikeShape, device: "DeviceParams") -> ShapeReport:
    """Check a shape against a device's write thresholds.

    no-disturb: a lone spike must never write, so the larger of the two
    amplitudes stays below the smaller threshold. learnability: head on
    tail must be able to write, so the summed amplitudes exceed the larger
    threshold. Both must pass for pair-based learning to work at all.
    """
    amp = max(shape.va_plus, shape.va_minus)
    lo_thr = min(device.v_p, device.v_n)
    hi_thr = max(device.v_p, device.v_n)
    reach = shape.va_plus + shape.va_minus

    checks = (
        ShapeCheck(
            "no-disturb",
            amp < lo_thr,
            f"max amplitude {amp:g} V vs lower threshold {lo_thr:g} V",
        ),
        ShapeCheck(
            "learnability",
            reach > hi_thr,
            f"head+tail reach {reach:g} V vs upper threshold {hi_thr:g} V",
        ),
    )
    return ShapeReport(checks)
