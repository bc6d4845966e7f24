"""Memristive synapse model: conductance map, thresholded drift, calibration.

The device is a two-terminal resistive element whose internal state ``x`` in
[0, 1] linearly interpolates the conductance between 1/r_off (x = 0) and
1/r_on (x = 1). Reads follow Ohm's law. State moves only when the applied
voltage exceeds a polarity-dependent write threshold; the drift speed is
proportional to the overdrive beyond that threshold. Positive drift means
potentiation (conductance increases).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .waveform import SpikeShape


class InfeasibleShapeError(ValueError):
    """Raised when a spike shape cannot produce the requested state change."""


@dataclass(frozen=True)
class DeviceParams:
    """Static device parameters.

    v_p / v_n are the magnitudes of the positive and negative write
    thresholds (both > 0). kappa_p / kappa_n scale the drift speed per volt
    of overdrive, in 1/(V*s).
    """

    v_p: float
    v_n: float
    r_on: float
    r_off: float
    kappa_p: float = 0.0
    kappa_n: float = 0.0

    def __post_init__(self) -> None:
        if self.v_p <= 0 or self.v_n <= 0:
            raise ValueError("write thresholds must be positive")
        if not (0 < self.r_on < self.r_off):
            raise ValueError("need 0 < r_on < r_off")
        if self.kappa_p < 0 or self.kappa_n < 0:
            raise ValueError("drift coefficients must be non-negative")

    @property
    def g_on(self) -> float:
        return 1.0 / self.r_on

    @property
    def g_off(self) -> float:
        return 1.0 / self.r_off


@dataclass(frozen=True)
class MemristorState:
    """A device instance: normalized state x plus its parameter set."""

    x: float
    params: DeviceParams

    def __post_init__(self) -> None:
        if not 0.0 <= self.x <= 1.0:
            raise ValueError(f"state x={self.x} outside [0, 1]")


def conductance(params: DeviceParams, x):
    """Conductance in siemens for state x (scalar or array)."""
    return params.g_off + x * (params.g_on - params.g_off)


def resistance(params: DeviceParams, x):
    return 1.0 / conductance(params, x)


def x_from_conductance(params: DeviceParams, g: float) -> float:
    """Invert the linear conductance map. g must lie in [g_off, g_on]."""
    x = (g - params.g_off) / (params.g_on - params.g_off)
    if x < -1e-12 or x > 1.0 + 1e-12:
        raise ValueError(f"conductance {g} S outside device range")
    return min(1.0, max(0.0, x))


def x_from_resistance(params: DeviceParams, r: float) -> float:
    if r <= 0:
        raise ValueError("resistance must be positive")
    return x_from_conductance(params, 1.0 / r)


def current(params: DeviceParams, x, v):
    """Ohmic read current for voltage v across the device."""
    return conductance(params, x) * v


def drift_rate(params: DeviceParams, v):
    """State velocity dx/dt at applied voltage v (scalar or array).

    Piecewise linear in the overdrive: zero inside the dead zone
    [-v_n, v_p], proportional to (v - v_p) above it and to -(-v - v_n)
    below it. The two branches cannot be active at once, so the
    difference form below is exact.
    """
    if isinstance(v, np.ndarray):
        over_p = np.maximum(v - params.v_p, 0.0)
        over_n = np.maximum(-v - params.v_n, 0.0)
    else:
        over_p = max(v - params.v_p, 0.0)
        over_n = max(-v - params.v_n, 0.0)
    return params.kappa_p * over_p - params.kappa_n * over_n


def step(state: MemristorState, v: float, dt: float) -> MemristorState:
    """Advance the state by one explicit-Euler step, clamped to [0, 1].

    Sub-threshold voltages add exactly 0.0 and therefore leave the stored
    float bit-identical: reads never disturb the device.
    """
    x = state.x + drift_rate(state.params, v) * dt
    return replace(state, x=min(1.0, max(0.0, x)))


def integrate_drift(params: DeviceParams, x0: float, v: np.ndarray, dt: float) -> float:
    """Final state after applying the voltage samples v (one per dt slot).

    When every sample pushes in the same direction the clamp can only bind
    at the end of the excursion, so the summed update equals the stepwise
    one and is evaluated vectorized. Mixed-sign drive falls back to the
    stepwise loop, which clamps after every sample.
    """
    rates = drift_rate(params, v)
    if rates.size == 0:
        return x0
    if np.all(rates >= 0.0) or np.all(rates <= 0.0):
        return min(1.0, max(0.0, x0 + float(rates.sum()) * dt))
    x = x0
    for r in rates:
        x = min(1.0, max(0.0, x + r * dt))
    return x


def _pair_voltage_samples(shape: "SpikeShape", delta_t: float, dt: float) -> np.ndarray:
    """Net voltage (post minus pre) across a synapse for one spike pair.

    The pre neuron spikes at t = 0 and the post neuron at t = delta_t;
    outside its spike each terminal rests at zero. Samples are taken at
    interval midpoints so the discretization error of the drift integral
    stays second order in dt.
    """
    from .waveform import spike_duration, spike_voltage_many

    dur = spike_duration(shape)
    t_lo = min(0.0, delta_t)
    t_hi = max(dur, delta_t + dur)
    n = _grid_steps(t_hi - t_lo, dt)
    mid = t_lo + (np.arange(n) + 0.5) * dt
    return spike_voltage_many(shape, mid - delta_t) - spike_voltage_many(shape, mid)


def _grid_steps(span: float, dt: float) -> int:
    q = span / dt
    r = round(q)
    return int(r) if abs(q - r) < 1e-6 else int(math.ceil(q))


def simulate_spike_pair(
    params: DeviceParams,
    shape: "SpikeShape",
    delta_t: float,
    dt: float,
    x0: float,
) -> float:
    """Change in state x caused by one pre/post spike pair at offset delta_t."""
    v = _pair_voltage_samples(shape, delta_t, dt)
    return integrate_drift(params, x0, v, dt) - x0


def pair_conductance_change(
    params: DeviceParams,
    shape: "SpikeShape",
    delta_t: float,
    dt: float,
    x0: float,
) -> float:
    """Conductance change in siemens for one spike pair at offset delta_t."""
    dx = simulate_spike_pair(params, shape, delta_t, dt, x0)
    return dx * (params.g_on - params.g_off)


# Reference operating point for calibration and window sweeps. Chosen in the
# middle decades of typical device ranges; clamped into [r_on, r_off] for
# devices that do not cover it.
REFERENCE_RESISTANCE = 1.0e6


def reference_state(params: DeviceParams) -> float:
    r = min(max(REFERENCE_RESISTANCE, params.r_on), params.r_off)
    return x_from_resistance(params, r)


def stdp_feasible(v_p: float, v_n: float) -> bool:
    """Whether a spike shape can exist that writes on overlap but never alone.

    A non-disturbing lone spike caps both amplitudes below min(v_p, v_n),
    so the best overlap reaches just under 2*min(v_p, v_n); writing then
    requires max(v_p, v_n) < 2*min(v_p, v_n), i.e. the threshold asymmetry
    |v_p - v_n| must stay below min(v_p, v_n).
    """
    if v_p <= 0 or v_n <= 0:
        raise ValueError("write thresholds must be positive")
    return abs(v_p - v_n) < min(v_p, v_n)


def calibrate_kappa(
    params: DeviceParams,
    shape: "SpikeShape",
    target_dg: float,
    delta_t: float,
    *,
    dt: float | None = None,
    x0: float | None = None,
) -> tuple[float, float]:
    """Find (kappa_p, kappa_n) hitting +/-target_dg for a pair at +/-delta_t.

    Each polarity is bisected independently against the spike-pair
    simulation, with the opposite drift coefficient held at zero, starting
    from the reference operating point. Raises InfeasibleShapeError when
    the pair never exceeds the write threshold at this offset, in which
    case no coefficient can produce the target.
    """
    if target_dg <= 0:
        raise ValueError("target conductance change must be positive")
    if delta_t <= 0:
        raise ValueError("delta_t must be positive")
    if dt is None:
        dt = shape.tail_plus / 1000.0
    if x0 is None:
        x0 = reference_state(params)

    kp = _bisect_polarity(params, shape, target_dg, +delta_t, dt, x0, positive=True)
    kn = _bisect_polarity(params, shape, target_dg, -delta_t, dt, x0, positive=False)
    return kp, kn


def _bisect_polarity(
    params: DeviceParams,
    shape: "SpikeShape",
    target_dg: float,
    delta_t: float,
    dt: float,
    x0: float,
    positive: bool,
) -> float:
    sign = 1.0 if positive else -1.0

    def achieved(kappa: float) -> float:
        if positive:
            probe = replace(params, kappa_p=kappa, kappa_n=0.0)
        else:
            probe = replace(params, kappa_p=0.0, kappa_n=kappa)
        return sign * pair_conductance_change(probe, shape, delta_t, dt, x0)

    if achieved(1.0) == 0.0:
        raise InfeasibleShapeError(
            f"spike pair at delta_t={delta_t:g}s never crosses the "
            f"{'positive' if positive else 'negative'} write threshold"
        )

    lo, hi = 0.0, 1.0
    for _ in range(200):
        if achieved(hi) >= target_dg:
            break
        lo, hi = hi, hi * 2.0
    else:
        raise InfeasibleShapeError(
            "target conductance change exceeds what the device range allows"
        )

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if achieved(mid) < target_dg:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
