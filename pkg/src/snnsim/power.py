"""Supply-current bookkeeping and drive-efficiency figures.

A neuron always draws its quiescent bias. While firing it additionally
draws the output-driver bias, and the current it pushes through attached
synapses comes straight from the supply as well. Drive efficiency is the
fraction of supply current that actually reaches the synapse array:
eta = i_mr / (i_mr + i_ifn). Because the quiescent bias exists whether or
not a spike is in flight, eta is reported both against the driver bias
alone and against driver + quiescent bias; the two readings bracket the
achievable figure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .waveform import SpikeShape
    from .network import TraceSet

# Design-target driver efficiency at full fanout; reports annotate how far
# the computed figure lands from it.
TARGET_EFFICIENCY = 0.97


@dataclass(frozen=True)
class SupplyModel:
    """Static supply parameters: quiescent bias, driver bias, rail voltage."""

    i_base: float = 13.0e-6
    i_drive: float = 56.0e-6
    vdd: float = 1.8

    def __post_init__(self) -> None:
        if self.i_base < 0 or self.i_drive < 0 or self.vdd <= 0:
            raise ValueError("bias currents must be >= 0 and vdd > 0")


def baseline_power(supply: SupplyModel) -> float:
    """Idle power of one neuron (quiescent bias only)."""
    return supply.i_base * supply.vdd


def firing_power(supply: SupplyModel) -> float:
    """Worst-case own power of one firing neuron, excluding synapse load."""
    return (supply.i_base + supply.i_drive) * supply.vdd


def equivalent_load(resistances: Iterable[float]) -> float:
    """Parallel combination of the given resistances.

    N identical resistors are folded as R/N so the common equal-fanout
    case stays exact in floating point.
    """
    rs = list(resistances)
    if not rs:
        raise ValueError("equivalent_load needs at least one resistance")
    if any(r <= 0 for r in rs):
        raise ValueError("resistances must be positive")
    first = rs[0]
    if all(r == first for r in rs):
        return first / len(rs)
    return 1.0 / sum(1.0 / r for r in rs)


def efficiency(i_mr: float, i_ifn: float) -> float:
    """Fraction of supply current delivered into the synapse array."""
    if i_mr < 0 or i_ifn < 0:
        raise ValueError("currents must be non-negative")
    if i_mr == 0 and i_ifn == 0:
        raise ValueError("efficiency is undefined with no current at all")
    return i_mr / (i_mr + i_ifn)


@dataclass(frozen=True)
class EfficiencyFigures:
    """Drive efficiency at one operating point, under both bias readings."""

    i_mr_a: float
    i_ifn_driver_a: float
    i_ifn_total_a: float
    eta: float                  # against driver bias alone
    eta_with_baseline: float    # against driver + quiescent bias
    target: float
    gap_pct_points: float       # |eta - target| * 100
    within_one_point: bool
    bracket: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "i_mr_a": self.i_mr_a,
            "i_ifn_driver_a": self.i_ifn_driver_a,
            "i_ifn_total_a": self.i_ifn_total_a,
            "eta": self.eta,
            "eta_with_baseline": self.eta_with_baseline,
            "target": self.target,
            "gap_pct_points": self.gap_pct_points,
            "within_one_point": self.within_one_point,
            "bracket": list(self.bracket),
        }


def efficiency_figures(
    i_mr: float, supply: SupplyModel, target: float = TARGET_EFFICIENCY
) -> EfficiencyFigures:
    """Evaluate both efficiency readings for a peak synapse current.

    The reported bracket spans from the conservative reading (all bias
    charged against the spike) up to the design target.
    """
    eta = efficiency(i_mr, supply.i_drive)
    eta_base = efficiency(i_mr, supply.i_base + supply.i_drive)
    gap = abs(eta - target) * 100.0
    return EfficiencyFigures(
        i_mr_a=i_mr,
        i_ifn_driver_a=supply.i_drive,
        i_ifn_total_a=supply.i_base + supply.i_drive,
        eta=eta,
        eta_with_baseline=eta_base,
        target=target,
        gap_pct_points=gap,
        within_one_point=gap <= 1.0,
        bracket=(min(eta_base, target), max(eta_base, target)),
    )


@dataclass(frozen=True)
class NeuronPower:
    integration_s: float
    firing_s: float
    charge_c: float
    peak_current_a: float

    def to_dict(self) -> dict:
        return {
            "integration_s": self.integration_s,
            "firing_s": self.firing_s,
            "charge_c": self.charge_c,
            "peak_current_a": self.peak_current_a,
        }


@dataclass(frozen=True)
class PowerReport:
    supply: SupplyModel
    duration_s: float
    spike_duration_s: float
    per_neuron: Mapping[str, NeuronPower]
    peak_i_mr_a: float
    peak_i_ifn_a: float
    baseline_power_w: float
    firing_power_w: float
    efficiency: EfficiencyFigures | None  # None when nothing ever fired

    def to_dict(self) -> dict:
        return {
            "supply": {
                "i_base_a": self.supply.i_base,
                "i_drive_a": self.supply.i_drive,
                "vdd_v": self.supply.vdd,
            },
            "duration_s": self.duration_s,
            "spike_duration_s": self.spike_duration_s,
            "per_neuron": {k: v.to_dict() for k, v in self.per_neuron.items()},
            "peak_i_mr_a": self.peak_i_mr_a,
            "peak_i_ifn_a": self.peak_i_ifn_a,
            "baseline_power_w": self.baseline_power_w,
            "firing_power_w": self.firing_power_w,
            "efficiency": None if self.efficiency is None else self.efficiency.to_dict(),
        }


def build_report(
    *,
    supply: SupplyModel,
    shape: "SpikeShape",
    names: list[str],
    duration_s: float,
    integration_s: np.ndarray,
    firing_s: np.ndarray,
    charge_c: np.ndarray,
    peak_current_a: np.ndarray,
    peak_i_mr_a: float,
) -> PowerReport:
    """Assemble a PowerReport from already-accumulated per-neuron figures."""
    from .waveform import spike_duration

    fired = bool(np.any(firing_s > 0))
    per_neuron = {
        name: NeuronPower(
            integration_s=float(integration_s[i]),
            firing_s=float(firing_s[i]),
            charge_c=float(charge_c[i]),
            peak_current_a=float(peak_current_a[i]),
        )
        for i, name in enumerate(names)
    }
    return PowerReport(
        supply=supply,
        duration_s=duration_s,
        spike_duration_s=spike_duration(shape),
        per_neuron=per_neuron,
        peak_i_mr_a=peak_i_mr_a,
        peak_i_ifn_a=supply.i_base + (supply.i_drive if fired else 0.0),
        baseline_power_w=baseline_power(supply),
        firing_power_w=firing_power(supply),
        efficiency=efficiency_figures(peak_i_mr_a, supply) if peak_i_mr_a > 0 else None,
    )


def report(traces: "TraceSet", supply: SupplyModel, shape: "SpikeShape") -> PowerReport:
    """Recompute the power report from complete traces.

    Requires every neuron and every synapse to be present in the traces
    (record=None, record_every=1); synapse currents are rebuilt from the
    recorded net voltages and resistances via Ohm's law.
    """
    names = list(traces.neurons)
    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    n_steps = len(traces.neurons[names[0]].time) if names else 0
    dt = traces.dt

    mode = np.stack([traces.neurons[nm].mode for nm in names]) if n else np.zeros((0, 0))
    i_mr = np.zeros((n, n_steps))
    for label, tr in traces.synapses.items():
        pre_name, post_name = label.split("->", 1)
        valid = ~np.isnan(tr.v_net)
        i_abs = np.where(valid, np.abs(np.where(valid, tr.v_net, 0.0)) / tr.resistance, 0.0)
        i_mr[index[pre_name]] += i_abs
        i_mr[index[post_name]] += np.where(mode[index[post_name]] == 1, i_abs, 0.0)

    i_ifn = supply.i_base + supply.i_drive * (mode == 1)
    i_total = i_ifn + i_mr
    firing_s = (mode == 1).sum(axis=1) * dt
    duration_s = n_steps * dt
    return build_report(
        supply=supply,
        shape=shape,
        names=names,
        duration_s=duration_s,
        integration_s=duration_s - firing_s,
        firing_s=firing_s,
        charge_c=i_total.sum(axis=1) * dt,
        peak_current_a=i_total.max(axis=1) if n_steps else np.zeros(n),
        peak_i_mr_a=float(i_mr.max()) if i_mr.size else 0.0,
    )
