"""Network container and the fixed-timestep simulation engine.

The engine advances all neurons and synapses on one shared clock. Within a
step the phases run in a fixed order: stimuli, terminal drives, synapse
voltages/currents/drift, summing-current accumulation, membrane
integration, threshold checks, and finally spike playback advance. State
arrays are updated with plain sequential numpy operations, so two runs with
the same seed produce identical traces, spike logs and final conductances.

Conventions baked into the engine:

* drives are sampled at the start of each step and held for dt;
* a neuron fired by a stimulus starts driving in the same step, a neuron
  fired by its threshold starts driving in the next step, so every spike
  plays its waveform from t = 0;
* when both ends of a synapse are driven the full net voltage stresses the
  device but no current is summed into either neuron;
* summing currents are accumulated in synapse declaration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from . import power as power_mod
from .device import DeviceParams, MemristorState, x_from_resistance
from .neuron import Drive, Mode, NeuronParams, NeuronState
from .rng import SplitMix64, combine_seeds
from .waveform import SpikeShape, spike_duration, spike_voltage_many

if TYPE_CHECKING:  # pragma: no cover
    from .netlist import Netlist

DEFAULT_DT = 1.0e-8

# A spike head shorter than this many steps is too coarsely sampled to
# trust the discrete drive windows.
MIN_HEAD_STEPS = 20


class ResolutionError(RuntimeError):
    """The timestep is too coarse for the configured spike shape."""


# --------------------------------------------------------------------------
# Stimuli


@dataclass(frozen=True)
class Periodic:
    """Regular spike train: t0, t0+period, t0+2*period, ..."""

    t0: float
    period: float

    def __post_init__(self) -> None:
        if self.t0 < 0 or self.period <= 0:
            raise ValueError("need t0 >= 0 and period > 0")


@dataclass(frozen=True)
class Times:
    """Explicit sorted spike times in seconds."""

    times: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(t < 0 for t in self.times):
            raise ValueError("stimulus times must be non-negative")
        if list(self.times) != sorted(self.times):
            raise ValueError("stimulus times must be sorted")


@dataclass(frozen=True)
class PoissonStim:
    """Poisson spike train with the given mean rate, derived from seed."""

    rate: float
    seed: int

    def __post_init__(self) -> None:
        if self.rate < 0:
            raise ValueError("rate must be non-negative")


Stimulus = Periodic | Times | PoissonStim


def stimulus_times(stim: Stimulus, t_end: float, run_seed: int = 0) -> list[float]:
    """Materialize all event times in [0, t_end) for one stimulus."""
    out: list[float] = []
    if isinstance(stim, Periodic):
        k = 0
        while True:
            t = stim.t0 + k * stim.period
            if t >= t_end:
                break
            out.append(t)
            k += 1
    elif isinstance(stim, Times):
        out = [t for t in stim.times if t < t_end]
    elif isinstance(stim, PoissonStim):
        if stim.rate > 0:
            stream = SplitMix64(combine_seeds(stim.seed, run_seed))
            t = stream.next_exponential(stim.rate)
            while t < t_end:
                out.append(t)
                t += stream.next_exponential(stim.rate)
    else:  # pragma: no cover
        raise TypeError(f"unknown stimulus {stim!r}")
    return out


# --------------------------------------------------------------------------
# Network container


@dataclass
class Synapse:
    pre: int
    post: int
    device: MemristorState


class Network:
    """Named neurons, directed synapses and per-neuron stimulus programs."""

    def __init__(self, device_params: DeviceParams, shape: SpikeShape) -> None:
        self.device_params = device_params
        self.shape = shape
        self.neuron_names: list[str] = []
        self.neuron_params: list[NeuronParams] = []
        self.neuron_states: list[NeuronState] = []
        self.stimuli: dict[int, Stimulus] = {}
        self.synapses: list[Synapse] = []
        self._index: dict[str, int] = {}
        self._pairs: set[tuple[int, int]] = set()

    def add_neuron(self, name: str, params: NeuronParams | None = None) -> int:
        if name in self._index:
            raise ValueError(f"duplicate neuron name {name!r}")
        if params is None:
            params = NeuronParams(shape=self.shape)
        idx = len(self.neuron_names)
        self.neuron_names.append(name)
        self.neuron_params.append(params)
        self.neuron_states.append(NeuronState())
        self._index[name] = idx
        return idx

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValueError(f"unknown neuron {name!r}") from None

    def add_synapse(self, pre: str, post: str, resistance: float) -> int:
        p, q = self.index_of(pre), self.index_of(post)
        if p == q:
            raise ValueError(f"synapse may not loop {pre!r} back onto itself")
        if (p, q) in self._pairs:
            raise ValueError(f"duplicate synapse {pre!r}->{post!r}")
        x = x_from_resistance(self.device_params, resistance)
        self.synapses.append(Synapse(p, q, MemristorState(x, self.device_params)))
        self._pairs.add((p, q))
        return len(self.synapses) - 1

    def set_stimulus(self, name: str, stim: Stimulus) -> None:
        self.stimuli[self.index_of(name)] = stim

    def synapse_label(self, syn: Synapse) -> str:
        return f"{self.neuron_names[syn.pre]}->{self.neuron_names[syn.post]}"


def synapse_voltage(
    pre_drives: tuple[Drive, Drive], post_drives: tuple[Drive, Drive]
) -> float | None:
    """Net voltage across a synapse, post input side minus pre output side.

    Returns None when either end floats (open circuit: no current and no
    state stress).
    """
    v_pre = pre_drives[1].voltage_or_none()
    v_post = post_drives[0].voltage_or_none()
    if v_pre is None or v_post is None:
        return None
    return v_post - v_pre


# --------------------------------------------------------------------------
# Traces


@dataclass
class NeuronTrace:
    time: np.ndarray
    v_mem: np.ndarray
    mode: np.ndarray  # uint8: 0 = integration, 1 = firing
    i_in: np.ndarray
    i_mr: np.ndarray


@dataclass
class SynapseTrace:
    time: np.ndarray
    resistance: np.ndarray
    v_net: np.ndarray  # NaN where the synapse was open


@dataclass
class TraceSet:
    dt: float
    t_end: float
    neurons: dict[str, NeuronTrace] = field(default_factory=dict)
    synapses: dict[str, SynapseTrace] = field(default_factory=dict)
    spikes: list[tuple[str, float]] = field(default_factory=list)


def _steps_in(span: float, dt: float, *, cover: bool = False) -> int:
    """Number of dt slots in span, tolerant of float division noise."""
    q = span / dt
    r = round(q)
    if abs(q - r) < 1e-6:
        return int(r)
    return int(math.ceil(q)) if cover else int(math.floor(q))


def _step_index(t: float, dt: float) -> int:
    q = t / dt
    r = round(q)
    return int(r) if abs(q - r) < 1e-6 else int(math.floor(q))


# --------------------------------------------------------------------------
# Engine


def run(
    net: Network,
    t_end: float,
    dt: float = DEFAULT_DT,
    *,
    record: Sequence[str] | None = None,
    record_every: int = 1,
    seed: int = 0,
    supply: "power_mod.SupplyModel | None" = None,
) -> tuple[TraceSet, "power_mod.PowerReport"]:
    """Simulate the network over [0, t_end) and return traces and power.

    record selects which neuron names and "pre->post" synapse labels are
    traced (None records everything); record_every keeps every k-th step.
    Final neuron and synapse states are written back into net.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    if dt > net.shape.tail_plus / MIN_HEAD_STEPS:
        raise ResolutionError(
            f"dt={dt:g}s undersamples the {net.shape.tail_plus:g}s spike head; "
            f"need dt <= tail_plus/{MIN_HEAD_STEPS}"
        )
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    if supply is None:
        supply = power_mod.SupplyModel()

    n = len(net.neuron_names)
    m = len(net.synapses)
    dev = net.device_params
    n_steps = _steps_in(t_end, dt)

    # --- static arrays
    c_mem = np.array([p.c_mem for p in net.neuron_params])
    v_thr = np.array([p.v_thr for p in net.neuron_params])
    decay = np.array([math.exp(-dt / p.tau) for p in net.neuron_params])
    pre = np.array([s.pre for s in net.synapses], dtype=np.int64)
    post = np.array([s.post for s in net.synapses], dtype=np.int64)
    g_span = dev.g_on - dev.g_off

    n_fire_steps = max(1, _steps_in(spike_duration(net.shape), dt, cover=True))
    wave_table = spike_voltage_many(net.shape, np.arange(n_fire_steps) * dt)

    # --- dynamic arrays seeded from the container
    v_mem = np.array([s.v_mem for s in net.neuron_states])
    firing = np.array([s.mode is Mode.FIRING for s in net.neuron_states])
    fire_step = np.array(
        [_step_index(s.fire_elapsed, dt) for s in net.neuron_states], dtype=np.int64
    )
    spike_count = np.array([s.spike_count for s in net.neuron_states], dtype=np.int64)
    x = np.array([s.device.x for s in net.synapses])

    # --- stimulus schedule
    events: dict[int, list[int]] = {}
    for nid, stim in sorted(net.stimuli.items()):
        for t in stimulus_times(stim, t_end, seed):
            events.setdefault(_step_index(t, dt), []).append(nid)

    # --- recording buffers
    if record is None:
        rec_n = np.arange(n)
        rec_s = np.arange(m)
    else:
        rec_n_list: list[int] = []
        rec_s_list: list[int] = []
        labels = {net.synapse_label(s): i for i, s in enumerate(net.synapses)}
        for name in record:
            if name in net._index:
                rec_n_list.append(net._index[name])
            elif name in labels:
                rec_s_list.append(labels[name])
            else:
                raise ValueError(f"unknown record target {name!r}")
        rec_n = np.array(rec_n_list, dtype=np.int64)
        rec_s = np.array(rec_s_list, dtype=np.int64)
    n_rec_steps = (n_steps + record_every - 1) // record_every
    rec_times = np.arange(n_rec_steps) * (dt * record_every)
    buf_v = np.empty((len(rec_n), n_rec_steps))
    buf_mode = np.empty((len(rec_n), n_rec_steps), dtype=np.uint8)
    buf_iin = np.empty((len(rec_n), n_rec_steps))
    buf_imr = np.empty((len(rec_n), n_rec_steps))
    buf_r = np.empty((len(rec_s), n_rec_steps))
    buf_vnet = np.empty((len(rec_s), n_rec_steps))

    spikes: list[tuple[str, float]] = []
    zeros_n = np.zeros(n)

    # --- power accumulators
    firing_steps = np.zeros(n, dtype=np.int64)
    charge = np.zeros(n)
    peak_current = np.zeros(n)
    peak_i_mr = 0.0

    def ignite(nid: int, t_fire: float) -> None:
        firing[nid] = True
        fire_step[nid] = 0
        v_mem[nid] = 0.0
        spike_count[nid] += 1
        spikes.append((net.neuron_names[nid], t_fire))

    for k in range(n_steps):
        t = k * dt

        # (1) stimuli fire eligible neurons; a refractory neuron drops the event
        if k in events:
            for nid in events[k]:
                if not firing[nid]:
                    ignite(nid, t)

        # (2) terminal drives for this step
        driving = firing.copy()
        v_drive = zeros_n.copy()
        if driving.any():
            idx = np.nonzero(driving)[0]
            v_drive[idx] = wave_table[fire_step[idx]]
            any_drive = True
        else:
            any_drive = False

        # (3)+(4) synapse voltages, drift, and summing currents
        if any_drive and m:
            pre_on = driving[pre]
            post_on = driving[post]
            v_net = v_drive[post] - v_drive[pre]
            g = dev.g_off + x * g_span
            if rec_s.size:
                buf_pending_r = 1.0 / g[rec_s]
                buf_pending_vnet = np.where(pre_on[rec_s], v_net[rec_s], np.nan)
            over_p = np.maximum(v_net - dev.v_p, 0.0)
            over_n = np.maximum(-v_net - dev.v_n, 0.0)
            rate = dev.kappa_p * over_p - dev.kappa_n * over_n
            np.clip(x + np.where(pre_on, rate, 0.0) * dt, 0.0, 1.0, out=x)

            i_fwd = np.where(pre_on & ~post_on, g * v_drive[pre], 0.0)
            i_in = np.bincount(post, weights=i_fwd, minlength=n)
            i_abs = np.where(pre_on, g * np.abs(v_net), 0.0)
            i_mr = np.bincount(pre, weights=i_abs, minlength=n) + np.bincount(
                post, weights=np.where(post_on, i_abs, 0.0), minlength=n
            )
        else:
            i_in = zeros_n
            i_mr = zeros_n
            if rec_s.size:
                buf_pending_r = 1.0 / (dev.g_off + x[rec_s] * g_span)
                buf_pending_vnet = np.full(rec_s.size, np.nan)

        # record the step as seen by its own drives
        if k % record_every == 0:
            j = k // record_every
            buf_v[:, j] = v_mem[rec_n]
            buf_mode[:, j] = driving[rec_n]
            buf_iin[:, j] = i_in[rec_n]
            buf_imr[:, j] = i_mr[rec_n]
            if rec_s.size:
                buf_r[:, j] = buf_pending_r
                buf_vnet[:, j] = buf_pending_vnet

        # power bookkeeping
        i_ifn = supply.i_base + np.where(driving, supply.i_drive, 0.0)
        i_total = i_ifn + i_mr
        charge += i_total * dt
        np.maximum(peak_current, i_total, out=peak_current)
        firing_steps += driving
        if any_drive:
            peak_i_mr = max(peak_i_mr, float(i_mr.max()))

        # (5) membrane integration for non-driving neurons
        v_new = v_mem * decay - i_in * (dt / c_mem)
        v_mem = np.where(driving, v_mem, v_new)

        # (6) threshold fires take effect from the next step
        newly = (~driving) & (v_mem <= -v_thr)
        if newly.any():
            for nid in np.nonzero(newly)[0]:
                ignite(int(nid), (k + 1) * dt)

        # (7) advance playback for neurons that drove this step
        if any_drive:
            fire_step[driving] += 1
            ended = driving & (fire_step >= n_fire_steps)
            if ended.any():
                firing[ended] = False
                v_mem[ended] = 0.0
                fire_step[ended] = 0

    # --- write final state back into the container
    for i in range(n):
        mode = Mode.FIRING if firing[i] else Mode.INTEGRATION
        net.neuron_states[i] = NeuronState(
            v_mem=float(v_mem[i]),
            mode=mode,
            fire_elapsed=float(fire_step[i] * dt) if firing[i] else 0.0,
            spike_count=int(spike_count[i]),
        )
    for i, syn in enumerate(net.synapses):
        syn.device = replace(syn.device, x=float(x[i]))

    traces = TraceSet(dt=dt, t_end=t_end, spikes=spikes)
    for row, nid in enumerate(rec_n):
        traces.neurons[net.neuron_names[nid]] = NeuronTrace(
            time=rec_times,
            v_mem=buf_v[row],
            mode=buf_mode[row],
            i_in=buf_iin[row],
            i_mr=buf_imr[row],
        )
    for row, sid in enumerate(rec_s):
        traces.synapses[net.synapse_label(net.synapses[sid])] = SynapseTrace(
            time=rec_times, resistance=buf_r[row], v_net=buf_vnet[row]
        )

    report = power_mod.build_report(
        supply=supply,
        shape=net.shape,
        names=net.neuron_names,
        duration_s=n_steps * dt,
        integration_s=(n_steps - firing_steps) * dt,
        firing_s=firing_steps * dt,
        charge_c=charge,
        peak_current_a=peak_current,
        peak_i_mr_a=peak_i_mr,
    )
    return traces, report


# --------------------------------------------------------------------------
# Pair-protocol sweep


def stdp_window_sweep(
    device: DeviceParams,
    shape: SpikeShape,
    delta_ts: Iterable[float],
    *,
    dt: float | None = None,
    x0: float | None = None,
) -> list[tuple[float, float]]:
    """Conductance change per isolated pre/post spike pair at each offset.

    Each pair starts from the reference operating point (1 MOhm clamped to
    the device range), pre spiking at t = 0 and post at t = delta_t.
    """
    from .device import pair_conductance_change, reference_state

    if dt is None:
        dt = shape.tail_plus / 100.0
    if x0 is None:
        x0 = reference_state(device)
    return [
        (float(d), pair_conductance_change(device, shape, float(d), dt, x0))
        for d in delta_ts
    ]


# --------------------------------------------------------------------------
# Construction from a parsed netlist


def from_netlist(nl: "Netlist") -> Network:
    """Build a ready-to-run Network from a validated netlist.

    Drift coefficients omitted in the netlist are filled in by calibrating
    the device against the standard pair target (see presets).
    """
    from . import presets
    from .device import calibrate_kappa

    kp, kn = nl.device.kappa_p, nl.device.kappa_n
    if kp is None or kn is None:
        base = nl.device.to_params(kappa_p=0.0, kappa_n=0.0)
        cal_p, cal_n = calibrate_kappa(
            base, nl.shape, presets.STDP_TARGET_DG, presets.STDP_TARGET_DELTA_T
        )
        kp = cal_p if kp is None else kp
        kn = cal_n if kn is None else kn
    device = nl.device.to_params(kappa_p=kp, kappa_n=kn)

    net = Network(device, nl.shape)
    for name in sorted(nl.neurons):
        net.add_neuron(name, nl.neurons[name])
    for pre, post, r in nl.synapses:
        net.add_synapse(pre, post, r)
    for name, stim in sorted(nl.stimuli.items()):
        net.set_stimulus(name, stim)
    return net
