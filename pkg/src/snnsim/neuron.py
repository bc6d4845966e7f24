"""Dual-mode integrate-and-fire neuron.

In integration mode the input terminal is a virtual ground summing synaptic
currents onto a leaky membrane while the output floats; positive input
current drives the membrane DOWN (the integrator inverts), and the neuron
fires once the membrane reaches -v_thr. In firing mode both terminals are
driven with the spike waveform, the membrane is held at rest, and the whole
spike duration acts as the refractory period.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .waveform import SpikeShape, spike_duration, spike_voltage


class Mode(enum.Enum):
    INTEGRATION = "integration"
    FIRING = "firing"


class WrongModeError(RuntimeError):
    """An operation was applied to a neuron in the wrong mode."""


class DriveKind(enum.Enum):
    DRIVEN = "driven"
    VIRTUAL_GROUND = "virtual_ground"
    FLOATING = "floating"


@dataclass(frozen=True)
class Drive:
    """Electrical state of one neuron terminal."""

    kind: DriveKind
    v: float = 0.0

    @staticmethod
    def driven(v: float) -> "Drive":
        return Drive(DriveKind.DRIVEN, v)

    def voltage_or_none(self) -> float | None:
        """Node voltage, or None if the node is floating."""
        if self.kind is DriveKind.FLOATING:
            return None
        if self.kind is DriveKind.VIRTUAL_GROUND:
            return 0.0
        return self.v


VIRTUAL_GROUND = Drive(DriveKind.VIRTUAL_GROUND)
FLOATING = Drive(DriveKind.FLOATING)


@dataclass(frozen=True)
class NeuronParams:
    shape: SpikeShape
    c_mem: float = 1.0e-12
    r_leaky: float = 1.0e7
    v_thr: float = 0.3

    def __post_init__(self) -> None:
        if self.c_mem <= 0 or self.r_leaky <= 0 or self.v_thr <= 0:
            raise ValueError("c_mem, r_leaky and v_thr must be positive")

    @property
    def tau(self) -> float:
        return self.r_leaky * self.c_mem


@dataclass(frozen=True)
class NeuronState:
    v_mem: float = 0.0
    mode: Mode = Mode.INTEGRATION
    fire_elapsed: float = 0.0
    spike_count: int = 0


def integrate_step(
    params: NeuronParams, state: NeuronState, i_in: float, dt: float
) -> NeuronState:
    """One membrane update over dt with summed input current i_in.

    The leak is applied as an exact exponential factor, so with zero input
    the discrete trajectory equals the continuous solution at every step.
    """
    if state.mode is not Mode.INTEGRATION:
        raise WrongModeError("integrate_step called while firing")
    v = state.v_mem * math.exp(-dt / params.tau) - (i_in / params.c_mem) * dt
    return replace(state, v_mem=v)


def check_and_fire(params: NeuronParams, state: NeuronState) -> NeuronState:
    """Enter firing mode when the membrane has reached -v_thr.

    A neuron already firing is refractory and is returned unchanged.
    """
    if state.mode is Mode.FIRING or state.v_mem > -params.v_thr:
        return state
    return NeuronState(
        v_mem=0.0,
        mode=Mode.FIRING,
        fire_elapsed=0.0,
        spike_count=state.spike_count + 1,
    )


def advance_fire(params: NeuronParams, state: NeuronState, dt: float) -> NeuronState:
    """Advance spike playback by dt, returning to integration when done."""
    if state.mode is not Mode.FIRING:
        raise WrongModeError("advance_fire called while integrating")
    elapsed = state.fire_elapsed + dt
    if elapsed >= spike_duration(params.shape):
        return replace(state, mode=Mode.INTEGRATION, v_mem=0.0, fire_elapsed=0.0)
    return replace(state, fire_elapsed=elapsed)


def terminal_drive(params: NeuronParams, state: NeuronState) -> tuple[Drive, Drive]:
    """(input terminal, output terminal) drive for the current mode."""
    if state.mode is Mode.INTEGRATION:
        return VIRTUAL_GROUND, FLOATING
    v = spike_voltage(params.shape, state.fire_elapsed)
    drive = Drive.driven(v)
    return drive, drive
