"""Behavioral simulator for spiking networks with memristive synapses."""

__version__ = "0.1.0"

from .device import (
    DeviceParams,
    InfeasibleShapeError,
    MemristorState,
    calibrate_kappa,
    conductance,
    current,
    drift_rate,
    stdp_feasible,
    step,
)
from .netlist import Netlist, ParseError, parse, serialize
from .network import (
    Network,
    Periodic,
    PoissonStim,
    ResolutionError,
    Times,
    TraceSet,
    from_netlist,
    run,
    stdp_window_sweep,
    synapse_voltage,
)
from .neuron import (
    Drive,
    Mode,
    NeuronParams,
    NeuronState,
    WrongModeError,
    advance_fire,
    check_and_fire,
    integrate_step,
    terminal_drive,
)
from .power import PowerReport, SupplyModel, efficiency, equivalent_load
from .waveform import (
    HeadStyle,
    ShapeReport,
    SpikeShape,
    TailStyle,
    spike_duration,
    spike_voltage,
    validate_shape,
)

__all__ = [
    "DeviceParams",
    "Drive",
    "HeadStyle",
    "InfeasibleShapeError",
    "MemristorState",
    "Mode",
    "Netlist",
    "Network",
    "NeuronParams",
    "NeuronState",
    "ParseError",
    "Periodic",
    "PoissonStim",
    "PowerReport",
    "ResolutionError",
    "ShapeReport",
    "SpikeShape",
    "SupplyModel",
    "TailStyle",
    "Times",
    "TraceSet",
    "WrongModeError",
    "advance_fire",
    "calibrate_kappa",
    "check_and_fire",
    "conductance",
    "current",
    "drift_rate",
    "efficiency",
    "equivalent_load",
    "from_netlist",
    "integrate_step",
    "parse",
    "run",
    "serialize",
    "spike_duration",
    "spike_voltage",
    "stdp_feasible",
    "stdp_window_sweep",
    "step",
    "synapse_voltage",
    "terminal_drive",
    "validate_shape",
]
