"""Shipped reference configuration.

One device/waveform/supply combination is carried as the default operating
point: write thresholds of 0.16 V / 0.15 V over a 100 kOhm..100 MOhm
resistance range, a 140 mV / 1 us head with a 30 mV / 3 us relaxing tail,
and a 13 uA quiescent / 56 uA driver / 1.8 V supply. The drift
coefficients below were produced by calibrate_kappa against the standard
pair target (+-0.2 uS for a pair offset of +-1 us, starting from 1 MOhm)
and are pinned so every install reproduces the same dynamics; a regression
test re-derives them.
"""

from __future__ import annotations

from .device import DeviceParams
from .power import SupplyModel
from .waveform import SpikeShape

# Standard pair-calibration target: conductance change per pair at this offset.
STDP_TARGET_DG = 0.2e-6
STDP_TARGET_DELTA_T = 1.0e-6

# Calibrated drift coefficients, 1/(V*s). Derived, not hand-picked: see
# module docstring.
KAPPA_P = 10588708.008687232
KAPPA_N = 2233475.8736332953


def default_shape() -> SpikeShape:
    return SpikeShape(
        va_plus=0.14,
        va_minus=0.03,
        tail_plus=1.0e-6,
        tail_minus=3.0e-6,
    )


def default_device() -> DeviceParams:
    return DeviceParams(
        v_p=0.16,
        v_n=0.15,
        r_on=1.0e5,
        r_off=1.0e8,
        kappa_p=KAPPA_P,
        kappa_n=KAPPA_N,
    )


def default_supply() -> SupplyModel:
    return SupplyModel()
