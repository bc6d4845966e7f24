"""Command line front end.

Four commands: run (simulate a netlist to CSV traces plus a JSON summary),
stdp-sweep (pair-protocol conductance window to CSV), power-sweep
(closed-form drive/efficiency figures per fanout to CSV) and check
(threshold feasibility and optional shape validation).

Exit codes: 0 success, 1 I/O trouble, 2 netlist parse errors, 3 timestep
too coarse for the spike shape, 4 infeasible thresholds/shape. Output
files are written to a temporary name and renamed into place, so a failed
run never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__, netlist as netlist_mod, network, power, presets
from .device import (
    DeviceParams,
    InfeasibleShapeError,
    calibrate_kappa,
    pair_conductance_change,
    reference_state,
    resistance as device_resistance,
    stdp_feasible,
)
from .netlist import parse_si_number
from .waveform import HeadStyle, SpikeShape, TailStyle, validate_shape

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARSE = 2
EXIT_RESOLUTION = 3
EXIT_INFEASIBLE = 4


def _fmt(x: float) -> str:
    return f"{x:.17e}"


def _write_atomic(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(data, encoding="utf-8", newline="")
    os.replace(tmp, path)


def _thread_count() -> int:
    raw = os.environ.get("SNNSIM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def _si(text: str) -> float:
    try:
        return parse_si_number(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed number {text!r}") from None


# --------------------------------------------------------------------------
# run


def _neurons_csv(traces: network.TraceSet) -> str:
    rows = ["time_s,neuron,v_mem_v,mode,i_in_a"]
    for name, tr in traces.neurons.items():
        for j in range(len(tr.time)):
            mode = "firing" if tr.mode[j] else "integration"
            rows.append(
                f"{_fmt(tr.time[j])},{name},{_fmt(tr.v_mem[j])},{mode},{_fmt(tr.i_in[j])}"
            )
    return "\n".join(rows) + "\n"


def _synapses_csv(traces: network.TraceSet) -> str:
    rows = ["time_s,synapse,resistance_ohm,v_net_v"]
    for label, tr in traces.synapses.items():
        for j in range(len(tr.time)):
            rows.append(
                f"{_fmt(tr.time[j])},{label},{_fmt(tr.resistance[j])},{_fmt(tr.v_net[j])}"
            )
    return "\n".join(rows) + "\n"


def _load_netlist(path: str) -> tuple[netlist_mod.Netlist | None, int]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None, EXIT_IO
    result = netlist_mod.parse(text)
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if not result.ok:
        for err in result.errors:
            print(f"{path}:{err}", file=sys.stderr)
        return None, EXIT_PARSE
    return result.netlist, EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    nl, status = _load_netlist(args.netlist)
    if nl is None:
        return status
    try:
        net = network.from_netlist(nl)
    except InfeasibleShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    dt = args.dt if args.dt is not None else nl.sim.dt
    try:
        traces, report = network.run(
            net, nl.sim.t_end, dt, record=nl.sim.record, seed=args.seed
        )
    except network.ResolutionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION

    spike_times: dict[str, list[float]] = {name: [] for name in net.neuron_names}
    for name, t in traces.spikes:
        spike_times[name].append(t)
    summary = {
        "tool": {"name": "snnsim", "version": __version__},
        "seed": args.seed,
        "dt_s": dt,
        "t_end_s": nl.sim.t_end,
        "netlist": netlist_mod.serialize(nl),
        "neurons": {
            name: {
                "spike_count": net.neuron_states[i].spike_count,
                "spike_times_s": spike_times[name],
                "final_v_mem_v": net.neuron_states[i].v_mem,
            }
            for i, name in enumerate(net.neuron_names)
        },
        "synapses": {
            net.synapse_label(s): {
                "initial_resistance_ohm": nl.synapses[j][2],
                "final_resistance_ohm": device_resistance(net.device_params, s.device.x),
            }
            for j, s in enumerate(net.synapses)
        },
        "power": report.to_dict(),
    }

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _write_atomic(out / "traces_neurons.csv", _neurons_csv(traces))
        _write_atomic(out / "traces_synapses.csv", _synapses_csv(traces))
        _write_atomic(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# --------------------------------------------------------------------------
# stdp-sweep


def _parse_range(text: str) -> list[float] | None:
    parts = text.split(":")
    if len(parts) != 3:
        return None
    try:
        start, stop, step = (parse_si_number(p) for p in parts)
    except ValueError:
        return None
    if step <= 0 or stop < start:
        return None
    count = int((stop - start) / step + 1e-9) + 1
    return [start + i * step for i in range(count)]


def _shape_from_args(args: argparse.Namespace, base: SpikeShape) -> SpikeShape:
    styles = {"flat": (HeadStyle.FLAT, TailStyle.FLAT), "exp": (HeadStyle.EXP_DECAY, TailStyle.EXP_RELAX)}
    return SpikeShape(
        va_plus=args.va_plus if args.va_plus is not None else base.va_plus,
        va_minus=args.va_minus if args.va_minus is not None else base.va_minus,
        tail_plus=args.tail_plus if args.tail_plus is not None else base.tail_plus,
        tail_minus=args.tail_minus if args.tail_minus is not None else base.tail_minus,
        tau_minus=args.tau_minus,
        head_style=styles[args.head][0] if args.head else base.head_style,
        tail_style=styles[args.tail][1] if args.tail else base.tail_style,
    )


def cmd_stdp_sweep(args: argparse.Namespace) -> int:
    delta_ts = _parse_range(args.range)
    if delta_ts is None:
        print(f"error: malformed range {args.range!r}, want start:stop:step", file=sys.stderr)
        return EXIT_PARSE

    if args.netlist is not None:
        nl, status = _load_netlist(args.netlist)
        if nl is None:
            return status
        shape = nl.shape
        base_params = nl.device.to_params()
        kp, kn = nl.device.kappa_p, nl.device.kappa_n
    else:
        ref = presets.default_device()
        shape = _shape_from_args(args, presets.default_shape())
        base_params = DeviceParams(
            v_p=args.vp if args.vp is not None else ref.v_p,
            v_n=args.vn if args.vn is not None else ref.v_n,
            r_on=args.r_on if args.r_on is not None else ref.r_on,
            r_off=args.r_off if args.r_off is not None else ref.r_off,
        )
        kp, kn = args.kappa_p, args.kappa_n

    report = validate_shape(shape, base_params)
    if not report.ok:
        for check in report.failed():
            print(f"error: shape check {check.name!r} failed: {check.detail}", file=sys.stderr)
        return EXIT_INFEASIBLE

    if kp is None or kn is None:
        try:
            cal_p, cal_n = calibrate_kappa(
                base_params, shape, presets.STDP_TARGET_DG, presets.STDP_TARGET_DELTA_T
            )
        except InfeasibleShapeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INFEASIBLE
        kp = cal_p if kp is None else kp
        kn = cal_n if kn is None else kn
    device = DeviceParams(
        v_p=base_params.v_p,
        v_n=base_params.v_n,
        r_on=base_params.r_on,
        r_off=base_params.r_off,
        kappa_p=kp,
        kappa_n=kn,
    )

    dt = args.dt if args.dt is not None else shape.tail_plus / 100.0
    x0 = reference_state(device)
    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            dgs = list(
                pool.map(
                    lambda d: pair_conductance_change(device, shape, d, dt, x0),
                    delta_ts,
                )
            )
        points = list(zip(delta_ts, dgs))
    else:
        points = network.stdp_window_sweep(device, shape, delta_ts, dt=dt, x0=x0)

    rows = ["delta_t_s,delta_g_s"]
    rows.extend(f"{_fmt(d)},{_fmt(g)}" for d, g in points)
    try:
        _write_atomic(Path(args.out), "\n".join(rows) + "\n")
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# --------------------------------------------------------------------------
# power-sweep


def cmd_power_sweep(args: argparse.Namespace) -> int:
    try:
        fanouts = [int(p) for p in args.fanouts.split(",") if p]
    except ValueError:
        print(f"error: malformed fanout list {args.fanouts!r}", file=sys.stderr)
        return EXIT_PARSE
    if not fanouts or any(n <= 0 for n in fanouts):
        print("error: fanouts must be positive integers", file=sys.stderr)
        return EXIT_PARSE

    shape = _shape_from_args(args, presets.default_shape())
    supply = power.SupplyModel(i_base=args.i_base, i_drive=args.i_drive, vdd=args.vdd)
    r = args.resistance

    rows = ["n_synapses,r_eq_ohm,i_mr_peak_a,i_ifn_a,eta,firing_power_w,baseline_power_w"]
    for n in fanouts:
        r_eq = power.equivalent_load([r] * n)
        i_mr = shape.va_plus / r_eq
        eta = power.efficiency(i_mr, supply.i_drive)
        rows.append(
            f"{n},{_fmt(r_eq)},{_fmt(i_mr)},{_fmt(supply.i_drive)},{_fmt(eta)},"
            f"{_fmt(power.firing_power(supply))},{_fmt(power.baseline_power(supply))}"
        )
    try:
        _write_atomic(Path(args.out), "\n".join(rows) + "\n")
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# --------------------------------------------------------------------------
# check


def cmd_check(args: argparse.Namespace) -> int:
    if args.vp <= 0 or args.vn <= 0:
        print("error: thresholds must be positive", file=sys.stderr)
        return EXIT_IO
    feasible = stdp_feasible(args.vp, args.vn)
    verdict = "feasible" if feasible else "infeasible"
    print(
        f"{verdict}: vp={args.vp:g} vn={args.vn:g} "
        f"(threshold asymmetry {abs(args.vp - args.vn):g} vs limit {min(args.vp, args.vn):g})"
    )

    shape_requested = any(
        v is not None
        for v in (args.va_plus, args.va_minus, args.tail_plus, args.tail_minus, args.tau_minus)
    ) or args.head or args.tail
    all_ok = feasible
    if shape_requested:
        shape = _shape_from_args(args, presets.default_shape())
        device = DeviceParams(v_p=args.vp, v_n=args.vn, r_on=1.0e5, r_off=1.0e8)
        report = validate_shape(shape, device)
        for check in report.checks:
            status = "pass" if check.passed else "FAIL"
            print(f"check {check.name}: {status} ({check.detail})")
        all_ok = all_ok and report.ok
    return EXIT_OK if all_ok else EXIT_INFEASIBLE


# --------------------------------------------------------------------------
# argument wiring


def _add_shape_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--va-plus", type=_si, default=None, help="head amplitude, V")
    p.add_argument("--va-minus", type=_si, default=None, help="tail amplitude magnitude, V")
    p.add_argument("--tail-plus", type=_si, default=None, help="head duration, s")
    p.add_argument("--tail-minus", type=_si, default=None, help="tail duration, s")
    p.add_argument("--tau-minus", type=_si, default=None, help="tail relaxation constant, s")
    p.add_argument("--head", choices=["flat", "exp"], default=None)
    p.add_argument("--tail", choices=["flat", "exp"], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snnsim",
        description="Behavioral simulator for spiking networks with memristive synapses",
    )
    parser.add_argument("--version", action="version", version=f"snnsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a netlist")
    p_run.add_argument("netlist")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--seed", type=int, default=0, help="run seed for stochastic stimuli")
    p_run.add_argument("--dt", type=_si, default=None, help="override the netlist timestep")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("stdp-sweep", help="pair-protocol conductance window")
    p_sweep.add_argument("--range", required=True, help="delta-t range start:stop:step")
    p_sweep.add_argument("--netlist", default=None, help="take device and waveform from a netlist")
    p_sweep.add_argument("--vp", type=_si, default=None)
    p_sweep.add_argument("--vn", type=_si, default=None)
    p_sweep.add_argument("--r-on", type=_si, default=None)
    p_sweep.add_argument("--r-off", type=_si, default=None)
    p_sweep.add_argument("--kappa-p", type=_si, default=None)
    p_sweep.add_argument("--kappa-n", type=_si, default=None)
    _add_shape_flags(p_sweep)
    p_sweep.add_argument("--dt", type=_si, default=None, help="pair integration timestep")
    p_sweep.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)
    p_sweep.add_argument("--out", default="stdp_sweep.csv")
    p_sweep.set_defaults(func=cmd_stdp_sweep)

    p_power = sub.add_parser("power-sweep", help="closed-form drive and efficiency figures")
    p_power.add_argument("--fanouts", required=True, help="comma list of synapse counts")
    p_power.add_argument("--resistance", type=_si, default=1.0e6, help="per-synapse resistance")
    p_power.add_argument("--i-base", type=_si, default=13.0e-6)
    p_power.add_argument("--i-drive", type=_si, default=56.0e-6)
    p_power.add_argument("--vdd", type=_si, default=1.8)
    _add_shape_flags(p_power)
    p_power.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)
    p_power.add_argument("--out", default="power_sweep.csv")
    p_power.set_defaults(func=cmd_power_sweep)

    p_check = sub.add_parser("check", help="threshold feasibility and shape validation")
    p_check.add_argument("--vp", type=_si, required=True)
    p_check.add_argument("--vn", type=_si, required=True)
    _add_shape_flags(p_check)
    p_check.set_defaults(func=cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
