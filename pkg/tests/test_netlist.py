"""Netlist text format: SI numbers, error reporting, canonical round trips."""

import random
from pathlib import Path

import pytest

from netgen import random_netlist
from snnsim.netlist import ParseError, parse, parse_si_number, serialize
from snnsim.network import Periodic, PoissonStim, Times

NETLISTS = Path(__file__).resolve().parent.parent / "netlists"

GOOD = """\
device vp=160m vn=150m r_on=100k r_off=100M
waveform va_plus=140m va_minus=30m tail_plus=1u tail_minus=3u
neuron in1
neuron out v_thr=300m c_mem=1p r_leak=1G
synapse in1 out r=1M
stim in1 periodic t0=1u period=6u
sim dt=10n t_end=50u
"""


# -- SI numbers -------------------------------------------------------------


def test_si_suffix_table_exact():
    assert parse_si_number("1k") == 1e3
    assert parse_si_number("1M") == 1e6
    assert parse_si_number("1G") == 1e9
    assert parse_si_number("1m") == 1e-3
    assert parse_si_number("1u") == 1e-6
    assert parse_si_number("1n") == 1e-9
    assert parse_si_number("1p") == 1e-12


def test_si_suffix_is_decimal_not_binary_scaling():
    # The suffix must shift the decimal exponent, not multiply floats:
    # 140m has to give the exact double nearest 0.14.
    assert parse_si_number("140m") == 0.14
    assert parse_si_number("10n") == 1e-8
    assert parse_si_number("2.5u") == 2.5e-6
    assert parse_si_number("0.3") == 0.3


def test_si_plain_and_scientific():
    assert parse_si_number("42") == 42.0
    assert parse_si_number("1e3") == 1000.0
    assert parse_si_number("-2.5e-6") == -2.5e-6
    assert parse_si_number("1.5e2m") == pytest.approx(0.15)


def test_si_malformed():
    for bad in ("", "abc", "1.2.3", "1kk", "m", "--3"):
        with pytest.raises(ValueError):
            parse_si_number(bad)


# -- happy path -------------------------------------------------------------


def test_minimal_netlist_parses():
    res = parse(GOOD)
    assert res.ok
    assert res.errors == []
    nl = res.netlist
    assert nl.device.v_p == 0.16
    assert nl.device.kappa_p is None
    assert nl.shape.va_plus == 0.14
    assert set(nl.neurons) == {"in1", "out"}
    assert nl.synapses == [("in1", "out", 1e6)]
    assert isinstance(nl.stimuli["in1"], Periodic)
    assert nl.sim.dt == 1e-8
    assert nl.sim.t_end == 5e-5


def test_neuron_defaults():
    nl = parse(GOOD).netlist
    p = nl.neurons["in1"]
    assert p.v_thr == 0.3
    assert p.c_mem == 1e-12
    assert p.r_leaky == 1e7


def test_comments_and_blank_lines():
    text = "# header\n\n" + GOOD.replace(
        "neuron in1", "neuron in1   # trailing comment"
    )
    assert parse(text).ok


def test_times_and_poisson_stimuli():
    text = GOOD.replace(
        "stim in1 periodic t0=1u period=6u",
        "stim in1 times 1u 2u 10u\nstim out poisson rate=100k seed=9",
    )
    nl = parse(text).netlist
    assert nl.stimuli["in1"] == Times((1e-6, 2e-6, 1e-5))
    assert nl.stimuli["out"] == PoissonStim(rate=1e5, seed=9)


def test_demo_netlists_parse_clean():
    for name in ("two_input_stdp.snn", "two_input_poisson.snn"):
        res = parse((NETLISTS / name).read_text())
        assert res.ok, res.errors
        assert res.warnings == []


# -- error reporting --------------------------------------------------------


def errors_of(text: str) -> list[ParseError]:
    res = parse(text)
    assert not res.ok
    return res.errors


def test_unknown_element_location():
    errs = errors_of(GOOD + "transistor q1\n")
    assert any(e.line == 8 and e.column == 1 and "transistor" in e.message for e in errs)


def test_keywords_are_case_sensitive():
    errs = errors_of(GOOD.replace("device", "Device", 1))
    assert any("'Device'" in e.message for e in errs)


def test_malformed_number_location():
    bad = GOOD.replace("r_on=100k", "r_on=1oo")
    errs = errors_of(bad)
    err = next(e for e in errs if "malformed number" in e.message)
    assert err.line == 1
    # the column points at the value, after the "r_on=" prefix
    assert bad.split("\n")[0][err.column - 1 :].startswith("1oo")


def test_missing_required_option():
    errs = errors_of(GOOD.replace(" r_off=100M", ""))
    assert any("r_off" in e.message and e.line == 1 for e in errs)


def test_unknown_and_duplicate_options():
    errs = errors_of(GOOD.replace("sim dt=10n", "sim speed=9 dt=10n dt=20n"))
    msgs = " | ".join(e.message for e in errs)
    assert "unknown option 'speed'" in msgs
    assert "given twice" in msgs


def test_self_synapse():
    errs = errors_of(GOOD.replace("synapse in1 out", "synapse in1 in1"))
    assert any("itself" in e.message and e.line == 5 for e in errs)


def test_duplicate_neuron_flagged_at_second_line():
    errs = errors_of(GOOD + "neuron in1\n")
    err = next(e for e in errs if "duplicate neuron" in e.message)
    assert err.line == 8


def test_duplicate_synapse():
    errs = errors_of(GOOD + "synapse in1 out r=2M\n")
    assert any("duplicate synapse" in e.message and e.line == 8 for e in errs)


def test_unknown_neuron_in_synapse_points_at_token():
    bad = GOOD.replace("synapse in1 out", "synapse in1 ghost")
    errs = errors_of(bad)
    err = next(e for e in errs if "ghost" in e.message)
    assert err.line == 5
    assert bad.split("\n")[4][err.column - 1 :].startswith("ghost")


def test_synapse_resistance_outside_device_range():
    errs = errors_of(GOOD.replace("r=1M", "r=1"))
    assert any("outside" in e.message for e in errs)


def test_duplicate_stimulus():
    errs = errors_of(GOOD + "stim in1 times 3u\n")
    assert any("duplicate stimulus" in e.message and e.line == 8 for e in errs)


def test_stim_validation():
    assert any(
        "at least one value" in e.message
        for e in errors_of(GOOD.replace("periodic t0=1u period=6u", "times"))
    )
    assert any(
        "unknown stimulus kind" in e.message
        for e in errors_of(GOOD.replace("periodic t0=1u", "burst t0=1u"))
    )
    assert any(
        "non-negative" in e.message
        for e in errors_of(
            GOOD.replace("periodic t0=1u period=6u", "poisson rate=1k seed=-4")
        )
    )


def test_missing_blocks_reported_at_file_start():
    errs = errors_of("neuron a\n")
    missing = {e.message for e in errs if e.line == 1 and e.column == 1}
    assert {
        "missing required device line",
        "missing required waveform line",
        "missing required sim line",
    } <= missing


def test_duplicate_block():
    errs = errors_of(GOOD + "sim dt=10n t_end=1u\n")
    assert any("duplicate sim line" in e.message and e.line == 8 for e in errs)


def test_semantic_device_checks():
    assert any(
        "r_on < r_off" in e.message
        for e in errors_of(GOOD.replace("r_on=100k r_off=100M", "r_on=1M r_off=1k"))
    )
    assert any(
        "positive" in e.message
        for e in errors_of(GOOD.replace("vp=160m", "vp=0"))
    )


def test_unknown_record_target():
    errs = errors_of(GOOD.replace("t_end=50u", "t_end=50u record=out,nope"))
    assert any("nope" in e.message for e in errs)


def test_record_accepts_neurons_and_synapse_labels():
    res = parse(GOOD.replace("t_end=50u", "t_end=50u record=out,in1->out"))
    assert res.ok
    assert res.netlist.sim.record == ("out", "in1->out")


def test_collects_many_errors_in_one_pass():
    bad = "\n".join(
        [
            "device vp=160m",              # missing options
            "waveform va_plus=140m",       # missing options
            "neuron 9bad",                 # invalid name
            "synapse a",                   # too short
            "gizmo x=1",                   # unknown element
            "sim dt=10n",                  # missing t_end
        ]
    )
    errs = errors_of(bad)
    assert len(errs) >= 6
    msgs = " | ".join(e.message for e in errs)
    assert "missing required option" in msgs
    assert "invalid name" in msgs
    assert "synapse needs" in msgs
    assert "unknown element 'gizmo'" in msgs
    assert {e.line for e in errs} >= {1, 2, 3, 4, 5, 6}


def test_parse_error_str_format():
    err = ParseError(3, 7, "bad thing", "tok")
    assert str(err) == "3:7: bad thing (near 'tok')"
    assert str(ParseError(1, 1, "oops")) == "1:1: oops"


def test_shape_warnings_do_not_block():
    res = parse(GOOD.replace("va_plus=140m", "va_plus=200m"))
    assert res.ok
    assert any("no-disturb" in w for w in res.warnings)


# -- canonical serialization ------------------------------------------------


def test_demo_round_trip_structural_equality():
    nl = parse((NETLISTS / "two_input_stdp.snn").read_text()).netlist
    again = parse(serialize(nl))
    assert again.ok
    assert again.netlist == nl


def test_serialize_emits_defaults_explicitly():
    text = serialize(parse(GOOD).netlist)
    assert "neuron in1 v_thr=0.3 c_mem=1e-12 r_leak=10000000.0" in text
    assert "tau_minus=" in text
    assert text.endswith("\n")
    assert "\r" not in text


def test_serialize_orders_names():
    text = GOOD.replace("neuron in1", "neuron zz\nneuron in1").replace(
        "synapse in1 out r=1M", "synapse zz out r=2M\nsynapse in1 out r=1M"
    )
    lines = serialize(parse(text).netlist).split("\n")
    n_names = [l.split()[1] for l in lines if l.startswith("neuron ")]
    assert n_names == sorted(n_names)
    s_pairs = [tuple(l.split()[1:3]) for l in lines if l.startswith("synapse ")]
    assert s_pairs == sorted(s_pairs)


def test_serialize_fixed_point_on_random_netlists():
    rng = random.Random(1234)
    for _ in range(100):
        nl = random_netlist(rng)
        text = serialize(nl)
        res = parse(text)
        assert res.ok, (res.errors, text)
        assert res.netlist == nl
        assert serialize(res.netlist) == text
