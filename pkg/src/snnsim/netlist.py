"""Line-oriented circuit description format (.snn): parser and serializer.

One line per element; `#` starts a comment; keywords are case-sensitive and
options are written key=value with no spaces around the equals sign.
Numbers accept the SI suffixes k M G m u n p, applied as decimal exponents
in a single string-to-float conversion so e.g. 140m parses to exactly the
same float as 0.14.

A file needs exactly one device, one waveform and one sim line, any number
of neuron/synapse/stim lines. The parser never aborts: it collects every
error it can find, each with the 1-based line and column of the offending
token, and only returns a netlist when the file is clean. Serialization is
canonical: fixed block order, names sorted, every default written out, full
precision floats, LF line endings; parsing its own output is the identity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .device import DeviceParams
from .network import Periodic, PoissonStim, Stimulus, Times
from .neuron import NeuronParams
from .waveform import HeadStyle, SpikeShape, TailStyle, validate_shape

_SI_EXP = {"k": 3, "M": 6, "G": 9, "m": -3, "u": -6, "n": -9, "p": -12}
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_TOKEN_RE = re.compile(r"\S+")


def parse_si_number(text: str) -> float:
    """Parse a decimal literal with an optional SI magnitude suffix.

    The suffix is folded into the decimal exponent before the string is
    converted, so the result is the correctly rounded value of the
    suffixed literal (140m == 0.14 exactly, 10n == 1e-8 exactly).
    """
    if text and text[-1] in _SI_EXP:
        mantissa, exp = text[:-1], _SI_EXP[text[-1]]
        if "e" in mantissa or "E" in mantissa:
            return float(mantissa) * 10.0 ** exp
        return float(f"{mantissa}e{exp}")
    return float(text)


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    message: str
    token: str = ""

    def __str__(self) -> str:
        loc = f"{self.line}:{self.column}: {self.message}"
        return f"{loc} (near {self.token!r})" if self.token else loc


@dataclass(frozen=True)
class DeviceConfig:
    """Device line as written: drift coefficients may be left for calibration."""

    v_p: float
    v_n: float
    r_on: float
    r_off: float
    kappa_p: float | None = None
    kappa_n: float | None = None

    def to_params(
        self, kappa_p: float | None = None, kappa_n: float | None = None
    ) -> DeviceParams:
        kp = self.kappa_p if kappa_p is None else kappa_p
        kn = self.kappa_n if kappa_n is None else kappa_n
        return DeviceParams(
            v_p=self.v_p,
            v_n=self.v_n,
            r_on=self.r_on,
            r_off=self.r_off,
            kappa_p=0.0 if kp is None else kp,
            kappa_n=0.0 if kn is None else kn,
        )


@dataclass(frozen=True)
class SimConfig:
    dt: float
    t_end: float
    record: tuple[str, ...] | None = None


@dataclass
class Netlist:
    device: DeviceConfig
    shape: SpikeShape
    neurons: dict[str, NeuronParams]
    synapses: list[tuple[str, str, float]]
    stimuli: dict[str, Stimulus]
    sim: SimConfig


@dataclass
class ParseResult:
    netlist: Netlist | None
    errors: list[ParseError] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.netlist is not None


@dataclass
class _Tok:
    text: str
    column: int


class _Parser:
    def __init__(self, text: str) -> None:
        self.errors: list[ParseError] = []
        self.warnings: list[str] = []
        self.lines = text.split("\n")

    def error(self, line: int, col: int, message: str, token: str = "") -> None:
        self.errors.append(ParseError(line, col, message, token))

    # -- token level ------------------------------------------------------

    def _tokens(self, line_no: int) -> list[_Tok]:
        raw = self.lines[line_no - 1]
        code = raw.split("#", 1)[0]
        return [_Tok(m.group(), m.start() + 1) for m in _TOKEN_RE.finditer(code)]

    def _number(self, line: int, tok: _Tok) -> float | None:
        try:
            return parse_si_number(tok.text)
        except ValueError:
            self.error(line, tok.column, "malformed number", tok.text)
            return None

    def _kv(
        self,
        line: int,
        toks: list[_Tok],
        required: dict[str, str],
        optional: dict[str, str],
    ) -> dict[str, object] | None:
        """Decode key=value tokens. Value kinds: 'num', 'int', 'word'."""
        out: dict[str, object] = {}
        seen: dict[str, _Tok] = {}
        bad = False
        for tok in toks:
            if "=" not in tok.text:
                self.error(line, tok.column, "expected key=value", tok.text)
                bad = True
                continue
            key, value = tok.text.split("=", 1)
            kind = required.get(key) or optional.get(key)
            if kind is None:
                self.error(line, tok.column, f"unknown option {key!r}", tok.text)
                bad = True
                continue
            if key in seen:
                self.error(line, tok.column, f"option {key!r} given twice", tok.text)
                bad = True
                continue
            seen[key] = tok
            if kind == "num":
                num = self._number(line, _Tok(value, tok.column + len(key) + 1))
                if num is None:
                    bad = True
                else:
                    out[key] = num
            elif kind == "int":
                try:
                    out[key] = int(value)
                except ValueError:
                    self.error(line, tok.column, "expected an integer", tok.text)
                    bad = True
            else:
                out[key] = value
        for key in required:
            if key not in seen:
                first_col = toks[0].column if toks else 1
                self.error(line, first_col, f"missing required option {key}=")
                bad = True
        return None if bad else out

    def _name(self, line: int, tok: _Tok) -> str | None:
        if _NAME_RE.match(tok.text):
            return tok.text
        self.error(line, tok.column, "invalid name", tok.text)
        return None

    # -- parse ------------------------------------------------------------

    def parse(self) -> ParseResult:
        device_raw: tuple[int, dict] | None = None
        waveform_raw: tuple[int, dict] | None = None
        sim_raw: tuple[int, dict] | None = None
        neuron_raw: list[tuple[int, str, dict]] = []
        synapse_raw: list[tuple[int, _Tok, _Tok, float]] = []
        stim_raw: list[tuple[int, _Tok, Stimulus]] = []

        for line_no in range(1, len(self.lines) + 1):
            toks = self._tokens(line_no)
            if not toks:
                continue
            head, rest = toks[0], toks[1:]

            if head.text == "device":
                kv = self._kv(
                    line_no,
                    rest,
                    {"vp": "num", "vn": "num", "r_on": "num", "r_off": "num"},
                    {"kappa_p": "num", "kappa_n": "num"},
                )
                if kv is not None:
                    if device_raw is not None:
                        self.error(line_no, head.column, "duplicate device line", head.text)
                    else:
                        device_raw = (line_no, kv)

            elif head.text == "waveform":
                kv = self._kv(
                    line_no,
                    rest,
                    {
                        "va_plus": "num",
                        "va_minus": "num",
                        "tail_plus": "num",
                        "tail_minus": "num",
                    },
                    {"tau_minus": "num", "head": "word", "tail": "word"},
                )
                if kv is not None:
                    if waveform_raw is not None:
                        self.error(line_no, head.column, "duplicate waveform line", head.text)
                    else:
                        waveform_raw = (line_no, kv)

            elif head.text == "neuron":
                if not rest:
                    self.error(line_no, head.column, "neuron needs a name", head.text)
                    continue
                name = self._name(line_no, rest[0])
                kv = self._kv(
                    line_no,
                    rest[1:],
                    {},
                    {"v_thr": "num", "c_mem": "num", "r_leak": "num"},
                )
                if name is not None and kv is not None:
                    neuron_raw.append((line_no, name, kv))
                    if any(n == name for _, n, _ in neuron_raw[:-1]):
                        self.error(line_no, rest[0].column, f"duplicate neuron {name!r}", name)

            elif head.text == "synapse":
                if len(rest) < 3:
                    self.error(line_no, head.column, "synapse needs <pre> <post> r=", head.text)
                    continue
                pre_ok = self._name(line_no, rest[0])
                post_ok = self._name(line_no, rest[1])
                kv = self._kv(line_no, rest[2:], {"r": "num"}, {})
                if pre_ok and post_ok and kv is not None:
                    synapse_raw.append((line_no, rest[0], rest[1], kv["r"]))

            elif head.text == "stim":
                self._parse_stim(line_no, head, rest, stim_raw)

            elif head.text == "sim":
                kv = self._kv(
                    line_no, rest, {"dt": "num", "t_end": "num"}, {"record": "word"}
                )
                if kv is not None:
                    if sim_raw is not None:
                        self.error(line_no, head.column, "duplicate sim line", head.text)
                    else:
                        sim_raw = (line_no, kv)

            else:
                self.error(line_no, head.column, f"unknown element {head.text!r}", head.text)

        for missing, raw in (
            ("device", device_raw),
            ("waveform", waveform_raw),
            ("sim", sim_raw),
        ):
            if raw is None:
                self.error(1, 1, f"missing required {missing} line")

        if self.errors:
            return ParseResult(None, self.errors, self.warnings)
        return self._build(device_raw, waveform_raw, sim_raw, neuron_raw, synapse_raw, stim_raw)

    def _parse_stim(
        self,
        line_no: int,
        head: _Tok,
        rest: list[_Tok],
        out: list[tuple[int, _Tok, Stimulus]],
    ) -> None:
        if len(rest) < 2:
            self.error(line_no, head.column, "stim needs <name> <kind> ...", head.text)
            return
        if self._name(line_no, rest[0]) is None:
            return
        kind = rest[1].text
        stim: Stimulus | None = None
        if kind == "periodic":
            kv = self._kv(line_no, rest[2:], {"t0": "num", "period": "num"}, {})
            if kv is not None:
                try:
                    stim = Periodic(kv["t0"], kv["period"])
                except ValueError as exc:
                    self.error(line_no, rest[1].column, str(exc), kind)
        elif kind == "times":
            if not rest[2:]:
                self.error(line_no, rest[1].column, "times needs at least one value", kind)
                return
            vals = [self._number(line_no, tok) for tok in rest[2:]]
            if None not in vals:
                try:
                    stim = Times(tuple(vals))
                except ValueError as exc:
                    self.error(line_no, rest[1].column, str(exc), kind)
        elif kind == "poisson":
            kv = self._kv(line_no, rest[2:], {"rate": "num", "seed": "int"}, {})
            if kv is not None:
                if kv["seed"] < 0:
                    self.error(line_no, rest[1].column, "seed must be non-negative", kind)
                    return
                try:
                    stim = PoissonStim(kv["rate"], kv["seed"])
                except ValueError as exc:
                    self.error(line_no, rest[1].column, str(exc), kind)
        else:
            self.error(line_no, rest[1].column, f"unknown stimulus kind {kind!r}", kind)
            return
        if stim is not None:
            out.append((line_no, rest[0], stim))

    # -- semantic build ---------------------------------------------------

    def _build(self, device_raw, waveform_raw, sim_raw, neuron_raw, synapse_raw, stim_raw) -> ParseResult:
        dev_line, dev = device_raw
        device: DeviceConfig | None = None
        if dev["vp"] <= 0 or dev["vn"] <= 0:
            self.error(dev_line, 1, "write thresholds must be positive", "device")
        elif not 0 < dev["r_on"] < dev["r_off"]:
            self.error(dev_line, 1, "need 0 < r_on < r_off", "device")
        elif (dev.get("kappa_p") or 0) < 0 or (dev.get("kappa_n") or 0) < 0:
            self.error(dev_line, 1, "drift coefficients must be non-negative", "device")
        else:
            device = DeviceConfig(
                v_p=dev["vp"],
                v_n=dev["vn"],
                r_on=dev["r_on"],
                r_off=dev["r_off"],
                kappa_p=dev.get("kappa_p"),
                kappa_n=dev.get("kappa_n"),
            )

        wav_line, wav = waveform_raw
        shape: SpikeShape | None = None
        styles = {"flat": (HeadStyle.FLAT, TailStyle.FLAT), "exp": (HeadStyle.EXP_DECAY, TailStyle.EXP_RELAX)}
        head_word = wav.get("head", "flat")
        tail_word = wav.get("tail", "exp")
        if head_word not in styles:
            self.error(wav_line, 1, f"head style must be flat or exp, got {head_word!r}", "waveform")
        elif tail_word not in styles:
            self.error(wav_line, 1, f"tail style must be flat or exp, got {tail_word!r}", "waveform")
        else:
            try:
                shape = SpikeShape(
                    va_plus=wav["va_plus"],
                    va_minus=wav["va_minus"],
                    tail_plus=wav["tail_plus"],
                    tail_minus=wav["tail_minus"],
                    tau_minus=wav.get("tau_minus"),
                    head_style=styles[head_word][0],
                    tail_style=styles[tail_word][1],
                )
            except ValueError as exc:
                self.error(wav_line, 1, str(exc), "waveform")

        neurons: dict[str, NeuronParams] = {}
        if shape is not None:
            for line_no, name, kv in neuron_raw:
                if name in neurons:
                    continue  # duplicate already reported at collection time
                try:
                    neurons[name] = NeuronParams(
                        shape=shape,
                        c_mem=kv.get("c_mem", 1.0e-12),
                        r_leaky=kv.get("r_leak", 1.0e7),
                        v_thr=kv.get("v_thr", 0.3),
                    )
                except ValueError as exc:
                    self.error(line_no, 1, str(exc), name)

        synapses: list[tuple[str, str, float]] = []
        seen_pairs: set[tuple[str, str]] = set()
        for line_no, pre_tok, post_tok, r in synapse_raw:
            ok = True
            for tok in (pre_tok, post_tok):
                if tok.text not in neurons:
                    self.error(line_no, tok.column, f"unknown neuron {tok.text!r}", tok.text)
                    ok = False
            if not ok:
                continue
            if pre_tok.text == post_tok.text:
                self.error(line_no, post_tok.column, "synapse may not connect a neuron to itself", post_tok.text)
                continue
            pair = (pre_tok.text, post_tok.text)
            if pair in seen_pairs:
                self.error(line_no, pre_tok.column, f"duplicate synapse {pair[0]}->{pair[1]}", pre_tok.text)
                continue
            if device is not None and not device.r_on <= r <= device.r_off:
                self.error(
                    line_no,
                    pre_tok.column,
                    f"initial resistance {r:g} outside [r_on, r_off]",
                    pre_tok.text,
                )
                continue
            seen_pairs.add(pair)
            synapses.append((pair[0], pair[1], r))
        synapses.sort(key=lambda s: (s[0], s[1]))

        stimuli: dict[str, Stimulus] = {}
        for line_no, name_tok, stim in stim_raw:
            if name_tok.text not in neurons:
                self.error(line_no, name_tok.column, f"unknown neuron {name_tok.text!r}", name_tok.text)
            elif name_tok.text in stimuli:
                self.error(line_no, name_tok.column, f"duplicate stimulus for {name_tok.text!r}", name_tok.text)
            else:
                stimuli[name_tok.text] = stim

        sim_line, sim_kv = sim_raw
        sim: SimConfig | None = None
        if sim_kv["dt"] <= 0:
            self.error(sim_line, 1, "dt must be positive", "sim")
        elif sim_kv["t_end"] < 0:
            self.error(sim_line, 1, "t_end must be non-negative", "sim")
        else:
            record: tuple[str, ...] | None = None
            if "record" in sim_kv:
                record = tuple(p for p in sim_kv["record"].split(",") if p)
                labels = {f"{a}->{b}" for a, b, _ in synapses}
                for entry in record:
                    if entry not in neurons and entry not in labels:
                        self.error(sim_line, 1, f"unknown record target {entry!r}", entry)
            sim = SimConfig(dt=sim_kv["dt"], t_end=sim_kv["t_end"], record=record)

        if self.errors or device is None or shape is None or sim is None:
            return ParseResult(None, self.errors, self.warnings)

        report = validate_shape(shape, device.to_params())
        for check in report.failed():
            self.warnings.append(f"shape check {check.name!r} failed: {check.detail}")

        nl = Netlist(
            device=device,
            shape=shape,
            neurons=neurons,
            synapses=synapses,
            stimuli=stimuli,
            sim=sim,
        )
        return ParseResult(nl, self.errors, self.warnings)


def parse(text: str) -> ParseResult:
    """Parse netlist source; collects all errors instead of stopping."""
    return _Parser(text).parse()


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize(nl: Netlist) -> str:
    """Canonical text form; parsing it reproduces the netlist exactly."""
    out: list[str] = []
    d = nl.device
    dev = (
        f"device vp={_fmt(d.v_p)} vn={_fmt(d.v_n)} "
        f"r_on={_fmt(d.r_on)} r_off={_fmt(d.r_off)}"
    )
    if d.kappa_p is not None:
        dev += f" kappa_p={_fmt(d.kappa_p)}"
    if d.kappa_n is not None:
        dev += f" kappa_n={_fmt(d.kappa_n)}"
    out.append(dev)

    s = nl.shape
    out.append(
        f"waveform va_plus={_fmt(s.va_plus)} va_minus={_fmt(s.va_minus)} "
        f"tail_plus={_fmt(s.tail_plus)} tail_minus={_fmt(s.tail_minus)} "
        f"tau_minus={_fmt(s.tau_minus)} "
        f"head={s.head_style.value} tail={s.tail_style.value}"
    )

    for name in sorted(nl.neurons):
        p = nl.neurons[name]
        out.append(
            f"neuron {name} v_thr={_fmt(p.v_thr)} "
            f"c_mem={_fmt(p.c_mem)} r_leak={_fmt(p.r_leaky)}"
        )

    for pre, post, r in sorted(nl.synapses):
        out.append(f"synapse {pre} {post} r={_fmt(r)}")

    for name in sorted(nl.stimuli):
        stim = nl.stimuli[name]
        if isinstance(stim, Periodic):
            out.append(f"stim {name} periodic t0={_fmt(stim.t0)} period={_fmt(stim.period)}")
        elif isinstance(stim, Times):
            vals = " ".join(_fmt(t) for t in stim.times)
            out.append(f"stim {name} times {vals}")
        else:
            out.append(f"stim {name} poisson rate={_fmt(stim.rate)} seed={stim.seed}")

    sim = nl.sim
    line = f"sim dt={_fmt(sim.dt)} t_end={_fmt(sim.t_end)}"
    if sim.record is not None:
        line += f" record={','.join(sim.record)}"
    out.append(line)
    return "\n".join(out) + "\n"
