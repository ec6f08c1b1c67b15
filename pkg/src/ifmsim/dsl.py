"""Plain-text layout format.

One directive per line, `#` starts a comment, blank lines are ignored,
directive order is free:

    vertex <id> <x> <y> <z>
    beamsplitter <vertex> normal <x> <y> <z>
    mirror <vertex> normal <x> <y> <z>
    arm <from> <to> length <L> [label <name>]
    source momentum <x> <y> <z> polarization <x> <y> <z> width <sigma>
    bomb arm <label> [efficiency <e>]
    detector <D1|D2> port <a|b>

Parsing never raises on bad input; problems come back as positioned
diagnostics (1-based line and column). Only error-severity diagnostics
block layout construction: a non-unit normal or polarization is
normalized with a warning, and unlabeled arms get `<from>_<to>` labels.
Missing detector lines default to D1 on port a and D2 on port b.

`serialize_layout` writes the canonical form: directives grouped as
vertices, elements, arms, source, bomb, detectors, each group sorted by
identifier, floats rendered with 17 significant digits. Serializing,
parsing, and serializing again reproduces the text byte for byte.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .interferometer import (
    ARM_PAIRS,
    INPUT_ARM_PAIRS,
    VERTEX_IDS,
    Arm,
    Layout,
    Obstruction,
    _EXPECTED_KINDS,
)
from .optics import OpticalElement, PhotonMode, householder

_TOKEN_RE = re.compile(r"\S+")
_UNIT_WARN_TOL = 1e-9


@dataclass
class Diagnostic:
    line: int
    column: int
    severity: str  # "error" or "warning"
    message: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass(eq=False)
class LayoutDocument:
    """Parse result: the input text, a layout if one could be built, diagnostics."""

    source: str
    layout: Layout | None
    diagnostics: list[Diagnostic]

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "warning"]


@dataclass
class _Token:
    text: str
    line: int
    column: int


_USAGE = {
    "vertex": "vertex <id> <x> <y> <z>",
    "beamsplitter": "beamsplitter <vertex> normal <x> <y> <z>",
    "mirror": "mirror <vertex> normal <x> <y> <z>",
    "arm": "arm <from> <to> length <L> [label <name>]",
    "source": "source momentum <x> <y> <z> polarization <x> <y> <z> width <sigma>",
    "bomb": "bomb arm <label> [efficiency <e>]",
    "detector": "detector <D1|D2> port <a|b>",
}


class _ParseState:
    def __init__(self):
        self.diagnostics: list[Diagnostic] = []
        self.vertices: dict[str, tuple[_Token, np.ndarray]] = {}
        self.elements: dict[str, dict] = {}
        self.arms: dict[tuple[str, str], dict] = {}
        self.arm_labels: dict[str, tuple[str, str]] = {}
        self.source: dict | None = None
        self.bomb: dict | None = None
        self.detectors: dict[str, dict] = {}

    def error(self, tok: _Token, message: str):
        self.diagnostics.append(Diagnostic(tok.line, tok.column, "error", message))

    def warning(self, tok: _Token, message: str):
        self.diagnostics.append(Diagnostic(tok.line, tok.column, "warning", message))

    def number(self, tok: _Token, what: str) -> float | None:
        try:
            value = float(tok.text)
        except ValueError:
            self.error(tok, f"malformed {what}: {tok.text!r} is not a number")
            return None
        if not math.isfinite(value):
            self.error(tok, f"{what} must be finite, got {tok.text!r}")
            return None
        return value

    def vector(self, toks: list[_Token], what: str) -> np.ndarray | None:
        parts = [self.number(t, f"{what} component") for t in toks]
        if any(p is None for p in parts):
            return None
        return np.array(parts, dtype=float)

    def keyword(self, tok: _Token, expected: str) -> bool:
        if tok.text != expected:
            self.error(tok, f"expected keyword {expected!r}, found {tok.text!r}")
            return False
        return True


def _parse_vertex(state: _ParseState, toks: list[_Token]):
    ident = toks[1]
    if ident.text in state.vertices:
        first = state.vertices[ident.text][0]
        state.error(ident, f"vertex {ident.text!r} already defined on line {first.line}")
        return
    position = state.vector(toks[2:5], "vertex position")
    if position is None:
        return
    state.vertices[ident.text] = (ident, position)


def _parse_element(state: _ParseState, toks: list[_Token]):
    kind = toks[0].text
    vertex = toks[1]
    if not state.keyword(toks[2], "normal"):
        return
    normal = state.vector(toks[3:6], "normal")
    if normal is None:
        return
    length = float(np.linalg.norm(normal))
    if length == 0.0:
        state.error(toks[3], "degenerate normal: zero vector defines no reflection plane")
        return
    if abs(length - 1.0) > _UNIT_WARN_TOL:
        state.warning(toks[3], f"normal has length {length:.6g}; normalized to unit")
        normal = normal / length
    if vertex.text in state.elements:
        first = state.elements[vertex.text]["token"].line
        state.error(vertex, f"element at vertex {vertex.text!r} already defined on line {first}")
        return
    state.elements[vertex.text] = {"token": vertex, "kind": kind, "normal": normal}


def _parse_arm(state: _ParseState, toks: list[_Token]):
    start, end = toks[1], toks[2]
    if not state.keyword(toks[3], "length"):
        return
    length = state.number(toks[4], "arm length")
    if length is None:
        return
    if not length > 0.0:
        state.error(toks[4], f"arm length must be positive, got {toks[4].text}")
        return
    if len(toks) == 7:
        if not state.keyword(toks[5], "label"):
            return
        label_tok = toks[6]
        label = label_tok.text
    else:
        label_tok = toks[0]
        label = f"{start.text}_{end.text}"
    pair = (start.text, end.text)
    if pair in state.arms:
        first = state.arms[pair]["token"].line
        state.error(toks[0], f"arm {pair[0]}->{pair[1]} already defined on line {first}")
        return
    if label in state.arm_labels:
        state.error(label_tok, f"arm label {label!r} already used")
        return
    state.arms[pair] = {"token": toks[0], "start": start, "end": end,
                        "length": length, "label": label}
    state.arm_labels[label] = pair


def _parse_source(state: _ParseState, toks: list[_Token]):
    if state.source is not None:
        state.error(toks[0], "source already defined on line "
                    f"{state.source['token'].line}")
        return
    if not state.keyword(toks[1], "momentum"):
        return
    momentum = state.vector(toks[2:5], "momentum")
    if not state.keyword(toks[5], "polarization"):
        return
    polarization = state.vector(toks[6:9], "polarization")
    if not state.keyword(toks[9], "width"):
        return
    width = state.number(toks[10], "packet width")
    if momentum is None or polarization is None or width is None:
        return
    p_mag = float(np.linalg.norm(momentum))
    if p_mag == 0.0:
        state.error(toks[2], "source momentum must be nonzero")
        return
    pol_len = float(np.linalg.norm(polarization))
    if pol_len == 0.0:
        state.error(toks[6], "polarization must be a nonzero vector")
        return
    if abs(pol_len - 1.0) > _UNIT_WARN_TOL:
        state.warning(toks[6], f"polarization has length {pol_len:.6g}; normalized to unit")
        polarization = polarization / pol_len
    if abs(float(polarization @ momentum)) > _UNIT_WARN_TOL * p_mag:
        state.error(toks[6], "polarization must be transverse to the momentum")
        return
    if not width > 0.0:
        state.error(toks[10], f"packet width must be positive, got {toks[10].text}")
        return
    state.source = {"token": toks[0], "momentum": momentum,
                    "polarization": polarization, "width": width}


def _parse_bomb(state: _ParseState, toks: list[_Token]):
    if state.bomb is not None:
        state.error(toks[0], f"bomb already defined on line {state.bomb['token'].line}")
        return
    if not state.keyword(toks[1], "arm"):
        return
    efficiency = 1.0
    if len(toks) == 5:
        if not state.keyword(toks[3], "efficiency"):
            return
        value = state.number(toks[4], "efficiency")
        if value is None:
            return
        if not 0.0 <= value <= 1.0:
            state.error(toks[4], f"efficiency must lie in [0, 1], got {toks[4].text}")
            return
        efficiency = value
    state.bomb = {"token": toks[0], "label": toks[2], "efficiency": efficiency}


def _parse_detector(state: _ParseState, toks: list[_Token]):
    name = toks[1]
    if name.text not in ("D1", "D2"):
        state.error(name, f"detector name must be D1 or D2, got {name.text!r}")
        return
    if not state.keyword(toks[2], "port"):
        return
    port = toks[3]
    if port.text not in ("a", "b"):
        state.error(port, f"detector port must be a or b, got {port.text!r}")
        return
    if name.text in state.detectors:
        first = state.detectors[name.text]["token"].line
        state.error(name, f"detector {name.text} already defined on line {first}")
        return
    state.detectors[name.text] = {"token": name, "port": port.text, "port_token": port}


_DIRECTIVES = {
    "vertex": (5, 5, _parse_vertex),
    "beamsplitter": (6, 6, _parse_element),
    "mirror": (6, 6, _parse_element),
    "arm": (5, 7, _parse_arm),
    "source": (11, 11, _parse_source),
    "bomb": (3, 5, _parse_bomb),
    "detector": (4, 4, _parse_detector),
}


def _resolve(state: _ParseState, end_tok: _Token):
    """Cross-directive checks once every line has been scanned."""
    for vid in VERTEX_IDS:
        if vid not in state.vertices:
            state.error(end_tok, f"missing vertex {vid}")
    for vid, (tok, _) in state.vertices.items():
        if vid not in VERTEX_IDS:
            state.warning(tok, f"vertex {vid!r} is outside the square topology; ignored")

    for vid, expected in _EXPECTED_KINDS.items():
        record = state.elements.get(vid)
        if record is None:
            state.error(end_tok, f"missing {expected.value} at vertex {vid}")
        elif record["kind"] != expected.value:
            state.error(record["token"],
                        f"vertex {vid} needs a {expected.value}, found a {record['kind']}")
    for vid, record in state.elements.items():
        if vid not in VERTEX_IDS:
            state.error(record["token"],
                        f"unexpected element at vertex {vid!r}; the square uses "
                        f"{', '.join(VERTEX_IDS)}")

    for pair in ARM_PAIRS:
        if pair not in state.arms:
            state.error(end_tok, f"missing arm {pair[0]}->{pair[1]}")
    for pair, record in state.arms.items():
        for tok in (record["start"], record["end"]):
            if tok.text not in state.vertices:
                state.error(tok, f"unknown vertex {tok.text!r}")
        if pair not in ARM_PAIRS:
            state.error(record["token"],
                        f"arm {pair[0]}->{pair[1]} is not part of the square topology")

    if state.source is None:
        state.error(end_tok, "missing source directive")

    if state.bomb is not None:
        label_tok = state.bomb["label"]
        pair = state.arm_labels.get(label_tok.text)
        if pair is None:
            state.error(label_tok, f"unknown arm label {label_tok.text!r}")
        elif pair not in INPUT_ARM_PAIRS:
            valid = sorted(state.arms[p]["label"] for p in INPUT_ARM_PAIRS
                           if p in state.arms)
            state.error(label_tok,
                        f"bomb arm {label_tok.text!r} is not an input-side arm; "
                        f"valid labels: {valid}")

    ports = {"D1": "a", "D2": "b"}
    taken: dict[str, str] = {}
    for name in sorted(state.detectors):
        record = state.detectors[name]
        port = record["port"]
        if port in taken.values():
            state.error(record["port_token"],
                        f"port {port!r} already assigned to another detector")
        else:
            taken[name] = port
    for name, port in taken.items():
        ports[name] = port
    if len(taken) == 1:
        (name, port), = taken.items()
        other = "D2" if name == "D1" else "D1"
        ports[other] = "b" if port == "a" else "a"
    return ports


def parse_layout(text: str) -> LayoutDocument:
    """Parse layout text into a LayoutDocument; never raises on bad input."""
    state = _ParseState()
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0]
        toks = [_Token(m.group(), lineno, m.start() + 1)
                for m in _TOKEN_RE.finditer(body)]
        if not toks:
            continue
        head = toks[0]
        spec = _DIRECTIVES.get(head.text)
        if spec is None:
            state.error(head, f"unknown directive {head.text!r}")
            continue
        low, high, handler = spec
        if not low <= len(toks) <= high:
            state.error(head, f"malformed directive: expected {_USAGE[head.text]!r}")
            continue
        handler(state, toks)

    end_tok = _Token("", max(1, len(lines)), 1)
    ports = _resolve(state, end_tok)

    layout = None
    if not any(d.severity == "error" for d in state.diagnostics):
        try:
            vertices = {vid: pos for vid, (tok, pos) in state.vertices.items()}
            elements = {
                vid: OpticalElement(record["kind"], householder(record["normal"]), vid)
                for vid, record in state.elements.items()
            }
            arms = {
                pair: Arm(pair[0], pair[1], record["length"], record["label"])
                for pair, record in state.arms.items()
            }
            src = PhotonMode(momentum=state.source["momentum"],
                             polarization=state.source["polarization"])
            obstruction = None
            if state.bomb is not None:
                obstruction = Obstruction(arm=state.bomb["label"].text,
                                          efficiency=state.bomb["efficiency"])
            layout = Layout(vertices=vertices, elements=elements, arms=arms,
                            source=src, source_width=state.source["width"],
                            obstruction=obstruction, detectors=ports)
        except (ConfigurationError, ValueError) as exc:
            state.error(end_tok, str(exc))
    return LayoutDocument(source=text, layout=layout, diagnostics=state.diagnostics)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _fmt_vec(vec) -> str:
    return " ".join(_fmt(x) for x in vec)


def serialize_layout(layout: Layout) -> str:
    """Canonical text form of a layout; stable under parse/serialize cycles."""
    out = []
    for vid in sorted(layout.vertices):
        out.append(f"vertex {vid} {_fmt_vec(layout.vertices[vid])}")
    for vid in sorted(layout.elements):
        element = layout.elements[vid]
        out.append(f"{element.kind.value} {vid} normal "
                   f"{_fmt_vec(element.reflection.normal)}")
    for arm in sorted(layout.arms.values(), key=lambda a: a.label):
        out.append(f"arm {arm.start} {arm.end} length {_fmt(arm.length)} "
                   f"label {arm.label}")
    source = layout.source
    out.append(f"source momentum {_fmt_vec(source.momentum)} "
               f"polarization {_fmt_vec(source.polarization)} "
               f"width {_fmt(layout.source_width)}")
    if layout.obstruction is not None:
        out.append(f"bomb arm {layout.obstruction.arm} "
                   f"efficiency {_fmt(layout.obstruction.efficiency)}")
    for name in sorted(layout.detectors):
        out.append(f"detector {name} port {layout.detectors[name]}")
    return "\n".join(out) + "\n"
