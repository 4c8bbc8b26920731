"""Line-oriented text format for instances.

A file is a sequence of sections, each opened by a ``[name]`` line; ``#``
starts a comment.  Complex entries are written ``re,im`` (a bare real is also
accepted).  Sections:

``[function]``
    one row string per Alice input over ``0``, ``1`` and ``*`` (undefined).
``[protocol]``
    ``epsilon <float>`` and optionally ``prior_budget <float>``.
``[messages]`` / ``[measurements]``
    blocks ``x <int>`` (resp. ``y <int>``) followed by ``d`` matrix rows.
``[prior]``
    ``d`` matrix rows (defaults to the maximally mixed state).
``[majix]``
    ``n <int>``, ``x <bitstring>``, ``I <i1> <i2> ...`` (0-based).
``[lsd]``
    ``d <int>``, then ``V`` and ``W`` each followed by ``d`` rows of ``d/4`` reals.
``[states]``
    named matrices (``state <name>`` followed by rows); used by replay files.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .proofs import InvalidInstanceError, LsdInstance, MajIxInstance
from .protocol import PartialFunction, ProtocolInvariantError, QuantumOneWayProtocol

SECTIONS = ("function", "protocol", "messages", "measurements", "prior", "majix", "lsd", "states")


class InstanceSyntaxError(ValueError):
    def __init__(self, line: int, column: int, message: str, source: str = "<string>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.line = line
        self.column = column


class InstanceInvariantError(ValueError):
    def __init__(self, invariant: str, message: str):
        super().__init__(message)
        self.invariant = invariant


@dataclass(frozen=True)
class ProtocolBundle:
    """A protocol together with the partial function it is meant to compute."""

    function: PartialFunction
    protocol: QuantumOneWayProtocol


@dataclass
class _Line:
    number: int
    text: str
    indent: int

    def tokens(self):
        """Yield ``(column, token)`` pairs, columns 1-based."""
        col = 0
        for part in self.text.split():
            col = self.text.index(part, col)
            yield self.indent + col + 1, part
            col += len(part)


def _number(tok: str, line: _Line, col: int, kind=float):
    try:
        return kind(tok)
    except ValueError:
        raise InstanceSyntaxError(line.number, col, f"expected {kind.__name__}, got {tok!r}") from None


def _complex(tok: str, line: _Line, col: int) -> complex:
    if "," in tok:
        re_s, im_s = tok.split(",", 1)
        return complex(_number(re_s, line, col), _number(im_s, line, col + len(re_s) + 1))
    return complex(_number(tok, line, col), 0.0)


def _split_sections(text: str, source: str):
    sections: dict[str, list[_Line]] = {}
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        stripped = body.lstrip()
        if not stripped:
            continue
        indent = len(body) - len(stripped)
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise InstanceSyntaxError(number, indent + 1, "unterminated section header", source)
            name = stripped[1:-1].strip()
            if name not in SECTIONS:
                raise InstanceSyntaxError(number, indent + 2, f"unknown section {name!r}", source)
            if name in sections:
                raise InstanceSyntaxError(number, indent + 2, f"duplicate section {name!r}", source)
            sections[name] = []
            current = name
            continue
        if current is None:
            raise InstanceSyntaxError(number, indent + 1, "content before the first section header", source)
        sections[current].append(_Line(number, stripped, indent))
    return sections


def _matrix_rows(lines: list[_Line], start: int, count: int | None, parse, width: int | None = None):
    """Read ``count`` rows beginning at ``lines[start]`` (``count=None``: as many as the first row is wide)."""
    rows = []
    i = start
    while count is None or len(rows) < count:
        if i >= len(lines):
            last = lines[-1] if lines else _Line(0, "", 0)
            raise InstanceSyntaxError(last.number, 1, "matrix ended early")
        line = lines[i]
        row = [parse(tok, line, col) for col, tok in line.tokens()]
        if width is None:
            width = len(row)
            if count is None:
                count = width
        if len(row) != width:
            raise InstanceSyntaxError(line.number, 1, f"expected {width} entries, got {len(row)}")
        rows.append(row)
        i += 1
    return np.array(rows), i


def _indexed_blocks(lines: list[_Line], key: str, dim: int | None):
    blocks: dict[int, np.ndarray] = {}
    i = 0
    while i < len(lines):
        line = lines[i]
        toks = list(line.tokens())
        if len(toks) != 2 or toks[0][1] != key:
            raise InstanceSyntaxError(line.number, toks[0][0] if toks else 1, f"expected '{key} <index>'")
        idx = _number(toks[1][1], line, toks[1][0], int)
        if idx in blocks:
            raise InstanceSyntaxError(line.number, toks[1][0], f"duplicate {key} {idx}")
        mat, i = _matrix_rows(lines, i + 1, dim, _complex, dim)
        dim = mat.shape[0]
        blocks[idx] = mat
    if sorted(blocks) != list(range(len(blocks))):
        raise InstanceInvariantError("index range", f"{key} indices must be 0..{len(blocks) - 1}")
    return np.array([blocks[k] for k in range(len(blocks))]), dim


def _keyed(lines: list[_Line]) -> dict:
    out = {}
    for line in lines:
        toks = list(line.tokens())
        out[toks[0][1]] = (line, toks[1:])
    return out


def _parse_function(lines: list[_Line]) -> PartialFunction:
    rows = []
    for line in lines:
        row = line.text.replace(" ", "")
        for j, ch in enumerate(row):
            if ch not in "01*":
                raise InstanceSyntaxError(line.number, line.indent + j + 1, f"unexpected symbol {ch!r}")
        if rows and len(row) != len(rows[0]):
            raise InstanceSyntaxError(line.number, 1, "all rows must have the same length")
        rows.append(row)
    try:
        return PartialFunction.from_rows(rows)
    except ProtocolInvariantError as exc:
        raise InstanceInvariantError(exc.invariant, str(exc)) from None


def _parse_protocol(sections) -> QuantumOneWayProtocol:
    params = _keyed(sections.get("protocol", []))
    if "epsilon" not in params:
        raise InstanceInvariantError("epsilon", "[protocol] section must give epsilon")

    def scalar(name):
        line, toks = params[name]
        if len(toks) != 1:
            raise InstanceSyntaxError(line.number, 1, f"'{name}' takes one value")
        return _number(toks[0][1], line, toks[0][0])

    epsilon = scalar("epsilon")
    budget = scalar("prior_budget") if "prior_budget" in params else None
    messages, d = _indexed_blocks(sections["messages"], "x", None)
    measurements, _ = _indexed_blocks(sections["measurements"], "y", d)
    prior = None
    if "prior" in sections:
        prior, _ = _matrix_rows(sections["prior"], 0, d, _complex, d)
    try:
        return QuantumOneWayProtocol(messages, measurements, epsilon, prior, budget)
    except ProtocolInvariantError as exc:
        raise InstanceInvariantError(exc.invariant, str(exc)) from None


def _parse_majix(lines: list[_Line]) -> MajIxInstance:
    params = _keyed(lines)
    for key in ("n", "x", "I"):
        if key not in params:
            raise InstanceInvariantError("majix fields", f"[majix] is missing '{key}'")
    line, toks = params["n"]
    n = _number(toks[0][1], line, toks[0][0], int)
    line, toks = params["x"]
    bits = "".join(t for _, t in toks)
    for j, ch in enumerate(bits):
        if ch not in "01":
            raise InstanceSyntaxError(line.number, toks[0][0] + j, f"unexpected bit {ch!r}")
    line, toks = params["I"]
    idx = [_number(t, line, c, int) for c, t in toks]
    try:
        return MajIxInstance(n, np.array([int(c) for c in bits]), tuple(idx))
    except InvalidInstanceError as exc:
        raise InstanceInvariantError("majix instance", str(exc)) from None


def _parse_lsd(lines: list[_Line]) -> LsdInstance:
    if not lines or lines[0].text.split()[0] != "d":
        raise InstanceSyntaxError(lines[0].number if lines else 0, 1, "[lsd] must start with 'd <int>'")
    first = lines[0]
    toks = list(first.tokens())
    d = _number(toks[1][1], first, toks[1][0], int)
    real = lambda tok, line, col: _number(tok, line, col)  # noqa: E731
    bases = {}
    i = 1
    for name in ("V", "W"):
        if i >= len(lines) or lines[i].text != name:
            raise InstanceSyntaxError(lines[min(i, len(lines) - 1)].number, 1, f"expected '{name}'")
        bases[name], i = _matrix_rows(lines, i + 1, d, real, d // 4 if d >= 4 else None)
    try:
        return LsdInstance(d, bases["V"], bases["W"])
    except InvalidInstanceError as exc:
        raise InstanceInvariantError("lsd instance", str(exc)) from None


def _parse_states(lines: list[_Line]) -> dict:
    states = {}
    i = 0
    while i < len(lines):
        toks = list(lines[i].tokens())
        if len(toks) != 2 or toks[0][1] != "state":
            raise InstanceSyntaxError(lines[i].number, 1, "expected 'state <name>'")
        states[toks[1][1]], i = _matrix_rows(lines, i + 1, None, _complex)
    return states


def parse_instance(text: str, source: str = "<string>"):
    """Parse instance text into a validated domain object.

    Returns a :class:`PartialFunction`, :class:`QuantumOneWayProtocol`,
    :class:`ProtocolBundle` (function plus protocol), :class:`MajIxInstance`,
    :class:`LsdInstance`, or a ``dict`` of named matrices for ``[states]``.
    """
    try:
        sections = _split_sections(text, source)
        if "majix" in sections:
            return _parse_majix(sections["majix"])
        if "lsd" in sections:
            return _parse_lsd(sections["lsd"])
        if "states" in sections:
            return _parse_states(sections["states"])
        has_protocol = "messages" in sections or "measurements" in sections
        if has_protocol:
            if "messages" not in sections or "measurements" not in sections:
                raise InstanceInvariantError("protocol sections", "a protocol needs [messages] and [measurements]")
            protocol = _parse_protocol(sections)
            if "function" in sections:
                f = _parse_function(sections["function"])
                if f.values.shape != (protocol.x_count, protocol.y_count):
                    raise InstanceInvariantError(
                        "dimension", f"function table {f.values.shape} does not match protocol"
                    )
                return ProtocolBundle(f, protocol)
            return protocol
        if "function" in sections:
            return _parse_function(sections["function"])
        raise InstanceInvariantError("content", "file contains no instance section")
    except InstanceSyntaxError as exc:
        if str(exc).startswith("<string>") and source != "<string>":
            raise InstanceSyntaxError(exc.line, exc.column, str(exc).split(": ", 1)[1], source) from None
        raise


def parse_instance_file(path):
    path = Path(path)
    return parse_instance(path.read_text(), source=str(path))


def _fmt_complex(z: complex) -> str:
    return f"{float(z.real)!r},{float(z.imag)!r}"


def _write_matrix(out, m, fmt=_fmt_complex):
    for row in np.asarray(m):
        out.write(" ".join(fmt(v) for v in row) + "\n")


def format_instance(obj) -> str:
    """Serialise any object :func:`parse_instance` returns; parsing the text gives it back."""
    out = io.StringIO()
    if isinstance(obj, ProtocolBundle):
        out.write(format_instance(obj.function))
        out.write(format_instance(obj.protocol))
    elif isinstance(obj, PartialFunction):
        out.write("[function]\n")
        for row in obj.to_rows():
            out.write(row + "\n")
    elif isinstance(obj, QuantumOneWayProtocol):
        out.write(f"[protocol]\nepsilon {obj.epsilon!r}\nprior_budget {obj.prior_budget!r}\n")
        out.write("[messages]\n")
        for x, m in enumerate(obj.messages):
            out.write(f"x {x}\n")
            _write_matrix(out, m)
        out.write("[measurements]\n")
        for y, m in enumerate(obj.measurements):
            out.write(f"y {y}\n")
            _write_matrix(out, m)
        out.write("[prior]\n")
        _write_matrix(out, obj.prior)
    elif isinstance(obj, MajIxInstance):
        out.write(f"[majix]\nn {obj.n}\nx {''.join(str(int(b)) for b in obj.x)}\n")
        out.write("I " + " ".join(str(i) for i in obj.I) + "\n")
    elif isinstance(obj, LsdInstance):
        out.write(f"[lsd]\nd {obj.d}\nV\n")
        _write_matrix(out, obj.V, lambda v: repr(float(v)))
        out.write("W\n")
        _write_matrix(out, obj.W, lambda v: repr(float(v)))
    elif isinstance(obj, dict):
        out.write("[states]\n")
        for name, m in obj.items():
            out.write(f"state {name}\n")
            _write_matrix(out, m)
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")
    return out.getvalue()


def write_instance_file(path, obj) -> None:
    Path(path).write_text(format_instance(obj))


def bundled_instance_path(name: str) -> Path:
    """Path of a data file shipped with the package (``demo_q1.txt``, ``xor_shift_n4.txt``)."""
    return Path(str(resources.files("qoneway") / "data" / name))
