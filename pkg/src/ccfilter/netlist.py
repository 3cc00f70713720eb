"""Reader and writer for the SPICE-like netlist dialect.

One element or directive per line::

    * comment          ; inline comment
    .title CCII biquad
    R1   out  in1  10k
    C2   x1   0    10n
    V1   in1  0    1   V1
    X1   out  x1   q   0   CCII  B=0.98  K=1.02
    .out out

Element letters are case-insensitive. Values accept the suffixes
f, p, n, u, m, k and meg. ``0`` and ``gnd`` both name ground.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from decimal import Decimal

from .circuit import CCII, Capacitor, CircuitError, Netlist, Resistor, VSource, canonical_node

log = logging.getLogger(__name__)

_SUFFIX_EXP = {"f": -15, "p": -12, "n": -9, "u": -6, "m": -3, "k": 3, "meg": 6}
_VALUE_RE = re.compile(
    r"([+-]?(?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?)(meg|[fpnumk])?", re.IGNORECASE
)
_PARAM_RE = re.compile(r"([bk])=(.*)", re.IGNORECASE)


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    message: str
    snippet: str

    def __str__(self):
        return f"line {self.line}, col {self.column}: {self.message}: {self.snippet!r}"


class NetlistSyntaxError(CircuitError):
    """Raised with every :class:`ParseError` collected from one pass."""

    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        super().__init__("\n".join(map(str, errors)))


def parse_value(text: str) -> float:
    """Parse a number with an optional engineering suffix.

    The suffix scales the decimal mantissa exactly, so ``10n`` is the double
    nearest 1e-8 rather than ``10 * 1e-9``.
    """
    m = _VALUE_RE.fullmatch(text.strip())
    if not m:
        raise ValueError(f"malformed value {text!r}")
    try:
        mant = Decimal(m.group(1))
        suffix = m.group(2)
        if suffix:
            mant = mant.scaleb(_SUFFIX_EXP[suffix.lower()])
        value = float(mant)
    except ArithmeticError:
        raise ValueError(f"malformed value {text!r}") from None
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError(f"malformed value {text!r}")
    return value


def format_value(value: float) -> str:
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def _tokens(line: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _strip_comment(line: str) -> str:
    cut = len(line)
    for ch in "*;":
        i = line.find(ch)
        if i != -1:
            cut = min(cut, i)
    return line[:cut]


def parse_netlist(source: str | bytes) -> Netlist:
    """Parse netlist text; raises :class:`NetlistSyntaxError` listing all errors."""
    errors: list[ParseError] = []
    if isinstance(source, (bytes, bytearray)):
        try:
            source = bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise NetlistSyntaxError(
                [ParseError(1, 1, "source is not valid UTF-8", repr(bytes(source[exc.start:exc.end])))]
            ) from None

    elements = []
    names: set[str] = set()
    output = None
    title = ""

    for lineno, raw in enumerate(source.splitlines(), start=1):
        stripped = raw.strip()
        if stripped.lower().startswith(".title"):
            if stripped[6:7] in ("", " ", "\t"):
                title = stripped[6:].strip()
                continue
        line = _strip_comment(raw)
        toks = _tokens(line)
        if not toks:
            continue

        def err(col: int, message: str, snippet: str):
            errors.append(ParseError(lineno, col, message, snippet))

        head, col = toks[0]
        if head.startswith("."):
            if head.lower() == ".out":
                if len(toks) != 2:
                    err(col, "wrong arity: .out takes one node", line.strip())
                    continue
                if output is not None:
                    log.warning("line %d: multiple .out directives; last one wins", lineno)
                output = canonical_node(toks[1][0])
            else:
                err(col, "unknown directive", head)
            continue

        letter = head[0].upper()
        if letter not in "RCVX":
            err(col, "unknown element letter", head)
            continue
        if head.lower() in names:
            err(col, "duplicate element name", head)
            continue

        def value_at(i: int) -> float | None:
            text, c = toks[i]
            try:
                return parse_value(text)
            except ValueError:
                err(c, "malformed value", text)
                return None

        if letter in "RC":
            if len(toks) != 4:
                err(col, f"wrong arity: {letter} needs 2 nodes and a value", line.strip())
                continue
            v = value_at(3)
            if v is None:
                continue
            cls = Resistor if letter == "R" else Capacitor
            el = cls(head, canonical_node(toks[1][0]), canonical_node(toks[2][0]), v)
        elif letter == "V":
            if len(toks) not in (4, 5):
                err(col, "wrong arity: V needs 2 nodes, an amplitude and an optional label", line.strip())
                continue
            v = value_at(3)
            if v is None:
                continue
            label = toks[4][0] if len(toks) == 5 else ""
            el = VSource(head, canonical_node(toks[1][0]), canonical_node(toks[2][0]), v, label)
        else:
            if len(toks) < 6 or toks[5][0].upper() != "CCII":
                err(col, "wrong arity: X needs y x z+ z- CCII [B=v] [K=v]", line.strip())
                continue
            gains = {"b": 1.0, "k": 1.0}
            seen: set[str] = set()
            ok = True
            for text, c in toks[6:]:
                m = _PARAM_RE.fullmatch(text)
                if not m or m.group(1).lower() in seen:
                    err(c, "malformed parameter", text)
                    ok = False
                    continue
                key = m.group(1).lower()
                seen.add(key)
                try:
                    gains[key] = parse_value(m.group(2))
                except ValueError:
                    err(c + 2, "malformed value", m.group(2))
                    ok = False
            if not ok:
                continue
            y, x, zp, zm = (canonical_node(t[0]) for t in toks[1:5])
            el = CCII(head, y, x, zp, zm, B=gains["b"], K=gains["k"])
        names.add(head.lower())
        elements.append(el)

    if output is None:
        nlines = max(1, len(source.splitlines()))
        errors.append(ParseError(nlines, 1, "missing .out directive", ""))
    if errors:
        raise NetlistSyntaxError(errors)
    return Netlist(tuple(elements), output=output, title=title)


def serialize_netlist(netlist: Netlist) -> str:
    lines = []
    if netlist.title:
        lines.append(f".title {netlist.title}")
    for el in netlist.elements:
        if isinstance(el, (Resistor, Capacitor)):
            lines.append(f"{el.name} {el.n1} {el.n2} {format_value(el.value)}")
        elif isinstance(el, VSource):
            lines.append(
                f"{el.name} {el.npos} {el.nneg} {format_value(el.amplitude)} {el.label}"
            )
        elif isinstance(el, CCII):
            lines.append(
                f"{el.name} {el.y} {el.x} {el.zp} {el.zm} CCII "
                f"B={format_value(el.B)} K={format_value(el.K)}"
            )
    lines.append(f".out {netlist.output}")
    return "\n".join(lines) + "\n"
