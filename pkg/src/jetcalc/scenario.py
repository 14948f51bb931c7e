"""Scenario files: INI-like declarations of charts and objects plus check directives.

::

    # comment
    [chart]
    base = "x"            # comma-separated coordinate names
    middle = "s"
    fibre = "y"

    [section h]
    level = "sigma"       # sigma | y | ysigma
    s = "x^2"

    [connection G]
    type = "plain"        # plain | sigma | linear | symmetric
    level = "sigma"       # plain connections: sigma (Σ -> X) or y (Y -> X)
    coef[i=s,lambda=x] = "s"

    [checks]
    check composite-reduction A G h

Indices are coordinate names or 1-based positions into the relevant
coordinate list; tetrad, spin-connection and spinor-jet indices are world
indices 0..3.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import sympy as sp

from . import symexpr
from .bundle import CompositeChart, Section, SectionError, ChartError
from .connection import (Connection, LinearConnection, SigmaConnection, SymmetricConnection)
from .exterior import ChartMismatchError
from .legendre import LagrangianDensity
from .spinor import BASE as WORLD_BASE, DIM, SPINOR, SpinorJet, Tetrad, spinor_jet_name


class ScenarioError(ValueError):
    """Malformed scenario; carries 1-based ``line`` and ``column``."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line, self.column, self.reason = line, column, message
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(f"{where}{message}")


@dataclass
class Entry:
    key: str
    indices: tuple[tuple[str | None, str], ...]
    value: str
    line: int
    value_col: int


@dataclass
class Block:
    kind: str
    name: str | None
    line: int
    entries: list[Entry] = field(default_factory=list)


@dataclass
class CheckDirective:
    name: str
    args: tuple[str, ...]
    line: int


@dataclass
class Scenario:
    path: str
    chart: CompositeChart | None = None
    sections: dict[str, Section] = field(default_factory=dict)
    connections: dict[str, Any] = field(default_factory=dict)
    lagrangian: LagrangianDensity | None = None
    lift: tuple[str, str] | None = None
    tetrad: Tetrad | None = None
    spin_K: dict[tuple[int, int, int], sp.Expr] = field(default_factory=dict)
    spinor_jet: SpinorJet | None = None
    checks: list[CheckDirective] = field(default_factory=list)

    def objects(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        out.update(self.sections)
        out.update(self.connections)
        return out


_HEADER = re.compile(r"^\[\s*([A-Za-z][A-Za-z0-9_-]*)(?:\s+([A-Za-z_][A-Za-z0-9_]*))?\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*(?:\[([^\]]*)\])?\s*=\s*(.*)$")


def _strip_comment(line: str) -> str:
    out, quoted = [], False
    for ch in line:
        if ch == '"':
            quoted = not quoted
        if ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out)


def read_blocks(text: str) -> list[Block]:
    blocks: list[Block] = []
    current: Block | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip())
        if stripped.startswith("["):
            m = _HEADER.match(stripped)
            if not m:
                raise ScenarioError("malformed section header", lineno, indent + 1)
            current = Block(m.group(1), m.group(2), lineno)
            blocks.append(current)
            continue
        if current is None:
            raise ScenarioError("entry outside of any section", lineno, indent + 1)
        if current.kind == "checks":
            parts = stripped.split()
            if parts[0] != "check" or len(parts) < 2:
                raise ScenarioError("expected 'check <name> [objects...]'", lineno, indent + 1)
            current.entries.append(Entry("check", tuple((None, p) for p in parts[2:]),
                                         parts[1], lineno, indent + 1))
            continue
        m = _ENTRY.match(stripped)
        if not m:
            raise ScenarioError("expected 'key = \"value\"'", lineno, indent + 1)
        key, idx_text, value = m.group(1), m.group(2), m.group(3).strip()
        value_col = indent + stripped.index(m.group(3)) + 1
        if not (len(value) >= 2 and value[0] == '"' and value[-1] == '"'):
            raise ScenarioError("values must be double-quoted", lineno, value_col)
        indices = ()
        if idx_text is not None:
            parts = [p.strip() for p in idx_text.split(",")]
            parsed = []
            for p in parts:
                if "=" in p:
                    k, v = (s.strip() for s in p.split("=", 1))
                    parsed.append((k, v))
                else:
                    parsed.append((None, p))
            if any(not v for _, v in parsed):
                raise ScenarioError("empty index", lineno, indent + 1)
            indices = tuple(parsed)
        current.entries.append(Entry(key, indices, value[1:-1], lineno, value_col + 1))
    return blocks


def _expr(entry: Entry, *, allow_decimals=False, imaginary=None, coords=None) -> sp.Expr:
    try:
        e = symexpr.parse(entry.value, allow_decimals=allow_decimals, imaginary=imaginary)
    except symexpr.ParseError as exc:
        raise ScenarioError(f"bad expression: {exc.reason}", entry.line,
                            entry.value_col + exc.position) from None
    if coords is not None:
        try:
            symexpr.check_bound(e, coords)
        except symexpr.UnknownCoordinateError as exc:
            raise ScenarioError(str(exc), entry.line, entry.value_col) from None
    return e


def _resolve_index(entry: Entry, pos: int, names: tuple[str, ...], role: str) -> str:
    if pos >= len(entry.indices):
        raise ScenarioError(f"missing index {role!r}", entry.line, 1)
    label, value = entry.indices[pos]
    if label is not None and label != role:
        raise ScenarioError(f"expected index {role!r}, found {label!r}", entry.line, 1)
    if value in names:
        return value
    if value.isdigit() and 1 <= int(value) <= len(names):
        return names[int(value) - 1]
    raise ScenarioError(f"index {role}={value} is not one of {', '.join(names)}", entry.line, 1)


def _world_index(entry: Entry, pos: int, role: str) -> int:
    if pos >= len(entry.indices):
        raise ScenarioError(f"missing index {role!r}", entry.line, 1)
    label, value = entry.indices[pos]
    if label is not None and label != role:
        raise ScenarioError(f"expected index {role!r}, found {label!r}", entry.line, 1)
    if value.isdigit() and 0 <= int(value) < DIM:
        return int(value)
    raise ScenarioError(f"world index {role}={value} must be 0..3", entry.line, 1)


def _names(entry: Entry) -> tuple[str, ...]:
    parts = tuple(p.strip() for p in entry.value.split(",") if p.strip())
    for p in parts:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", p):
            raise ScenarioError(f"bad coordinate name {p!r}", entry.line, entry.value_col)
    return parts


def _single(block: Block, key: str) -> Entry | None:
    found = [e for e in block.entries if e.key == key and not e.indices]
    return found[-1] if found else None


def _build_chart(block: Block) -> CompositeChart:
    vals = {}
    for e in block.entries:
        if e.key not in ("base", "middle", "fibre"):
            raise ScenarioError(f"unknown chart key {e.key!r}", e.line, 1)
        vals[e.key] = _names(e)
    try:
        return CompositeChart(vals.get("base", ()), vals.get("middle", ()), vals.get("fibre", ()))
    except ChartError as exc:
        raise ScenarioError(str(exc), block.line, 1) from None


def _build_section(block: Block, chart: CompositeChart) -> Section:
    level_entry = _single(block, "level")
    level = level_entry.value if level_entry else "sigma"
    sources = {"sigma": chart.base, "y": chart.base, "ysigma": chart.sigma_coords()}
    if level not in sources:
        raise ScenarioError(f"unknown section level {level!r}", block.line, 1)
    values = {e.key: _expr(e, coords=sources[level]) for e in block.entries if e.key != "level"}
    try:
        return Section(chart, level, values)
    except SectionError as exc:
        raise ScenarioError(str(exc), block.line, 1) from None


def _build_connection(block: Block, chart: CompositeChart):
    type_entry = _single(block, "type")
    kind = type_entry.value if type_entry else "plain"
    entries = [e for e in block.entries if e.key not in ("type", "level")]
    try:
        if kind == "plain":
            level_entry = _single(block, "level")
            level = level_entry.value if level_entry else "y"
            if level not in ("sigma", "y"):
                raise ScenarioError(f"unknown connection level {level!r}", block.line, 1)
            fibre = chart.middle if level == "sigma" else chart.vertical()
            coords = chart.sigma_coords() if level == "sigma" else chart.y_coords()
            coeffs = {}
            for e in entries:
                if e.key not in ("coef", "Gamma"):
                    raise ScenarioError(f"unknown key {e.key!r} for a plain connection", e.line, 1)
                i = _resolve_index(e, 0, fibre, "i")
                lam = _resolve_index(e, 1, chart.base, "lambda")
                coeffs[(i, lam)] = _expr(e, coords=coords)
            return Connection.on(chart, level, coeffs)
        if kind == "sigma":
            tilde, vert = {}, {}
            for e in entries:
                if e.key == "Atilde":
                    i = _resolve_index(e, 0, chart.fibre, "i")
                    lam = _resolve_index(e, 1, chart.base, "lambda")
                    tilde[(i, lam)] = _expr(e, coords=chart.y_coords())
                elif e.key == "A":
                    i = _resolve_index(e, 0, chart.fibre, "i")
                    m = _resolve_index(e, 1, chart.middle, "m")
                    vert[(i, m)] = _expr(e, coords=chart.y_coords())
                else:
                    raise ScenarioError(f"unknown key {e.key!r} for a sigma connection", e.line, 1)
            return SigmaConnection(chart, tilde, vert)
        if kind == "linear":
            gamma, matrix = {}, {}
            for e in entries:
                if e.key == "Gamma":
                    m = _resolve_index(e, 0, chart.middle, "m")
                    lam = _resolve_index(e, 1, chart.base, "lambda")
                    gamma[(m, lam)] = _expr(e, coords=chart.sigma_coords())
                elif e.key == "A":
                    i = _resolve_index(e, 0, chart.fibre, "i")
                    j = _resolve_index(e, 1, chart.fibre, "j")
                    lam = _resolve_index(e, 2, chart.base, "lambda")
                    matrix[(i, j, lam)] = _expr(e, coords=chart.sigma_coords())
                else:
                    raise ScenarioError(f"unknown key {e.key!r} for a linear connection", e.line, 1)
            return LinearConnection(chart, gamma, matrix)
        if kind == "symmetric":
            coeffs = {}
            for e in entries:
                if e.key != "K":
                    raise ScenarioError(f"unknown key {e.key!r} for a symmetric connection", e.line, 1)
                mu = _resolve_index(e, 0, chart.base, "mu")
                nu = _resolve_index(e, 1, chart.base, "nu")
                lam = _resolve_index(e, 2, chart.base, "lambda")
                coeffs[(mu, nu, lam)] = _expr(e, coords=chart.base)
            return SymmetricConnection(chart.base, coeffs)
    except (ChartMismatchError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc), block.line, 1) from None
    raise ScenarioError(f"unknown connection type {kind!r}", block.line, 1)


def _build_tetrad(block: Block) -> Tetrad:
    entries = {}
    for e in block.entries:
        if e.key != "h":
            raise ScenarioError(f"unknown tetrad key {e.key!r}", e.line, 1)
        entries[(_world_index(e, 0, "lambda"), _world_index(e, 1, "a"))] = _expr(e, coords=WORLD_BASE)
    return Tetrad.from_entries(entries)


def _build_spin_K(block: Block) -> dict:
    K = {}
    for e in block.entries:
        if e.key != "K":
            raise ScenarioError(f"unknown spin-connection key {e.key!r}", e.line, 1)
        mu, nu, lam = (_world_index(e, 0, "mu"), _world_index(e, 1, "nu"),
                       _world_index(e, 2, "lambda"))
        v = _expr(e, coords=WORLD_BASE)
        K[(mu, nu, lam)] = v
        K[(mu, lam, nu)] = v
    return K


def _build_spinor_jet(block: Block) -> SpinorJet:
    y = sp.zeros(DIM, 1)
    dy = [sp.zeros(DIM, 1) for _ in range(DIM)]
    for e in block.entries:
        if e.key != "y":
            raise ScenarioError(f"unknown spinor-jet key {e.key!r}", e.line, 1)
        v = _expr(e, allow_decimals=True, imaginary="i", coords=())
        A = _world_index(e, 0, "A")
        if len(e.indices) == 1:
            y[A] = v
        else:
            dy[_world_index(e, 1, "lambda")][A] = v
    return SpinorJet(y, dy)


def parse_scenario(text: str, path: str = "<string>") -> Scenario:
    blocks = read_blocks(text)
    sc = Scenario(path)
    chart_blocks = [b for b in blocks if b.kind == "chart"]
    if len(chart_blocks) > 1:
        raise ScenarioError("more than one [chart] section", chart_blocks[1].line, 1)
    if chart_blocks:
        sc.chart = _build_chart(chart_blocks[0])
    for b in blocks:
        needs_chart = b.kind in ("section", "connection", "lagrangian", "lift")
        if needs_chart and sc.chart is None:
            raise ScenarioError(f"[{b.kind}] requires a [chart] section first", b.line, 1)
        if b.kind in ("section", "connection") and not b.name:
            raise ScenarioError(f"[{b.kind}] needs a name", b.line, 1)
        if b.kind in ("section", "connection") and b.name in sc.objects():
            raise ScenarioError(f"duplicate object name {b.name!r}", b.line, 1)
        if b.kind == "chart":
            continue
        elif b.kind == "section":
            sc.sections[b.name] = _build_section(b, sc.chart)
        elif b.kind == "connection":
            sc.connections[b.name] = _build_connection(b, sc.chart)
        elif b.kind == "lagrangian":
            e = _single(b, "L")
            if e is None:
                raise ScenarioError("[lagrangian] needs L = \"...\"", b.line, 1)
            sc.lagrangian = LagrangianDensity(sc.chart, _expr(e, coords=sc.chart.j1y_coords()))
        elif b.kind == "lift":
            conn, sym = _single(b, "connection"), _single(b, "symmetric")
            if conn is None or sym is None:
                raise ScenarioError("[lift] needs 'connection' and 'symmetric'", b.line, 1)
            sc.lift = (conn.value, sym.value)
        elif b.kind == "tetrad":
            sc.tetrad = _build_tetrad(b)
        elif b.kind == "spin-connection":
            sc.spin_K = _build_spin_K(b)
        elif b.kind == "spinor-jet":
            sc.spinor_jet = _build_spinor_jet(b)
        elif b.kind == "checks":
            for e in b.entries:
                sc.checks.append(CheckDirective(e.value, tuple(v for _, v in e.indices), e.line))
        else:
            raise ScenarioError(f"unknown section kind [{b.kind}]", b.line, 1)
    if sc.lift is not None:
        for name in sc.lift:
            if name not in sc.connections:
                raise ScenarioError(f"[lift] refers to undeclared connection {name!r}")
    return sc


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    return parse_scenario(p.read_text(encoding="utf-8"), str(p))
