"""Composite charts, sections and first-order jets.

A :class:`CompositeChart` carries coordinates ``(x^λ, σ^m, y^i)`` of a tower
``Y -> Σ -> X``; with no middle coordinates it is a plain fibred manifold.
Jet coordinates are named by joining names with an underscore: ``y_x`` is
``y^i_λ`` on J¹Y, ``y__x`` is ``ỹ^i_λ`` and ``y_s`` is ``y^i_m`` on J¹Y_Σ.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import sympy as sp

from . import symexpr
from .exterior import Form, TangentValuedForm


class ChartError(ValueError):
    pass


class SectionError(ValueError):
    pass


class JetError(ValueError):
    pass


def jet_name(coord: str, wrt: str) -> str:
    return f"{coord}_{wrt}"


def tilde_jet_name(coord: str, wrt: str) -> str:
    return f"{coord}__{wrt}"


@dataclass(frozen=True)
class CompositeChart:
    base: tuple[str, ...]
    middle: tuple[str, ...] = ()
    fibre: tuple[str, ...] = ()

    def __post_init__(self):
        for f in ("base", "middle", "fibre"):
            object.__setattr__(self, f, tuple(getattr(self, f)))
        if not self.base:
            raise ChartError("a chart needs at least one base coordinate")
        names = self.base + self.middle + self.fibre
        if len(set(names)) != len(names):
            raise ChartError(f"coordinate names must be distinct: {names}")
        jets = (self.j1y_coords() + self.j1ysigma_coords()[len(self.y_coords()):])
        if len(set(jets)) != len(jets):
            raise ChartError("coordinate names collide with generated jet names")

    @property
    def is_composite(self) -> bool:
        return bool(self.middle)

    # coordinate lists ------------------------------------------------------
    def y_coords(self) -> tuple[str, ...]:
        return self.base + self.middle + self.fibre

    def sigma_coords(self) -> tuple[str, ...]:
        return self.base + self.middle

    def vertical(self) -> tuple[str, ...]:
        """Fibre coordinates of Y -> X."""
        return self.middle + self.fibre

    def j1y_coords(self) -> tuple[str, ...]:
        return (self.y_coords()
                + tuple(jet_name(m, l) for m in self.middle for l in self.base)
                + tuple(jet_name(i, l) for i in self.fibre for l in self.base))

    def j1sigma_coords(self) -> tuple[str, ...]:
        return self.sigma_coords() + tuple(jet_name(m, l) for m in self.middle for l in self.base)

    def j1ysigma_coords(self) -> tuple[str, ...]:
        return (self.y_coords()
                + tuple(tilde_jet_name(i, l) for i in self.fibre for l in self.base)
                + tuple(jet_name(i, m) for i in self.fibre for m in self.middle))

    def restricted(self) -> "CompositeChart":
        """The chart of Y_h -> X: base and fibre, no middle."""
        return CompositeChart(self.base, (), self.fibre)

    def plain(self) -> "CompositeChart":
        """Y -> X seen as a plain fibred manifold (σ joins the fibre)."""
        return CompositeChart(self.base, (), self.middle + self.fibre)


@dataclass(frozen=True)
class Section:
    """Coordinate map ``target coordinate -> expression in source coordinates``.

    ``level`` is one of ``"sigma"`` (h: X -> Σ), ``"y"`` (s: X -> Y) or
    ``"ysigma"`` (s_Σ: Σ -> Y_Σ).
    """
    chart: CompositeChart
    level: str
    values: Mapping[str, sp.Expr] = field(default_factory=dict)

    def __post_init__(self):
        c = self.chart
        targets = {"sigma": c.middle, "y": c.vertical(), "ysigma": c.fibre}
        sources = {"sigma": c.base, "y": c.base, "ysigma": c.sigma_coords()}
        if self.level not in targets:
            raise SectionError(f"unknown section level {self.level!r}")
        vals = {k: sp.sympify(v) for k, v in self.values.items()}
        missing = set(targets[self.level]) - set(vals)
        extra = set(vals) - set(targets[self.level])
        if missing or extra:
            raise SectionError(f"section components mismatch: missing {sorted(missing)}, "
                               f"unexpected {sorted(extra)}")
        for v in vals.values():
            symexpr.check_bound(v, sources[self.level])
        object.__setattr__(self, "values", vals)

    @property
    def base_sourced(self) -> bool:
        return self.level in ("sigma", "y")

    def __getitem__(self, k):
        return self.values[k]


@dataclass(frozen=True)
class JetPoint:
    """Values of jet coordinates; values may be numbers or expressions."""
    coords: tuple[str, ...]
    values: Mapping[str, sp.Expr]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        vals = {k: sp.sympify(v) for k, v in self.values.items()}
        if set(vals) != set(self.coords):
            missing = sorted(set(self.coords) - set(vals))
            extra = sorted(set(vals) - set(self.coords))
            raise JetError(f"jet coordinates mismatch: missing {missing}, unexpected {extra}")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, k) -> sp.Expr:
        return self.values[k]

    def bindings(self) -> dict[str, sp.Expr]:
        return dict(self.values)

    def at(self, expr) -> sp.Expr:
        """Evaluate an expression over these coordinates at this point."""
        return symexpr.subst(expr, self.values)

    def equals(self, other: "JetPoint") -> bool:
        if set(self.coords) != set(other.coords):
            return False
        return all(symexpr.is_zero(self[k] - other[k]) for k in self.coords)


@dataclass(frozen=True)
class FibredMorphism:
    """``Φ``: new coordinate values as expressions in the old ones.

    ``chart`` is used for both source and target; the base components may only
    depend on the base coordinates.
    """
    chart: CompositeChart
    values: Mapping[str, sp.Expr]

    def __post_init__(self):
        c = self.chart.plain()
        vals = {k: sp.sympify(v) for k, v in self.values.items()}
        if set(vals) != set(c.y_coords()):
            raise ChartError("morphism must give every coordinate")
        for lam in c.base:
            symexpr.check_bound(vals[lam], c.base)
        for v in vals.values():
            symexpr.check_bound(v, c.y_coords())
        object.__setattr__(self, "values", vals)

    def compose(self, other: "FibredMorphism") -> "FibredMorphism":
        """``self ∘ other``."""
        return FibredMorphism(self.chart, {k: symexpr.subst(v, other.values)
                                           for k, v in self.values.items()})

    @classmethod
    def identity(cls, chart: CompositeChart) -> "FibredMorphism":
        return cls(chart, {c: sp.Symbol(c) for c in chart.y_coords()})


# --------------------------------------------------------------------------- sections

def section_point(section: Section, at: Mapping[str, object]) -> dict[str, sp.Expr]:
    return {k: symexpr.subst(v, at) for k, v in section.values.items()}


def jet_prolong(s: Section) -> dict[str, sp.Expr]:
    """J¹s as a map ``J¹Y (or J¹Σ) coordinate -> expression in x``."""
    if not s.base_sourced:
        raise SectionError("jet prolongation needs a section over the base X")
    c = s.chart
    out = {lam: sp.Symbol(lam) for lam in c.base}
    out.update(s.values)
    for target, expr in s.values.items():
        for lam in c.base:
            out[jet_name(target, lam)] = symexpr.diff(expr, lam)
    return out


def sigma_jet_prolong(s: Section) -> dict[str, sp.Expr]:
    """J¹s_Σ for a section of Y_Σ -> Σ: values of ``(ỹ^i_λ, y^i_m)`` over (x, σ)."""
    if s.level != "ysigma":
        raise SectionError("expected a section of Y_Σ -> Σ")
    c = s.chart
    out = {k: sp.Symbol(k) for k in c.sigma_coords()}
    out.update(s.values)
    for i, expr in s.values.items():
        for lam in c.base:
            out[tilde_jet_name(i, lam)] = symexpr.diff(expr, lam)
        for m in c.middle:
            out[jet_name(i, m)] = symexpr.diff(expr, m)
    return out


def jet_of(s: Section, at: Mapping[str, object] | None = None) -> JetPoint:
    """The jet point of ``s`` (at ``at`` if given, otherwise symbolic in x)."""
    c = s.chart
    if s.level == "sigma":
        coords, vals = c.j1sigma_coords(), jet_prolong(s)
    elif s.level == "y":
        coords, vals = c.j1y_coords(), jet_prolong(s)
    else:
        coords, vals = c.j1ysigma_coords(), sigma_jet_prolong(s)
    if at:
        vals = {k: symexpr.subst(v, at) for k, v in vals.items()}
    return JetPoint(coords, vals)


def compose_sections(s_sigma: Section, h: Section) -> Section:
    """``s_Σ ∘ h`` as a section of Y -> X."""
    if s_sigma.level != "ysigma" or h.level != "sigma":
        raise SectionError("compose needs a Y_Σ-section and a Σ-section")
    vals = dict(h.values)
    vals.update({i: symexpr.subst(e, h.values) for i, e in s_sigma.values.items()})
    return Section(h.chart, "y", vals)


def decompose_section(s: Section) -> tuple[Section, Section]:
    """Split a Y-section into ``h = π_{YΣ}∘s`` and a Y_Σ-section along h(X).

    The returned Y_Σ-section is the trivial extension (constant in σ); any
    extension agrees with it on h(X).
    """
    if s.level != "y":
        raise SectionError("expected a section of Y -> X")
    c = s.chart
    h = Section(c, "sigma", {m: s.values[m] for m in c.middle})
    s_sigma = Section(c, "ysigma", {i: s.values[i] for i in c.fibre})
    return h, s_sigma


# --------------------------------------------------------------------------- jets

def jet_transform(phi: FibredMorphism, p: JetPoint) -> JetPoint:
    """Image of a J¹Y point under J¹Φ.

    ``y'^i_μ = (∂_λΦ^i + ∂_jΦ^i y^j_λ) ∂x^λ/∂x'^μ``
    """
    c = phi.chart.plain()
    coords = c.j1y_coords()
    if set(p.coords) != set(coords):
        raise JetError("jet point is not on the morphism's chart")
    at = {k: p[k] for k in c.y_coords()}
    jac = sp.Matrix(len(c.base), len(c.base),
                    lambda a, b: symexpr.subst(sp.diff(phi.values[c.base[a]], c.base[b]), at))
    det = symexpr.normalize(jac.det())
    if symexpr.is_zero(det):
        raise JetError("base Jacobian is singular at this point")
    inv = jac.inv()
    out = {k: symexpr.subst(phi.values[k], at) for k in c.y_coords()}
    for i in c.fibre:
        total = []
        for lam in c.base:
            t = sp.diff(phi.values[i], lam)
            for j in c.fibre:
                t += sp.diff(phi.values[i], j) * sp.Symbol(jet_name(j, lam))
            total.append(symexpr.subst(t, p.values))
        for mu_idx, mu in enumerate(c.base):
            val = sum(total[l] * inv[l, mu_idx] for l in range(len(c.base)))
            out[jet_name(i, mu)] = sp.expand(val)
    return JetPoint(coords, out)


def canonical_monomorphism(chart: CompositeChart, p: JetPoint) -> TangentValuedForm:
    """``λ = dx^λ ⊗ (∂_λ + y^i_λ ∂_i)`` at ``p`` as a tangent-valued 1-form on Y."""
    coords = chart.y_coords()
    comps = {lam: Form.basis(coords, lam) for lam in chart.base}
    for i in chart.vertical():
        comps[i] = Form(coords, 1, {(lam,): p[jet_name(i, lam)] for lam in chart.base})
    return TangentValuedForm(coords, comps)


def rho(chart: CompositeChart, j_sigma: JetPoint, j_ysigma: JetPoint) -> JetPoint:
    """Canonical surjection J¹Σ ×_Σ J¹Y_Σ -> J¹Y: ``y^i_λ = y^i_m σ^m_λ + ỹ^i_λ``."""
    for k in chart.sigma_coords():
        if not symexpr.is_zero(j_sigma[k] - j_ysigma[k]):
            raise JetError(f"jets disagree on shared coordinate {k!r}")
    vals = {k: j_ysigma[k] for k in chart.y_coords()}
    for m in chart.middle:
        for lam in chart.base:
            vals[jet_name(m, lam)] = j_sigma[jet_name(m, lam)]
    for i in chart.fibre:
        for lam in chart.base:
            v = j_ysigma[tilde_jet_name(i, lam)]
            for m in chart.middle:
                v += j_ysigma[jet_name(i, m)] * j_sigma[jet_name(m, lam)]
            vals[jet_name(i, lam)] = sp.expand(v)
    return JetPoint(chart.j1y_coords(), vals)


# --------------------------------------------------------------------------- restriction

def restriction_map(h: Section) -> dict[str, sp.Expr]:
    """``σ = h(x)`` and ``σ^m_λ = ∂_λ h^m`` as a substitution table."""
    if h.level != "sigma":
        raise SectionError("restriction needs a section of Σ -> X")
    table = dict(h.values)
    for m, e in h.values.items():
        for lam in h.chart.base:
            table[jet_name(m, lam)] = symexpr.diff(e, lam)
    return table


def restrict_to_section(chart: CompositeChart, h: Section, obj):
    """Pull ``obj`` back to Y_h by pinning σ to h and σ-jets to ∂h.

    Handles expressions, mappings of expressions, jet points and Y-sections;
    connections provide their own ``restrict``.
    """
    table = restriction_map(h)
    if hasattr(obj, "restrict"):
        return obj.restrict(h)
    if isinstance(obj, Section):
        if obj.level != "y":
            raise SectionError("only Y-sections restrict to Y_h")
        for m in chart.middle:
            if not symexpr.is_zero(obj.values[m] - h.values[m]):
                raise SectionError("section does not cover h")
        return Section(chart.restricted(), "y", {i: obj.values[i] for i in chart.fibre})
    if isinstance(obj, JetPoint):
        kept = [k for k in obj.coords if k not in table]
        vals = {k: symexpr.subst(obj[k], table) for k in kept}
        pinned = {k: table[k] for k in obj.coords if k in table}
        for k, v in pinned.items():
            vals[k] = symexpr.subst(v, {lam: obj[lam] for lam in chart.base if lam in obj.values})
        return JetPoint(obj.coords, vals)
    if isinstance(obj, Mapping):
        return {k: symexpr.subst(v, table) for k, v in obj.items()}
    return symexpr.subst(obj, table)


def embed_section(chart: CompositeChart, h: Section, s_h: Section) -> Section:
    """Inverse of restriction: a Y_h-section as the Y-section covering h."""
    vals = dict(h.values)
    vals.update(s_h.values)
    return Section(chart, "y", vals)
