"""Connections as coefficient tables.

Every connection here is a table of expressions keyed by index tuples of
coordinate names.  The constructions follow the coordinate laws for
composite connections, their reductions to a section, the splittings of the
vertical (co)tangent bundle and the induced linear connections.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import sympy as sp

from . import symexpr
from .bundle import (CompositeChart, JetPoint, Section, SectionError, jet_name,
                     restriction_map)
from .exterior import ChartMismatchError, Form, TangentValuedForm, VectorField, volume_form


def _table(coeffs, keys, sources, what):
    out = {}
    for k in keys:
        e = sp.sympify(coeffs.get(k, 0))
        symexpr.check_bound(e, sources)
        out[k] = e
    stray = set(coeffs) - set(keys)
    if stray:
        raise ChartMismatchError(f"{what}: indices outside chart {sorted(stray)}")
    return out


@dataclass(frozen=True)
class Connection:
    """``Γ = dx^λ ⊗ (∂_λ + Γ^i_λ ∂_i)`` on a fibred manifold.

    ``fibre`` lists the vertical directions and ``coords`` everything the
    coefficients may depend on; ``coeffs`` is keyed by ``(i, λ)``.
    """
    base: tuple[str, ...]
    fibre: tuple[str, ...]
    coeffs: Mapping[tuple[str, str], sp.Expr] = field(default_factory=dict)
    coords: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        object.__setattr__(self, "fibre", tuple(self.fibre))
        coords = tuple(self.coords) or self.base + self.fibre
        object.__setattr__(self, "coords", coords)
        keys = [(i, lam) for i in self.fibre for lam in self.base]
        object.__setattr__(self, "coeffs", _table(self.coeffs, keys, coords, "connection"))

    @classmethod
    def on(cls, chart: CompositeChart, level: str, coeffs) -> "Connection":
        """Connection on ``Σ -> X`` (``level="sigma"``) or ``Y -> X`` (``"y"``)."""
        if level == "sigma":
            return cls(chart.base, chart.middle, coeffs, chart.sigma_coords())
        if level == "y":
            return cls(chart.base, chart.vertical(), coeffs, chart.y_coords())
        raise ValueError(f"unknown connection level {level!r}")

    def __getitem__(self, key) -> sp.Expr:
        return self.coeffs[key]

    def add_soldering(self, soldering: Mapping[tuple[str, str], object]) -> "Connection":
        """Γ + σ for a soldering form ``σ = σ^i_λ dx^λ ⊗ ∂_i``."""
        new = dict(self.coeffs)
        for k, v in soldering.items():
            new[k] = sp.expand(new[k] + sp.sympify(v))
        return replace(self, coeffs=new)

    def difference(self, other: "Connection") -> dict[tuple[str, str], sp.Expr]:
        """Γ - Γ' as soldering-form components."""
        self._same(other)
        return {k: sp.expand(self.coeffs[k] - other.coeffs[k]) for k in self.coeffs}

    def _same(self, other):
        if (self.base, self.fibre) != (other.base, other.fibre):
            raise ChartMismatchError("connections on different charts")

    def equals(self, other: "Connection") -> bool:
        self._same(other)
        return all(symexpr.is_zero(v) for v in self.difference(other).values())

    def as_tangent_valued(self, coords=None) -> TangentValuedForm:
        coords = tuple(coords or self.coords)
        comps = {lam: Form.basis(coords, lam) for lam in self.base}
        for i in self.fibre:
            comps[i] = Form(coords, 1, {(lam,): self.coeffs[(i, lam)] for lam in self.base})
        return TangentValuedForm(coords, comps)

    def horizontal_lift(self, lam: str) -> VectorField:
        """``∂_λ + Γ^i_λ ∂_i``."""
        comps = {lam: sp.S.One}
        comps.update({i: self.coeffs[(i, lam)] for i in self.fibre})
        return VectorField(self.coords, comps)

    def jet_values(self) -> dict[str, sp.Expr]:
        """Γ as a section of J¹Y -> Y: ``y^i_λ = Γ^i_λ``."""
        return {jet_name(i, lam): self.coeffs[(i, lam)] for i in self.fibre for lam in self.base}


def covariant_differential(gamma: Connection, p: JetPoint) -> dict[tuple[str, str], sp.Expr]:
    """Components ``(i, λ) -> y^i_λ - Γ^i_λ`` of D_Γ at ``p``."""
    needed = set(gamma.coords) | {jet_name(i, lam) for i in gamma.fibre for lam in gamma.base}
    if not needed <= set(p.coords):
        raise ChartMismatchError("jet point is not on the connection's chart")
    return {(i, lam): sp.expand(p[jet_name(i, lam)] - p.at(gamma.coeffs[(i, lam)]))
            for i in gamma.fibre for lam in gamma.base}


def is_integral_section(gamma: Connection, h: Section, *, numeric_fallback: bool = True,
                        samples: int = 64, tol: float = 1e-9, seed: int = 42) -> bool:
    """Γ∘h = J¹h, exactly, or numerically when the normal form cannot decide."""
    residuals = integrality_residuals(gamma, h)
    if all(symexpr.is_zero(r) for r in residuals):
        return True
    if not numeric_fallback:
        return False
    return symexpr.numeric_residual(residuals, h.chart.base, samples=samples, seed=seed) <= tol


def integrality_residuals(gamma: Connection, h: Section) -> list[sp.Expr]:
    if h.level != "sigma" or tuple(gamma.fibre) != tuple(h.chart.middle):
        raise SectionError("integrality needs a connection on Σ and a Σ-section")
    return [symexpr.diff(h.values[m], lam) - symexpr.subst(gamma.coeffs[(m, lam)], h.values)
            for m in gamma.fibre for lam in gamma.base]


# --------------------------------------------------------------------------- Y -> Σ

@dataclass(frozen=True)
class SigmaConnection:
    """``A_Σ = dx^λ⊗(∂_λ + Ã^i_λ ∂_i) + dσ^m⊗(∂_m + A^i_m ∂_i)`` on Y -> Σ."""
    chart: CompositeChart
    tilde: Mapping[tuple[str, str], sp.Expr] = field(default_factory=dict)
    vert: Mapping[tuple[str, str], sp.Expr] = field(default_factory=dict)

    def __post_init__(self):
        c = self.chart
        src = c.y_coords()
        object.__setattr__(self, "tilde", _table(
            self.tilde, [(i, lam) for i in c.fibre for lam in c.base], src, "Atilde"))
        object.__setattr__(self, "vert", _table(
            self.vert, [(i, m) for i in c.fibre for m in c.middle], src, "A"))

    def as_tangent_valued(self) -> TangentValuedForm:
        c = self.chart
        coords = c.y_coords()
        comps = {lam: Form.basis(coords, lam) for lam in c.base}
        comps.update({m: Form.basis(coords, m) for m in c.middle})
        for i in c.fibre:
            terms = {(lam,): self.tilde[(i, lam)] for lam in c.base}
            terms.update({(m,): self.vert[(i, m)] for m in c.middle})
            comps[i] = Form(coords, 1, terms)
        return TangentValuedForm(coords, comps)

    def restrict(self, h: Section) -> "Connection":
        return reduce_connection(self, h)


def composite_connection(a_sigma: SigmaConnection, gamma: Connection) -> Connection:
    """``A = dx^λ⊗[∂_λ + Γ^m_λ ∂_m + (A^i_m Γ^m_λ + Ã^i_λ) ∂_i]`` on Y -> X."""
    c = a_sigma.chart
    if (tuple(gamma.base), tuple(gamma.fibre)) != (c.base, c.middle):
        raise ChartMismatchError("Γ must be a connection on Σ -> X of the same chart")
    coeffs = {}
    for lam in c.base:
        for m in c.middle:
            coeffs[(m, lam)] = gamma.coeffs[(m, lam)]
        for i in c.fibre:
            coeffs[(i, lam)] = sp.expand(a_sigma.tilde[(i, lam)] + sum(
                (a_sigma.vert[(i, m)] * gamma.coeffs[(m, lam)] for m in c.middle), sp.S.Zero))
    return Connection.on(c, "y", coeffs)


def reduce_connection(a_sigma: SigmaConnection, h: Section) -> Connection:
    """``A_h = dx^λ⊗[∂_λ + (A^i_m ∂_λ h^m + Ã^i_λ) ∂_i]`` on Y_h -> X."""
    c = a_sigma.chart
    if h.level != "sigma":
        raise SectionError("reduction needs a Σ-section")
    r = c.restricted()
    coeffs = {}
    for i in c.fibre:
        for lam in c.base:
            e = a_sigma.tilde[(i, lam)] + sum(
                (a_sigma.vert[(i, m)] * symexpr.diff(h.values[m], lam) for m in c.middle),
                sp.S.Zero)
            coeffs[(i, lam)] = sp.expand(symexpr.subst(e, h.values))
    return Connection.on(r, "y", coeffs)


def restrict_connection(chart: CompositeChart, a: Connection, h: Section) -> Connection:
    """Restriction of a connection on Y -> X to Y_h (keeping only ∂_i legs)."""
    if tuple(a.fibre) != chart.vertical():
        raise ChartMismatchError("expected a connection on the composite Y -> X")
    r = chart.restricted()
    coeffs = {(i, lam): sp.expand(symexpr.subst(a.coeffs[(i, lam)], h.values))
              for i in chart.fibre for lam in chart.base}
    return Connection.on(r, "y", coeffs)


# --------------------------------------------------------------------------- splittings

def vertical_splitting_project(a_sigma: SigmaConnection, v: VectorField
                               ) -> tuple[VectorField, VectorField]:
    """Split ``ẏ^i ∂_i + σ̇^m ∂_m`` into VY_Σ and the horizontal lift of V Σ."""
    c = a_sigma.chart
    coords = c.y_coords()
    first, second = {}, {}
    for m in c.middle:
        second[m] = v[m]
    for i in c.fibre:
        lifted = sum((a_sigma.vert[(i, m)] * v[m] for m in c.middle), sp.S.Zero)
        first[i] = sp.expand(v[i] - lifted)
        second[i] = sp.expand(lifted)
    return VectorField(coords, first), VectorField(coords, second)


def covertical_splitting_project(a_sigma: SigmaConnection, w: Form) -> tuple[Form, Form]:
    """Split ``ẏ_i dy^i + σ̇_m dσ^m`` into ``ẏ_i(dy^i - A^i_m dσ^m)`` and the rest."""
    c = a_sigma.chart
    coords = c.y_coords()
    if w.degree != 1:
        raise ValueError("covertical splitting acts on 1-forms")
    first, second = {}, {}
    for i in c.fibre:
        first[(i,)] = w[(i,)]
    for m in c.middle:
        acc = sum((a_sigma.vert[(i, m)] * w[(i,)] for i in c.fibre), sp.S.Zero)
        first[(m,)] = -acc
        second[(m,)] = w[(m,)] + acc
    return Form(coords, 1, first), Form(coords, 1, second)


def pairing(v: VectorField, w: Form) -> sp.Expr:
    """``⟨v, w⟩`` for a vector field and a 1-form."""
    return sp.expand(sum((v[c] * w[(c,)] for c in w.coords), sp.S.Zero))


def characterizing_form(a_sigma: SigmaConnection) -> TangentValuedForm:
    """``ω ∧ dσ^m ⊗ (∂_m + A^i_m ∂_i)``; independent of Ã."""
    c = a_sigma.chart
    coords = c.y_coords()
    omega = volume_form(coords, c.base)
    comps = {m: omega ^ Form.basis(coords, m) for m in c.middle}
    for i in c.fibre:
        acc = Form(coords, len(c.base) + 1)
        for m in c.middle:
            acc = acc + (omega ^ Form.basis(coords, m, coef=a_sigma.vert[(i, m)]))
        comps[i] = acc
    return TangentValuedForm(coords, comps)


# --------------------------------------------------------------------------- D̃

def vertical_covariant_differential(a_sigma: SigmaConnection, p: JetPoint
                                    ) -> dict[tuple[str, str], sp.Expr]:
    """``(i, λ) -> y^i_λ - Ã^i_λ - A^i_m σ^m_λ`` at ``p``."""
    c = a_sigma.chart
    if not set(c.j1y_coords()) <= set(p.coords):
        raise ChartMismatchError("jet point is not on J¹Y of this chart")
    out = {}
    for i in c.fibre:
        for lam in c.base:
            e = sp.Symbol(jet_name(i, lam)) - a_sigma.tilde[(i, lam)] - sum(
                (a_sigma.vert[(i, m)] * sp.Symbol(jet_name(m, lam)) for m in c.middle), sp.S.Zero)
            out[(i, lam)] = sp.expand(p.at(e))
    return out


def vertical_covariant_differential_via(a_sigma: SigmaConnection, gamma: Connection,
                                        p: JetPoint) -> dict[tuple[str, str], sp.Expr]:
    """``pr₁∘D_A``: ``y^i_λ - A^i_λ - A^i_m(σ^m_λ - Γ^m_λ)`` with A the composite connection."""
    c = a_sigma.chart
    a = composite_connection(a_sigma, gamma)
    out = {}
    for i in c.fibre:
        for lam in c.base:
            e = sp.Symbol(jet_name(i, lam)) - a.coeffs[(i, lam)] - sum(
                (a_sigma.vert[(i, m)] * (sp.Symbol(jet_name(m, lam)) - gamma.coeffs[(m, lam)])
                 for m in c.middle), sp.S.Zero)
            out[(i, lam)] = sp.expand(p.at(e))
    return out


# --------------------------------------------------------------------------- linear connections

@dataclass(frozen=True)
class LinearConnection:
    """``dx^λ⊗(∂_λ + Γ^m_λ(σ) ∂_m + A^i_{jλ}(σ) y^j ∂_i)`` on a composite Y -> Σ -> X
    whose Y_Σ is a vector bundle.

    ``gamma`` is keyed ``(m, λ)``, ``matrix`` is keyed ``(i, j, λ)``.
    """
    chart: CompositeChart
    gamma: Mapping[tuple[str, str], sp.Expr] = field(default_factory=dict)
    matrix: Mapping[tuple[str, str, str], sp.Expr] = field(default_factory=dict)

    def __post_init__(self):
        c = self.chart
        src = c.sigma_coords()
        object.__setattr__(self, "gamma", _table(
            self.gamma, [(m, lam) for m in c.middle for lam in c.base], src, "Gamma"))
        keys = [(i, j, lam) for i in c.fibre for j in c.fibre for lam in c.base]
        try:
            table = _table(self.matrix, keys, src, "A")
        except symexpr.UnknownCoordinateError as exc:
            raise NonLinearError(f"linear coefficients may not depend on the fibre: {exc}") from None
        object.__setattr__(self, "matrix", table)

    def fibre_coefficient(self, i: str, lam: str) -> sp.Expr:
        """Coefficient of ``∂_i``: ``A^i_{jλ} y^j``."""
        c = self.chart
        return sp.expand(sum((self.matrix[(i, j, lam)] * sp.Symbol(j) for j in c.fibre), sp.S.Zero))

    def as_connection(self) -> Connection:
        c = self.chart
        coeffs = {(m, lam): self.gamma[(m, lam)] for m in c.middle for lam in c.base}
        coeffs.update({(i, lam): self.fibre_coefficient(i, lam) for i in c.fibre for lam in c.base})
        return Connection.on(c, "y", coeffs)

    def same_gamma(self, other: "LinearConnection") -> bool:
        c, o = self.chart, other.chart
        if (c.base, c.middle) != (o.base, o.middle):
            return False
        return all(symexpr.is_zero(self.gamma[k] - other.gamma[k]) for k in self.gamma)


class NonLinearError(ValueError):
    pass


def linear_from_connection(conn: Connection, chart: CompositeChart) -> LinearConnection:
    """Recognise a connection on Y -> X as linear over Σ (fibre-linear coefficients)."""
    gamma = {(m, lam): conn.coeffs[(m, lam)] for m in chart.middle for lam in chart.base}
    matrix = {}
    ys = [sp.Symbol(i) for i in chart.fibre]
    for i in chart.fibre:
        for lam in chart.base:
            e = sp.expand(conn.coeffs[(i, lam)])
            poly = sp.Poly(e, *ys) if ys else None
            if poly is None or poly.total_degree() > 1 or poly.coeff_monomial(1) != 0:
                raise NonLinearError(f"coefficient of ∂_{i} is not linear in the fibre")
            for j, yj in zip(chart.fibre, ys):
                matrix[(i, j, lam)] = poly.coeff_monomial(yj)
    return LinearConnection(chart, gamma, matrix)


def dual_names(chart: CompositeChart, suffix: str = "d") -> CompositeChart:
    return CompositeChart(chart.base, chart.middle, tuple(f"{i}{suffix}" for i in chart.fibre))


def dual_connection(a: LinearConnection, dual_chart: CompositeChart | None = None) -> LinearConnection:
    """``A* = dx^λ⊗(∂_λ + Γ^m_λ ∂_m - A^j_{iλ} y_j ∂^i)`` on the dual bundle."""
    if not isinstance(a, LinearConnection):
        raise NonLinearError("dual connection needs a linear connection")
    c = a.chart
    dc = dual_chart or dual_names(c)
    if len(dc.fibre) != len(c.fibre) or (dc.base, dc.middle) != (c.base, c.middle):
        raise ChartMismatchError("dual chart must match base, middle and fibre rank")
    rename = dict(zip(c.fibre, dc.fibre))
    matrix = {(rename[i], rename[j], lam): -a.matrix[(j, i, lam)]
              for i in c.fibre for j in c.fibre for lam in c.base}
    return LinearConnection(dc, dict(a.gamma), matrix)


def pairing_derivative(a: LinearConnection, a_dual: LinearConnection) -> dict[str, sp.Expr]:
    """Horizontal derivative of ``⟨y, y*⟩ = Σ y^i y_i`` along ``A × A*`` for each λ."""
    c, dc = a.chart, a_dual.chart
    pair = sum((sp.Symbol(i) * sp.Symbol(j) for i, j in zip(c.fibre, dc.fibre)), sp.S.Zero)
    out = {}
    for lam in c.base:
        e = sp.diff(pair, sp.Symbol(lam))
        for m in c.middle:
            e += a.gamma[(m, lam)] * sp.diff(pair, sp.Symbol(m))
        for i in c.fibre:
            e += a.fibre_coefficient(i, lam) * sp.diff(pair, sp.Symbol(i))
        for i in dc.fibre:
            e += a_dual.fibre_coefficient(i, lam) * sp.diff(pair, sp.Symbol(i))
        out[lam] = sp.expand(e)
    return out


def tensor_fibre_name(i: str, k: str) -> str:
    return f"{i}{k}"


def tensor_connection(a: LinearConnection, b: LinearConnection,
                      names=tensor_fibre_name) -> LinearConnection:
    """``A⊗A'`` with coefficients ``A^i_{jλ} y^{jk} + A'^k_{jλ} y^{ij}``."""
    if not a.same_gamma(b):
        raise ChartMismatchError("tensor product needs connections over the same Γ")
    ca, cb = a.chart, b.chart
    pairs = [(i, k) for i in ca.fibre for k in cb.fibre]
    fibre = tuple(names(i, k) for i, k in pairs)
    tc = CompositeChart(ca.base, ca.middle, fibre)
    matrix = {}
    for (i, k) in pairs:
        for (j, l) in pairs:
            for lam in ca.base:
                e = sp.S.Zero
                if k == l:
                    e += a.matrix[(i, j, lam)]
                if i == j:
                    e += b.matrix[(k, l, lam)]
                matrix[(names(i, k), names(j, l), lam)] = e
    return LinearConnection(tc, dict(a.gamma), matrix)


def vertical_lift(gamma: Connection, dot: str = "v", codot: str = "w"
                  ) -> tuple[LinearConnection, LinearConnection]:
    """``VΓ`` on VY -> Y -> X and ``V*Γ`` on V*Y -> Y -> X.

    ``VΓ`` has coefficients ``(Γ^i_λ, ∂_jΓ^i_λ ẏ^j)`` and ``V*Γ`` has
    ``(Γ^i_λ, -∂_jΓ^i_λ ẏ_i)``.  Velocity names are ``v<y>``, covelocity
    names ``w<y>``.
    """
    middle = tuple(gamma.fibre)
    base = tuple(gamma.base)
    vchart = CompositeChart(base, middle, tuple(f"{dot}{i}" for i in middle))
    wchart = CompositeChart(base, middle, tuple(f"{codot}{i}" for i in middle))
    g = {(m, lam): gamma.coeffs[(m, lam)] for m in middle for lam in base}
    vmat, wmat = {}, {}
    for i in middle:
        for j in middle:
            for lam in base:
                dgam = symexpr.diff(gamma.coeffs[(i, lam)], j)
                vmat[(f"{dot}{i}", f"{dot}{j}", lam)] = dgam
                wmat[(f"{codot}{j}", f"{codot}{i}", lam)] = -dgam
    return LinearConnection(vchart, g, vmat), LinearConnection(wchart, g, wmat)


def linear_equal(a: LinearConnection, b: LinearConnection) -> bool:
    if a.chart != b.chart:
        return False
    return (all(symexpr.is_zero(a.gamma[k] - b.gamma[k]) for k in a.gamma)
            and all(symexpr.is_zero(a.matrix[k] - b.matrix[k]) for k in a.matrix))


# --------------------------------------------------------------------------- symmetric

@dataclass(frozen=True)
class SymmetricConnection:
    """Symmetric linear connection ``K^μ_{νλ}(x)`` on TX."""
    base: tuple[str, ...]
    coeffs: Mapping[tuple[str, str, str], sp.Expr] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        b = self.base
        keys = [(mu, nu, lam) for mu in b for nu in b for lam in b]
        raw = dict(self.coeffs)
        for (mu, nu, lam), v in list(raw.items()):
            raw.setdefault((mu, lam, nu), v)
        table = _table(raw, keys, b, "K")
        for mu, nu, lam in keys:
            if not symexpr.is_zero(table[(mu, nu, lam)] - table[(mu, lam, nu)]):
                raise ValueError(f"K^{mu}_{{{nu}{lam}}} is not symmetric in its lower indices")
        object.__setattr__(self, "coeffs", table)

    def __getitem__(self, key) -> sp.Expr:
        return self.coeffs[key]

    def trace(self, lam: str) -> sp.Expr:
        """``K^α_{αλ}``."""
        return sp.expand(sum((self.coeffs[(a, a, lam)] for a in self.base), sp.S.Zero))
