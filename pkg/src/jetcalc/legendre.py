"""Legendre bundle, multisymplectic form and Hamiltonian connections.

Momentum ``p^λ_i`` is the coordinate named ``p_<λ>_<i>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import sympy as sp

from . import symexpr
from .bundle import CompositeChart, JetPoint, Section, jet_name
from .connection import Connection, SigmaConnection, SymmetricConnection
from .exterior import (ChartMismatchError, Form, TangentValuedForm, contract_tangent_valued,
                       exterior_derivative, volume_form)


def momentum_name(lam: str, i: str) -> str:
    return f"p_{lam}_{i}"


@dataclass(frozen=True)
class LegendreChart:
    """Coordinates ``(x^λ, σ^m, y^i, p^λ_m, p^λ_i)`` of Π over Y."""
    chart: CompositeChart

    def __post_init__(self):
        names = self.coords()
        if len(set(names)) != len(names):
            raise ChartMismatchError("momentum names collide with chart coordinates")

    @property
    def base(self) -> tuple[str, ...]:
        return self.chart.base

    def momenta(self) -> tuple[str, ...]:
        c = self.chart
        return tuple(momentum_name(lam, i) for i in c.vertical() for lam in c.base)

    def coords(self) -> tuple[str, ...]:
        return self.chart.y_coords() + self.momenta()

    def fibre(self) -> tuple[str, ...]:
        """Vertical coordinates of Π -> X."""
        return self.chart.vertical() + self.momenta()


@dataclass(frozen=True)
class LagrangianDensity:
    """``L = ℒ ω`` with ℒ over J¹Y coordinates."""
    chart: CompositeChart
    density: sp.Expr

    def __post_init__(self):
        e = sp.sympify(self.density)
        symexpr.check_bound(e, self.chart.j1y_coords())
        object.__setattr__(self, "density", e)

    def momentum(self, mu: str, i: str) -> sp.Expr:
        """``∂^μ_i ℒ``."""
        return symexpr.diff(self.density, jet_name(i, mu))


def build_multisymplectic(lc: LegendreChart) -> TangentValuedForm:
    """``Ω = dp^λ_i ∧ dy^i ∧ ω ⊗ ∂_λ``."""
    coords = lc.coords()
    omega = volume_form(coords, lc.base)
    comps = {}
    for lam in lc.base:
        acc = Form(coords, len(lc.base) + 2)
        for i in lc.chart.vertical():
            acc = acc + (Form.basis(coords, momentum_name(lam, i), i) ^ omega)
        comps[lam] = acc
    return TangentValuedForm(coords, comps)


def legendre_morphism(L: LagrangianDensity, p: JetPoint) -> dict[tuple[str, str], sp.Expr]:
    """``p^μ_i = ∂^μ_i ℒ`` at ``p``, keyed ``(μ, i)``."""
    c = L.chart
    return {(mu, i): sp.expand(p.at(L.momentum(mu, i))) for i in c.vertical() for mu in c.base}


@dataclass(frozen=True)
class ConstraintReport:
    residuals: Mapping[tuple[str, str], sp.Expr]
    barred: Mapping[tuple[str, str], sp.Expr] = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return all(symexpr.is_zero(v) for v in self.residuals.values())


def factored_lagrangian_constraint(L: LagrangianDensity, a_sigma: SigmaConnection
                                   ) -> ConstraintReport:
    """Residuals ``A^i_m ∂^μ_i ℒ + ∂^μ_m ℒ`` and ``p̄^μ_m`` on the Legendre image.

    Both vanish identically when ℒ depends on the velocities only through
    the vertical covariant differential.
    """
    c = L.chart
    if not c.is_composite:
        raise ChartMismatchError("constraint needs a composite chart")
    if a_sigma.chart != c:
        raise ChartMismatchError("Lagrangian and connection on different charts")
    residuals = {}
    for mu in c.base:
        for m in c.middle:
            r = L.momentum(mu, m) + sum(
                (a_sigma.vert[(i, m)] * L.momentum(mu, i) for i in c.fibre), sp.S.Zero)
            residuals[(mu, m)] = sp.expand(r)
    image = {(mu, i): L.momentum(mu, i) for i in c.vertical() for mu in c.base}
    barred = adapted_momenta(a_sigma, image)
    return ConstraintReport(residuals, {k: barred[k] for k in residuals})


def adapted_momenta(a_sigma: SigmaConnection, momenta: Mapping[tuple[str, str], object]
                    ) -> dict[tuple[str, str], sp.Expr]:
    """``p̄^λ_i = p^λ_i``, ``p̄^λ_m = p^λ_m + A^i_m p^λ_i`` keyed ``(λ, coordinate)``."""
    c = a_sigma.chart
    out = {}
    for lam in c.base:
        for i in c.fibre:
            out[(lam, i)] = sp.sympify(momenta[(lam, i)])
        for m in c.middle:
            out[(lam, m)] = sp.expand(sp.sympify(momenta[(lam, m)]) + sum(
                (a_sigma.vert[(i, m)] * sp.sympify(momenta[(lam, i)]) for i in c.fibre), sp.S.Zero))
    return out


def unbar_momenta(a_sigma: SigmaConnection, barred: Mapping[tuple[str, str], object]
                  ) -> dict[tuple[str, str], sp.Expr]:
    """Inverse of :func:`adapted_momenta`."""
    c = a_sigma.chart
    out = {}
    for lam in c.base:
        for i in c.fibre:
            out[(lam, i)] = sp.sympify(barred[(lam, i)])
        for m in c.middle:
            out[(lam, m)] = sp.expand(sp.sympify(barred[(lam, m)]) - sum(
                (a_sigma.vert[(i, m)] * sp.sympify(barred[(lam, i)]) for i in c.fibre), sp.S.Zero))
    return out


def embed_restricted_legendre(a_sigma: SigmaConnection, h: Section) -> dict[str, sp.Expr]:
    """Π_h -> Π onto ``{σ = h(x), p̄^λ_m = 0}`` as coordinate expressions.

    The source coordinates are those of the Legendre chart of Y_h.
    """
    c = a_sigma.chart
    out = {k: sp.Symbol(k) for k in c.base + c.fibre}
    out.update(h.values)
    for lam in c.base:
        for i in c.fibre:
            out[momentum_name(lam, i)] = sp.Symbol(momentum_name(lam, i))
        for m in c.middle:
            e = -sum((a_sigma.vert[(i, m)] * sp.Symbol(momentum_name(lam, i)) for i in c.fibre),
                     sp.S.Zero)
            out[momentum_name(lam, m)] = sp.expand(symexpr.subst(e, h.values))
    return out


def lift_to_legendre(gamma: Connection, K: SymmetricConnection) -> Connection:
    """Lift of Γ on Y -> X to Π -> X.

    Momentum coefficient of ``∂^j_μ`` along λ:
    ``-∂_jΓ^i_λ p^μ_i - K^μ_{νλ} p^ν_j + K^α_{αλ} p^μ_j``.
    """
    base, fibre = tuple(gamma.base), tuple(gamma.fibre)
    if tuple(K.base) != base:
        raise ChartMismatchError("K must live on the same base")
    lc = LegendreChart(CompositeChart(base, (), fibre))
    p = {(mu, j): sp.Symbol(momentum_name(mu, j)) for mu in base for j in fibre}
    coeffs = dict(gamma.coeffs)
    for lam in base:
        trace = sum((K.coeffs[(a, a, lam)] for a in base), sp.S.Zero)
        for mu in base:
            for j in fibre:
                e = trace * p[(mu, j)]
                for i in fibre:
                    e -= symexpr.diff(gamma.coeffs[(i, lam)], j) * p[(mu, i)]
                for nu in base:
                    e -= K.coeffs[(mu, nu, lam)] * p[(nu, j)]
                coeffs[(momentum_name(mu, j), lam)] = sp.expand(e)
    return Connection(base, lc.fibre(), coeffs, lc.coords())


def contract_with_multisymplectic(gamma: Connection, lc: LegendreChart) -> Form:
    """``γ ⌋ Ω``."""
    if tuple(gamma.fibre) != lc.fibre() or tuple(gamma.base) != lc.base:
        raise ChartMismatchError("connection is not on this Legendre chart")
    coords = lc.coords()
    return contract_tangent_valued(gamma.as_tangent_valued(coords), build_multisymplectic(lc),
                                   lc.base)


def hamiltonian_check(gamma: Connection, lc: LegendreChart | None = None) -> Form:
    """Closedness residual ``d(γ ⌋ Ω)``; zero iff γ is Hamiltonian."""
    if lc is None:
        n_vertical = len(gamma.fibre) // (len(gamma.base) + 1)
        lc = LegendreChart(CompositeChart(tuple(gamma.base), (), tuple(gamma.fibre[:n_vertical])))
    return exterior_derivative(contract_with_multisymplectic(gamma, lc))
