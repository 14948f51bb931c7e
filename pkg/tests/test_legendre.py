import random

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from jetcalc import samples, symexpr
from jetcalc.bundle import CompositeChart, JetPoint, Section
from jetcalc.connection import Connection, SigmaConnection, SymmetricConnection
from jetcalc.exterior import ChartMismatchError, Form, exterior_derivative
from jetcalc.legendre import (LagrangianDensity, LegendreChart, adapted_momenta,
                              build_multisymplectic, embed_restricted_legendre,
                              factored_lagrangian_constraint, hamiltonian_check, lift_to_legendre,
                              legendre_morphism, momentum_name, unbar_momenta)

x, s, y = sp.symbols("x s y")
y_x, s_x = sp.symbols("y_x s_x")
PLAIN = CompositeChart(("x",), (), ("y",))
C = CompositeChart(("x",), ("s",), ("y",))
seeds = st.integers(0, 2**32)


def jet(chart, **values):
    coords = chart.j1y_coords()
    return JetPoint(coords, {k: values.get(k, sp.Symbol(k)) for k in coords})


# --------------------------------------------------------------------------- Ω

def test_multisymplectic_one_dimensional():
    lc = LegendreChart(PLAIN)
    Omega = build_multisymplectic(lc)
    assert set(Omega) == {"x"}
    assert Omega["x"].equals(Form.basis(lc.coords(), "p_x_y", "y", "x"))


def test_multisymplectic_components_closed_and_constant():
    lc = LegendreChart(CompositeChart(("x1", "x2"), ("s",), ("y1", "y2")))
    for form in build_multisymplectic(lc).values():
        assert exterior_derivative(form).is_zero()
        assert all(c.is_number for c in form.terms.values())


def test_multisymplectic_two_dimensional_hand_expansion():
    lc = LegendreChart(CompositeChart(("x1", "x2"), (), ("y",)))
    Omega = build_multisymplectic(lc)
    coords = lc.coords()
    # dp^1∧dy∧dx1∧dx2 on ∂_1 and dp^2∧dy∧dx1∧dx2 on ∂_2, one term each for a single field
    for lam in ("x1", "x2"):
        expected = Form.basis(coords, f"p_{lam}_y", "y", "x1", "x2")
        assert Omega[lam].equals(expected)
        assert len(Omega[lam].terms) == 1
    two_fields = build_multisymplectic(LegendreChart(CompositeChart(("x1", "x2"), (), ("y1", "y2"))))
    assert all(len(f.terms) == 2 for f in two_fields.values())


# --------------------------------------------------------------------------- Legendre morphism

def test_legendre_morphism_examples():
    assert legendre_morphism(LagrangianDensity(PLAIN, y_x**2 / 2), jet(PLAIN))[("x", "y")] == y_x
    assert legendre_morphism(LagrangianDensity(PLAIN, x * y), jet(PLAIN))[("x", "y")] == 0
    cubic = LagrangianDensity(PLAIN, y_x**3)
    assert legendre_morphism(cubic, jet(PLAIN, x=0, y=0, y_x=2))[("x", "y")] == 12


def test_lagrangian_coordinates_are_checked():
    with pytest.raises(symexpr.UnknownCoordinateError):
        LagrangianDensity(PLAIN, sp.Symbol("q"))


# --------------------------------------------------------------------------- constraints

def test_factored_lagrangian_satisfies_constraint():
    a = SigmaConnection(C, {}, {("y", "s"): 3})
    L = LagrangianDensity(C, (y_x - 3 * s_x) ** 2 / 2)
    report = factored_lagrangian_constraint(L, a)
    assert report.satisfied
    assert report.barred[("x", "s")] == 0


def test_unfactored_lagrangian_residual():
    # the residual is ∂_{s_x}L + A ∂_{y_x}L; with A = 2 it is s_x + 2 y_x
    a = SigmaConnection(C, {}, {("y", "s"): 2})
    L = LagrangianDensity(C, y_x**2 / 2 + s_x**2 / 2)
    report = factored_lagrangian_constraint(L, a)
    assert not report.satisfied
    assert symexpr.equal(report.residuals[("x", "s")], s_x + 2 * y_x)


def test_velocity_free_lagrangian():
    a = SigmaConnection(C, {}, {("y", "s"): s})
    report = factored_lagrangian_constraint(LagrangianDensity(C, x * y * s), a)
    assert report.satisfied


def test_constraint_needs_composite_chart():
    with pytest.raises(ChartMismatchError):
        factored_lagrangian_constraint(LagrangianDensity(PLAIN, y_x),
                                       SigmaConnection(C, {}, {}))


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_factored_shape_decides_constraint(seed):
    rng = random.Random(seed)
    c = samples.chart(rng)
    a = samples.sigma_connection(rng, c, degree=1)
    assert factored_lagrangian_constraint(samples.factored_lagrangian(rng, a), a).satisfied
    assert not factored_lagrangian_constraint(samples.generic_lagrangian(rng, a), a).satisfied


# --------------------------------------------------------------------------- adapted momenta

def P(lam, i):
    return sp.Symbol(momentum_name(lam, i))


def test_adapted_momenta_examples():
    flat = SigmaConnection(C, {}, {})
    momenta = {("x", "y"): 3, ("x", "s"): 1}
    assert adapted_momenta(flat, momenta) == {("x", "y"): 3, ("x", "s"): 1}
    a = SigmaConnection(C, {}, {("y", "s"): 2})
    assert adapted_momenta(a, momenta)[("x", "s")] == 7
    assert adapted_momenta(a, {("x", "y"): 0, ("x", "s"): 4})[("x", "s")] == 4


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_adapted_momenta_invertible(seed):
    rng = random.Random(seed)
    c = samples.chart(rng)
    a = samples.sigma_connection(rng, c)
    momenta = {(lam, i): P(lam, i) for lam in c.base for i in c.vertical()}
    back = unbar_momenta(a, adapted_momenta(a, momenta))
    assert all(symexpr.is_zero(back[k] - momenta[k]) for k in momenta)
    forth = adapted_momenta(a, unbar_momenta(a, momenta))
    assert all(symexpr.is_zero(forth[k] - momenta[k]) for k in momenta)


def test_restricted_legendre_bundle_sits_on_zero_barred_momenta():
    a = SigmaConnection(C, {}, {("y", "s"): s * y})
    h = Section(C, "sigma", {"s": x**2})
    image = embed_restricted_legendre(a, h)
    assert image["s"] == x**2
    momenta = {("x", "y"): image["p_x_y"], ("x", "s"): image["p_x_s"]}
    barred = adapted_momenta(a, momenta)
    assert symexpr.is_zero(symexpr.subst(barred[("x", "s")], {"s": x**2}))


# --------------------------------------------------------------------------- lift and Hamiltonicity

def lift(gamma_coef=0, K=None, base=("x",)):
    chart = CompositeChart(base, (), ("y",))
    gamma = Connection.on(chart, "y", {("y", base[0]): gamma_coef})
    return lift_to_legendre(gamma, K or SymmetricConnection(base, {}))


def test_lift_of_zero_is_zero():
    assert lift()[("p_x_y", "x")] == 0


def test_lift_linear_gamma():
    assert lift(y)[("p_x_y", "x")] == -P("x", "y")


def test_lift_k_terms_cancel_in_one_dimension():
    K = SymmetricConnection(("x",), {("x", "x", "x"): x})
    assert lift(0, K)[("p_x_y", "x")] == 0


def test_lift_is_hamiltonian_by_hand():
    assert hamiltonian_check(lift(y)).is_zero()


def test_zero_connection_is_hamiltonian():
    assert hamiltonian_check(lift()).is_zero()


def test_quadratic_momentum_coefficient_is_not_hamiltonian():
    lc = LegendreChart(PLAIN)
    gamma = Connection(("x",), lc.fibre(), {("p_x_y", "x"): P("x", "y") ** 2}, lc.coords())
    residual = hamiltonian_check(gamma, lc)
    assert not residual.is_zero()


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_lift_is_always_hamiltonian(seed):
    rng = random.Random(seed)
    n, m = rng.randint(1, 2), rng.randint(1, 2)
    base = tuple(f"x{k}" for k in range(1, n + 1))
    fibre = tuple(f"y{k}" for k in range(1, m + 1))
    gamma = samples.connection(rng, base, fibre, base + fibre)
    K = samples.symmetric_connection(rng, base)
    lc = LegendreChart(CompositeChart(base, (), fibre))
    assert hamiltonian_check(lift_to_legendre(gamma, K), lc).is_zero()
