import random

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from jetcalc import samples, symexpr
from jetcalc.bundle import CompositeChart, JetPoint, Section, restrict_to_section
from jetcalc.connection import (Connection, LinearConnection, NonLinearError, SigmaConnection,
                                SymmetricConnection, characterizing_form, composite_connection,
                                covariant_differential, covertical_splitting_project,
                                dual_connection, integrality_residuals, is_integral_section,
                                linear_equal, pairing, pairing_derivative, reduce_connection,
                                restrict_connection, tensor_connection,
                                vertical_covariant_differential,
                                vertical_covariant_differential_via, vertical_lift,
                                vertical_splitting_project)
from jetcalc.exterior import ChartMismatchError, Form, VectorField, volume_form

x, s, y = sp.symbols("x s y")
PLAIN = CompositeChart(("x",), (), ("y",))
C = CompositeChart(("x",), ("s",), ("y",))
seeds = st.integers(0, 2**32)


def jet(chart, **values):
    coords = chart.j1y_coords()
    return JetPoint(coords, {k: values.get(k, sp.Symbol(k)) for k in coords})


def sigma_conn(tilde=0, vert=0, chart=C):
    return SigmaConnection(chart, {("y", "x"): tilde}, {("y", "s"): vert})


# --------------------------------------------------------------------------- D_Γ

def test_covariant_differential_examples():
    zero = Connection.on(PLAIN, "y", {})
    assert covariant_differential(zero, jet(PLAIN, x=0, y=0, y_x=5))[("y", "x")] == 5
    growth = Connection.on(PLAIN, "y", {("y", "x"): y})
    assert covariant_differential(growth, jet(PLAIN, x=0, y=2, y_x=2))[("y", "x")] == 0
    drift = Connection.on(PLAIN, "y", {("y", "x"): x})
    assert covariant_differential(drift, jet(PLAIN, x=1, y=0, y_x=3))[("y", "x")] == 2


def test_soldering_forms_act_affinely():
    a = Connection.on(PLAIN, "y", {("y", "x"): y})
    b = a.add_soldering({("y", "x"): x * y})
    assert symexpr.equal(b.difference(a)[("y", "x")], x * y)
    assert not a.equals(b)


def test_connection_coefficients_are_bound_to_the_chart():
    with pytest.raises(symexpr.UnknownCoordinateError):
        Connection.on(C, "sigma", {("s", "x"): y})


# --------------------------------------------------------------------------- composite / reduce

def gamma_sigma(coef):
    return Connection.on(C, "sigma", {("s", "x"): coef})


def test_composite_examples():
    a = composite_connection(sigma_conn(0, 1), gamma_sigma(2))
    assert a[("y", "x")] == 2
    assert composite_connection(sigma_conn(x * y, 3), gamma_sigma(0))[("y", "x")] == x * y
    assert composite_connection(sigma_conn(1, s), gamma_sigma(x))[("y", "x")] == s * x + 1
    assert a[("s", "x")] == 2


def test_composite_needs_matching_gamma():
    with pytest.raises(ChartMismatchError):
        composite_connection(sigma_conn(0, 1), Connection.on(PLAIN, "y", {}))


def test_reduce_examples():
    constant = Section(C, "sigma", {"s": 3})
    assert reduce_connection(sigma_conn(s * y, 5), constant)[("y", "x")] == 3 * y
    quadratic = Section(C, "sigma", {"s": x**2})
    assert reduce_connection(sigma_conn(0, 1), quadratic)[("y", "x")] == 2 * x


def test_reduction_agrees_on_exponential_integral_section():
    gamma = gamma_sigma(s)
    h = Section(C, "sigma", {"s": sp.exp(x)})
    a_sigma = sigma_conn(x * y, s * y + 1)
    assert is_integral_section(gamma, h)
    restricted = restrict_connection(C, composite_connection(a_sigma, gamma), h)
    assert restricted.equals(reduce_connection(a_sigma, h))


def test_reduction_disagrees_off_integral_sections():
    gamma, h = gamma_sigma(s), Section(C, "sigma", {"s": x})
    a_sigma = sigma_conn(y, 2)
    assert not is_integral_section(gamma, h)
    assert [symexpr.normalize(r) for r in integrality_residuals(gamma, h)] == [1 - x]
    restricted = restrict_connection(C, composite_connection(a_sigma, gamma), h)
    assert not restricted.equals(reduce_connection(a_sigma, h))


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_reduction_coherence(seed):
    rng = random.Random(seed)
    c = samples.chart(rng)
    a_sigma = samples.sigma_connection(rng, c)
    gamma, h = samples.affine_integral_pair(rng, c)
    restricted = restrict_connection(c, composite_connection(a_sigma, gamma), h)
    assert restricted.equals(reduce_connection(a_sigma, h))


# --------------------------------------------------------------------------- splittings

COORDS = C.y_coords()


def vec(**kw):
    return VectorField(COORDS, kw)


def covec(**kw):
    return Form(COORDS, 1, {(k,): v for k, v in kw.items()})


def test_vertical_splitting_examples():
    a = sigma_conn(0, 2)
    first, second = vertical_splitting_project(a, vec(y=5))
    assert first.equals(vec(y=5)) and second.equals(vec())
    first, _ = vertical_splitting_project(a, vec(y=2, s=1))
    assert first.equals(vec())
    first, second = vertical_splitting_project(a, vec(y=5, s=1))
    assert first.equals(vec(y=3)) and second.equals(vec(s=1, y=2))


def test_covertical_splitting_examples():
    a = sigma_conn(0, 2)
    w = covec(s=4)
    assert covertical_splitting_project(a, w)[1].equals(w)
    annihilated = covertical_splitting_project(a, covec(y=1, s=-2))[1]
    assert annihilated.is_zero()
    first, second = covertical_splitting_project(a, covec(y=1, s=3))
    assert second[("s",)] == 5
    assert first.equals(covec(y=1, s=-2))


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_splittings_complete_idempotent_and_pairing(seed):
    rng = random.Random(seed)
    c = samples.chart(rng)
    a = samples.sigma_connection(rng, c)
    coords = c.y_coords()
    v = VectorField(coords, {k: samples.polynomial(rng, coords) for k in c.vertical()})
    w = Form(coords, 1, {(k,): samples.polynomial(rng, coords) for k in c.vertical()})
    v1, v2 = vertical_splitting_project(a, v)
    w1, w2 = covertical_splitting_project(a, w)
    assert (v1 + v2).equals(v)
    assert (w1 + w2).equals(w)
    assert all(v1[m] == 0 for m in c.middle)
    assert vertical_splitting_project(a, v1)[0].equals(v1)
    assert symexpr.is_zero(pairing(v1, w2)) and symexpr.is_zero(pairing(v2, w1))
    assert symexpr.is_zero(pairing(v, w) - pairing(v1, w1) - pairing(v2, w2))


# --------------------------------------------------------------------------- characterizing form

def test_characterizing_form_ignores_tilde():
    assert characterizing_form(sigma_conn(x, s)).equals(characterizing_form(sigma_conn(y**2, s)))


def test_characterizing_form_flat():
    form = characterizing_form(sigma_conn(x, 0))
    assert form.component("s").equals(Form.basis(COORDS, "x", "s"))
    assert form.component("y").is_zero()


def test_characterizing_form_single_coordinates():
    form = characterizing_form(sigma_conn(0, s))
    assert form.component("s").equals(Form.basis(COORDS, "x", "s"))
    assert form.component("y").equals(Form.basis(COORDS, "x", "s", coef=s))


# --------------------------------------------------------------------------- D̃

def test_vcd_vanishes_on_horizontal_jets():
    a = sigma_conn(x * y, s)
    horizontal = jet(C, y_x=x * y + s * sp.Symbol("s_x"))
    assert vertical_covariant_differential(a, horizontal)[("y", "x")] == 0


def test_vcd_substitution():
    p = jet(C, x=0, s=0, y=0, s_x=2, y_x=7)
    assert vertical_covariant_differential(sigma_conn(1, 2), p)[("y", "x")] == 2


def test_vcd_restricts_to_reduced_covariant_differential():
    a = sigma_conn(x * y, s + y)
    h = Section(C, "sigma", {"s": x**3})
    pinned = restrict_to_section(C, h, vertical_covariant_differential(a, jet(C)))
    reduced = covariant_differential(reduce_connection(a, h), jet(C.restricted()))
    assert symexpr.is_zero(pinned[("y", "x")] - reduced[("y", "x")])


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_vcd_is_independent_of_gamma(seed):
    rng = random.Random(seed)
    c = samples.chart(rng)
    a = samples.sigma_connection(rng, c)
    p = jet(c)
    direct = vertical_covariant_differential(a, p)
    for _ in range(2):
        gamma = samples.connection(rng, c.base, c.middle, c.sigma_coords())
        via = vertical_covariant_differential_via(a, gamma, p)
        assert all(symexpr.is_zero(direct[k] - via[k]) for k in direct)


# --------------------------------------------------------------------------- linear constructions

L1 = CompositeChart(("x",), ("s",), ("y",))


def test_linear_rejects_fibre_dependence():
    with pytest.raises(NonLinearError):
        LinearConnection(L1, {}, {("y", "y", "x"): y})


def test_dual_transposes_and_negates():
    c = sp.Symbol("c")
    chart = CompositeChart(("x",), ("s", "c"), ("y",))
    dual = dual_connection(LinearConnection(chart, {}, {("y", "y", "x"): c}))
    assert dual.fibre_coefficient("yd", "x") == -c * sp.Symbol("yd")


def test_dual_of_zero_is_zero():
    dual = dual_connection(LinearConnection(L1, {("s", "x"): s}, {}))
    assert all(v == 0 for v in dual.matrix.values())
    assert dual.gamma[("s", "x")] == s


def test_dual_rejects_nonlinear():
    with pytest.raises(NonLinearError):
        dual_connection(Connection.on(L1, "y", {}))


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_pairing_is_parallel(seed):
    rng = random.Random(seed)
    a = samples.linear_connection(rng, samples.chart(rng))
    assert all(symexpr.is_zero(v) for v in pairing_derivative(a, dual_connection(a)).values())


def test_pairing_derivative_by_hand():
    # d_x(y yd) with ∂_x y = a y and ∂_x yd = -a yd vanishes
    a = LinearConnection(L1, {}, {("y", "y", "x"): x * s})
    assert pairing_derivative(a, dual_connection(a)) == {"x": 0}


def test_tensor_one_sided():
    two = CompositeChart(("x",), ("s",), ("y1", "y2"))
    other = CompositeChart(("x",), ("s",), ("z",))
    a = LinearConnection(two, {}, {("y1", "y2", "x"): s})
    t = tensor_connection(a, LinearConnection(other, {}, {}))
    assert t.fibre_coefficient("y1z", "x") == s * sp.Symbol("y2z")


def test_tensor_of_scalars_adds():
    a_, b_ = sp.symbols("a b")
    chart = CompositeChart(("x",), ("a", "b"), ("y",))
    other = CompositeChart(("x",), ("a", "b"), ("z",))
    t = tensor_connection(LinearConnection(chart, {}, {("y", "y", "x"): a_}),
                          LinearConnection(other, {}, {("z", "z", "x"): b_}))
    assert symexpr.equal(t.fibre_coefficient("yz", "x"), (a_ + b_) * sp.Symbol("yz"))


def test_tensor_leibniz_on_unit_vectors():
    rng = random.Random(11)
    two = CompositeChart(("x",), ("s",), ("y1", "y2"))
    other = CompositeChart(("x",), ("s",), ("z1", "z2"))
    a = samples.linear_connection(rng, two)
    b = samples.linear_connection(rng, other, gamma=dict(a.gamma))
    t = tensor_connection(a, b)
    u, v = {"y1": 1, "y2": 0}, {"z1": 0, "z2": 1}
    point = {f"{i}{k}": u[i] * v[k] for i in u for k in v}
    for i in u:
        for k in v:
            coef = symexpr.subst(t.fibre_coefficient(f"{i}{k}", "x"), point)
            au = sum(a.matrix[(i, j, "x")] * u[j] for j in u)
            bv = sum(b.matrix[(k, l, "x")] * v[l] for l in v)
            assert symexpr.is_zero(coef - au * v[k] - u[i] * bv)


def test_tensor_needs_same_gamma():
    other = CompositeChart(("x",), ("s",), ("z",))
    with pytest.raises(ChartMismatchError):
        tensor_connection(LinearConnection(L1, {("s", "x"): 1}, {}),
                          LinearConnection(other, {("s", "x"): 2}, {}))


def test_vertical_lift_examples():
    zero_v, _ = vertical_lift(Connection.on(PLAIN, "y", {}))
    assert all(v == 0 for v in zero_v.matrix.values())
    v_gamma, _ = vertical_lift(Connection.on(PLAIN, "y", {("y", "x"): y**2}))
    assert v_gamma.fibre_coefficient("vy", "x") == 2 * y * sp.Symbol("vy")


def test_dual_of_vertical_lift_is_covertical_lift():
    v_gamma, w_gamma = vertical_lift(Connection.on(PLAIN, "y", {("y", "x"): sp.sin(y)}))
    assert linear_equal(dual_connection(v_gamma, w_gamma.chart), w_gamma)


# --------------------------------------------------------------------------- symmetric

def test_symmetric_fills_partner_and_rejects_asymmetry():
    base = ("x", "t")
    K = SymmetricConnection(base, {("x", "x", "t"): x})
    assert K[("x", "t", "x")] == x
    with pytest.raises(ValueError):
        SymmetricConnection(base, {("x", "x", "t"): x, ("x", "t", "x"): 2 * x})
    assert K.trace("t") == x
