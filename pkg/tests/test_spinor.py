import itertools
import random

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from jetcalc import samples, symexpr
from jetcalc.spinor import (BASE, DIM, FRAME, PAULI, SPINOR, SignatureError, SingularFrameError,
                            SpinorJet, Tetrad, build_clifford, dirac_operator, gamma_h,
                            levi_civita_reduction, pinned_frame_jet, reduce_spin_coefficients,
                            spin_connection_coeffs, spinor_connection, splitting_matrix,
                            total_dirac, vertical_splitting_form_spinor)

MODEL = build_clifford()
X = sp.symbols("x0:4")
seeds = st.integers(0, 2**32)
zero4 = sp.zeros(DIM)


def block(a, b, c, d):
    return sp.Matrix(sp.BlockMatrix([[a, b], [c, d]]))


# --------------------------------------------------------------------------- Clifford model

def test_gamma0_squares_to_identity():
    assert MODEL.gammas[0] ** 2 == sp.eye(DIM)


def test_distinct_gammas_anticommute():
    g = MODEL.gammas
    assert g[0] * g[1] + g[1] * g[0] == zero4


def test_clifford_and_lorentz_relations_exact():
    assert all(m == zero4 for _, m in MODEL.clifford_residuals())
    lorentz = list(MODEL.lorentz_residuals())
    assert len(lorentz) == 24
    assert all(m.applyfunc(sp.expand) == zero4 for _, m in lorentz)


def test_entries_are_units():
    allowed = {0, 1, -1, sp.I, -sp.I}
    assert all(e in allowed for g in MODEL.gammas for e in g)


def test_boost_generators_closed_form():
    z2 = sp.zeros(2)
    for k, sigma in enumerate(PAULI, start=1):
        expected = -block(z2, sigma, sigma, z2) / 2
        assert MODEL.generators[(0, k)] == expected


def test_rotation_generators_closed_form():
    z2 = sp.zeros(2)
    for j, k in itertools.combinations(range(1, 4), 2):
        l = 6 - j - k
        eps = sp.LeviCivita(j, k, l)
        sigma = PAULI[l - 1]
        expected = -sp.I * eps * block(sigma, z2, z2, sigma) / 2
        assert (MODEL.generators[(j, k)] - expected).applyfunc(sp.expand) == zero4


def test_generators_antisymmetric():
    for a, b in itertools.product(range(DIM), repeat=2):
        assert MODEL.generators[(a, b)] == -MODEL.generators[(b, a)]


def test_other_signatures_rejected():
    with pytest.raises(SignatureError):
        build_clifford("-+++")


# --------------------------------------------------------------------------- tetrads

def test_gamma_h_identity_and_scaling():
    assert gamma_h(Tetrad.identity(), 0) == MODEL.gammas[0]
    scaled = Tetrad.from_entries({(0, 0): 2})
    assert gamma_h(scaled, 0) == 2 * MODEL.gammas[0]


def test_gamma_h_singular_point():
    h = Tetrad.from_entries({(0, 0): X[1]})
    with pytest.raises(SingularFrameError):
        gamma_h(h, 0, at={n: 0 for n in BASE})


def test_singular_tetrad_has_no_inverse():
    with pytest.raises(SingularFrameError):
        Tetrad.from_entries({(1, 1): 0}).inverse


@given(seeds)
@settings(max_examples=8, deadline=None)
def test_induced_metric(seed):
    h = samples.tetrad(random.Random(seed))
    g = h.metric(MODEL)
    gam = [gamma_h(h, lam) for lam in range(DIM)]
    for lam, mu in itertools.combinations_with_replacement(range(DIM), 2):
        anti = gam[lam] * gam[mu] + gam[mu] * gam[lam] - 2 * g[lam, mu] * sp.eye(DIM)
        assert all(symexpr.is_zero(e) for e in anti)


@given(seeds)
@settings(max_examples=8, deadline=None)
def test_tetrad_inverse(seed):
    h = samples.tetrad(random.Random(seed))
    assert (h.matrix * h.inverse).applyfunc(symexpr.normalize) == sp.eye(DIM)


# --------------------------------------------------------------------------- Dirac operator

def constant_jet(values):
    return SpinorJet(sp.Matrix(values), [sp.zeros(DIM, 1) for _ in range(DIM)])


def test_flat_vacuum():
    assert dirac_operator(Tetrad.identity(), {}, constant_jet([1, 2, 3, 4])) == sp.zeros(DIM, 1)


@pytest.mark.parametrize("lam,b", [(0, 0), (1, 3), (2, 1), (3, 2)])
def test_spike_reads_gamma_column(lam, b):
    dy = [sp.zeros(DIM, 1) for _ in range(DIM)]
    dy[lam][b] = 1
    out = dirac_operator(Tetrad.identity(), {}, SpinorJet(sp.zeros(DIM, 1), dy))
    assert out == MODEL.gammas[lam][:, b]


def test_plane_wave():
    k = (2, -1, 3, sp.Rational(1, 2))
    v = sp.Matrix([1, sp.I, 0, 2])
    phase = sp.exp(sp.I * sum(kk * xx for kk, xx in zip(k, X)))
    out = dirac_operator(Tetrad.identity(), {}, SpinorJet.of_field(list(v * phase)))
    expected = sum((sp.I * k[l] * MODEL.gammas[l] for l in range(DIM)), zero4) * v * phase
    assert all(symexpr.is_zero(e) for e in out - expected)


# --------------------------------------------------------------------------- spin connection

def test_flat_k_gives_no_tilde():
    coeffs = spin_connection_coeffs({}, sp.eye(DIM))
    assert all(v == 0 for v in coeffs.tilde.values())


def test_vertical_coefficient_at_identity_frame():
    coeffs = spin_connection_coeffs({}, sp.eye(DIM))
    assert coeffs.vert[(0, 1, 0, 1)] == sp.Rational(-1, 2)


@given(seeds)
@settings(max_examples=5, deadline=None)
def test_spin_coefficients_antisymmetric(seed):
    rng = random.Random(seed)
    h, K = samples.tetrad(rng), samples.world_symmetric(rng)
    coeffs = spin_connection_coeffs(K, h.matrix, sigma_inverse=h.inverse)
    for (a, b, mu), v in coeffs.tilde.items():
        assert symexpr.is_zero(v + coeffs.tilde[(b, a, mu)])
    for (a, b, c, mu), v in coeffs.vert.items():
        assert symexpr.is_zero(v + coeffs.vert[(b, a, c, mu)])


def test_singular_frame():
    with pytest.raises(SingularFrameError):
        spin_connection_coeffs({}, sp.zeros(DIM))


def test_levi_civita_flat_frame():
    h = Tetrad(sp.diag(2, 1, 3, 1))
    assert all(v == 0 for v in levi_civita_reduction({}, h).values())


def test_levi_civita_pure_time_dilation():
    # only ∂_0 h^0_0 = e^x0 survives, and it pairs with h^a_0 which is nonzero only for a = 0,
    # where the antisymmetric bracket cancels
    h = Tetrad.from_entries({(0, 0): sp.exp(X[0])})
    assert all(symexpr.is_zero(v) for v in levi_civita_reduction({}, h).values())


def test_levi_civita_by_hand():
    # h^1_0 = x1 leaves ∂_1 h^1_0 = 1 as the only derivative and h^1_1 = 1 in the inverse, so
    # A^{01}_1 = ½ (η^{01} h^0_1 - η^{00} h^1_1) = -½
    h = Tetrad.from_entries({(1, 0): X[1]})
    reduced = levi_civita_reduction({}, h)
    assert reduced[(0, 1, 1)] == sp.Rational(-1, 2)
    assert reduced[(1, 0, 1)] == sp.Rational(1, 2)


@given(seeds)
@settings(max_examples=4, deadline=None)
def test_levi_civita_is_generic_reduction(seed):
    rng = random.Random(seed)
    h, K = samples.tetrad(rng), samples.world_symmetric(rng)
    coeffs = spin_connection_coeffs(K, h.matrix, sigma_inverse=h.inverse)
    generic = reduce_spin_coefficients(coeffs, h)
    direct = levi_civita_reduction(K, h)
    assert all(symexpr.is_zero(generic[k] - direct[k]) for k in direct)


# --------------------------------------------------------------------------- total Dirac operator

def flat_connection():
    return spinor_connection(spin_connection_coeffs({}, sp.eye(DIM)))


def test_total_dirac_flat_constant():
    out = total_dirac(flat_connection(), sp.eye(DIM), {}, constant_jet([1, 0, 2, 0]))
    assert out == sp.zeros(DIM, 1)


def test_total_dirac_scaled_frame_spike():
    dy = [sp.zeros(DIM, 1) for _ in range(DIM)]
    dy[0][0] = 1
    sigma = sp.diag(2, 1, 1, 1)
    out = total_dirac(flat_connection(), sigma, {}, SpinorJet(sp.zeros(DIM, 1), dy))
    assert out == 2 * MODEL.gammas[0][:, 0]


def test_total_dirac_singular_frame():
    with pytest.raises(SingularFrameError):
        total_dirac(flat_connection(), sp.zeros(DIM), {}, SpinorJet.symbolic())


def restriction_residual(h, K):
    jet = SpinorJet.symbolic()
    coeffs = spin_connection_coeffs(K, h.matrix, sigma_inverse=h.inverse)
    lhs = total_dirac(spinor_connection(coeffs), h.matrix, pinned_frame_jet(h), jet)
    reduced = levi_civita_reduction(K, h)
    rhs = dirac_operator(h, {k: v / 2 for k, v in reduced.items()}, jet)
    return lhs - rhs


def test_restriction_identity_tetrad():
    assert restriction_residual(Tetrad.identity(), {}) == sp.zeros(DIM, 1)


@given(seeds)
@settings(max_examples=3, deadline=None)
def test_restriction_random_tetrad(seed):
    rng = random.Random(seed)
    residual = restriction_residual(samples.tetrad(rng), samples.world_symmetric(rng))
    assert all(symexpr.is_zero(e) for e in residual)


# --------------------------------------------------------------------------- splitting form

def test_splitting_matrix_equals_half_vertical_coefficient():
    rng = random.Random(5)
    h = samples.tetrad(rng)
    coeffs = spin_connection_coeffs({}, h.matrix, sigma_inverse=h.inverse)
    conn = spinor_connection(coeffs)
    for c, mu in itertools.product(range(DIM), repeat=2):
        diff = splitting_matrix(h.inverse, c, mu) - conn.vert[(c, mu)]
        assert all(symexpr.is_zero(e) for e in diff)


def test_splitting_component_at_identity_frame():
    # (μ, c) = (0, 1): ⅛ η^{11} [γ_0, γ_1] = -½ I_01 = ¼ [[0, σ1], [σ1, 0]]
    z2 = sp.zeros(2)
    expected = block(z2, PAULI[0], PAULI[0], z2) / 4
    assert splitting_matrix(sp.eye(DIM), 1, 0) == expected
    form = vertical_splitting_form_spinor(sp.eye(DIM))
    y = sp.Matrix([sp.Symbol(n) for n in SPINOR])
    leg = BASE + (FRAME[0][1],)
    for B in range(DIM):
        assert symexpr.equal(form.component(SPINOR[B])[leg], (expected * y)[B])


def test_splitting_form_without_spinor_is_pure_frame_part():
    form = vertical_splitting_form_spinor(sp.eye(DIM))
    at_zero = {n: 0 for n in SPINOR}
    for B in range(DIM):
        assert all(symexpr.subst(v, at_zero) == 0 for v in form.component(SPINOR[B]).terms.values())
    assert form.component(FRAME[2][3])[BASE + (FRAME[2][3],)] == 1
