"""Clifford algebra, tetrads and Dirac operators on composite spinor bundles.

The world chart is fixed: base ``x0..x3``, frame coordinates ``s<μ><a>``
for σ^μ_a, spinor components ``y0..y3``.  Frame indices are integers 0..3.
Matrices are exact :class:`sympy.Matrix` objects in the Dirac basis with
η = diag(+1, -1, -1, -1).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import sympy as sp

from . import symexpr
from .bundle import jet_name
from .exterior import Form, TangentValuedForm, volume_form

DIM = 4
BASE = tuple(f"x{l}" for l in range(DIM))
SPINOR = tuple(f"y{A}" for A in range(DIM))
FRAME = tuple(tuple(f"s{mu}{a}" for a in range(DIM)) for mu in range(DIM))


class SignatureError(ValueError):
    pass


class SingularFrameError(ValueError):
    pass


def frame_name(mu: int, a: int) -> str:
    return FRAME[mu][a]


def frame_jet_name(mu: int, a: int, lam: int) -> str:
    return jet_name(FRAME[mu][a], BASE[lam])


def spinor_jet_name(A: int, lam: int) -> str:
    return jet_name(SPINOR[A], BASE[lam])


def world_coords() -> tuple[str, ...]:
    """Coordinates ``(x^λ, σ^μ_a, y^A)`` of the composite spinor bundle."""
    return BASE + tuple(FRAME[mu][a] for mu in range(DIM) for a in range(DIM)) + SPINOR


# --------------------------------------------------------------------------- Clifford

def _commutator(a, b):
    return a * b - b * a


@dataclass(frozen=True)
class CliffordModel:
    eta: sp.Matrix
    gammas: tuple[sp.Matrix, ...]

    @cached_property
    def lower(self) -> tuple[sp.Matrix, ...]:
        """γ_a = η_ab γ^b."""
        return tuple(sum((self.eta[a, b] * self.gammas[b] for b in range(DIM)), sp.zeros(DIM))
                     for a in range(DIM))

    @cached_property
    def generators(self) -> dict[tuple[int, int], sp.Matrix]:
        """``I_ab = ¼[γ_a, γ_b]`` for all ordered pairs."""
        return {(a, b): _commutator(self.lower[a], self.lower[b]) / 4
                for a in range(DIM) for b in range(DIM)}

    def identity(self) -> sp.Matrix:
        return sp.eye(DIM)

    def clifford_residuals(self):
        """``γ^aγ^b + γ^bγ^a - 2η^{ab}`` for every pair."""
        for a, b in itertools.product(range(DIM), repeat=2):
            yield (a, b), (self.gammas[a] * self.gammas[b] + self.gammas[b] * self.gammas[a]
                           - 2 * self.eta[a, b] * sp.eye(DIM))

    def lorentz_residuals(self):
        """``[I_ab, γ_c] - (η_bc γ_a - η_ac γ_b)`` for a < b."""
        for a, b in itertools.combinations(range(DIM), 2):
            for c in range(DIM):
                lhs = _commutator(self.generators[(a, b)], self.lower[c])
                rhs = self.eta[b, c] * self.lower[a] - self.eta[a, c] * self.lower[b]
                yield (a, b, c), lhs - rhs


PAULI = (
    sp.Matrix([[0, 1], [1, 0]]),
    sp.Matrix([[0, -sp.I], [sp.I, 0]]),
    sp.Matrix([[1, 0], [0, -1]]),
)


def build_clifford(signature="+---") -> CliffordModel:
    """γ-matrices in the Dirac basis for η = diag(+1, -1, -1, -1)."""
    if isinstance(signature, (tuple, list)):
        signature = "".join("+" if s > 0 else "-" for s in signature)
    if signature != "+---":
        raise SignatureError(f"unsupported signature {signature!r}; only '+---' is provided")
    eta = sp.diag(1, -1, -1, -1)
    z2, i2 = sp.zeros(2), sp.eye(2)
    g0 = sp.diag(i2, -i2)
    gk = [sp.Matrix(sp.BlockMatrix([[z2, s], [-s, z2]])) for s in PAULI]
    return CliffordModel(eta, (g0, *gk))


# --------------------------------------------------------------------------- tetrads

def inverse_matrix(m: sp.Matrix) -> sp.Matrix:
    """Exact inverse through the adjugate, entries normalized."""
    det = sp.expand(m.det(method="berkowitz"))
    if symexpr.is_zero(det):
        raise SingularFrameError("frame matrix is singular")
    adj = m.adjugate(method="berkowitz")
    if det.is_number:
        return adj.applyfunc(lambda e: sp.expand(e / det))
    return adj.applyfunc(lambda e: symexpr.normalize(e / det))


@dataclass(frozen=True)
class Tetrad:
    """Tetrad functions ``h^λ_a(x)``; row λ, column a."""
    matrix: sp.Matrix

    def __post_init__(self):
        m = sp.Matrix(self.matrix)
        if m.shape != (DIM, DIM):
            raise ValueError("a tetrad is a 4x4 matrix")
        for e in m:
            symexpr.check_bound(e, BASE)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "Tetrad":
        return cls(sp.eye(DIM))

    @classmethod
    def from_entries(cls, entries: Mapping[tuple[int, int], object]) -> "Tetrad":
        m = sp.eye(DIM)
        for (lam, a), v in entries.items():
            m[lam, a] = sp.sympify(v)
        return cls(m)

    @cached_property
    def inverse(self) -> sp.Matrix:
        """``h^a_λ``; row a, column λ."""
        return inverse_matrix(self.matrix)

    def check_invertible_at(self, point: Mapping[str, object]) -> None:
        det = self.matrix.det(method="berkowitz")
        if abs(complex(symexpr.evaluate(det, point))) == 0:
            raise SingularFrameError("tetrad is singular at the requested point")

    def metric(self, model: CliffordModel) -> sp.Matrix:
        """``g^{λμ} = h^λ_a h^μ_b η^{ab}``."""
        return (self.matrix * model.eta * self.matrix.T).applyfunc(sp.expand)

    def derivative(self, lam: int) -> sp.Matrix:
        return self.matrix.applyfunc(lambda e: symexpr.diff(e, BASE[lam]))


def gamma_h(h: Tetrad, lam: int, model: CliffordModel | None = None,
            at: Mapping[str, object] | None = None) -> sp.Matrix:
    """``γ_h(dx^λ) = h^λ_a γ^a``."""
    model = model or build_clifford()
    if at is not None:
        h.check_invertible_at(at)
    out = sp.zeros(DIM)
    for a in range(DIM):
        out += h.matrix[lam, a] * model.gammas[a]
    out = out.applyfunc(sp.expand)
    if at is not None:
        out = out.applyfunc(lambda e: symexpr.subst(e, at))
    return out


# --------------------------------------------------------------------------- spin connections

def spinor_matrix(coeffs, model: CliffordModel) -> sp.Matrix:
    """``c^{ab} I_ab`` summed over all ordered pairs."""
    out = sp.zeros(DIM)
    for a, b in itertools.product(range(DIM), repeat=2):
        c = coeffs[a][b] if not isinstance(coeffs, Mapping) else coeffs.get((a, b), 0)
        if c != 0:
            out += c * model.generators[(a, b)]
    return out


@dataclass(frozen=True)
class SpinConnectionCoefficients:
    """``Ã^{ab}_μ`` (keyed ``(a, b, μ)``) and ``A^{ab}{}^c_μ`` (keyed ``(a, b, c, μ)``)."""
    tilde: Mapping[tuple[int, int, int], sp.Expr]
    vert: Mapping[tuple[int, int, int, int], sp.Expr]


def _frame_matrix(sigma) -> sp.Matrix:
    m = sp.Matrix(sigma)
    if m.shape != (DIM, DIM):
        raise ValueError("σ^μ_a is a 4x4 matrix")
    return m


def spin_connection_coeffs(K, sigma, model: CliffordModel | None = None,
                           sigma_inverse: sp.Matrix | None = None) -> SpinConnectionCoefficients:
    """Coefficients of the connection form on LX_Σ at the frame ``σ^μ_a``.

    ``Ã^{ab}_μ = ½ K^ν_{λμ} σ^λ_c (η^{cb} σ^a_ν - η^{ca} σ^b_ν)`` and
    ``A^{ab}{}^c_μ = ½ (η^{cb} σ^a_μ - η^{ca} σ^b_μ)`` with σ^a_μ the inverse.
    ``K`` maps ``(μ, ν, λ)`` (integers) to expressions over x.
    """
    model = model or build_clifford()
    S = _frame_matrix(sigma)
    Sinv = sigma_inverse if sigma_inverse is not None else inverse_matrix(S)
    eta = model.eta
    half = sp.Rational(1, 2)
    vert = {}
    for a, b, c, mu in itertools.product(range(DIM), repeat=4):
        vert[(a, b, c, mu)] = half * (eta[c, b] * Sinv[a, mu] - eta[c, a] * Sinv[b, mu])
    tilde = {}
    for a, b, mu in itertools.product(range(DIM), repeat=3):
        acc = sp.S.Zero
        for nu, lam in itertools.product(range(DIM), repeat=2):
            k = K.get((nu, lam, mu), 0)
            if k == 0:
                continue
            for c in range(DIM):
                if S[lam, c] == 0:
                    continue
                acc += k * S[lam, c] * (eta[c, b] * Sinv[a, nu] - eta[c, a] * Sinv[b, nu])
        tilde[(a, b, mu)] = sp.expand(half * acc)
    return SpinConnectionCoefficients(tilde, vert)


def levi_civita_reduction(K, h: Tetrad, model: CliffordModel | None = None
                          ) -> dict[tuple[int, int, int], sp.Expr]:
    """``A_h^{ab}_μ = ½[K^ν_{λμ} h^λ_c + ∂_μ h^ν_c](η^{cb} h^a_ν - η^{ca} h^b_ν)``."""
    model = model or build_clifford()
    H, Hinv, eta = h.matrix, h.inverse, model.eta
    dH = [h.derivative(mu) for mu in range(DIM)]
    out = {}
    for a, b, mu in itertools.product(range(DIM), repeat=3):
        acc = sp.S.Zero
        for nu, c in itertools.product(range(DIM), repeat=2):
            weight = eta[c, b] * Hinv[a, nu] - eta[c, a] * Hinv[b, nu]
            if weight == 0:
                continue
            term = dH[mu][nu, c]
            for lam in range(DIM):
                k = K.get((nu, lam, mu), 0)
                if k != 0:
                    term += k * H[lam, c]
            acc += term * weight
        out[(a, b, mu)] = symexpr.normalize(acc / 2)
    return out


def reduce_spin_coefficients(coeffs: SpinConnectionCoefficients, h: Tetrad
                             ) -> dict[tuple[int, int, int], sp.Expr]:
    """Generic reduction ``Ã + A^{ab}{}^c_ν ∂_μ h^ν_c`` of coefficients already at σ = h."""
    dH = [h.derivative(mu) for mu in range(DIM)]
    out = {}
    for a, b, mu in itertools.product(range(DIM), repeat=3):
        acc = coeffs.tilde[(a, b, mu)]
        for c, nu in itertools.product(range(DIM), repeat=2):
            acc += coeffs.vert[(a, b, c, nu)] * dH[mu][nu, c]
        out[(a, b, mu)] = symexpr.normalize(acc)
    return out


@dataclass(frozen=True)
class SpinorSigmaConnection:
    """Connection on S_Σ: ``Ã^B_λ`` and ``A^B{}^c_μ`` as 4x4 matrices acting on y."""
    tilde: Mapping[int, sp.Matrix]
    vert: Mapping[tuple[int, int], sp.Matrix]


def spinor_connection(coeffs: SpinConnectionCoefficients, model: CliffordModel | None = None
                      ) -> SpinorSigmaConnection:
    """Spinor connection associated with the connection form: ``½ c^{ab} I_ab``."""
    model = model or build_clifford()
    half = sp.Rational(1, 2)
    tilde = {lam: (half * spinor_matrix({(a, b): coeffs.tilde[(a, b, lam)]
                                         for a in range(DIM) for b in range(DIM)}, model)
                   ).applyfunc(sp.expand)
             for lam in range(DIM)}
    vert = {(c, mu): (half * spinor_matrix({(a, b): coeffs.vert[(a, b, c, mu)]
                                            for a in range(DIM) for b in range(DIM)}, model)
                      ).applyfunc(sp.expand)
            for c in range(DIM) for mu in range(DIM)}
    return SpinorSigmaConnection(tilde, vert)


# --------------------------------------------------------------------------- Dirac operators

@dataclass(frozen=True)
class SpinorJet:
    """Spinor values ``y^A`` and derivatives ``y^A_λ`` (``dy[λ]`` is a 4-vector)."""
    y: sp.Matrix
    dy: Sequence[sp.Matrix]

    @classmethod
    def symbolic(cls) -> "SpinorJet":
        y = sp.Matrix([sp.Symbol(n) for n in SPINOR])
        dy = [sp.Matrix([sp.Symbol(spinor_jet_name(A, lam)) for A in range(DIM)])
              for lam in range(DIM)]
        return cls(y, dy)

    @classmethod
    def of_field(cls, psi: Sequence[object]) -> "SpinorJet":
        """Jet of a spinor field ψ^A(x)."""
        y = sp.Matrix([sp.sympify(p) for p in psi])
        dy = [y.applyfunc(lambda e: sp.diff(e, sp.Symbol(BASE[lam]))) for lam in range(DIM)]
        return cls(y, dy)


def dirac_operator(h: Tetrad, A: Mapping[tuple[int, int, int], object], jet: SpinorJet,
                   model: CliffordModel | None = None) -> sp.Matrix:
    """``h^λ_a γ^a (y_λ - A^{ab}_λ I_ab y)``."""
    model = model or build_clifford()
    out = sp.zeros(DIM, 1)
    for lam in range(DIM):
        conn = spinor_matrix({(a, b): A.get((a, b, lam), 0)
                              for a in range(DIM) for b in range(DIM)}, model)
        cov = jet.dy[lam] - conn * jet.y
        out += gamma_h(h, lam, model) * cov
    return out.applyfunc(sp.expand)


def total_dirac(conn: SpinorSigmaConnection, sigma, sigma_jet: Mapping[tuple[int, int, int], object],
                jet: SpinorJet, model: CliffordModel | None = None) -> sp.Matrix:
    """``σ^λ_a γ^a (y_λ - Ã_λ y - A^c_μ y σ^μ_{cλ})`` on J¹S.

    ``sigma_jet`` maps ``(μ, c, λ)`` to ``σ^μ_{cλ}``.
    """
    model = model or build_clifford()
    S = _frame_matrix(sigma)
    if symexpr.is_zero(S.det(method="berkowitz")):
        raise SingularFrameError("σ is singular")
    out = sp.zeros(DIM, 1)
    for lam in range(DIM):
        hat = sp.zeros(DIM)
        for a in range(DIM):
            hat += S[lam, a] * model.gammas[a]
        cov = jet.dy[lam] - conn.tilde[lam] * jet.y
        for mu, c in itertools.product(range(DIM), repeat=2):
            s = sp.sympify(sigma_jet.get((mu, c, lam), 0))
            if s != 0:
                cov -= s * (conn.vert[(c, mu)] * jet.y)
        out += hat * cov
    return out.applyfunc(sp.expand)


def pinned_frame_jet(h: Tetrad) -> dict[tuple[int, int, int], sp.Expr]:
    """``σ^μ_{aλ} = ∂_λ h^μ_a``."""
    return {(mu, a, lam): symexpr.diff(h.matrix[mu, a], BASE[lam])
            for mu, a, lam in itertools.product(range(DIM), repeat=3)}


def vertical_splitting_form_spinor(sigma, model: CliffordModel | None = None,
                                   sigma_inverse: sp.Matrix | None = None
                                   ) -> TangentValuedForm:
    """``ω∧dσ^μ_c ⊗ [∂^c_μ + ⅛ η^{cb} σ^a_μ [γ_a, γ_b]^B_A y^A ∂_B]``.

    Spinor directions carry complex coefficients; the form lives on the full
    world chart.
    """
    model = model or build_clifford()
    S = _frame_matrix(sigma)
    Sinv = sigma_inverse if sigma_inverse is not None else inverse_matrix(S)
    coords = world_coords()
    omega = volume_form(coords, BASE)
    y = sp.Matrix([sp.Symbol(n) for n in SPINOR])
    comps: dict[str, Form] = {}
    spinor_terms: dict[int, dict] = {B: {} for B in range(DIM)}
    for mu, c in itertools.product(range(DIM), repeat=2):
        leg = omega ^ Form.basis(coords, FRAME[mu][c])
        comps[FRAME[mu][c]] = leg
        mat = splitting_matrix(Sinv, c, mu, model)
        vec = (mat * y).applyfunc(sp.expand)
        for B in range(DIM):
            if vec[B] != 0:
                spinor_terms[B][BASE + (FRAME[mu][c],)] = vec[B]
    for B in range(DIM):
        comps[SPINOR[B]] = Form(coords, DIM + 1, spinor_terms[B])
    return TangentValuedForm(coords, comps)


def splitting_matrix(sigma_inverse: sp.Matrix, c: int, mu: int,
                     model: CliffordModel | None = None) -> sp.Matrix:
    """``⅛ η^{cb} σ^a_μ [γ_a, γ_b]``."""
    model = model or build_clifford()
    out = sp.zeros(DIM)
    for a, b in itertools.product(range(DIM), repeat=2):
        w = model.eta[c, b] * sigma_inverse[a, mu]
        if w != 0:
            out += w * _commutator(model.lower[a], model.lower[b])
    return (out / 8).applyfunc(sp.expand)


def symbolic_frame() -> sp.Matrix:
    return sp.Matrix(DIM, DIM, lambda mu, a: sp.Symbol(FRAME[mu][a]))
