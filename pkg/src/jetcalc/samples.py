"""Seeded random objects for property checks: polynomials, sections,
connections, tetrads, Lagrangians."""
from __future__ import annotations

import itertools
import random
from typing import Sequence

import sympy as sp

from .bundle import CompositeChart, Section, jet_name
from .exterior import Form
from .connection import Connection, LinearConnection, SigmaConnection, SymmetricConnection
from .legendre import LagrangianDensity
from .spinor import BASE as WORLD_BASE, DIM, Tetrad


def polynomial(rng: random.Random, names: Sequence[str], degree: int = 2, terms: int = 3,
               coef_range: int = 3) -> sp.Expr:
    """Sparse polynomial with small integer coefficients."""
    syms = [sp.Symbol(n) for n in names]
    out = sp.S.Zero
    for _ in range(terms):
        c = rng.randint(-coef_range, coef_range)
        if c == 0:
            continue
        mono = sp.S.One
        for _ in range(rng.randint(0, degree)):
            if syms:
                mono *= rng.choice(syms)
        out += c * mono
    return sp.expand(out)


def form(rng: random.Random, coords: Sequence[str], degree: int, terms: int = 3,
         coef_degree: int = 2) -> Form:
    """Random form with polynomial coefficients over ``coords``."""
    out = {}
    for _ in range(terms):
        key = tuple(sorted(rng.sample(range(len(coords)), degree)))
        out[key] = polynomial(rng, coords, coef_degree, terms=2)
    return Form(coords, degree, out)


def chart(rng: random.Random, max_base=2, max_middle=2, max_fibre=2, min_middle=1) -> CompositeChart:
    n = rng.randint(1, max_base)
    k = rng.randint(min_middle, max_middle)
    m = rng.randint(1, max_fibre)
    return CompositeChart(tuple(f"x{i}" for i in range(1, n + 1)),
                          tuple(f"s{i}" for i in range(1, k + 1)),
                          tuple(f"y{i}" for i in range(1, m + 1)))


def sigma_section(rng: random.Random, c: CompositeChart, degree: int = 2) -> Section:
    return Section(c, "sigma", {m: polynomial(rng, c.base, degree) for m in c.middle})


def ysigma_section(rng: random.Random, c: CompositeChart, degree: int = 2) -> Section:
    return Section(c, "ysigma", {i: polynomial(rng, c.sigma_coords(), degree) for i in c.fibre})


def sigma_connection(rng: random.Random, c: CompositeChart, degree: int = 2) -> SigmaConnection:
    src = c.y_coords()
    tilde = {(i, lam): polynomial(rng, src, degree) for i in c.fibre for lam in c.base}
    vert = {(i, m): polynomial(rng, src, degree) for i in c.fibre for m in c.middle}
    return SigmaConnection(c, tilde, vert)


def connection(rng: random.Random, base, fibre, coords, degree: int = 2) -> Connection:
    return Connection(base, fibre, {(i, lam): polynomial(rng, coords, degree)
                                    for i in fibre for lam in base}, coords)


def affine_integral_pair(rng: random.Random, c: CompositeChart) -> tuple[Connection, Section]:
    """Γ on Σ with an integral section h.

    ``h`` is a random quadratic and ``Γ^m_λ = ∂_λ h^m + (σ^m - h^m(x)) q^m_λ``
    with random linear ``q``, so Γ∘h = J¹h while Γ still depends on σ.
    """
    h_vals, coeffs = {}, {}
    for m in c.middle:
        h_vals[m] = polynomial(rng, c.base, 2, terms=3)
    for m in c.middle:
        for lam in c.base:
            q = polynomial(rng, c.sigma_coords(), 1, terms=2)
            coeffs[(m, lam)] = sp.expand(sp.diff(h_vals[m], sp.Symbol(lam))
                                         + (sp.Symbol(m) - h_vals[m]) * q)
    gamma = Connection.on(c, "sigma", coeffs)
    return gamma, Section(c, "sigma", h_vals)


def linear_connection(rng: random.Random, c: CompositeChart, gamma=None, degree: int = 2
                      ) -> LinearConnection:
    src = c.sigma_coords()
    if gamma is None:
        gamma = {(m, lam): polynomial(rng, src, degree) for m in c.middle for lam in c.base}
    matrix = {(i, j, lam): polynomial(rng, src, degree)
              for i in c.fibre for j in c.fibre for lam in c.base}
    return LinearConnection(c, gamma, matrix)


def symmetric_connection(rng: random.Random, base, degree: int = 1) -> SymmetricConnection:
    coeffs = {}
    for mu in base:
        for nu, lam in itertools.combinations_with_replacement(base, 2):
            coeffs[(mu, nu, lam)] = polynomial(rng, base, degree, terms=2)
    return SymmetricConnection(tuple(base), coeffs)


def world_symmetric(rng: random.Random, degree: int = 1, density: float = 0.15) -> dict:
    """Sparse symmetric ``K^μ_{νλ}`` on the world chart keyed by integers."""
    K = {}
    for mu in range(DIM):
        for nu, lam in itertools.combinations_with_replacement(range(DIM), 2):
            if rng.random() < density:
                v = polynomial(rng, WORLD_BASE, degree, terms=2)
                K[(mu, nu, lam)] = v
                K[(mu, lam, nu)] = v
    return K


def tetrad(rng: random.Random, fill: int = 3, degree: int = 2) -> Tetrad:
    """``D·L·U`` with unit triangular polynomial factors: constant nonzero determinant."""
    lower = sp.eye(DIM)
    upper = sp.eye(DIM)
    slots = [(i, j) for i in range(DIM) for j in range(DIM) if i != j]
    for i, j in rng.sample(slots, fill):
        target = lower if i > j else upper
        target[i, j] = polynomial(rng, WORLD_BASE, degree, terms=2)
    diag = sp.diag(*[rng.choice([1, 2, -1, sp.Rational(1, 2)]) for _ in range(DIM)])
    return Tetrad((diag * lower * upper).applyfunc(sp.expand))


def factored_lagrangian(rng: random.Random, a_sigma: SigmaConnection, degree: int = 2
                        ) -> LagrangianDensity:
    """ℒ = F(D̃) with random polynomial F of the D̃ components (and Y coordinates)."""
    c = a_sigma.chart
    comps = []
    for i in c.fibre:
        for lam in c.base:
            comps.append(sp.Symbol(jet_name(i, lam)) - a_sigma.tilde[(i, lam)] - sum(
                (a_sigma.vert[(i, m)] * sp.Symbol(jet_name(m, lam)) for m in c.middle),
                sp.S.Zero))
    placeholders = [sp.Symbol(f"_D{k}") for k in range(len(comps))]
    F = polynomial(rng, [p.name for p in placeholders] + list(c.y_coords()), degree, terms=4)
    while not (F.free_symbols & set(placeholders)):
        F = polynomial(rng, [p.name for p in placeholders] + list(c.y_coords()), degree, terms=4)
    density = sp.expand(F.xreplace(dict(zip(placeholders, comps))))
    return LagrangianDensity(c, density)


def generic_lagrangian(rng: random.Random, a_sigma: SigmaConnection, degree: int = 2
                       ) -> LagrangianDensity:
    """A factored ℒ plus a bare σ-velocity term, so it is not of the factored shape."""
    c = a_sigma.chart
    base = factored_lagrangian(rng, a_sigma, degree).density
    velocity = sp.Symbol(jet_name(rng.choice(c.middle), rng.choice(c.base)))
    weight = rng.choice([1, 2, -1, 3])
    return LagrangianDensity(c, sp.expand(base + weight * velocity ** 2))
