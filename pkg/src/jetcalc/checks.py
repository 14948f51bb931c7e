"""The verification catalog run by scenario files.

Every check gathers residual expressions that must vanish.  A residual list
that normalizes to zero passes; one that does not is re-examined numerically
only when transcendental atoms may be hiding a zero, otherwise it fails.
"""
from __future__ import annotations

import difflib
import itertools
import time
from dataclasses import dataclass
from typing import Any, Callable

import sympy as sp

from . import symexpr
from .bundle import (CompositeChart, JetPoint, Section, compose_sections, jet_of,
                     restrict_to_section, rho)
from .connection import (Connection, LinearConnection, SigmaConnection, SymmetricConnection,
                         characterizing_form, composite_connection, covariant_differential,
                         covertical_splitting_project, dual_connection, pairing,
                         pairing_derivative, reduce_connection, restrict_connection,
                         tensor_connection, vertical_covariant_differential,
                         vertical_covariant_differential_via, vertical_splitting_project)
from .exterior import Form, VectorField
from .legendre import (LegendreChart, factored_lagrangian_constraint, hamiltonian_check,
                       lift_to_legendre)
from .scenario import CheckDirective, Scenario
from .spinor import (DIM, SPINOR, SpinorJet, Tetrad, build_clifford, dirac_operator, gamma_h,
                     levi_civita_reduction, pinned_frame_jet, spin_connection_coeffs,
                     spinor_connection, spinor_jet_name, total_dirac)

CATALOG = (
    "splitting",
    "vcd-restriction",
    "composite-reduction",
    "rho-prolong",
    "dual-pairing",
    "tensor-leibniz",
    "hamiltonian-lift",
    "legendre-constraint",
    "clifford",
    "gamma-h-metric",
    "total-dirac-restriction",
    "char-form",
)
ALIASES = {"reduction-coherence": "composite-reduction"}


class UnknownCheckError(KeyError):
    def __init__(self, name: str):
        known = list(CATALOG) + list(ALIASES)
        close = difflib.get_close_matches(name, known, n=1, cutoff=0.0)
        self.name, self.suggestion = name, close[0] if close else None
        hint = f"; did you mean {self.suggestion!r}?" if self.suggestion else ""
        super().__init__(f"unknown check {name!r}{hint}")

    def __str__(self):
        return self.args[0]


class CheckArgumentError(ValueError):
    pass


def canonical(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in CATALOG:
        raise UnknownCheckError(name)
    return name


@dataclass(frozen=True)
class Report:
    name: str
    verdict: str
    residual: str
    max_numeric_residual: float | None
    elapsed_ms: float | None

    def as_dict(self) -> dict[str, Any]:
        return {"name": self.name, "verdict": self.verdict, "residual": self.residual,
                "max_numeric_residual": self.max_numeric_residual, "elapsed_ms": self.elapsed_ms}


@dataclass
class Settings:
    seed: int = 42
    tol: float = 1e-9
    samples: int = 64


# --------------------------------------------------------------------------- argument lookup

_KINDS: dict[str, Callable[[Any, Any], bool]] = {
    "sigma-section": lambda o, c: isinstance(o, Section) and o.level == "sigma",
    "ysigma-section": lambda o, c: isinstance(o, Section) and o.level == "ysigma",
    "sigma-connection": lambda o, c: isinstance(o, SigmaConnection),
    "gamma": lambda o, c: isinstance(o, Connection) and tuple(o.fibre) == c.middle,
    "y-connection": lambda o, c: isinstance(o, Connection) and tuple(o.fibre) == c.vertical(),
    "linear": lambda o, c: isinstance(o, LinearConnection),
    "symmetric": lambda o, c: isinstance(o, SymmetricConnection),
}


class _Args:
    """Objects named on a directive, falling back to the scenario's unique instance."""

    def __init__(self, sc: Scenario, directive: CheckDirective):
        self.sc = sc
        objects = sc.objects()
        self.named = []
        for a in directive.args:
            if a not in objects:
                raise CheckArgumentError(f"undeclared object {a!r}")
            self.named.append((a, objects[a]))
        self.used: set[str] = set()

    def get(self, kind: str, *, optional: bool = False):
        kind_test = _KINDS[kind]

        def test(obj):
            return kind_test(obj, self.sc.chart)

        for name, obj in self.named:
            if name not in self.used and test(obj):
                self.used.add(name)
                return obj
        if optional:
            return None
        pool = [(n, o) for n, o in self.sc.objects().items() if test(o)]
        if len(pool) == 1:
            return pool[0][1]
        if not pool:
            raise CheckArgumentError(f"needs a {kind} but none is declared")
        raise CheckArgumentError(f"several {kind} objects declared; name one on the directive")


# --------------------------------------------------------------------------- the checks

def _generic_jet(chart) -> JetPoint:
    coords = chart.j1y_coords()
    return JetPoint(coords, {k: sp.Symbol(k) for k in coords})


def check_splitting(sc: Scenario, args: _Args) -> list:
    a_sigma = args.get("sigma-connection")
    c = a_sigma.chart
    coords = c.y_coords()
    vert = c.vertical()
    v = VectorField(coords, {k: (sp.Symbol(f"v_{k}") if k in vert else sp.S.Zero) for k in coords})
    w = Form(coords, 1, {(k,): sp.Symbol(f"w_{k}") for k in vert})
    v1, v2 = vertical_splitting_project(a_sigma, v)
    w1, w2 = covertical_splitting_project(a_sigma, w)
    again, _ = vertical_splitting_project(a_sigma, v1)
    out = [v1[k] + v2[k] - v[k] for k in coords]
    out += [w1[(k,)] + w2[(k,)] - w[(k,)] for k in coords]
    out += [again[k] - v1[k] for k in coords]
    out += [pairing(v, w) - pairing(v1, w1) - pairing(v2, w2), pairing(v1, w2), pairing(v2, w1)]
    return out


def check_vcd_restriction(sc: Scenario, args: _Args) -> list:
    a_sigma = args.get("sigma-connection")
    h = args.get("sigma-section")
    gamma = args.get("gamma", optional=True)
    c = a_sigma.chart
    p = _generic_jet(c)
    pinned = restrict_to_section(c, h, vertical_covariant_differential(a_sigma, p))
    reduced = covariant_differential(reduce_connection(a_sigma, h), _generic_jet(c.restricted()))
    out = [pinned[k] - reduced[k] for k in reduced]
    if gamma is not None:
        direct = vertical_covariant_differential(a_sigma, p)
        via = vertical_covariant_differential_via(a_sigma, gamma, p)
        out += [direct[k] - via[k] for k in direct]
    return out


def check_composite_reduction(sc: Scenario, args: _Args) -> list:
    a_sigma = args.get("sigma-connection")
    gamma = args.get("gamma")
    h = args.get("sigma-section")
    c = a_sigma.chart
    restricted = restrict_connection(c, composite_connection(a_sigma, gamma), h)
    reduced = reduce_connection(a_sigma, h)
    return [restricted.coeffs[k] - reduced.coeffs[k] for k in reduced.coeffs]


def check_rho_prolong(sc: Scenario, args: _Args) -> list:
    h = args.get("sigma-section")
    s_sigma = args.get("ysigma-section")
    c = h.chart
    left = rho(c, jet_of(h), jet_of(s_sigma, at=h.values))
    right = jet_of(compose_sections(s_sigma, h))
    return [left[k] - right[k] for k in c.j1y_coords()]


def check_dual_pairing(sc: Scenario, args: _Args) -> list:
    a = args.get("linear")
    return list(pairing_derivative(a, dual_connection(a)).values())


def check_tensor_leibniz(sc: Scenario, args: _Args) -> list:
    a = args.get("linear")
    b = args.get("linear", optional=True) or a
    t = tensor_connection(a, b)
    u = {i: sp.Symbol(f"u_{i}") for i in a.chart.fibre}
    v = {k: sp.Symbol(f"v_{k}") for k in b.chart.fibre}
    pairs = [(i, k) for i in a.chart.fibre for k in b.chart.fibre]
    decomposable = {t.chart.fibre[n]: u[i] * v[k] for n, (i, k) in enumerate(pairs)}
    out = []
    for n, (i, k) in enumerate(pairs):
        for lam in a.chart.base:
            coef = symexpr.subst(t.fibre_coefficient(t.chart.fibre[n], lam), decomposable)
            au = sum((a.matrix[(i, j, lam)] * u[j] for j in a.chart.fibre), sp.S.Zero)
            bv = sum((b.matrix[(k, l, lam)] * v[l] for l in b.chart.fibre), sp.S.Zero)
            out.append(coef - au * v[k] - u[i] * bv)
    return out


def check_hamiltonian_lift(sc: Scenario, args: _Args) -> list:
    if sc.lift is not None and not args.named:
        gamma, K = (sc.connections[n] for n in sc.lift)
    else:
        gamma, K = args.get("y-connection"), args.get("symmetric")
    lc = LegendreChart(CompositeChart(tuple(gamma.base), (), tuple(gamma.fibre)))
    return list(hamiltonian_check(lift_to_legendre(gamma, K), lc).terms.values())


def check_legendre_constraint(sc: Scenario, args: _Args) -> list:
    if sc.lagrangian is None:
        raise CheckArgumentError("needs a [lagrangian] section")
    a_sigma = args.get("sigma-connection")
    report = factored_lagrangian_constraint(sc.lagrangian, a_sigma)
    return list(report.residuals.values()) + list(report.barred.values())


def check_clifford(sc: Scenario, args: _Args) -> list:
    model = build_clifford()
    out = []
    for _, m in itertools.chain(model.clifford_residuals(), model.lorentz_residuals()):
        out.extend(m)
    return out


def _tetrad(sc: Scenario) -> Tetrad:
    return sc.tetrad if sc.tetrad is not None else Tetrad.identity()


def check_gamma_h_metric(sc: Scenario, args: _Args) -> list:
    model = build_clifford()
    h = _tetrad(sc)
    g = h.metric(model)
    gam = [gamma_h(h, lam, model) for lam in range(DIM)]
    out = []
    for lam, mu in itertools.combinations_with_replacement(range(DIM), 2):
        anti = gam[lam] * gam[mu] + gam[mu] * gam[lam] - 2 * g[lam, mu] * sp.eye(DIM)
        out.extend(anti)
    return out


def check_total_dirac_restriction(sc: Scenario, args: _Args) -> list:
    model = build_clifford()
    h = _tetrad(sc)
    K = sc.spin_K
    jet = SpinorJet.symbolic()
    coeffs = spin_connection_coeffs(K, h.matrix, model, sigma_inverse=h.inverse)
    lhs = total_dirac(spinor_connection(coeffs, model), h.matrix, pinned_frame_jet(h), jet, model)
    reduced = levi_civita_reduction(K, h, model)
    rhs = dirac_operator(h, {k: v / 2 for k, v in reduced.items()}, jet, model)
    out = list(lhs - rhs)
    if sc.spinor_jet is not None:
        at = {SPINOR[A]: sc.spinor_jet.y[A] for A in range(DIM)}
        at.update({spinor_jet_name(A, lam): sc.spinor_jet.dy[lam][A]
                   for A in range(DIM) for lam in range(DIM)})
        out += [symexpr.subst(e, at) for e in out]
    return out


def check_char_form(sc: Scenario, args: _Args) -> list:
    a_sigma = args.get("sigma-connection")
    c = a_sigma.chart
    coords = c.y_coords()
    form = characterizing_form(a_sigma)
    stripped = characterizing_form(SigmaConnection(c, {}, a_sigma.vert))
    out = []
    for k in coords:
        out += list((form.component(k) - stripped.component(k)).terms.values())
    for m in c.middle:
        unit = VectorField(coords, {k: (sp.S.One if k == m else sp.S.Zero) for k in coords})
        _, lifted = vertical_splitting_project(a_sigma, unit)
        out += [form.component(k)[c.base + (m,)] - lifted[k] for k in coords]
    return out


RUNNERS: dict[str, Callable[[Scenario, _Args], list]] = {
    "splitting": check_splitting,
    "vcd-restriction": check_vcd_restriction,
    "composite-reduction": check_composite_reduction,
    "rho-prolong": check_rho_prolong,
    "dual-pairing": check_dual_pairing,
    "tensor-leibniz": check_tensor_leibniz,
    "hamiltonian-lift": check_hamiltonian_lift,
    "legendre-constraint": check_legendre_constraint,
    "clifford": check_clifford,
    "gamma-h-metric": check_gamma_h_metric,
    "total-dirac-restriction": check_total_dirac_restriction,
    "char-form": check_char_form,
}


# --------------------------------------------------------------------------- execution

def _has_atoms(exprs) -> bool:
    return any(e.atoms(sp.Function) for e in exprs)


def render_residual(exprs) -> str:
    nonzero = [symexpr.normalize(e) for e in exprs]
    nonzero = [e for e in nonzero if e != 0]
    if not nonzero:
        return "0"
    return "; ".join(symexpr.render(e) for e in nonzero)


def run_check(sc: Scenario, directive: CheckDirective, settings: Settings | None = None,
              *, timing: bool = False) -> Report:
    settings = settings or Settings()
    name = canonical(directive.name)
    start = time.perf_counter()
    try:
        exprs = [sp.sympify(e) for e in RUNNERS[name](sc, _Args(sc, directive))]
        leftover = [e for e in exprs if not symexpr.is_zero(e)]
        numeric = symexpr.numeric_residual(leftover, samples=settings.samples,
                                           seed=settings.seed) if leftover else 0.0
        if not leftover:
            verdict, residual = "pass", "0"
        else:
            residual = render_residual(leftover)
            numeric_ok = _has_atoms(leftover) and numeric <= settings.tol
            verdict = "pass" if numeric_ok else "fail"
    except (CheckArgumentError, ValueError, ArithmeticError, KeyError) as exc:
        verdict, residual, numeric = "error", str(exc), None
    elapsed = round((time.perf_counter() - start) * 1000, 3) if timing else None
    return Report(directive.name, verdict, residual, numeric, elapsed)


def run_scenario(sc: Scenario, settings: Settings | None = None, *, timing: bool = False
                 ) -> list[Report]:
    for d in sc.checks:
        canonical(d.name)
    return [run_check(sc, d, settings, timing=timing) for d in sc.checks]
