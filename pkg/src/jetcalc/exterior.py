"""Differential forms, vector fields and tangent-valued forms in coordinates.

A :class:`Form` of degree r is a sparse map from strictly increasing index
tuples into the coordinate list to coefficient expressions.  Tangent-valued
forms are dictionaries ``direction -> Form``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import sympy as sp

from . import symexpr


class ChartMismatchError(ValueError):
    pass


class DegreeError(ValueError):
    pass


def _sort_sign(idx: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``idx`` (0 if an index repeats)."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


@dataclass(frozen=True)
class VectorField:
    coords: tuple[str, ...]
    components: Mapping[str, sp.Expr] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        unknown = set(self.components) - set(self.coords)
        if unknown:
            raise ChartMismatchError(f"components outside chart: {sorted(unknown)}")
        object.__setattr__(self, "components",
                           {k: sp.sympify(v) for k, v in self.components.items()})

    def __getitem__(self, name: str) -> sp.Expr:
        return self.components.get(name, sp.S.Zero)

    def __add__(self, other: "VectorField") -> "VectorField":
        _same_chart(self.coords, other.coords)
        keys = set(self.components) | set(other.components)
        return VectorField(self.coords, {k: sp.expand(self[k] + other[k]) for k in keys})

    def equals(self, other: "VectorField") -> bool:
        _same_chart(self.coords, other.coords)
        keys = set(self.components) | set(other.components)
        return all(symexpr.is_zero(self[k] - other[k]) for k in keys)


def _same_chart(a, b):
    if tuple(a) != tuple(b):
        raise ChartMismatchError("forms live on different charts")


class Form:
    """Exterior form with expression coefficients."""

    __slots__ = ("coords", "degree", "terms", "_index")

    def __init__(self, coords: Iterable[str], degree: int, terms: Mapping | None = None):
        self.coords = tuple(coords)
        if degree < 0 or (degree > len(self.coords) and terms):
            raise DegreeError(f"degree {degree} outside 0..{len(self.coords)}")
        self.degree = degree
        self._index = {c: i for i, c in enumerate(self.coords)}
        acc: dict[tuple[int, ...], sp.Expr] = {}
        for key, coef in (terms or {}).items():
            idx = tuple(self._index[k] if isinstance(k, str) else k for k in key)
            if len(idx) != degree:
                raise DegreeError(f"term {key} does not have degree {degree}")
            sign, canon = _sort_sign(idx)
            if sign == 0:
                continue
            acc[canon] = acc.get(canon, sp.S.Zero) + sign * sp.sympify(coef)
        self.terms = {k: v for k, v in ((k, sp.expand(v)) for k, v in acc.items()) if v != 0}

    # construction helpers
    @classmethod
    def zero(cls, coords, degree: int) -> "Form":
        return cls(coords, degree)

    @classmethod
    def scalar(cls, coords, f) -> "Form":
        return cls(coords, 0, {(): f})

    @classmethod
    def basis(cls, coords, *names: str, coef=1) -> "Form":
        """``coef * d names[0] ^ d names[1] ^ ...``"""
        return cls(coords, len(names), {tuple(names): coef})

    def __repr__(self) -> str:
        return f"Form({render_form(self)!r}, degree={self.degree})"

    def __getitem__(self, key) -> sp.Expr:
        idx = tuple(self._index[k] if isinstance(k, str) else k for k in key)
        sign, canon = _sort_sign(idx)
        return sign * self.terms.get(canon, sp.S.Zero) if sign else sp.S.Zero

    def __add__(self, other: "Form") -> "Form":
        _same_chart(self.coords, other.coords)
        if self.degree != other.degree:
            raise DegreeError("cannot add forms of different degree")
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) + v
        return Form(self.coords, self.degree, terms)

    def __neg__(self) -> "Form":
        return Form(self.coords, self.degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, f) -> "Form":
        return Form(self.coords, self.degree, {k: f * v for k, v in self.terms.items()})

    def __xor__(self, other: "Form") -> "Form":
        return wedge(self, other)

    def map_coefficients(self, fn) -> "Form":
        return Form(self.coords, self.degree, {k: fn(v) for k, v in self.terms.items()})

    def normalized(self) -> "Form":
        return Form(self.coords, self.degree,
                    {k: symexpr.normalize(v) for k, v in self.terms.items()})

    def is_zero(self) -> bool:
        return all(symexpr.is_zero(v) for v in self.terms.values())

    def equals(self, other: "Form") -> bool:
        return (self - other).is_zero()

    def items_named(self):
        """``(coordinate-name tuple, coefficient)`` pairs in canonical order."""
        for k in sorted(self.terms):
            yield tuple(self.coords[i] for i in k), self.terms[k]


def wedge(a: Form, b: Form) -> Form:
    _same_chart(a.coords, b.coords)
    if a.degree + b.degree > len(a.coords):
        raise DegreeError("wedge degree exceeds chart dimension")
    terms: dict = {}
    for ka, va in a.terms.items():
        for kb, vb in b.terms.items():
            sign, canon = _sort_sign(ka + kb)
            if sign:
                terms[canon] = terms.get(canon, 0) + sign * va * vb
    return Form(a.coords, a.degree + b.degree, terms)


def exterior_derivative(a: Form) -> Form:
    terms: dict = {}
    for k, v in a.terms.items():
        for sym in v.free_symbols:
            j = a._index.get(sym.name)
            if j is None or j in k:
                continue
            sign, canon = _sort_sign((j,) + k)
            terms[canon] = terms.get(canon, 0) + sign * sp.diff(v, sym)
    return Form(a.coords, a.degree + 1, terms)


def d(a: Form) -> Form:
    return exterior_derivative(a)


def interior_product(v: VectorField, a: Form) -> Form:
    """``v ⌋ a`` contracting the first slot."""
    _same_chart(v.coords, a.coords)
    if a.degree == 0:
        raise DegreeError("interior product of a 0-form")
    comps = {a._index[name]: c for name, c in v.components.items() if c != 0}
    terms: dict = {}
    for k, coef in a.terms.items():
        for pos, j in enumerate(k):
            if j in comps:
                rest = k[:pos] + k[pos + 1:]
                sgn = -1 if pos % 2 else 1
                terms[rest] = terms.get(rest, 0) + sgn * comps[j] * coef
    return Form(a.coords, a.degree - 1, terms)


# --------------------------------------------------------------------------- tangent-valued

class TangentValuedForm(dict):
    """``direction -> Form``; the form multiplying ``∂_direction``."""

    def __init__(self, coords, components: Mapping[str, Form] | None = None):
        super().__init__()
        self.coords = tuple(coords)
        degrees = set()
        for direction, form in (components or {}).items():
            if direction not in self.coords:
                raise ChartMismatchError(f"direction {direction!r} not on chart")
            _same_chart(self.coords, form.coords)
            degrees.add(form.degree)
            self[direction] = form
        if len(degrees) > 1:
            raise DegreeError("tangent-valued form mixes degrees")
        self.degree = degrees.pop() if degrees else None

    def component(self, direction: str) -> Form:
        if direction in self:
            return self[direction]
        return Form(self.coords, self.degree or 0)

    def equals(self, other: "TangentValuedForm") -> bool:
        _same_chart(self.coords, other.coords)
        for direction in set(self) | set(other):
            if not (self.component(direction) - other.component(direction)).is_zero():
                return False
        return True

    def direction_field(self, base: str) -> VectorField:
        """For a tangent-valued 1-form, the vector field multiplying ``d base``."""
        if self.degree != 1:
            raise DegreeError("direction_field needs a tangent-valued 1-form")
        return VectorField(self.coords, {
            direction: form[(base,)] for direction, form in self.items()
            if form[(base,)] != 0
        })


def contract_tangent_valued(gamma: TangentValuedForm, T: TangentValuedForm,
                            base: Iterable[str]) -> Form:
    """``gamma ⌋ T`` for a connection-shaped 1-form ``gamma``.

    Sums ``e_λ ⌋ T_λ`` over base directions, where ``e_λ`` is the vector
    field multiplying ``dx^λ`` in ``gamma`` and ``T_λ`` the form multiplying
    ``∂_λ`` in ``T``.
    """
    if tuple(gamma.coords) != tuple(T.coords):
        raise ChartMismatchError("connection and form live on different charts")
    base = tuple(base)
    stray = set(T) - set(base)
    if stray:
        raise ChartMismatchError(f"form has non-base output directions {sorted(stray)}")
    out = Form(T.coords, (T.degree or 1) - 1)
    for lam in base:
        if lam not in T:
            continue
        out = out + interior_product(gamma.direction_field(lam), T[lam])
    return out


def render_form(a: Form) -> str:
    if not a.terms:
        return "0"
    parts = []
    for names, coef in a.items_named():
        basis = "^".join(f"d{n}" for n in names)
        c = symexpr.render(coef)
        if not names:
            parts.append(f"({c})")
        else:
            parts.append(f"({c}) * {basis}")
    return " + ".join(parts)


def volume_form(coords, base: Iterable[str]) -> Form:
    """``ω = dx^1 ∧ ... ∧ dx^n``."""
    return Form.basis(coords, *base)
