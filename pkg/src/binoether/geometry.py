"""Multivector fields in coordinates and the bracket calculus.

Degree-1 fields act as vector fields, degree-2 fields as (Poisson candidate)
bivectors.  Components are expressions stored only on strictly increasing
index tuples; any other index order is resolved through the permutation sign,
so antisymmetry is structural rather than enforced numerically.

Conventions (calibrated by the Jacobi-equivalence tests):
    {f, g}        = sum_{i<j} V^{ij} (d_i f d_j g - d_j f d_i g)
    (V(f))^j      = sum_i V^{ij} d_i f            so  {f, g} = (V(f))^j d_j g
    (L_E A)^I     = E^m d_m A^I - sum_s A^{I|i_s -> m} d_m E^{i_s}
    [A, B]^{ijk}  = sum_cyc(i,j,k) sum_l (A^{li} d_l B^{jk} + B^{li} d_l A^{jk})
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np

from .expr import Num, PhaseSpace, ScalarExpr, _coerce

__all__ = [
    "PhasePoint",
    "MultiVectorField",
    "lie_derivative_mv",
    "schouten_bb",
    "hamiltonian_vf",
    "poisson_bracket",
    "evaluate_mv",
]


@dataclass(frozen=True)
class PhasePoint:
    """A single point of the 2n-dimensional phase space, in canonical order."""

    coords: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))
        if not all(math.isfinite(c) for c in self.coords):
            raise ValueError("phase-space coordinates must be finite")

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


def _sort_with_sign(idx: tuple[int, ...]) -> tuple[tuple[int, ...] | None, int]:
    """Sort an index tuple, returning (sorted, permutation sign); repeated
    indices return (None, 0)."""
    idx = tuple(idx)
    if len(set(idx)) != len(idx):
        return None, 0
    sign = 1
    lst = list(idx)
    for i in range(len(lst)):
        for j in range(len(lst) - 1 - i):
            if lst[j] > lst[j + 1]:
                lst[j], lst[j + 1] = lst[j + 1], lst[j]
                sign = -sign
    return tuple(lst), sign


class MultiVectorField:
    """Degree-k antisymmetric contravariant tensor field with expression
    components.

    ``components`` maps strictly increasing index tuples to expressions;
    missing tuples read as zero.  Instances are immutable.
    """

    def __init__(self, space: PhaseSpace, degree: int, components: dict):
        # degree > dim is allowed but forces the zero field (no strictly
        # increasing tuple of that length exists), e.g. trivector brackets
        # over a two-dimensional space
        if degree < 0:
            raise ValueError(f"degree must be non-negative, got {degree}")
        self.space = space
        self.degree = degree
        merged: dict[tuple[int, ...], ScalarExpr] = {}
        for idx, value in components.items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != degree:
                raise ValueError(f"index tuple {idx} does not match degree {degree}")
            if any(i < 0 or i >= space.dim for i in idx):
                raise ValueError(f"index tuple {idx} out of range for dim {space.dim}")
            key, sign = _sort_with_sign(idx)
            if key is None:
                raise ValueError(f"repeated index in tuple {idx}")
            term = float(sign) * _coerce(value)
            merged[key] = merged[key] + term if key in merged else term
        self.components = {
            key: merged[key] for key in sorted(merged) if not merged[key].is_zero()
        }

    @classmethod
    def zero(cls, space: PhaseSpace, degree: int) -> "MultiVectorField":
        return cls(space, degree, {})

    def component(self, idx: tuple[int, ...]) -> ScalarExpr:
        """Signed access by an arbitrary index tuple (zero when absent or
        when an index repeats)."""
        key, sign = _sort_with_sign(idx)
        if key is None:
            return Num(0.0)
        e = self.components.get(key)
        if e is None:
            return Num(0.0)
        return e if sign == 1 else -e

    def is_zero(self) -> bool:
        return not self.components

    def __add__(self, other: "MultiVectorField") -> "MultiVectorField":
        self._check_compatible(other)
        comps = dict(self.components)
        for key, e in other.components.items():
            comps[key] = comps[key] + e if key in comps else e
        return MultiVectorField(self.space, self.degree, comps)

    def __sub__(self, other: "MultiVectorField") -> "MultiVectorField":
        return self + (-1.0) * other

    def __rmul__(self, factor) -> "MultiVectorField":
        f = _coerce(factor)
        return MultiVectorField(
            self.space, self.degree, {k: f * e for k, e in self.components.items()}
        )

    def _check_compatible(self, other: "MultiVectorField"):
        if self.space is not other.space and self.space != other.space:
            raise ValueError("fields live on different phase spaces")
        if self.degree != other.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __repr__(self):
        body = ", ".join(f"{k}: {e}" for k, e in self.components.items())
        return f"MultiVectorField(deg={self.degree}, {{{body}}})"


def _require_space(*fields: MultiVectorField):
    s = fields[0].space
    for f in fields[1:]:
        if f.space is not s and f.space != s:
            raise ValueError("fields live on different phase spaces")
    return s


def lie_derivative_mv(E: MultiVectorField, A: MultiVectorField) -> MultiVectorField:
    """Lie derivative of a k-vector field along a vector field.

    For k = 1 this is the vector-field commutator [E, X]; for k = 0 it is the
    directional derivative E^m d_m f.
    """
    space = _require_space(E, A)
    if E.degree != 1:
        raise ValueError(f"generator must have degree 1, got {E.degree}")
    N = space.dim
    k = A.degree
    out: dict[tuple[int, ...], ScalarExpr] = {}
    for idx in combinations(range(N), k):
        term: ScalarExpr = Num(0.0)
        for (m,), e_m in E.components.items():
            term = term + e_m * A.component(idx).diff(m)
        for s, i_s in enumerate(idx):
            e_is = E.component((i_s,))
            if e_is.is_zero():
                continue
            for m in range(N):
                a = A.component(idx[:s] + (m,) + idx[s + 1 :])
                if a.is_zero():
                    continue
                term = term - a * e_is.diff(m)
        if not term.is_zero():
            out[idx] = term
    return MultiVectorField(space, k, out)


def schouten_bb(A: MultiVectorField, B: MultiVectorField) -> MultiVectorField:
    """Schouten bracket of two bivector fields, as a trivector field.

    Normalized so that schouten_bb(V, V) = 0 is equivalent to the Jacobi
    identity of the bracket induced by V.
    """
    space = _require_space(A, B)
    if A.degree != 2 or B.degree != 2:
        raise ValueError(f"expected two bivectors, got degrees {A.degree}, {B.degree}")
    N = space.dim
    out: dict[tuple[int, ...], ScalarExpr] = {}
    for i, j, k in combinations(range(N), 3):
        term: ScalarExpr = Num(0.0)
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            for first, second in ((A, B), (B, A)):
                for (u, v), e in first.components.items():
                    # gather the l-sum sparsely: component (l, a) with l = u or v
                    if v == a:
                        l, coeff = u, e
                    elif u == a:
                        l, coeff = v, -e
                    else:
                        continue
                    d = second.component((b, c)).diff(l)
                    if not d.is_zero():
                        term = term + coeff * d
        if not term.is_zero():
            out[(i, j, k)] = term
    return MultiVectorField(space, 3, out)


def hamiltonian_vf(V: MultiVectorField, f: ScalarExpr) -> MultiVectorField:
    """Vector field V(f) with components (V(f))^j = sum_i V^{ij} d_i f, so
    that L_{V(f)} g = {f, g} under `poisson_bracket`."""
    if V.degree != 2:
        raise ValueError(f"expected a bivector, got degree {V.degree}")
    out: dict[tuple[int, ...], ScalarExpr] = {}

    def accumulate(j: int, e: ScalarExpr):
        key = (j,)
        out[key] = out[key] + e if key in out else e

    for (i, j), v in V.components.items():
        di, dj = f.diff(i), f.diff(j)
        if not di.is_zero():
            accumulate(j, v * di)
        if not dj.is_zero():
            accumulate(i, -(v * dj))
    out = {k: e for k, e in out.items() if not e.is_zero()}
    return MultiVectorField(V.space, 1, out)


def poisson_bracket(V: MultiVectorField, f: ScalarExpr, g: ScalarExpr) -> ScalarExpr:
    """{f, g} with respect to the bivector V; antisymmetric in (f, g)."""
    if V.degree != 2:
        raise ValueError(f"expected a bivector, got degree {V.degree}")
    acc: ScalarExpr = Num(0.0)
    for (i, j), v in V.components.items():
        acc = acc + v * (f.diff(i) * g.diff(j) - f.diff(j) * g.diff(i))
    return acc


def evaluate_mv(A: MultiVectorField, x) -> np.ndarray | float:
    """Evaluate every component at a point; returns a fully antisymmetric
    numeric array of shape (2n,)*k (a float for degree 0)."""
    N = A.space.dim
    if A.degree == 0:
        return float(A.component(()).eval(x))
    arr = np.zeros((N,) * A.degree)
    for idx, e in A.components.items():
        v = e.eval(x)
        for perm in permutations(range(A.degree)):
            target = tuple(idx[p] for p in perm)
            _, sign = _sort_with_sign(target)
            arr[target] = sign * v
    return arr
