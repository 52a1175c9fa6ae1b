"""Shared builders and numeric oracles for the test suite."""

from __future__ import annotations

import numpy as np

from binoether.expr import Num, PhaseSpace, ScalarExpr, Var, substitute
from binoether.geometry import MultiVectorField, PhasePoint, lie_derivative_mv


def var(space: PhaseSpace, name: str) -> Var:
    return Var(name, space.index(name))


def dissipative_fields(n: int):
    """The linear-friction model: W = sum p_i dp_i^dq_i, h = sum (p_i + q_i),
    E = sum (p_i + q_i)^2 d/dq_i.  Returns (space, W, h, E)."""
    space = PhaseSpace.canonical(n)
    q = [var(space, f"q{i + 1}") for i in range(n)]
    p = [var(space, f"p{i + 1}") for i in range(n)]
    W = MultiVectorField(space, 2, {(i, n + i): -p[i] for i in range(n)})
    h: ScalarExpr = Num(0.0)
    for i in range(n):
        h = h + (p[i] + q[i])
    E = MultiVectorField(space, 1, {(i,): (p[i] + q[i]) ** 2 for i in range(n)})
    return space, W, h, E


def random_polynomial(rng, space: PhaseSpace, max_degree=2, terms=3) -> ScalarExpr:
    e: ScalarExpr = Num(float(rng.uniform(-1, 1)))
    for _ in range(terms):
        mono: ScalarExpr = Num(float(rng.uniform(-1, 1)))
        for _ in range(int(rng.integers(1, max_degree + 1))):
            i = int(rng.integers(0, space.dim))
            mono = mono * Var(space.names[i], i)
        e = e + mono
    return e


def random_bivector(rng, space: PhaseSpace, pairs=None, max_degree=2) -> MultiVectorField:
    N = space.dim
    if pairs is None:
        all_pairs = [(i, j) for i in range(N) for j in range(i + 1, N)]
        take = rng.choice(len(all_pairs), size=min(3, len(all_pairs)), replace=False)
        pairs = [all_pairs[int(t)] for t in take]
    comps = {pair: random_polynomial(rng, space, max_degree=max_degree) for pair in pairs}
    return MultiVectorField(space, 2, comps)


def random_vector_field(rng, space: PhaseSpace, max_degree=2) -> MultiVectorField:
    comps = {
        (i,): random_polynomial(rng, space, max_degree=max_degree)
        for i in range(space.dim)
        if rng.random() < 0.7
    }
    return MultiVectorField(space, 1, comps)


def random_points(rng, dim: int, count: int, half_width=2.0):
    return [PhasePoint(rng.uniform(-half_width, half_width, size=dim)) for _ in range(count)]


def block_action_system(rng, n: int, lam: float | None = None):
    """A bivector with one independent function per canonical (q_i, p_i)
    block, a block vector field E, and W_hat = lam*W + L_E W.  The secular
    spectrum of such a pair is real by construction (each block contributes
    one root), which makes it safe for root-based cross-checks."""
    space = PhaseSpace.canonical(n)
    if lam is None:
        lam = float(rng.uniform(-2, 2))
    w_comps = {}
    e_comps = {}
    for i in range(n):
        qi = Var(space.names[i], i)
        pi = Var(space.names[n + i], n + i)
        # keep each block component bounded away from zero on the sample box
        w_comps[(i, n + i)] = (
            Num(float(rng.uniform(1.5, 3.0)))
            + float(rng.uniform(-0.2, 0.2)) * qi
            + float(rng.uniform(-0.2, 0.2)) * pi * qi
        )
        e_comps[(i,)] = (
            float(rng.uniform(-1, 1)) * qi * qi + float(rng.uniform(-1, 1)) * pi
        )
        if rng.random() < 0.5:
            e_comps[(n + i,)] = float(rng.uniform(-1, 1)) * pi * qi
    W = MultiVectorField(space, 2, w_comps)
    E = MultiVectorField(space, 1, e_comps)
    What = lam * W + lie_derivative_mv(E, W)
    return space, W, What


def linear_coordinate_change(rng, space: PhaseSpace, field: MultiVectorField,
                             matrix: np.ndarray | None = None) -> MultiVectorField:
    """Push a multivector field forward through x -> A x (A constant and
    invertible): components mix as A^i_a A^j_b F^{ab}, arguments pull back
    through A^{-1}."""
    N = space.dim
    if matrix is None:
        while True:
            matrix = rng.uniform(-1, 1, size=(N, N)) + np.eye(N)
            if abs(np.linalg.det(matrix)) > 0.3:
                break
    inv = np.linalg.inv(matrix)
    # coordinate substitution: old coordinate m = sum_j inv[m, j] * new_j
    mapping = {}
    for m in range(N):
        acc: ScalarExpr = Num(0.0)
        for j in range(N):
            if inv[m, j] != 0.0:
                acc = acc + float(inv[m, j]) * Var(space.names[j], j)
        mapping[m] = acc

    k = field.degree
    out: dict[tuple[int, ...], ScalarExpr] = {}
    from itertools import combinations, permutations

    for new_idx in combinations(range(N), k):
        acc: ScalarExpr = Num(0.0)
        for old_idx, e in field.components.items():
            pulled = substitute(e, mapping)
            for perm in permutations(old_idx):
                coeff = 1.0
                sign_key, sign = _perm_sign(old_idx, perm)
                for target, source in zip(new_idx, perm):
                    coeff *= matrix[target, source]
                if coeff != 0.0:
                    acc = acc + (float(coeff) * float(sign)) * pulled
        if not acc.is_zero():
            out[new_idx] = acc
    return MultiVectorField(space, k, out)


def _perm_sign(base, perm):
    order = [list(base).index(x) for x in perm]
    sign = 1
    order = list(order)
    for i in range(len(order)):
        for j in range(len(order) - 1 - i):
            if order[j] > order[j + 1]:
                order[j], order[j + 1] = order[j + 1], order[j]
                sign = -sign
    return tuple(order), sign


def max_component_at(field: MultiVectorField, pt) -> float:
    if not field.components:
        return 0.0
    return max(abs(e.eval(pt)) for e in field.components.values())
