"""Bivectors, Poisson brackets, and the bracket calculus on the friction
model: W = p dp^dq, h = p + q, E = (p+q)^2 d/dq."""

import numpy as np

from binoether import (
    PhaseSpace,
    MultiVectorField,
    evaluate_mv,
    hamiltonian_vf,
    lie_derivative_mv,
    parse,
    poisson_bracket,
    schouten_bb,
)

space = PhaseSpace.canonical(1)
p1 = parse("p1", space)
q1 = parse("q1", space)

# W = p dp^dq is stored on the increasing pair (q1, p1) as -p1
W = MultiVectorField(space, 2, {(0, 1): parse("-p1", space)})
h = parse("p1 + q1", space)
E = MultiVectorField(space, 1, {(0,): parse("(p1 + q1)^2", space)})

print("W matrix at (1,2):\n", evaluate_mv(W, (1.0, 2.0)))

# the evolution operator X = W(h) = p d/dq - p d/dp
X = hamiltonian_vf(W, h)
print("\nevolution field components:")
for (i,), comp in X.components.items():
    print(f"  X^{space.names[i]} = {comp}")

# brackets with h recover the component functions of X (trees are not
# simplified; evaluation is the contract)
bq, bp = poisson_bracket(W, h, q1), poisson_bracket(W, h, p1)
print("\n{h, q1} =", bq, "  -> at (1,2):", bq.eval((1.0, 2.0)))
print("{h, p1} =", bp, "  -> at (1,2):", bp.eval((1.0, 2.0)))

# E commutes with X: the symmetry condition, exact at every point
commutator = lie_derivative_mv(E, X)
pt = (0.7, 1.9)
vals = evaluate_mv(commutator, pt) if not commutator.is_zero() else np.zeros(2)
print("\n[E, X] at", pt, "->", vals)

# but E does not preserve W: the deformation W_hat = [E, W] is nonzero,
# which is exactly what makes the symmetry non-Noether
What = lie_derivative_mv(E, W)
print("W_hat component:", What.component((0, 1)))  # 2 p (p+q)

# both W and W_hat are Poisson and mutually compatible (trivially here:
# a two-dimensional space has no trivectors; run with n >= 2 for substance)
print("[W,W] zero:", schouten_bb(W, W).is_zero())
print("[W_hat,W_hat] zero:", schouten_bb(What, What).is_zero())
print("[W_hat,W] zero:", schouten_bb(What, W).is_zero())
