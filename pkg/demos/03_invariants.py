"""Conserved quantities from the Pfaffian pencil: secular roots c_i and the
wedge-ratio invariants Y^(l), with the two independent routes cross-checked."""

import numpy as np

from binoether import (
    builtin_system,
    lie_derivative_mv,
    mixed_wedge_ratios,
    pfaffian,
    secular_roots,
    y_from_roots,
)
from binoether.geometry import PhasePoint, evaluate_mv

# the Pfaffian is the workhorse: Pf(M)^2 = det(M)
M = np.array([[0.0, 2.0, 0.0, 1.0],
              [-2.0, 0.0, 3.0, 0.0],
              [0.0, -3.0, 0.0, 4.0],
              [-1.0, 0.0, -4.0, 0.0]])
print("Pf(M)   =", pfaffian(M))
print("det(M)  =", np.linalg.det(M), " (= Pf^2)")

# two uncoupled friction modes
spec = builtin_system("dissipative", 2)
What = lie_derivative_mv(spec.E, spec.W)
x = PhasePoint((1.0, 0.0, 2.0, 1.0))  # (q1, q2, p1, p2)

print("\nW at x:\n", evaluate_mv(spec.W, x))
print("W_hat at x:\n", evaluate_mv(What, x))

# route 1: polynomial coefficients of Pf(W_hat + t W)/Pf(W)
y_direct = mixed_wedge_ratios(spec.W, What, x)
# route 2: elementary symmetric functions of the secular roots
spectrum = secular_roots(spec.W, What, x)
y_roots = y_from_roots(spectrum)

print("\nsecular roots c_i:", spectrum.roots)
print("  (kappa * (p_i + q_i) with kappa = -2: pair sums are 3 and 1)")
print("Y via wedge ratios:", y_direct.values)
print("Y via roots:       ", y_roots.values)
print("max discrepancy:   ",
      max(abs(a - b) for a, b in zip(y_direct.values, y_roots.values)))

# the invariants scale like roots^l under scaling of the deformation
lam = 3.0
scaled = mixed_wedge_ratios(spec.W, lam * What, x)
print("\nY under W_hat -> 3 W_hat:", scaled.values)
print("expected (3^l scaling):  ",
      tuple(lam ** l * y for l, y in enumerate(y_direct.values, start=1)))
