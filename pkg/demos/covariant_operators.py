"""Conformally covariant bilinear operators, exact and on a torus.

The second-order operator D_2 built from the Laplacian and J satisfies

    D_2[exp(2Y) g](u, v) = exp(-bY) D_2[g](exp(aY) u, exp(aY) v)

with a = (n-2)/3, b = (2n+2)/3.  The check below is exact: both sides are
finite sums of exponentials times polynomials.  Perturbing the J
coefficient breaks it.

Run: python3 demos/covariant_operators.py
"""

from fractions import Fraction as F

import numpy as np

from cvilab import operator_library as ol
from cvilab.exactnum import symbolic_context
from cvilab.field_calculus import random_trig_field, torus_background

ctx = symbolic_context(2, [{(2, 0): 1, (1, 1): F(1, 3), (0, 4): F(1, 12)}])
x, y = ctx.coord(0), ctx.coord(1)
u, v = x * x + y + 1, x * y - 2

for n in (3, 5, 6):
    res = ol.covariance_check(ol.d2_op(), 0, [u, v], n, ctx)
    bad = ol.covariance_check(ol.d2_op({"J": F(1, 5)}), 0, [u, v], n, ctx)
    print(f"n={n}: bidegree {tuple(map(str, ol.bidegree(2, 1, n)))}  residual zero: {res.is_zero()}  "
          f"perturbed residual zero: {bad.is_zero()}")

# the fourth-order flat assembly reproduces sigma_2 of exp(2 phi) delta
for n in (5, 6, 7):
    print(f"n={n}: L_4 weights {[str(w) for w in ol.l2k_coefficients(n, 2)]}, "
          f"sigma_2 recovered: {ol.sigma_assembly_check(2, n, ctx, c=F(1, 2)).is_zero()}")

# on a curved torus the pairing int u0 D_4(u1, u2) dvol is symmetric up to quadrature error
rng = np.random.default_rng(0)
phi = random_trig_field((24, 24), 1, rng, amplitude=0.1)
fields = [random_trig_field((24, 24), 1, rng, offset=1.0) for _ in range(3)]
rep = ol.selfadjointness_check(ol.d4_op(), fields, torus_background(5, (24, 24), phi))
print(f"D_4 on a curved 2-torus, n=5: relative permutation deviation {rep.relative:.2e}")
