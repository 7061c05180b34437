"""Conformal jets: linearization, rank and the primitive in the critical dimension.

For a weight -2k invariant L the family F(t) = exp(2ktY) L(exp(2tY) g) is a
polynomial in t.  Its linear coefficient is the linearization S(Y); the
vanishing pattern of the higher coefficients in n = 2k gives the rank.

Run: python3 demos/conformal_jets.py
"""

from fractions import Fraction as F

import numpy as np

from cvilab import conformal_variation as cv
from cvilab.field_calculus import random_trig_field, symbolic_background, torus_background

Y = {(2, 0): 1, (1, 1): F(-1, 2), (0, 3): F(1, 3)}
ctx = cv.jet_context(2, [Y])
for name, n in (("J", 3), ("sigma2", 4), ("sigma2", 5)):
    jet = cv.conformal_jet(name, "tY", symbolic_background(n, ctx))
    print(f"{name} at n={n}: jet degree {jet.degree}, zero pattern {jet.zero_pattern()}")

print("S(1) = 0 for sigma3 at n=6:", cv.linearization_of_one_is_zero("sigma3", 6))

fam = cv.sample_family(3, 40, seed=1)
for name in ("sigma2", "I1"):
    inv_n = 4 if name == "sigma2" else 6
    r = cv.rank_witness(name, inv_n, fam)
    print(f"{name}: rank {r.rank} (coefficients {r.certified_zero} vanish on {r.family_size} directions)")

# the primitive does not depend on the path from g to exp(2u) g
rng = np.random.default_rng(2)
bg = torus_background(4, (16, 16), random_trig_field((16, 16), 1, rng, amplitude=0.1))
u = random_trig_field((16, 16), 1, rng, amplitude=0.2)
for mode in ("closed", "linear", "smoothstep"):
    print(f"primitive of sigma2 ({mode}): {cv.conformal_primitive('sigma2', u, bg, mode):.14f}")
