"""Elementary symmetric functions of a matrix and how they expand along a line.

Run: python3 demos/symmetric_functions.py
"""

from fractions import Fraction as F

from cvilab import tensor_algebra as ta

A = [[F(1), F(1, 2), F(0)], [F(1, 2), F(-2), F(1)], [F(0), F(1), F(3)]]
B = [[F(0), F(1), F(0)], [F(1), F(1), F(-1)], [F(0), F(-1), F(2)]]
f = F(2, 3)

print("sigma_k(A) for k = 0..3:", [str(ta.sigma_k(A, k)) for k in range(4)])
print("Newton tensor T_1(A) =", [[str(x) for x in row] for row in ta.newton_tensor(A, 1)])

# sigma_k(A + f B) from the mixed polarizations, compared with the direct value
for k in range(1, 4):
    direct = ta.sigma_k([[a + f * b for a, b in zip(r, s)] for r, s in zip(A, B)], k)
    print(f"k={k}: expansion {ta.foil_expand(A, B, f, k)}  direct {direct}")

# a rank-one perturbation only sees the Newton tensor
v = [F(1), F(-1), F(2)]
R = [[a * b for b in v] for a in v]
print("rank-one update for k=2:", ta.foil_rank1(A, R, f, 2), "==", ta.sigma_k(
    [[a + f * b for a, b in zip(r, s)] for r, s in zip(A, R)], 2))

# the trace recursion agrees with the generalized Kronecker delta contraction
print("polarized sigma_2(A, B):", ta.sigma_polarized([A, B]), "kronecker:", ta.sigma_polarized([A, B], "kronecker"))
