"""sigma_k along exp(2tx) g on the round sphere S^{2k} is a polynomial of t-degree 2k-1.

Run: python3 demos/sphere_family.py
"""

from cvilab import sphere_witness as sw

for k in range(1, 5):
    p = sw.sphere_family_poly(k)
    print(f"k={k}: closed form holds {sw.sphere_identity_check(k)}, t-degree {p.degree_in('t')}, "
          f"nonzero t-derivatives at 0: {sw.t_derivative_nonzero(k)}")
print("k=2 polynomial:", sw.sphere_family_poly(2))
