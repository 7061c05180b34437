"""Conformally variational invariants on conformally flat backgrounds.

Modules:

* ``exactnum``: rationals, sparse polynomials and exponential-polynomial fields
* ``tensor_algebra``: elementary symmetric functions, Newton tensors, polarizations
* ``field_calculus``: calculus on ``exp(2 phi) delta``, exact or on a torus grid
* ``curvature_invariants``: J, sigma_k, Q4 and the weight -6 invariants
* ``operator_library``: conformally covariant polydifferential operators
* ``conformal_variation``: conformal jets, linearizations, rank and primitives
* ``sphere_witness``: the closed form of sigma_k along a sphere family
* ``cli_harness``: verification suites and the ``cvilab`` command
"""

__version__ = "0.1.0"

from . import (
    conformal_variation,
    curvature_invariants,
    exactnum,
    field_calculus,
    operator_library,
    sphere_witness,
    tensor_algebra,
)

__all__ = [
    "conformal_variation",
    "curvature_invariants",
    "exactnum",
    "field_calculus",
    "operator_library",
    "sphere_witness",
    "tensor_algebra",
]
