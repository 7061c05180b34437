"""The verification suites.

Each suite is a function ``(config) -> list[CheckRecord]``.  Randomness is
drawn from generators seeded by ``(config.seed, check name)`` so a check's
inputs do not depend on which other checks ran.
"""

from __future__ import annotations

import random
import zlib
from fractions import Fraction as F

import numpy as np

from .. import conformal_variation as cv
from .. import operator_library as ol
from .. import sphere_witness as sw
from .. import tensor_algebra as ta
from ..curvature_invariants import INVARIANTS, relations_check
from ..exactnum import mpq, symbolic_context
from ..field_calculus import symbolic_background, torus_background
from ..field_calculus.grid import random_trig_field
from .config import SuiteConfig
from .records import Recorder

# ---------------------------------------------------------------------------
# shared inputs
# ---------------------------------------------------------------------------


def _seed(config: SuiteConfig, name: str) -> int:
    return (config.seed * 1_000_003 + zlib.crc32(name.encode())) % (2**32)


def _np_rng(config, name):
    return np.random.default_rng(_seed(config, name))


def _py_rng(config, name):
    return random.Random(_seed(config, name))


def _rand_q(rng: random.Random):
    return mpq(rng.randint(-9, 9), rng.randint(1, 6))


def _rand_sym(rng, n):
    A = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            A[i][j] = A[j][i] = _rand_q(rng)
    return A


def _exact(res) -> tuple[bool, bool]:
    """(ok, residual flag) for an exact residual field or scalar."""
    if hasattr(res, "is_zero"):
        z = res.is_zero()
    else:
        z = res == 0
    return z, z


#: polynomial potentials (two active axes) with nonvanishing fourth derivatives
POTENTIALS_2D = [
    {(1, 0): 1, (0, 2): F(1, 2), (1, 1): F(1, 3), (0, 4): F(1, 12)},
    {(2, 0): -1, (0, 1): F(1, 2), (3, 1): F(1, 6)},
    {(1, 1): 1, (4, 0): F(-1, 24), (0, 3): F(1, 5)},
]


def _upsilon_family(size: int, nvars: int = 2) -> list[dict]:
    """Deterministic polynomial directions: fixed leaders, then degree-2..4 combinations."""
    fam = list(POTENTIALS_2D)
    mons = [m for m in cv._monomials(nvars, 4)]
    i = 0
    while len(fam) < size:
        a, b, c = mons[i % len(mons)], mons[(3 * i + 1) % len(mons)], mons[(7 * i + 2) % len(mons)]
        d = {}
        for m, coef in ((a, 1), (b, F(-1, 2)), (c, F(1, 3))):
            d[m] = d.get(m, 0) + coef
        d = {m: v for m, v in d.items() if v}
        if d and d not in fam:
            fam.append(d)
        i += 1
    return fam[:size]


def _dim_loop(rec: Recorder, config, default, check: str, anchor: str, body, supported=lambda n: True):
    dims = config.dims_for(default)
    if not dims:
        rec.skip(check, anchor, "empty dimension list")
        return
    for n in dims:
        if not supported(n):
            rec.skip(f"{check} n={n}", anchor, "dimension not supported", {"n": n})
            continue
        rec.run(f"{check} n={n}", anchor, lambda n=n: body(n), {"n": n})


# ---------------------------------------------------------------------------
# algebra
# ---------------------------------------------------------------------------


def suite_algebra(config: SuiteConfig):
    rec = Recorder("algebra")
    one = mpq(1)

    def foil_body(which):
        def body(n):
            rng = _py_rng(config, f"foil-{which}-{n}")
            for k in range(n + 1):
                for _ in range(config.samples):
                    A, f = _rand_sym(rng, n), _rand_q(rng)
                    if which == "general":
                        B = _rand_sym(rng, n)
                        lhs = ta.sigma_k(ta.mat_add(A, ta.mat_scale(f, B)), k, one)
                        rhs = ta.foil_expand(A, B, f, k, one)
                    elif which == "identity":
                        lhs = ta.sigma_k(ta.mat_add(A, ta.identity(n, f, 0)), k, one)
                        rhs = ta.foil_identity(A, f, k, one)
                    else:
                        v = [_rand_q(rng) for _ in range(n)]
                        B = [[a * b for b in v] for a in v]
                        lhs = ta.sigma_k(ta.mat_add(A, ta.mat_scale(f, B)), k, one)
                        rhs = ta.foil_rank1(A, B, f, k, one)
                    if lhs != rhs:
                        return False, False
            return True, True

        return body

    for which, anchor in (
        ("general", "sigma_k along a line via mixed polarizations"),
        ("identity", "sigma_k shifted by a multiple of the identity"),
        ("rank1", "sigma_k shifted by a rank-one endomorphism"),
    ):
        _dim_loop(rec, config, range(2, 7), f"foil-{which}", anchor, foil_body(which), lambda n: 1 <= n <= 8)

    def newton_oracle():
        rng = _py_rng(config, "newton-oracle")
        for n in range(1, 6):
            for k in range(0, min(3, n - 1) + 1):
                A = _rand_sym(rng, n)
                T = ta.newton_tensor(A, k, one)
                if k and T != ta.kronecker_newton([A] * k):
                    return False, False
        return True, True

    rec.run("newton-vs-kronecker", "Newton tensor recursion against Kronecker contraction", newton_oracle)

    def polar_oracle():
        rng = _py_rng(config, "polar-oracle")
        for n in range(1, 5):
            for k in range(1, min(n, 3) + 1):
                args = [_rand_sym(rng, n) for _ in range(k)]
                if ta.sigma_polarized(args, one=one) != ta.kronecker_sigma(args):
                    return False, False
        return True, True

    rec.run("polarization-vs-kronecker", "polarized sigma_k against Kronecker contraction", polar_oracle)

    ctx = symbolic_context(2, [POTENTIALS_2D[0]])

    def relations(n):
        bg = symbolic_background(n, ctx, 0)
        res = relations_check(bg)
        ok = all(r.identically_zero for r in res)
        return ok, ok

    _dim_loop(rec, config, (3, 5, 6, 7), "cvi-relations", "linear relations among weight -6 invariants",
              relations, lambda n: n >= 3 and n != 4)
    return rec.records


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------


def suite_coefficients(config: SuiteConfig):
    rec = Recorder("coefficients")
    anchor_a = "trilinear coefficients a_rst"
    for k in range(1, 7):
        def sym_tan(k=k):
            ok = all(
                ol.trilinear_symmetric(ol.trilinear_table(n, k)) and ol.trilinear_tangency_check(n, k)
                for n in range(2 * k, 2 * k + 7)
            )
            return ok, ok

        rec.run(f"trilinear-symmetry-tangency k={k}", anchor_a, sym_tan, {"k": k, "n": f"{2 * k}..{2 * k + 6}"})

    def k1():
        ok = all(v == 1 for n in range(2, 9) for v in ol.trilinear_table(n, 1).values())
        return ok, ok

    rec.run("trilinear-k1-all-one", anchor_a, k1)

    def k2():
        ok = all(ol.trilinear_coeff(n, 2, 0, 1, 1) == F(2 * (n - 4), n + 2) for n in range(4, 11))
        return ok, ok

    rec.run("trilinear-k2-prefactor", anchor_a, k2)

    anchor_b = "b_j recursion"

    def b1():
        ctx = symbolic_context(2, [POTENTIALS_2D[0]])
        ok = all(ol.b_coeffs(n, 1) == [0, 2] for n in range(3, 9))
        x, y = ctx.coord(0), ctx.coord(1)
        u = x * x * y + ctx.exp((1,)) * y
        for n in (3, 5, 6):
            bg = symbolic_background(n, ctx)
            ok = ok and (ol.l2k_apply(1, [u], bg) + bg.laplacian(u)).is_zero()
        return ok, ok

    rec.run("b-k1-neg-laplacian", anchor_b, b1)

    def b2():
        ok = all(ol.b_coeffs(n, 2)[1:] == [1, 2] for n in range(3, 12))
        return ok, ok

    rec.run("b-k2-values", anchor_b, b2)
    return rec.records


# ---------------------------------------------------------------------------
# flat operators
# ---------------------------------------------------------------------------


def _flat_inputs(ctx):
    x, y = ctx.coord(0), ctx.coord(1)
    e = ctx.exp((F(1, 2),))
    return [x * x + y, x * y + 1, y * y * y + x, e * x + 1, x + 2 * y * y]


def suite_flat_operators(config: SuiteConfig):
    rec = Recorder("flat-operators")
    ctx = symbolic_context(2, [POTENTIALS_2D[0]])
    bg = symbolic_background(5, ctx)
    us = _flat_inputs(ctx)
    anchor = "symmetrized D_j^k"
    for k in (2, 3):
        for j in range(k):
            def brute(j=j, k=k):
                res = ol.djk_apply(j, k, us[: 2 * k - 1], bg) - ol.djk_apply(j, k, us[: 2 * k - 1], bg, "brute")
                return _exact(res)

            rec.run(f"djk-coalesced-vs-permutations j={j} k={k}", anchor, brute, {"j": j, "k": k})

            def diag(j=j, k=k):
                u = us[3]
                return _exact(ol.djk_apply(j, k, [u] * (2 * k - 1), bg) - ol.djk_diagonal(j, k, u, bg))

            rec.run(f"djk-diagonal j={j} k={k}", anchor, diag, {"j": j, "k": k})
            if j >= 1:
                rec.run(
                    f"djk-second-order-form j={j} k={k}",
                    "D_j^k diagonal as a second-order expression",
                    lambda j=j, k=k: _exact(ol.djk_diagonal_identity_check(j, k, us[3], bg)),
                    {"j": j, "k": k},
                )

    def top1():
        u = us[3]
        return _exact(ol.top_degree_apply(1, [u], bg) - bg.laplacian(u))

    rec.run("top-degree-k1-laplacian", "top-degree operator", top1)

    def trilinear_flat(n):
        fb = symbolic_background(n, ctx)
        u, v = us[0], us[3]
        ok = True
        for k in (1, 2):
            if n < 3 and k == 2:
                continue
            ok = ok and (ol.trilinear_flat_apply(k, u, v, fb) - ol.covariant_pair_apply(2 * k, u, v, fb)).is_zero()
        return ok, ok

    _dim_loop(rec, config, (3, 5, 6, 7), "trilinear-flat-formula", "trilinear family on flat space", trilinear_flat,
              lambda n: n >= 3)

    fam = _upsilon_family(config.assembly_family)

    def assembly(n):
        ok = True
        for i, d in enumerate(fam):
            cctx = symbolic_context(2, [d])
            ok = ok and ol.sigma_assembly_check(2, n, cctx, c=F(1, 1 + i % 3)).is_zero()
        return ok, ok

    _dim_loop(rec, config, (5, 6, 7), "l4-sigma2 k=2", "L_4 recovers sigma_2 on exponentials",
              assembly, lambda n: n > 4)
    return rec.records


# ---------------------------------------------------------------------------
# covariance
# ---------------------------------------------------------------------------


def suite_covariance(config: SuiteConfig, negative: bool = False):
    rec = Recorder("negative-controls" if negative else "covariance")
    ctx = symbolic_context(2, POTENTIALS_2D)
    x, y = ctx.coord(0), ctx.coord(1)
    u = x * x + y + 1
    v = ctx.exp((0, 1, 0)) * (x + 2) + y * y
    anchor = "conformal covariance at bidegree ((n-2k)/3, (2n+2k)/3)"
    for name, op, pert, default, lo in (
        ("D2", ol.d2_op, {"J": F(1, 5)}, (3, 5, 6, 7), 2),
        ("D4", ol.d4_op, {"Q4": F(1, 5)}, (4, 5, 6, 7), 3),
    ):
        def body(n, op=op, pert=pert):
            o = op(pert) if negative else op()
            ok = all(ol.covariance_check(o, a, [u, v], n, ctx).is_zero() for a in range(len(POTENTIALS_2D)))
            return ok, ok

        check = f"{name}-perturbed-covariance" if negative else f"{name}-covariance"
        dims = config.dims_for(default)
        if not dims:
            rec.skip(check, anchor, "empty dimension list")
            continue
        for n in dims:
            if n < lo:
                rec.skip(f"{check} n={n}", anchor, "dimension not supported", {"n": n})
                continue
            params = {"n": n, "perturbation": {k: str(val) for k, val in pert.items()}} if negative else {"n": n}
            rec.run(f"{check} n={n}", anchor, lambda n=n, body=body: body(n), params, expect_failure=negative)
    return rec.records


# ---------------------------------------------------------------------------
# self-adjointness and energy
# ---------------------------------------------------------------------------


def suite_self_adjointness(config: SuiteConfig):
    rec = Recorder("self-adjointness")
    tol = config.tol("flat_quadrature")
    N = config.grid_for(24)
    rng = _np_rng(config, "flat-fields")
    sh = (N, N)
    fs = [random_trig_field(sh, 1, rng, offset=1.0) for _ in range(7)]
    flat = torus_background(4, sh)
    anchor = "formal self-adjointness"

    def sa(op, nin, bg, t):
        def body():
            r = ol.selfadjointness_check(op, fs[:nin], bg)
            return r.relative < t, r.relative

        return body

    rec.run("neg-laplacian flat", anchor, sa(ol.neg_laplacian_op(), 2, flat, tol), {"N": N, "tol": tol})
    rec.run("top-degree k=3 flat", anchor, sa(ol.top_degree_op(3), 4, flat, tol), {"N": N, "tol": tol})
    for k in (2, 3):
        for j in range(k):
            rec.run(f"djk j={j} k={k} flat", anchor, sa(ol.djk_op(j, k), 2 * k, flat, tol), {"N": N, "tol": tol})

    etol = config.tol("energy")
    for k in (2, 3):
        for j in range(k):
            def energy(j=j, k=k):
                lhs, rhs = ol.djk_energy_sides(j, k, fs[: 2 * k], flat)
                r = abs(lhs - rhs) / max(abs(rhs), 1e-300)
                return r < etol, r

            rec.run(f"djk-energy j={j} k={k}", "Dirichlet energy of D_j^k", energy, {"N": N, "tol": etol})

    ctol = config.tol("curved_quadrature")
    rngc = _np_rng(config, "curved-fields")
    for m in (2, 3):
        shc = (N,) * m
        phi = random_trig_field(shc, 1, rngc, amplitude=0.1)
        cf = [random_trig_field(shc, 1, rngc, offset=1.0) for _ in range(3)]
        for name, op, dims in (("D2", ol.d2_op(), (3, 5, 6, 7)), ("D4", ol.d4_op(), (4, 5, 6, 7))):
            for n in config.dims_for(dims):
                if n < m or (name == "D4" and n < 3) or n < 2:
                    rec.skip(f"{name} curved m={m} n={n}", anchor, "dimension not supported", {"n": n})
                    continue

                def curved(op=op, n=n, phi=phi, cf=cf):
                    r = ol.selfadjointness_check(op, cf, torus_background(n, phi.shape, phi))
                    return r.relative < ctol, r.relative

                rec.run(f"{name} curved m={m} n={n}", anchor, curved,
                        {"N": N, "axes": m, "amplitude": 0.1, "tol": ctol})
    return rec.records


# ---------------------------------------------------------------------------
# variation
# ---------------------------------------------------------------------------

LINEARIZED = (("J", 3), ("sigma2", 5), ("sigma3", 6), ("I1", 6), ("I2", 7), ("L1", 5), ("L2", 6))


def suite_variation(config: SuiteConfig):
    rec = Recorder("variation")
    anchor_s = "conformal linearization"
    for name, n in LINEARIZED:
        rec.run(f"S(1)=0 {name}", anchor_s,
                lambda name=name, n=n: (lambda z: (z, z))(cv.linearization_of_one_is_zero(name, n)), {"n": n})

    def j_flat():
        ctx = cv.jet_context(2, [POTENTIALS_2D[1]])
        bg = symbolic_background(3, ctx)
        S = cv.linearization("J", "tY", bg)
        Y = S.ctx.poly(S.ctx.space.from_terms({(2, 0, 0): -1, (0, 1, 0): F(1, 2), (3, 1, 0): F(1, 6)}))
        lap = Y.partial(0).partial(0) + Y.partial(1).partial(1)
        return _exact(S + lap)

    rec.run("S=-Laplacian for J at flat", anchor_s, j_flat)

    tol = config.tol("linearization")
    N = config.grid_for(32)
    rng = _np_rng(config, "linearization-fields")
    sh = (N, N)
    phi = random_trig_field(sh, 1, rng, amplitude=0.1)
    u = random_trig_field(sh, 1, rng, amplitude=0.1)
    v = random_trig_field(sh, 1, rng, amplitude=0.1)
    for name, n in LINEARIZED:
        def lin(name=name, n=n):
            r = cv.linearization_selfadjoint_check(name, torus_background(n, sh, phi), u, v)
            return r.relative < tol, r.relative

        rec.run(f"S symmetric {name}", anchor_s, lin, {"n": n, "N": N, "tol": tol})

    def l1ell():
        ok = True
        for name, n, ell in (("sigma2", 5, 3), ("sigma2", 4, 3), ("J", 3, 1), ("J", 5, 2), ("sigma3", 7, 5)):
            ok = ok and cv.l1ell_check(name, ell, cv.l1ell_background(n)).is_zero()
        return ok, ok

    rec.run("L_1^l(1)", "first operator at the constant function", l1ell)

    def recovery(n):
        ctx = cv.jet_context(2, [POTENTIALS_2D[0]])
        ok = True
        ops = {"D2": ol.d2_op(), "D4": ol.d4_op(), "L4": ol.l2k_op(2), "L6": ol.l2k_op(3)}
        for key, (inv, ell) in cv.recovery_targets(n).items():
            ok = ok and ol_is_zero(cv.recovery_check(ops[key], inv, ell, n, "tY", ctx))
        return ok, ok

    _dim_loop(rec, config, (3, 5, 6, 7), "recovery", "operators recover invariants", recovery,
              lambda n: n >= 3 and n != 4)

    def consistency():
        ctx = cv.jet_context(2, [POTENTIALS_2D[2]], plain=True)
        ok = True
        for name, n in (("sigma2", 5), ("I1", 6), ("Q4", 4)):
            bg = symbolic_background(n, ctx)
            ok = ok and cv.jet_consistency(name, bg, F(2, 3)) and cv.jet_consistency(name, bg, F(-1, 2))
        return ok, ok

    rec.run("jet-consistency", "conformal jet is the polynomial family", consistency)

    def mixed():
        a, b = POTENTIALS_2D[1], POTENTIALS_2D[2]
        ok = all(all(cv.mixed_jet_symmetry(name, a, b, n, 2)) for name, n in (("sigma2", 4), ("v3", 6)))
        return ok, ok

    rec.run("second-order-polarization", "L_2^2 symmetric bilinear", mixed)
    return rec.records


def ol_is_zero(res) -> bool:
    return res.is_zero()


# ---------------------------------------------------------------------------
# rank, primitive, sphere
# ---------------------------------------------------------------------------

RANKS = (("sigma2", 4, 4), ("sigma3", 6, 6), ("I1", 6, 4), ("I2", 6, 4))


def suite_rank(config: SuiteConfig):
    rec = Recorder("rank")
    full = cv.sample_family(3, None)
    if config.family_size is not None and config.family_size < len(full):
        fam = cv.sample_family(3, config.family_size, seed=config.seed)
    else:
        fam = full
    for name, n, expected in RANKS:
        def body(name=name, n=n, expected=expected):
            r = cv.rank_witness(name, n, fam)
            higher = all(j in r.certified_zero for j in range(expected, r.max_degree_seen + 1))
            ok = r.rank == expected and higher
            return ok, {"rank": r.rank, "witness_degree": r.witness_degree, "certified_zero": r.certified_zero}

        rec.run(f"rank {name}", "rank of a conformally variational invariant", body,
                {"n": n, "expected": expected, "family": len(fam)})
    return rec.records


def suite_primitive(config: SuiteConfig):
    rec = Recorder("primitive")
    for name, n, m, default_N, tname in (("sigma2", 4, 2, 16, "primitive_sigma2"), ("v3", 6, 3, 12, "primitive_v3")):
        tol = config.tol(tname)
        N = config.grid_for(default_N)

        def body(name=name, n=n, m=m, N=N, tol=tol):
            rng = _np_rng(config, f"primitive-{name}")
            sh = (N,) * m
            bg = torus_background(n, sh, random_trig_field(sh, 1, rng, amplitude=0.1))
            u = random_trig_field(sh, 1, rng, amplitude=0.2)
            vals = [cv.conformal_primitive(name, u, bg, mode) for mode in ("closed", "linear", "smoothstep")]
            scale = max(abs(x) for x in vals)
            dev = (max(vals) - min(vals)) / scale
            return dev < tol, dev

        rec.run(f"path-independence {name}", "conformal primitive in the critical dimension", body,
                {"n": n, "axes": m, "N": N, "tol": tol})
    return rec.records


def suite_sphere(config: SuiteConfig):
    rec = Recorder("sphere")
    for k in range(1, 6):
        rec.run(f"sphere-identity k={k}", "sigma_k on the round-sphere conformal family",
                lambda k=k: (lambda z: (z, z))(sw.sphere_identity_check(k)), {"k": k})
    return rec.records


# ---------------------------------------------------------------------------
# negative controls
# ---------------------------------------------------------------------------


def suite_negative_controls(config: SuiteConfig):
    rec = Recorder("negative-controls")
    records = list(suite_covariance(config, negative=True))
    rec.records.extend(records)

    def trilinear_perturbed():
        ok = True
        for k in (2, 3):
            for n in (2 * k + 1, 2 * k + 3):
                t = ol.trilinear_table(n, k)
                key = (0, 1, k - 1)
                t = dict(t)
                t[key] = t[key] + F(1, 7)
                ok = ok and ol.trilinear_tangency_check(n, k, t)
        return ok, ok

    rec.run("trilinear-perturbed-tangency", "trilinear coefficients a_rst", trilinear_perturbed, expect_failure=True)

    def sphere_mutated():
        ok = all(sw.sphere_identity_check(k, F(3, 2)) for k in range(1, 6))
        return ok, ok

    rec.run("sphere-mutated-binomial", "sigma_k on the round-sphere conformal family", sphere_mutated,
            expect_failure=True)

    def assembly_perturbed():
        ctx = symbolic_context(2, [POTENTIALS_2D[0]])
        w = ol.l2k_coefficients(5, 2)
        w[1] = w[1] + F(1, 3)
        ok = ol.sigma_assembly_check(2, 5, ctx, weights=w).is_zero()
        return ok, ok

    rec.run("l4-sigma2-perturbed-weights", "L_4 recovers sigma_2 on exponentials", assembly_perturbed,
            expect_failure=True)

    def relation_perturbed():
        ctx = symbolic_context(2, [POTENTIALS_2D[0]])
        bg = symbolic_background(5, ctx, 0)
        res = INVARIANTS["I1"].evaluate(bg) - INVARIANTS["C0"].evaluate(bg).scale(F(7, 2) + F(1, 10))
        return _exact(res)

    rec.run("cvi-relation-perturbed", "linear relations among weight -6 invariants", relation_perturbed,
            expect_failure=True)
    return rec.records


SUITE_FUNCS = {
    "algebra": suite_algebra,
    "coefficients": suite_coefficients,
    "flat-operators": suite_flat_operators,
    "covariance": suite_covariance,
    "self-adjointness": suite_self_adjointness,
    "variation": suite_variation,
    "rank": suite_rank,
    "primitive": suite_primitive,
    "sphere": suite_sphere,
    "negative-controls": suite_negative_controls,
}


def run_suite(name: str, config: SuiteConfig):
    """Records of one named suite, or of every suite for ``"all"``."""
    if name == "all":
        out = []
        for s in SUITE_FUNCS:
            out.extend(SUITE_FUNCS[s](config))
        return out
    if name not in SUITE_FUNCS:
        raise KeyError(f"unknown suite {name!r}")
    return SUITE_FUNCS[name](config)
