"""Acceptance gate: one test per headline guarantee, one verdict line each.

Each test prints "criterion N ... PASS/FAIL" so a bare `pytest -v
tests/test_acceptance.py` doubles as the acceptance report.  Tolerances are
the contractual ones, not the (tighter) ones used in the unit tests.
"""

import math
import time

import numpy as np
import pytest

from conftest import gaussian_ring_bumps, oscillatory_kernel
from kinlab.fields import SampledField
from kinlab.group import Point, left_distance_batch, pair_distance_batch
from kinlab.harness import (
    HarnessConfig,
    derivative_shift_constants,
    liouville_residual,
    run_schauder_sweep,
)
from kinlab.holder import fit_expansion, interpolation_check
from kinlab.kernels import (
    KernelFamily,
    StableLike,
    TruncatedStable,
    nondegeneracy_constant,
    ring_moments,
    symbol,
    upper_bound_constant,
    weak_star_gap,
)
from kinlab.operators import CutoffSpec, Majorant, apply_pointwise, freeze_identity_residual
from kinlab.polynomials import KineticPolynomial, MultiIndex
from kinlab.spectral import SourceSpec, SpectralField, residual_check, solve


def _verdict(num, label, ok):
    print(f"criterion {num} ({label}): {'PASS' if ok else 'FAIL'}")
    assert ok


def _rand_events(rng, n, d):
    return (rng.uniform(-2, 2, n), rng.uniform(-2, 2, (n, d)), rng.uniform(-2, 2, (n, d)))


def _compose_arrays(gt, gx, gv, ts, xs, vs):
    return gt + ts, gx + xs + ts[:, None] * gv, gv + vs


def test_criterion_1_metric_suite():
    t_start = time.monotonic()
    rng = np.random.default_rng(11)
    tol = 1e-9
    n = 10_000
    ok = True
    for s in (0.25, 0.5, 0.75):
        for d in (1, 2):
            z1 = _rand_events(rng, n, d)
            z2 = _rand_events(rng, n, d)
            z3 = _rand_events(rng, n, d)
            d12 = pair_distance_batch(*z1, *z2, s, tol=tol)
            # left invariance under one random group element per batch
            g = Point(rng.uniform(-2, 2), rng.uniform(-2, 2, d), rng.uniform(-2, 2, d))
            gz1 = _compose_arrays(g.t, g.x, g.v, *z1)
            gz2 = _compose_arrays(g.t, g.x, g.v, *z2)
            dg = pair_distance_batch(*gz1, *gz2, s, tol=tol)
            ok &= bool(np.max(np.abs(dg - d12) / np.maximum(1.0, d12)) <= 3 * tol)
            # scaling homogeneity
            R = 1.7
            two_s = 2 * s
            sc = lambda z: (z[0] * R**two_s, z[1] * R ** (1 + two_s), z[2] * R)
            dR = pair_distance_batch(*sc(z1), *sc(z2), s, tol=tol)
            ok &= bool(np.max(np.abs(dR - R * d12) / np.maximum(1.0, R * d12)) <= 3 * tol)
            # triangle inequality (power form below s = 1/2)
            d13 = pair_distance_batch(*z1, *z3, s, tol=tol)
            d23 = pair_distance_batch(*z2, *z3, s, tol=tol)
            if s >= 0.5:
                violations = int(np.sum(d13 > d12 + d23 + 10 * tol))
            else:
                violations = int(np.sum(d13**two_s > d12**two_s + d23**two_s + 10 * tol))
            ok &= violations == 0
    elapsed = time.monotonic() - t_start
    _verdict(1, f"metric suite, {elapsed:.1f}s", ok and elapsed < 60.0)


def test_criterion_2_closed_form_kernel_integrals():
    radii = (0.25, 1.0, 4.0)
    lam_up = upper_bound_constant(StableLike(0.5, 1), radii)
    lam_dn = nondegeneracy_constant(StableLike(0.25, 1), radii, [[1.0], [-1.0]])
    mass1 = ring_moments(StableLike(0.5, 1), [1])[1][0]
    ok = (abs(lam_up - 2.0) <= 1e-8 and abs(lam_dn - 2.0 / 3.0) <= 1e-8
          and abs(mass1 - 1.0) <= 1e-8)
    _verdict(2, "closed-form kernel integrals", ok)


def test_criterion_3_symbol_oracle():
    t0 = time.monotonic()
    K = StableLike(0.5, 1)
    ok = all(
        abs(symbol(K, [q]) - math.pi * q) <= 1e-4 * math.pi * q
        for q in (0.5, 1.0, 2.0, 8.0)
    )
    elapsed = time.monotonic() - t0
    _verdict(3, f"symbol oracle, {elapsed:.2f}s", ok and elapsed < 10.0)


def test_criterion_4_operator_oracles():
    s = 0.5
    Kt = TruncatedStable(s, 1, cutoff=1.0)
    vsq, _ = apply_pointwise(Kt, lambda w: w[:, 0] ** 2, [0.0], reg=(2.0, 1.0),
                             omega=Majorant(lambda r: min((1 + r) ** 2, 4.0), s))
    K = StableLike(s, 1)
    psi1 = symbol(K, [1.0])
    lcos, _ = apply_pointwise(K, lambda w: np.cos(w[:, 0]), [0.7], reg=(1.0, 1.0),
                              omega=Majorant(lambda r: 1.0, s))
    aff, _ = apply_pointwise(Kt, lambda w: 3.0 - 2.0 * w[:, 0], [0.4], reg=(0.0, 1.0),
                             omega=Majorant(lambda r: 1.0, s))
    ok = (abs(vsq - 1.0 / (1.0 - s)) <= 1e-6
          and abs(lcos - (-psi1 * math.cos(0.7))) <= 1e-4
          and aff == 0.0)
    _verdict(4, "operator oracles", ok)


def test_criterion_5_solver_exactness():
    t0 = time.monotonic()
    K = StableLike(0.5, 1)
    quad_tol = 1e-10
    a = solve(SpectralField({(0, 1): 0.5}), K, None, 1.0, quad_tol)
    ok = abs(a.modes[(0, 1)] - 0.5 * math.exp(-math.pi)) <= 1e-8
    b = solve(SpectralField({(1, 1): 0.5}), K, None, 1.0, quad_tol)
    ok &= abs(b.modes[(1, 0)] - 0.5 * math.exp(-math.pi / 2)) <= 1e-8
    f0 = SpectralField({(1, 1): 0.5, (0, 2): 0.3})
    two = solve(solve(f0, K, None, 1.0, quad_tol), K, None, 1.0, quad_tol)
    once = solve(f0, K, None, 2.0, quad_tol)
    ok &= all(
        abs(two.modes.get(k, 0) - once.modes.get(k, 0)) <= 2 * quad_tol
        for k in set(two.modes) | set(once.modes)
    )
    g0 = SpectralField({(1, 100): 0.5}, periods=(2 * math.pi, 200 * math.pi))
    fields = [solve(g0, K, None, 1.0 + 0.01 * j, quad_tol) for j in range(5)]
    resid = residual_check(fields, K, None, np.linspace(0, 6, 7), np.linspace(-3, 3, 7))
    ok &= resid <= 1e-4
    elapsed = time.monotonic() - t0
    _verdict(5, f"solver exactness, {elapsed:.1f}s", ok and elapsed < 60.0)


def test_criterion_6_holder_calibration():
    origin = Point(0.0, [0.0], [0.0])
    v = np.linspace(-1, 1, 321)
    f = SampledField(np.zeros_like(v), np.zeros((len(v), 1)), v[:, None],
                     np.sqrt(np.abs(v)))
    _, resid, _ = fit_expansion(f, origin, 0.5, 0.5)
    ok = abs(resid - math.sqrt(2)) <= 0.02 * math.sqrt(2)
    # polynomials below the threshold
    p = 0.3 + 0.7 * v
    fp = SampledField(np.zeros_like(v), np.zeros((len(v), 1)), v[:, None], p)
    ok &= fit_expansion(fp, origin, 1.5, 0.5)[1] < 1e-8
    # interpolation inequality within a factor 2 on test fields
    rng = np.random.default_rng(2)
    ts = rng.uniform(-1, 1, 200)
    xs = rng.uniform(-1, 1, (200, 1))
    vs = rng.uniform(-1, 1, (200, 1))
    for values in (np.cos(3 * vs[:, 0]) + np.sin(2 * xs[:, 0] + ts),
                   np.abs(vs[:, 0]) ** 0.8,
                   ts * vs[:, 0]):
        ff = SampledField(ts, xs, vs, values)
        out = interpolation_check(ff, [origin], (0.3, 0.5, 0.9), 0.5,
                                  tolerance_factor=2.0)
        ok &= out["holds"]
    _verdict(6, "Hölder estimator calibration", ok)


def test_criterion_7_derivative_constants():
    out = derivative_shift_constants(refinements=(10, 20))
    ok = all(
        abs(v[1] - v[0]) / max(v[1], 1e-300) < 0.5 for v in out.values()
    )
    _verdict(7, "derivative shift constants", ok)


def test_criterion_8_weak_star_machinery():
    base = StableLike(0.5, 1)
    tfs = gaussian_ring_bumps()
    gaps = [weak_star_gap(oscillatory_kernel(j), base, tfs, n_r=256)
            for j in (1, 4, 16, 64)]
    ok = all(a > b for a, b in zip(gaps, gaps[1:]))
    K_lim = oscillatory_kernel(64)
    Lam = upper_bound_constant(K_lim, (0.25, 1.0, 4.0))
    ok &= all(
        mom <= Lam * (2.0**k) * (1 + 1e-9)
        for k, (_, mom) in ring_moments(K_lim, range(-2, 3)).items()
    )
    _verdict(8, "weak-star machinery", ok)


def test_criterion_9_frozen_coefficient_identity():
    eta = CutoffSpec(1.0, 2.0, 5)
    z = Point(0.1, [0.2], [0.3])
    ok = True
    for s in (0.25, 0.5):
        K = StableLike(s, 1)
        psi1 = symbol(K, [1.0])
        fam = KernelFamily(K, modulation=lambda zz: 1.0 + 0.4 * math.sin(zz.t + zz.x[0]))
        f = lambda ts, xs, vs: np.exp(-psi1 * ts) * np.cos(vs[:, 0])
        c = lambda ts, xs, vs: (-0.4 * np.sin(ts + xs[:, 0])) * (-psi1) * f(ts, xs, vs)
        ok &= freeze_identity_residual(fam, f, c, eta, z) <= 1e-5
    # A vanishes identically for constant families
    from kinlab.operators import freeze_split
    K = StableLike(0.5, 1)
    fam0 = KernelFamily(K, modulation=lambda zz: 1.0)
    f0 = lambda ts, xs, vs: np.cos(vs[:, 0])
    _, A0, _ = freeze_split(fam0, f0, eta, z)
    ok &= A0 == 0.0
    # A and B stay bounded (stable) across far-field refinement
    psi1 = symbol(K, [1.0])
    fam = KernelFamily(K, modulation=lambda zz: 1.0 + 0.4 * math.sin(zz.t + zz.x[0]))
    f = lambda ts, xs, vs: np.exp(-psi1 * ts) * np.cos(vs[:, 0])
    la, aa, ba = freeze_split(fam, f, eta, z, r_max_ring=12)
    lb, ab, bb = freeze_split(fam, f, eta, z, r_max_ring=14)
    ok &= abs(ab - aa) <= 0.5 * max(abs(ab), 1e-12)
    ok &= abs(bb - ba) <= 0.5 * max(abs(bb), 1e-12)
    _verdict(9, "frozen-coefficient identity", ok)


def test_criterion_10_schauder_ratio_sweep():
    t0 = time.monotonic()
    ok = True
    for s in (0.25, 0.5, 0.75):
        rep = run_schauder_sweep(HarnessConfig(s=s))
        ok &= rep.passed
        ok &= all(np.isfinite(r["ratio"]) for r in rep.records)
    # kinetic polynomial solutions give numerator zero
    from kinlab.harness import _masked_seminorm
    rng = np.random.default_rng(1)
    ts = rng.uniform(0, 1, 600)
    xs = rng.uniform(-1, 1, (600, 1))
    vs = rng.uniform(-1, 1, (600, 1))
    f = SampledField(ts, xs, vs, 0.7 * ts + 0.2)
    d_c = left_distance_batch(Point(1.0, [0.0], [0.0]), ts, xs, vs, 0.5)
    num = _masked_seminorm(f, np.flatnonzero(d_c < 0.5)[:16], 1.4, 0.5, d_c < 1.0, {})
    ok &= num < 1e-8
    elapsed = time.monotonic() - t0
    _verdict(10, f"Schauder ratio sweep, {elapsed:.0f}s", ok and elapsed < 900.0)


def test_criterion_11_liouville_residuals():
    s = 0.5
    K = TruncatedStable(s, 1, cutoff=1.0)
    xi = Point(-0.3, [0.2], [0.4])
    cases = [
        KineticPolynomial({MultiIndex(0, (0,), (0,)): 1.0}, s, 1),
        KineticPolynomial({MultiIndex(0, (0,), (1,)): 1.0}, s, 1),
        KineticPolynomial({MultiIndex(1, (0,), (0,)): 1.0}, s, 1),
        KineticPolynomial({MultiIndex(0, (0,), (2,)): 1.0}, s, 1),
        KineticPolynomial({MultiIndex(1, (0,), (0,)): 2.0,
                           MultiIndex(0, (0,), (1,)): -0.5,
                           MultiIndex(0, (0,), (0,)): 3.0}, s, 1),
    ]
    ok = all(liouville_residual(p, K, xi) <= 1e-8 for p in cases)
    _verdict(11, "Liouville residuals", ok)
