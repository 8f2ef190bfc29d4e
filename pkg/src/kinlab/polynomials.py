"""Kinetic monomial algebra: degrees, evaluation, translation, scaling.

A monomial t^{j_t} x^{j_x} v^{j_v} has kinetic degree
2s*j_t + (1+2s)*|j_x| + |j_v|, so that m(S_R z) = R^{deg} m(z).
Degrees live on the lattice N + 2sN; when s is rational they are compared
with exact fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np
from scipy.optimize import linprog
from scipy.stats import qmc

from .group import Point, ScalingExponent, _as_exponent, compose, knorm

__all__ = [
    "MultiIndex",
    "KineticPolynomial",
    "kinetic_degree",
    "monomial_basis",
    "left_translate",
    "scale_poly",
    "differentiate",
    "coeff_bound_from_sup",
]

_DEG_TOL = 1e-12


@dataclass(frozen=True)
class MultiIndex:
    """Exponents (j_t, j_x, j_v) of a kinetic monomial."""

    j_t: int
    j_x: tuple[int, ...]
    j_v: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "j_x", tuple(int(k) for k in self.j_x))
        object.__setattr__(self, "j_v", tuple(int(k) for k in self.j_v))
        if self.j_t < 0 or any(k < 0 for k in self.j_x) or any(k < 0 for k in self.j_v):
            raise ValueError("multi-index entries must be nonnegative")
        if len(self.j_x) != len(self.j_v):
            raise ValueError("j_x and j_v must have equal length")

    @property
    def d(self) -> int:
        return len(self.j_x)

    @classmethod
    def constant(cls, d: int) -> "MultiIndex":
        return cls(0, (0,) * d, (0,) * d)


def kinetic_degree(j, s):
    """Kinetic degree of a multi-index or polynomial.

    Returns a Fraction when s is rational, else a float.
    """
    s = _as_exponent(s)
    if isinstance(j, KineticPolynomial):
        if not j.terms:
            return Fraction(0) if s.as_fraction is not None else 0.0
        return max(kinetic_degree(m, s) for m in j.terms)
    frac = s.as_fraction
    if frac is not None:
        return 2 * frac * j.j_t + (1 + 2 * frac) * sum(j.j_x) + sum(j.j_v)
    return 2.0 * s.s * j.j_t + (1.0 + 2.0 * s.s) * sum(j.j_x) + sum(j.j_v)


def _deg_lt(j: MultiIndex, threshold: float, s: ScalingExponent) -> bool:
    deg = kinetic_degree(j, s)
    if isinstance(deg, Fraction):
        thr = Fraction(threshold).limit_denominator(10**6)
        if abs(float(thr) - threshold) < 1e-15:
            return deg < thr
    return float(deg) < threshold - _DEG_TOL


class KineticPolynomial:
    """Sparse polynomial over kinetic monomials.

    Zero-coefficient terms are never stored.  Value semantics: all operations
    return new polynomials.
    """

    def __init__(self, terms: Mapping[MultiIndex, float], s, d: int):
        self.s = _as_exponent(s)
        self.d = int(d)
        clean = {}
        for j, c in terms.items():
            if j.d != self.d:
                raise ValueError("multi-index dimension mismatch")
            if c != 0.0:
                clean[j] = float(c)
        self.terms: dict[MultiIndex, float] = clean

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, s, d: int) -> "KineticPolynomial":
        return cls({}, s, d)

    @classmethod
    def constant(cls, c: float, s, d: int) -> "KineticPolynomial":
        return cls({MultiIndex.constant(d): c}, s, d)

    @classmethod
    def monomial(cls, j: MultiIndex, s, coeff: float = 1.0) -> "KineticPolynomial":
        return cls({j: coeff}, s, j.d)

    # -- algebra ------------------------------------------------------------
    def __add__(self, other: "KineticPolynomial") -> "KineticPolynomial":
        out = dict(self.terms)
        for j, c in other.terms.items():
            out[j] = out.get(j, 0.0) + c
        return KineticPolynomial(out, self.s, self.d)

    def __sub__(self, other: "KineticPolynomial") -> "KineticPolynomial":
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return KineticPolynomial({j: c * other for j, c in self.terms.items()}, self.s, self.d)
        out: dict[MultiIndex, float] = {}
        for j1, c1 in self.terms.items():
            for j2, c2 in other.terms.items():
                j = MultiIndex(
                    j1.j_t + j2.j_t,
                    tuple(a + b for a, b in zip(j1.j_x, j2.j_x)),
                    tuple(a + b for a, b in zip(j1.j_v, j2.j_v)),
                )
                out[j] = out.get(j, 0.0) + c1 * c2
        return KineticPolynomial(out, self.s, self.d)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "KineticPolynomial":
        out = KineticPolynomial.constant(1.0, self.s, self.d)
        for _ in range(int(n)):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, KineticPolynomial) and self.terms == other.terms

    def __repr__(self):
        items = ", ".join(f"{j.j_t},{j.j_x},{j.j_v}: {c:g}" for j, c in sorted(
            self.terms.items(), key=lambda kv: (kv[0].j_t, kv[0].j_x, kv[0].j_v)))
        return f"KineticPolynomial({{{items}}}, s={self.s.s}, d={self.d})"

    def isclose(self, other: "KineticPolynomial", tol: float = 1e-10) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(j, 0.0) - other.terms.get(j, 0.0)) <= tol for j in keys)

    # -- evaluation ---------------------------------------------------------
    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        """Evaluate at a Point, or vectorized at arrays (ts, xs, vs)."""
        if isinstance(z, Point):
            if z.d != self.d:
                raise ValueError("point dimension mismatch")
            return float(self.eval_arrays(np.array([z.t]), z.x[None, :], z.v[None, :])[0])
        ts, xs, vs = z
        return self.eval_arrays(ts, xs, vs)

    def eval_arrays(self, ts, xs, vs) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        vs = np.atleast_2d(np.asarray(vs, dtype=float))
        out = np.zeros_like(ts)
        for j, c in self.terms.items():
            term = np.full_like(ts, c)
            if j.j_t:
                term = term * ts**j.j_t
            for i, k in enumerate(j.j_x):
                if k:
                    term = term * xs[:, i] ** k
            for i, k in enumerate(j.j_v):
                if k:
                    term = term * vs[:, i] ** k
            out += term
        return out

    # -- serialization ------------------------------------------------------
    def to_records(self) -> list[tuple]:
        """List of (j_t, j_x, j_v, coefficient), sorted for reproducibility."""
        return [
            (j.j_t, list(j.j_x), list(j.j_v), c)
            for j, c in sorted(self.terms.items(), key=lambda kv: (kv[0].j_t, kv[0].j_x, kv[0].j_v))
        ]

    @classmethod
    def from_records(cls, records: Iterable, s, d: int) -> "KineticPolynomial":
        return cls({MultiIndex(jt, tuple(jx), tuple(jv)): c for jt, jx, jv, c in records}, s, d)


def monomial_basis(threshold: float, s, d: int) -> list[MultiIndex]:
    """All multi-indices of kinetic degree strictly below the threshold.

    Sorted by (degree, lexicographic exponents); finite because the degree
    increments on N + 2sN are positive.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    s = _as_exponent(s)
    two_s = s.two_s
    out = []
    max_jt = int(np.floor(threshold / two_s)) + 1
    max_jx = int(np.floor(threshold / (1.0 + two_s))) + 1
    max_jv = int(np.floor(threshold)) + 1

    def rec_tuple(limit, slots):
        if slots == 0:
            yield ()
            return
        for k in range(limit + 1):
            for rest in rec_tuple(limit - k, slots - 1):
                yield (k,) + rest

    for jt in range(max_jt + 1):
        for jx in rec_tuple(max_jx, d):
            for jv in rec_tuple(max_jv, d):
                j = MultiIndex(jt, jx, jv)
                if _deg_lt(j, threshold, s):
                    out.append(j)
    out.sort(key=lambda j: (float(kinetic_degree(j, s)), j.j_t, j.j_x, j.j_v))
    return out


def left_translate(p: KineticPolynomial, z0: Point) -> KineticPolynomial:
    """Re-expansion q with q(z) = p(z0 o z) identically.

    Substitutes t -> t0 + t, x_i -> x0_i + x_i + t*v0_i, v_i -> v0_i + v_i.
    The x -> t coupling preserves the kinetic degree (t weighs less than x).
    """
    if z0.d != p.d:
        raise ValueError("dimension mismatch")
    s, d = p.s, p.d

    def var(j: MultiIndex, c: float) -> KineticPolynomial:
        return KineticPolynomial({j: c}, s, d)

    zt = (0,) * d
    t_sub = KineticPolynomial.constant(z0.t, s, d) + var(MultiIndex(1, zt, zt), 1.0)
    x_subs = []
    v_subs = []
    for i in range(d):
        ex = tuple(1 if k == i else 0 for k in range(d))
        x_subs.append(
            KineticPolynomial.constant(z0.x[i], s, d)
            + var(MultiIndex(0, ex, zt), 1.0)
            + var(MultiIndex(1, zt, zt), float(z0.v[i]))
        )
        v_subs.append(KineticPolynomial.constant(z0.v[i], s, d) + var(MultiIndex(0, zt, ex), 1.0))

    out = KineticPolynomial.zero(s, d)
    for j, c in p.terms.items():
        term = KineticPolynomial.constant(c, s, d)
        term = term * (t_sub**j.j_t)
        for i, k in enumerate(j.j_x):
            term = term * (x_subs[i] ** k)
        for i, k in enumerate(j.j_v):
            term = term * (v_subs[i] ** k)
        out = out + term
    return out


def scale_poly(p: KineticPolynomial, R: float) -> KineticPolynomial:
    """q with q(z) = p(S_R z): coefficients pick up R^{deg_k m_j}."""
    if R <= 0:
        raise ValueError("scaling factor must be positive")
    return KineticPolynomial(
        {j: c * R ** float(kinetic_degree(j, p.s)) for j, c in p.terms.items()}, p.s, p.d
    )


def differentiate(p: KineticPolynomial, which: str, i: int = 0) -> KineticPolynomial:
    """Partial derivative d/dt, d/dx_i or d/dv_i, or the transport derivative.

    which: 't', 'x', 'v', or 'transport' (= d/dt + v . grad_x).
    """
    s, d = p.s, p.d
    if which == "transport":
        out = differentiate(p, "t")
        zt = (0,) * d
        for k in range(d):
            ev = tuple(1 if m == k else 0 for m in range(d))
            out = out + KineticPolynomial({MultiIndex(0, zt, ev): 1.0}, s, d) * differentiate(p, "x", k)
        return out
    out: dict[MultiIndex, float] = {}
    for j, c in p.terms.items():
        if which == "t":
            if j.j_t == 0:
                continue
            jj = MultiIndex(j.j_t - 1, j.j_x, j.j_v)
            out[jj] = out.get(jj, 0.0) + c * j.j_t
        elif which == "x":
            if j.j_x[i] == 0:
                continue
            jx = tuple(k - 1 if m == i else k for m, k in enumerate(j.j_x))
            jj = MultiIndex(j.j_t, jx, j.j_v)
            out[jj] = out.get(jj, 0.0) + c * j.j_x[i]
        elif which == "v":
            if j.j_v[i] == 0:
                continue
            jv = tuple(k - 1 if m == i else k for m, k in enumerate(j.j_v))
            jj = MultiIndex(j.j_t, j.j_x, jv)
            out[jj] = out.get(jj, 0.0) + c * j.j_v[i]
        else:
            raise ValueError(f"unknown derivative {which!r}")
    return KineticPolynomial(out, s, d)


# ---------------------------------------------------------------------------
# Coefficient bounds from sup bounds (finite-dimensional norm equivalence).
# ---------------------------------------------------------------------------

_EQUIV_CACHE: dict[tuple, dict[MultiIndex, float]] = {}
_EQUIV_SAFETY = 2.0
_EQUIV_SAMPLES = 1 << 12


def _unit_ball_samples(d: int, n: int, seed: int = 12345) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Quasi-random points of the unit kinetic ball {knorm <= 1}.

    The unit ball is the product [-1,1] x B_1(x) x B_1(v).
    """
    eng = qmc.Sobol(d=1 + 2 * d, scramble=True, seed=seed)
    u = eng.random(n)
    ts = 2.0 * u[:, 0] - 1.0
    xs = 2.0 * u[:, 1 : 1 + d] - 1.0
    vs = 2.0 * u[:, 1 + d :] - 1.0
    if d > 1:
        # Rescale cube points into the Euclidean ball, keeping the spread.
        for arr in (xs, vs):
            norms = np.linalg.norm(arr, axis=1)
            arr *= np.where(norms > 1.0, 1.0 / norms, 1.0)[:, None]
    return ts, xs, vs


def _equivalence_constants(basis: tuple[MultiIndex, ...], s: ScalingExponent, d: int):
    """Per-monomial constants C_j with |a_j| <= C_j sup_{knorm<=1} |p|.

    Estimated by maximizing a_j over polynomials with sampled sup <= 1 (a
    linear program); sampling makes the estimate an upper bound of the true
    constant up to sampling resolution, and a recorded safety factor is
    applied by the caller.
    """
    key = (basis, s.s, d)
    if key in _EQUIV_CACHE:
        return _EQUIV_CACHE[key]
    # A strided subsample of a Sobol sequence is badly distributed, so draw
    # the LP sample directly at the size we can afford.
    ts, xs, vs = _unit_ball_samples(d, _EQUIV_SAMPLES)
    M = np.column_stack([KineticPolynomial.monomial(j, s).eval_arrays(ts, xs, vs) for j in basis])
    n = len(basis)
    A_ub = np.vstack([M, -M])
    b_ub = np.ones(2 * M.shape[0])
    consts = {}
    for idx, j in enumerate(basis):
        c = np.zeros(n)
        c[idx] = -1.0  # maximize a_j
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * n, method="highs")
        if not res.success:
            raise RuntimeError(f"norm-equivalence LP failed for {j}: {res.message}")
        consts[j] = float(-res.fun)
    _EQUIV_CACHE[key] = consts
    return consts


def coeff_bound_from_sup(p: KineticPolynomial, r: float, C0: float) -> dict[MultiIndex, float]:
    """Per-term bounds |a_j| <= C_j * C0 * r^{-deg_k m_j} from a sup bound.

    Caller asserts sup over the kinetic ball of radius r of |p| is <= C0;
    this is spot-checked by sampling and a violated hypothesis raises.
    The equivalence constants carry a recorded safety factor of 2.
    """
    if r <= 0 or C0 < 0:
        raise ValueError("need r > 0 and C0 >= 0")
    s, d = p.s, p.d
    ts, xs, vs = _unit_ball_samples(d, 1 << 12, seed=999)
    sampled_sup = float(np.max(np.abs(p.eval_arrays(ts * r ** s.two_s, xs * r ** (1 + s.two_s), vs * r))))
    if sampled_sup > C0 * (1.0 + 1e-9) + 1e-300:
        raise ValueError(f"hypothesis violated: sampled sup {sampled_sup:g} exceeds C0={C0:g}")
    basis = tuple(sorted(p.terms, key=lambda j: (float(kinetic_degree(j, s)), j.j_t, j.j_x, j.j_v)))
    consts = _equivalence_constants(basis, s, d)
    bounds = {}
    for j in basis:
        deg = float(kinetic_degree(j, s))
        bound = _EQUIV_SAFETY * consts[j] * C0 * r ** (-deg)
        if abs(p.terms[j]) > bound * (1.0 + 1e-9):
            raise AssertionError(f"coefficient {p.terms[j]:g} of {j} exceeds bound {bound:g}")
        bounds[j] = bound
    return bounds
