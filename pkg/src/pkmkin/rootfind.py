"""Real-root extraction for the univariate characteristic polynomials.

Roots are computed as eigenvalues of the balanced companion matrix of the
monic, degree-trimmed polynomial, polished with a few Newton steps, then
accepted against a scaled residual bound and merged when closer than
1e-9 * (1 + |root|).
"""

import math
from dataclasses import dataclass

import numpy as np

TRIM_REL_TOL = 1e-12
DEFAULT_TOL = 1e-10
MERGE_REL_TOL = 1e-9
# multiple roots split by ~sqrt(eps) in the eigenvalue step; a pair this
# close whose midpoint also satisfies the residual bound is one root
CLUSTER_REL_TOL = 1e-7
MAX_DEGREE = 12
# companion eigenvalues of a real polynomial carry O(sqrt(eps)) imaginary
# noise on clustered real roots; the residual bound is the real filter
IMAG_REL_TOL = 1e-6


def _trim(coeffs):
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("coefficients must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(c)):
        raise ValueError("non-finite coefficient")
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return c[:1]
    k = c.size
    while k > 1 and abs(c[k - 1]) <= TRIM_REL_TOL * scale:
        k -= 1
    return c[:k]


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial, coefficients ascending by degree, degree <= 12."""

    coeffs: tuple

    def __init__(self, coeffs):
        c = _trim(coeffs)
        if c.size - 1 > MAX_DEGREE:
            raise ValueError(f"degree {c.size - 1} exceeds {MAX_DEGREE}")
        object.__setattr__(self, "coeffs", tuple(float(v) for v in c))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative_at(self, x):
        acc = 0.0
        for k in range(len(self.coeffs) - 1, 0, -1):
            acc = acc * x + k * self.coeffs[k]
        return acc


def residual_bound(p, root, tol):
    """Acceptance bound: tol * max|coeff| * max(1, |root|)^degree."""
    cmax = max(abs(c) for c in p.coeffs)
    return tol * cmax * max(1.0, abs(root)) ** p.degree


def real_roots(p, tol=DEFAULT_TOL):
    """All real roots of p (multiplicity collapsed), sorted ascending.

    Raises ValueError on degree-0 input or non-finite coefficients.
    """
    if not isinstance(p, Polynomial):
        p = Polynomial(p)
    if p.degree < 1:
        raise ValueError("degree-0 polynomial has no well-defined roots")
    if p.degree == 1:
        candidates = [-p.coeffs[0] / p.coeffs[1]]
    else:
        monic = np.asarray(p.coeffs, dtype=float) / p.coeffs[-1]
        n = p.degree
        comp = np.zeros((n, n))
        comp[1:, :-1] = np.eye(n - 1)
        comp[:, -1] = -monic[:-1]
        eig = np.linalg.eigvals(comp)
        candidates = [z.real for z in eig
                      if abs(z.imag) <= IMAG_REL_TOL * (1.0 + abs(z.real))]
    accepted = []
    for r in candidates:
        # Newton polish; guard against derivative blow-up near multiple roots
        for _ in range(3):
            d = p.derivative_at(r)
            if d == 0.0:
                break
            step = p(r) / d
            if not math.isfinite(step) or abs(step) > 1.0 + abs(r):
                break
            r -= step
        if abs(p(r)) <= residual_bound(p, r, tol):
            accepted.append(r)
    accepted.sort()
    merged = []
    for r in accepted:
        if merged:
            gap = r - merged[-1]
            if gap <= MERGE_REL_TOL * (1.0 + abs(r)):
                continue
            mid = 0.5 * (r + merged[-1])
            if (gap <= CLUSTER_REL_TOL * (1.0 + abs(r))
                    and abs(p(mid)) <= residual_bound(p, mid, tol)):
                continue
        merged.append(r)
    return merged


def real_roots_in_unit_interval(p, tol=DEFAULT_TOL, eps=1e-9):
    """Real roots filtered to [-1-eps, 1+eps] and clamped into [-1, 1]."""
    roots = [min(1.0, max(-1.0, r))
             for r in real_roots(p, tol=tol)
             if -1.0 - eps <= r <= 1.0 + eps]
    out = []
    for r in roots:
        if out and abs(r - out[-1]) <= MERGE_REL_TOL * (1.0 + abs(r)):
            continue
        out.append(r)
    return out
