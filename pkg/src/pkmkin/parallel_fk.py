"""Forward kinematics of the parallel module.

Given the three slider coordinates, the platform orientation is eliminated
down to a single degree-8 characteristic polynomial in t = tan(alpha/2):
the difference of the two leg-I constraints gives y_p(z_p, alpha), the
difference of the leg-II/III constraints gives z_p(alpha), the difference
of the leg-I midpoint sphere and the leg-II sphere gives x_p(alpha), and
back-substituting everything into the leg-I midpoint sphere leaves a
rational function of t whose cleared numerator N(t) is assembled exactly,
coefficient by coefficient (every ingredient is itself a polynomial in t).
N has degree <= 16 and always contains the spurious factor
(1 + t^2)^2 * P1(t)^2, where P1(t) is the half-angle form of
R1 cos(alpha) - r1; deflating it leaves the degree-8 polynomial whose real
roots enumerate the assembly modes.  Each root's platform position is then
recovered by intersecting the three constraint spheres directly (division
free, so exact even next to the degenerate orientations), with the axis
orientations the half-angle map cannot represent injected as extra
candidates.  The elimination-chain formulas themselves are exposed as
yp_from / zp_from / xp_from.
"""

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (AmbiguousSelectionError, CoincidentOffsetError,
                     DegenerateDenominatorError, DegenerateOrientationError,
                     InterpolationError)
from .parallel_ik import (ConfigurationIndices, ParallelJoints, PlatformPose,
                          constraint_residuals)
from .rootfind import Polynomial, real_roots

FK_RESIDUAL_REL_TOL = 1e-7
FK_PREFILTER_REL_TOL = 1e-3
FK_DEDUP_TOL = 1e-7
PERPENDICULAR_LEG_REL_TOL = 1e-12


@dataclass(frozen=True)
class AssemblyMode:
    """One forward-kinematic solution with back-derived branch signs."""

    pose: PlatformPose
    indices: ConfigurationIndices
    residual_norm: float
    reachable: bool


def _require_distinct_offsets(geom):
    if geom.offset_gap == 0.0:
        raise CoincidentOffsetError(
            "D1 - d1 == D2 - d2: the x_p elimination denominator vanishes")


def yp_from(geom, alpha, z_p, rho1):
    """y_p from the difference of the two leg-I rod constraints.

    Singular when the leg-I direction is perpendicular to the slider plane
    (R1 cos(alpha) = r1), which also makes the iso-orientation ellipse a
    circle.
    """
    den = geom.R1 * math.cos(alpha) - geom.r1
    if abs(den) < PERPENDICULAR_LEG_REL_TOL * geom.R1:
        raise DegenerateOrientationError(
            f"R1 cos(alpha) = r1 at alpha={alpha!r}: y_p is not determined by leg I")
    return geom.R1 * math.sin(alpha) * (rho1 - z_p) / den


def _zp_parts(geom, alpha, joints):
    c, s = math.cos(alpha), math.sin(alpha)
    r1_, r2_, r3_ = joints.rho1, joints.rho2, joints.rho3
    lead = geom.R1 * c - geom.r1
    den = 2.0 * (2.0 * geom.C1 * s + lead * (r3_ - r2_))
    num = (lead * ((r2_ + r3_) * (r3_ - r2_) - 2.0 * geom.R2 * (r3_ + r2_ - 2.0 * r1_) * s)
           + 4.0 * geom.C1 * r1_ * s
           + (geom.L2**2 - geom.L3**2) * lead)
    return num, den


def zp_from(geom, alpha, joints):
    """z_p from the difference of the leg-II and leg-III constraints.

    The (L2^2 - L3^2) term vanishes for identical parallelogram legs.  The
    denominator vanishes when rho2 = rho3 meets sin(alpha) = 0; that case
    is covered by the axis-aligned branch of enumerate_fk.
    """
    num, den = _zp_parts(geom, alpha, joints)
    den_scale = (4.0 * abs(geom.C1) + 2.0 * (geom.R1 + geom.r1)
                 * (abs(joints.rho3 - joints.rho2) + 1.0))
    if abs(den) < 1e-12 * den_scale:
        raise DegenerateDenominatorError(
            f"z_p denominator vanishes at alpha={alpha!r} for rho2~rho3")
    return num / den


def xp_from(geom, alpha, joints):
    """x_p from the difference of the leg-I midpoint and leg-II spheres.

    Requires the x-offset gap (D1 - d1) - (D2 - d2) to be nonzero; the
    offsets make the squared x terms cancel, leaving x_p linear.
    """
    _require_distinct_offsets(geom)
    c, s = math.cos(alpha), math.sin(alpha)
    z_p = zp_from(geom, alpha, joints)
    y_p = yp_from(geom, alpha, z_p, joints.rho1)
    w2 = geom.R2 * c - geom.r4
    gap = geom.offset_gap
    span = (geom.D1 - geom.d1) + (geom.D2 - geom.d2)
    rhs = (geom.a_sq(c) - geom.L2**2 + w2**2 - 2.0 * y_p * w2
           - (geom.R2 * s + joints.rho2 - joints.rho1)
           * (2.0 * z_p - joints.rho1 - geom.R2 * s - joints.rho2))
    return rhs / (2.0 * gap) - span / 2.0


def pose_from_alpha(geom, alpha, joints):
    """Back-substitute one orientation into the elimination chain."""
    z_p = zp_from(geom, alpha, joints)
    y_p = yp_from(geom, alpha, z_p, joints.rho1)
    x_p = xp_from(geom, alpha, joints)
    return x_p, y_p, z_p


# ---------------------------------------------------------------------------
# characteristic polynomial, assembled exactly in t = tan(alpha/2)

def _padd(*polys):
    acc = np.zeros(1)
    for p in polys:
        acc = npoly.polyadd(acc, p)
    return acc


def _cleared_numerator(geom, joints):
    """Coefficients (ascending) of N(t), the cleared leg-I midpoint residual.

    N(t) = residual(x_p(t), y_p(t), z_p(t)) * (2 gap P1 T^2 Q)^2 with
    T = 1 + t^2, P1 the half-angle form of R1 cos(alpha) - r1 and Q that of
    the z_p denominator.  Returns (N, P1, Q, T).
    """
    R1, r1, R2, r4 = geom.R1, geom.r1, geom.R2, geom.r4
    gap = geom.offset_gap
    span = (geom.D1 - geom.d1) + (geom.D2 - geom.d2)
    p1_, p2_, p3_ = joints.rho1, joints.rho2, joints.rho3
    t = np.array([0.0, 1.0])
    T = np.array([1.0, 0.0, 1.0])
    P1 = np.array([R1 - r1, 0.0, -(R1 + r1)])
    W = np.array([R2 - r4, 0.0, -(R2 + r4)])
    Q = _padd((p3_ - p2_) * P1, [0.0, 4.0 * geom.C1])
    K = geom.L1**2 - R1**2 - r1**2
    Na = np.array([K + 2.0 * R1 * r1, 0.0, K - 2.0 * R1 * r1])

    Nz = _padd(npoly.polymul(8.0 * R1 * p1_ * t, W),
               npoly.polymul((p3_ - p2_) * (p2_ + p3_) * T, P1),
               npoly.polymul(-4.0 * R2 * (p2_ + p3_) * t, P1),
               (geom.L2**2 - geom.L3**2) * npoly.polymul(T, P1))
    M = npoly.polysub(2.0 * p1_ * npoly.polymul(T, Q), Nz)
    U = _padd((p2_ - p1_) * T, 2.0 * R2 * t)
    V = _padd(Nz, -(p1_ + p2_) * npoly.polymul(T, Q), npoly.polymul(-2.0 * R2 * t, Q))

    TP1Q = npoly.polymul(npoly.polymul(T, P1), Q)
    T2P1Q = npoly.polymul(T, TP1Q)
    Nx = _padd(npoly.polymul(Na, TP1Q),
               -geom.L2**2 * T2P1Q,
               npoly.polymul(npoly.polymul(W, W), npoly.polymul(P1, Q)),
               npoly.polymul(-2.0 * R1 * t, npoly.polymul(M, W)),
               -npoly.polymul(npoly.polymul(U, V), P1))
    NX1 = _padd(Nx, gap * (2.0 * (geom.D1 - geom.d1) - span) * T2P1Q)

    MT = npoly.polymul(M, T)
    N = _padd(npoly.polymul(NX1, NX1),
              4.0 * gap**2 * R1**2 * npoly.polymul(npoly.polymul(t, MT), npoly.polymul(t, MT)),
              gap**2 * npoly.polymul(npoly.polymul(MT, MT), npoly.polymul(P1, P1)),
              -4.0 * gap**2 * npoly.polymul(
                  Na, npoly.polymul(npoly.polymul(P1, P1),
                                    npoly.polymul(npoly.polypow(T, 3), npoly.polymul(Q, Q)))))
    return N, P1, Q, T


def _midpoint_residual(geom, x_p, y_p, z_p, alpha, rho1):
    c = math.cos(alpha)
    X1 = x_p + geom.D1 - geom.d1
    return X1**2 + y_p**2 + (z_p - rho1)**2 - geom.a_sq(c)


def _verify_cleared_numerator(geom, joints, N, P1, Q):
    """Probe N(t) against the directly sampled residual product."""
    gap = geom.offset_gap
    scale = max(np.max(np.abs(N)), 1.0)
    checked = 0
    for t in (0.3317, -1.2113, 2.4091, -0.5729, 4.17, 0.071):
        pv = npoly.polyval(t, P1)
        qv = npoly.polyval(t, Q)
        tv = 1.0 + t * t
        if abs(pv) < 1e-3 or abs(qv) < 1e-3:
            continue
        alpha = 2.0 * math.atan(t)
        try:
            x_p, y_p, z_p = pose_from_alpha(geom, alpha, joints)
        except (DegenerateDenominatorError, DegenerateOrientationError):
            continue
        sampled = (_midpoint_residual(geom, x_p, y_p, z_p, alpha, joints.rho1)
                   * (2.0 * gap * pv * tv**2 * qv)**2)
        if abs(npoly.polyval(t, N) - sampled) > 1e-9 * (scale * max(1.0, abs(t))**16 + abs(sampled)):
            raise InterpolationError(
                f"assembled characteristic numerator disagrees with the sampled residual at t={t}")
        checked += 1
    if checked < 3:
        raise InterpolationError("too few usable probe nodes (degenerate joint input)")


def _deflate(N, factor, rel_tol=1e-9):
    quot, rem = npoly.polydiv(N, factor)
    scale = max(np.max(np.abs(N)), 1.0)
    if np.max(np.abs(rem)) > rel_tol * scale:
        raise InterpolationError(
            "spurious-factor deflation left a non-negligible remainder")
    return quot


def octic_from_joints(geom, joints):
    """Degree-<=8 characteristic polynomial in t = tan(alpha/2).

    Raises InterpolationError when the assembled numerator fails its probe
    verification or does not contain the spurious factor (degenerate
    input needing a special branch).
    """
    _require_distinct_offsets(geom)
    joints = _as_joints(joints)
    N, P1, Q, T = _cleared_numerator(geom, joints)
    _verify_cleared_numerator(geom, joints, N, P1, Q)
    quot = _deflate(N, npoly.polymul(T, T))
    quot = _deflate(quot, npoly.polymul(P1, P1), rel_tol=1e-8)
    scale = np.max(np.abs(quot))
    trimmed = np.array(quot)
    k = trimmed.size
    while k > 9 and abs(trimmed[k - 1]) <= 1e-9 * scale:
        k -= 1
    if k > 9:
        raise InterpolationError(
            f"characteristic polynomial has degree {k - 1} > 8 after deflation")
    return Polynomial(trimmed[:k])


# ---------------------------------------------------------------------------
# assembly-mode enumeration

def _as_joints(joints):
    if isinstance(joints, ParallelJoints):
        return joints
    return ParallelJoints(*joints)


def _sphere_candidates(geom, joints, alpha):
    """Platform positions for one orientation, by sphere intersection.

    With alpha fixed, the leg-I midpoint sphere and the leg-II/III spheres
    intersect along two difference planes (both linear in (x, y, z)) plus
    one quadratic, giving at most two points in closed form.  Unlike the
    y(z), z(alpha) elimination chain, this never divides by the
    R1 cos(alpha) - r1 or rho2 ~ rho3 denominators, so it stays exact at
    and near every degenerate orientation.  Candidates only; the caller
    residual-checks them.
    """
    c, s = math.cos(alpha), math.sin(alpha)
    r1_, r2_, r3_ = joints.rho1, joints.rho2, joints.rho3
    a2 = geom.a_sq(c)
    if a2 < 0.0:
        return []
    w2 = geom.R2 * c - geom.r4
    gap, span = geom.offset_gap, (geom.D1 - geom.d1) + (geom.D2 - geom.d2)
    # legs II - III difference: a1 y + b1 z = d1
    a1 = -4.0 * w2
    b1 = 2.0 * (r3_ - r2_ - 2.0 * geom.R2 * s)
    d1 = (r3_ - r2_ - 2.0 * geom.R2 * s) * (r2_ + r3_) + geom.L2**2 - geom.L3**2
    # leg-I midpoint - leg II difference: 2 gap x + a2y y + b2 z = d2
    a2y = 2.0 * w2
    b2 = 2.0 * (geom.R2 * s + r2_ - r1_)
    d2 = (w2**2 + a2 - geom.L2**2
          + (geom.R2 * s + r2_ - r1_) * (r1_ + geom.R2 * s + r2_)
          - gap * span)
    norm1 = max(abs(a1), abs(b1))
    if norm1 <= 1e-12 * (abs(w2) + geom.R2 + 1.0):
        return []  # leg difference void: solutions are not isolated
    out = []
    # parameterize the first plane by its better-conditioned coordinate
    if abs(a1) >= abs(b1):
        # y = (d1 - b1 t) / a1, z = t
        y0, y1 = d1 / a1, -b1 / a1
        z0, z1 = 0.0, 1.0
    else:
        y0, y1 = 0.0, 1.0
        z0, z1 = d1 / b1, -a1 / b1
    # x from the second plane along the same parameter
    x0 = (d2 - a2y * y0 - b2 * z0) / (2.0 * gap)
    x1 = (-a2y * y1 - b2 * z1) / (2.0 * gap)
    # leg-I midpoint sphere: (x + D1 - d1)^2 + y^2 + (z - rho1)^2 = a2
    e0, e1 = x0 + geom.D1 - geom.d1, x1
    f0, f1 = y0, y1
    g0, g1 = z0 - r1_, z1
    qa = e1**2 + f1**2 + g1**2
    qb = 2.0 * (e0 * e1 + f0 * f1 + g0 * g1)
    qc = e0**2 + f0**2 + g0**2 - a2
    disc = qb**2 - 4.0 * qa * qc
    if disc < 0.0 or qa == 0.0:
        return []
    for sgn in (-1.0, 1.0):
        t = (-qb + sgn * math.sqrt(disc)) / (2.0 * qa)
        out.append((x0 + x1 * t, y0 + y1 * t, z0 + z1 * t, alpha))
    return out


def _jacobian(geom, x, y, z, a, joints):
    c, s = math.cos(a), math.sin(a)
    R1, r1, R2, r4 = geom.R1, geom.r1, geom.R2, geom.r4
    X1 = x + geom.D1 - geom.d1
    X2 = x + geom.D2 - geom.d2
    y1p, z1p = y + R1 * c - r1, z + R1 * s - joints.rho1
    y1m, z1m = y - R1 * c + r1, z - R1 * s - joints.rho1
    y2, z2 = y - R2 * c + r4, z - R2 * s - joints.rho2
    y3, z3 = y + R2 * c - r4, z + R2 * s - joints.rho3
    return np.array([
        [2 * X1, 2 * y1p, 2 * z1p, -2 * y1p * R1 * s + 2 * z1p * R1 * c],
        [2 * X1, 2 * y1m, 2 * z1m, 2 * y1m * R1 * s - 2 * z1m * R1 * c],
        [2 * X2, 2 * y2, 2 * z2, 2 * y2 * R2 * s - 2 * z2 * R2 * c],
        [2 * X2, 2 * y3, 2 * z3, -2 * y3 * R2 * s + 2 * z3 * R2 * c],
    ])


def _polish_pose(geom, joints, x, y, z, a, iterations=4):
    """A few damped Newton steps on the full constraint system."""
    v = np.array([x, y, z, a])
    rho = joints.as_tuple()
    for _ in range(iterations):
        f = np.array(constraint_residuals(geom, v[0], v[1], v[2], v[3], *rho))
        norm = np.max(np.abs(f))
        if norm <= 1e-14 * geom.residual_scale:
            break
        try:
            step = np.linalg.solve(_jacobian(geom, v[0], v[1], v[2], v[3], joints), -f)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        for _ in range(20):
            vn = v + lam * step
            fn = np.array(constraint_residuals(geom, vn[0], vn[1], vn[2], vn[3], *rho))
            if np.max(np.abs(fn)) < norm:
                v = vn
                break
            lam *= 0.5
        else:
            break
    return v


def back_derived_indices(geom, pose, joints):
    """Branch signs recovered from the defining sign expressions."""
    s = math.sin(pose.alpha)
    return ConfigurationIndices(
        s1=-1 if joints.rho1 - pose.z_p <= 0.0 else 1,
        s2=-1 if joints.rho2 - pose.z_p + geom.R2 * s <= 0.0 else 1,
        s3=-1 if joints.rho3 - pose.z_p - geom.R2 * s <= 0.0 else 1,
    )


def enumerate_fk(geom, joints):
    """All assembly modes for one slider triple, sorted by orientation.

    Real roots of the characteristic polynomial are back-substituted by
    sphere intersection; the axis orientations the half-angle substitution
    cannot reach are tried the same way; every candidate is Newton-polished
    and kept only if all four constraints hold to 1e-7 * max(L^2).  Empty
    when the sliders admit no assembly.
    """
    _require_distinct_offsets(geom)
    joints = _as_joints(joints)
    candidates = []
    try:
        octic = octic_from_joints(geom, joints)
        roots = real_roots(octic) if octic.degree >= 1 else []
    except InterpolationError:
        roots = []
    for t in roots:
        candidates.extend(_sphere_candidates(geom, joints, 2.0 * math.atan(t)))
    # alpha = pi is invisible to t = tan(alpha/2); alpha = 0 drops out of
    # the characteristic polynomial when rho2 = rho3 (its equation becomes
    # the vanishing denominator there)
    candidates.extend(_sphere_candidates(geom, joints, math.pi))
    candidates.extend(_sphere_candidates(geom, joints, 0.0))

    modes = []
    for x, y, z, alpha in candidates:
        if not all(map(math.isfinite, (x, y, z, alpha))):
            continue
        residual = max(abs(r) for r in constraint_residuals(
            geom, x, y, z, alpha, *joints.as_tuple()))
        if residual > FK_PREFILTER_REL_TOL * geom.residual_scale:
            continue
        x, y, z, alpha = _polish_pose(geom, joints, x, y, z, alpha)
        residual = max(abs(r) for r in constraint_residuals(
            geom, x, y, z, alpha, *joints.as_tuple()))
        if residual > FK_RESIDUAL_REL_TOL * geom.residual_scale:
            continue
        pose = PlatformPose(x, y, z, alpha)
        indices = back_derived_indices(geom, pose, joints)
        reachable = (indices.as_tuple() == (-1, -1, -1)
                     and geom.R1 * math.cos(pose.alpha) > geom.r1)
        modes.append(AssemblyMode(pose=pose, indices=indices,
                                  residual_norm=residual, reachable=reachable))
    modes.sort(key=lambda m: (m.pose.alpha, m.pose.x_p, m.pose.y_p, m.pose.z_p))
    merged = []
    for mode in modes:
        if any(_same_mode(mode, kept) for kept in merged):
            continue
        merged.append(mode)
    return merged


def _same_mode(a, b):
    return (abs(a.pose.alpha - b.pose.alpha) <= FK_DEDUP_TOL
            and abs(a.pose.x_p - b.pose.x_p) <= FK_DEDUP_TOL
            and abs(a.pose.y_p - b.pose.y_p) <= FK_DEDUP_TOL
            and abs(a.pose.z_p - b.pose.z_p) <= FK_DEDUP_TOL)


def select_assembly_mode(modes):
    """The unique reachable mode, or None; ambiguity is always reported."""
    survivors = [m for m in modes if m.reachable]
    if not survivors:
        return None
    if len(survivors) > 1:
        raise AmbiguousSelectionError(survivors)
    return survivors[0]
