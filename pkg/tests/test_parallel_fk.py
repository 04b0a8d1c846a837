import math
from dataclasses import replace

import numpy as np
import pytest

from pkmkin import (CoincidentOffsetError, DegenerateDenominatorError,
                    DegenerateOrientationError, InterpolationError,
                    ParallelJoints, enumerate_fk, enumerate_ik, newton_fk,
                    octic_from_joints, select_assembly_mode,
                    select_working_solution, xp_from, yp_from, zp_from)
from pkmkin.parallel_fk import AssemblyMode
from pkmkin.parallel_ik import ConfigurationIndices, PlatformPose

from conftest import angle_delta, raw_residuals, region_points


def working_joints(geom, x, y, z):
    sol = select_working_solution(enumerate_ik(geom, x, y, z), geom)
    assert sol is not None
    return sol


def symmetric_joints(geom, x, z):
    """Slider triple of the axis-aligned pose (x, 0, z, alpha=0), all-minus
    branch; legs II and III coincide so rho2 = rho3 exactly."""
    X1 = x + geom.D1 - geom.d1
    X2 = x + geom.D2 - geom.d2
    rho1 = z - math.sqrt(geom.a_sq(1.0) - X1**2)
    rho23 = z - math.sqrt(geom.L2**2 - X2**2 - (geom.r4 - geom.R2)**2)
    return ParallelJoints(rho1, rho23, rho23)


# ---------------------------------------------------------------------------
# back-substitution chain

def test_yp_zero_at_axis_orientations(geom):
    assert yp_from(geom, 0.0, 812.0, 455.0) == 0.0
    assert yp_from(geom, math.pi, 812.0, 455.0) == pytest.approx(0.0, abs=1e-12)


def test_yp_satisfies_sign_identity(geom):
    # the defining relation: y (R1 cos a - r1) = R1 sin a (rho1 - z)
    rng = np.random.default_rng(2)
    for _ in range(20):
        alpha = rng.uniform(-2.5, 2.5)
        z, rho1 = rng.uniform(400, 1200), rng.uniform(100, 900)
        if abs(geom.R1 * math.cos(alpha) - geom.r1) < 1e-6:
            continue
        y = yp_from(geom, alpha, z, rho1)
        lhs = y * (geom.R1 * math.cos(alpha) - geom.r1)
        rhs = geom.R1 * math.sin(alpha) * (rho1 - z)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


def test_yp_singular_orientation(geom):
    with pytest.raises(DegenerateOrientationError):
        yp_from(geom, math.acos(geom.r1 / geom.R1), 800.0, 400.0)


def test_zp_symmetric_joints_closed_form(geom):
    # with rho3 = rho2 the eliminated form reduces to
    # (4 C1 rho1 s - 2 R2 (2 rho2 - 2 rho1)(R1 cos a - r1) s) / (4 C1 s)
    rng = np.random.default_rng(3)
    for _ in range(10):
        alpha = rng.uniform(0.2, 2.0) * (1 if rng.uniform() < 0.5 else -1)
        rho1, rho2 = rng.uniform(200, 900), rng.uniform(200, 900)
        joints = ParallelJoints(rho1, rho2, rho2)
        s = math.sin(alpha)
        lead = geom.R1 * math.cos(alpha) - geom.r1
        expected = ((4.0 * geom.C1 * rho1 * s
                     - 2.0 * geom.R2 * (2.0 * rho2 - 2.0 * rho1) * lead * s)
                    / (4.0 * geom.C1 * s))
        assert zp_from(geom, alpha, joints) == pytest.approx(expected, rel=1e-12)


def test_zp_zeroes_leg23_difference(geom):
    # substituting y(z) and the returned z into the leg-II minus leg-III
    # difference must cancel it (x-independent)
    rng = np.random.default_rng(4)
    for _ in range(20):
        alpha = rng.uniform(-2.5, 2.5)
        joints = ParallelJoints(rng.uniform(200, 900), rng.uniform(200, 900),
                                rng.uniform(200, 900))
        if abs(geom.R1 * math.cos(alpha) - geom.r1) < 1e-3:
            continue
        try:
            z = zp_from(geom, alpha, joints)
        except DegenerateDenominatorError:
            continue
        y = yp_from(geom, alpha, z, joints.rho1)
        res = raw_residuals(geom, 0.0, y, z, alpha, *joints.as_tuple())
        assert abs(res[2] - res[3]) <= 1e-9 * geom.residual_scale * (
            1.0 + (abs(y) + abs(z)) / geom.L1)


def test_zp_guard_raises(geom):
    # rho2 = rho3 with sin(alpha) = 0 kills the denominator
    with pytest.raises(DegenerateDenominatorError):
        zp_from(geom, 0.0, ParallelJoints(500.0, 400.0, 400.0))


def test_zp_generalizes_to_unequal_leg_lengths(geom):
    # distinct L2/L3 keeps the leg-difference identity through the extra
    # (L2^2 - L3^2) term
    uneven = replace(geom, L2=560.0, L3=480.0)
    rng = np.random.default_rng(5)
    for _ in range(20):
        alpha = rng.uniform(-2.0, 2.0)
        joints = ParallelJoints(rng.uniform(200, 900), rng.uniform(200, 900),
                                rng.uniform(200, 900))
        if abs(uneven.R1 * math.cos(alpha) - uneven.r1) < 1e-3:
            continue
        try:
            z = zp_from(uneven, alpha, joints)
        except DegenerateDenominatorError:
            continue
        y = yp_from(uneven, alpha, z, joints.rho1)
        res = raw_residuals(uneven, 0.0, y, z, alpha, *joints.as_tuple())
        assert abs(res[2] - res[3]) <= 1e-9 * uneven.residual_scale * (
            1.0 + (abs(y) + abs(z)) / uneven.L1)


def test_xp_zeroes_sphere_difference(geom):
    # at the returned x the difference of the substituted leg-I midpoint and
    # leg-II constraints must vanish
    rng = np.random.default_rng(6)
    for x0, y0, z0 in region_points(rng, 15):
        sol = working_joints(geom, x0, y0, z0)
        x = xp_from(geom, sol.alpha, sol.joints)
        z = zp_from(geom, sol.alpha, sol.joints)
        y = yp_from(geom, sol.alpha, z, sol.joints.rho1)
        res = raw_residuals(geom, x, y, z, sol.alpha, *sol.joints.as_tuple())
        mid = 0.5 * (res[0] + res[1])
        assert abs(mid - res[2]) <= 1e-8 * geom.residual_scale
        assert (x, y, z) == pytest.approx((x0, y0, z0), abs=1e-6)


def test_xp_finite_for_symmetric_joints(geom):
    joints = symmetric_joints(geom, -250.0, 900.0)
    x = xp_from(geom, 0.9, joints)
    assert math.isfinite(x)


def test_xp_coincident_offsets_rejected(geom):
    bad = replace(geom, D2=geom.D1, d2=geom.d1)
    with pytest.raises(CoincidentOffsetError):
        xp_from(bad, 0.5, ParallelJoints(400.0, 380.0, 390.0))
    with pytest.raises(CoincidentOffsetError):
        enumerate_fk(bad, ParallelJoints(400.0, 380.0, 390.0))


# ---------------------------------------------------------------------------
# characteristic polynomial

def test_octic_ik_roundtrip_root(geom):
    rng = np.random.default_rng(7)
    for x, y, z in region_points(rng, 10):
        sol = working_joints(geom, x, y, z)
        octic = octic_from_joints(geom, sol.joints)
        assert octic.degree <= 8
        t_expected = math.tan(sol.alpha / 2.0)
        roots = __import__("pkmkin").real_roots(octic)
        assert any(abs(2.0 * math.atan(t) - sol.alpha) <= 1e-8 for t in roots), \
            (sol.alpha, roots)


def test_octic_root_count_covers_newton_modes(geom):
    rng = np.random.default_rng(8)
    for x, y, z in region_points(rng, 6):
        sol = working_joints(geom, x, y, z)
        octic = octic_from_joints(geom, sol.joints)
        n_roots = len(__import__("pkmkin").real_roots(octic))
        newton = newton_fk(geom, sol.joints, starts=100, seed=11)
        countable = [m for m in newton if abs(m[3]) < math.pi - 1e-6]
        assert n_roots >= len(countable)


def test_octic_degenerate_global_input(geom):
    # C1 = 0 with rho2 = rho3 voids the whole elimination
    degenerate = replace(geom, R1=240.0, R2=240.0, r1=120.0, r4=120.0)
    assert degenerate.C1 == 0.0
    with pytest.raises(InterpolationError):
        octic_from_joints(degenerate, ParallelJoints(500.0, 400.0, 400.0))


def test_octic_accepts_plain_tuples(geom):
    sol = working_joints(geom, -250.0, 60.0, 900.0)
    a = octic_from_joints(geom, sol.joints)
    b = octic_from_joints(geom, sol.joints.as_tuple())
    assert a.coeffs == b.coeffs


# ---------------------------------------------------------------------------
# assembly-mode enumeration

def test_fk_roundtrip_over_region(geom):
    rng = np.random.default_rng(9)
    for x, y, z in region_points(rng, 120):
        sol = working_joints(geom, x, y, z)
        modes = enumerate_fk(geom, sol.joints)
        assert all(m.residual_norm <= 1e-7 * geom.residual_scale for m in modes)
        mode = select_assembly_mode(modes)
        assert mode is not None
        assert (mode.pose.x_p, mode.pose.y_p, mode.pose.z_p) == pytest.approx(
            (x, y, z), abs=1e-6)
        assert mode.pose.alpha == pytest.approx(sol.alpha, abs=1e-8)


def test_fk_modes_sorted_and_annotated(geom):
    sol = working_joints(geom, -250.0, 60.0, 900.0)
    modes = enumerate_fk(geom, sol.joints)
    # mode count pinned by the independent multi-start iteration
    assert len(modes) == len(newton_fk(geom, sol.joints, starts=400, seed=2)) == 2
    alphas = [m.pose.alpha for m in modes]
    assert alphas == sorted(alphas)
    assert sum(m.reachable for m in modes) == 1
    for m in modes:
        s = math.sin(m.pose.alpha)
        assert m.indices.s1 == (-1 if sol.joints.rho1 - m.pose.z_p <= 0 else 1)
        assert m.indices.s2 == (-1 if sol.joints.rho2 - m.pose.z_p + geom.R2 * s <= 0 else 1)
        assert m.indices.s3 == (-1 if sol.joints.rho3 - m.pose.z_p - geom.R2 * s <= 0 else 1)


def test_fk_symmetric_joints_cover_axis_modes(geom):
    # rho2 = rho3: the half-angle chain loses alpha in {0, pi}; the closed
    # form must restore them, and the newton oracle fixes the ground truth
    joints = symmetric_joints(geom, -250.0, 900.0)
    assert joints.rho2 == joints.rho3
    modes = enumerate_fk(geom, joints)
    newton = newton_fk(geom, joints, starts=400, seed=13)
    assert len(newton) >= 2
    for nx, ny, nz, na in newton:
        assert any(abs(m.pose.x_p - nx) <= 1e-5 and abs(m.pose.y_p - ny) <= 1e-5
                   and abs(m.pose.z_p - nz) <= 1e-5
                   and angle_delta(m.pose.alpha, na) <= 1e-5 for m in modes), (nx, ny, nz, na)
    axis = [m for m in modes if abs(m.pose.alpha) <= 1e-9]
    assert any(abs(m.pose.x_p + 250.0) <= 1e-6 and abs(m.pose.z_p - 900.0) <= 1e-6
               for m in axis)
    for m in axis:
        assert m.pose.y_p == pytest.approx(0.0, abs=1e-9)


def test_fk_unassemblable_joints_empty(geom):
    assert enumerate_fk(geom, ParallelJoints(2000.0, -1900.0, 200.0)) == []


def test_fk_mode_counts_bounded(geom):
    rng = np.random.default_rng(10)
    seen = set()
    for _ in range(120):
        joints = ParallelJoints(*rng.uniform(-200.0, 1500.0, size=3))
        modes = enumerate_fk(geom, joints)
        seen.add(len(modes))
        assert len(modes) <= 8
    assert max(seen) <= 6


def test_select_assembly_mode_semantics(geom):
    assert select_assembly_mode([]) is None
    sol = working_joints(geom, -250.0, 60.0, 900.0)
    modes = enumerate_fk(geom, sol.joints)
    flipped = [AssemblyMode(pose=m.pose, indices=m.indices,
                            residual_norm=m.residual_norm, reachable=False)
               for m in modes]
    assert select_assembly_mode(flipped) is None
    from pkmkin import AmbiguousSelectionError
    chosen = select_assembly_mode(modes)
    with pytest.raises(AmbiguousSelectionError):
        select_assembly_mode([chosen, chosen])


def test_fk_perpendicular_leg_fallback(geom):
    # force a root exactly on R1 cos(alpha) = r1: construct joints from a
    # pose on that circle and require the pose among the modes
    alpha = math.acos(geom.r1 / geom.R1)
    x = geom.center_x + math.sqrt(geom.a_sq(geom.r1 / geom.R1))
    z = 900.0
    pose = PlatformPose.solved(geom, x, 0.0, z, alpha)
    from pkmkin import joints_from_pose
    joints = joints_from_pose(geom, pose, ConfigurationIndices(-1, -1, -1))
    modes = enumerate_fk(geom, joints)
    assert any(abs(m.pose.x_p - x) <= 1e-5 and abs(m.pose.alpha - alpha) <= 1e-7
               for m in modes), [(m.pose.x_p, m.pose.alpha) for m in modes]
