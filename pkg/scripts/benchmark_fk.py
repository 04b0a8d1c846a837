#!/usr/bin/env python3
"""Wall-clock comparison of the closed-form forward kinematics against the
multi-start Newton iteration over the same joint vectors.

The closed-form route enumerates every assembly mode from the degree-8
characteristic polynomial; the iterative route needs many random starts to
find the same set.  Prints per-call timings and the speed ratio.
"""

import argparse
import sys
import time

import numpy as np

from pkmkin import (DEFAULT_SYNTHETIC, SIXTEEN_BRANCH_REGION,
                    enumerate_fk, enumerate_ik, newton_fk,
                    read_geometry_file, select_working_solution)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--geometry", help="geometry file (default: built-in synthetic)")
    parser.add_argument("--samples", type=int, default=100)
    parser.add_argument("--starts", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    geom = read_geometry_file(args.geometry) if args.geometry else DEFAULT_SYNTHETIC
    rng = np.random.default_rng(args.seed)
    (x0, x1), (y0, y1), (z0, z1) = SIXTEEN_BRANCH_REGION
    joint_vectors = []
    for _ in range(args.samples):
        x = rng.uniform(x0, x1)
        y = rng.uniform(y0, y1) * (1.0 if rng.uniform() < 0.5 else -1.0)
        z = rng.uniform(z0, z1)
        sol = select_working_solution(enumerate_ik(geom, x, y, z), geom)
        joint_vectors.append(sol.joints)

    t0 = time.perf_counter()
    closed_counts = [len(enumerate_fk(geom, joints)) for joints in joint_vectors]
    t_closed = time.perf_counter() - t0

    t0 = time.perf_counter()
    newton_counts = [len(newton_fk(geom, joints, starts=args.starts, seed=k))
                     for k, joints in enumerate(joint_vectors)]
    t_newton = time.perf_counter() - t0

    agree = sum(c == n for c, n in zip(closed_counts, newton_counts))
    print(f"samples: {args.samples}  newton starts: {args.starts}")
    print(f"closed-form : {1e3 * t_closed / args.samples:8.3f} ms/call")
    print(f"newton      : {1e3 * t_newton / args.samples:8.3f} ms/call")
    print(f"speed ratio : {t_newton / t_closed:8.1f}x")
    print(f"mode-count agreement: {agree}/{args.samples}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
