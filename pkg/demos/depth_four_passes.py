"""Run every depth-four pass on one formula and compare the results."""

import argparse

from chasm.analysis import pit_equivalent
from chasm.depth4 import PASSES
from chasm.generators import random_homogeneous, shallow


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=12)
    ap.add_argument("--t", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    f = random_homogeneous(4, args.d, 80, args.seed)
    g = shallow(4, args.d, 2, args.seed)
    print(f"formula: size {f.size}, degree {f.degree}; shallow: size {g.size}")
    print(f"{'pass':8} {'top fan-in':>10} {'a_min':>6} {'bottom':>6} {'iters':>5}  equal")
    for name, run in sorted(PASSES.items()):
        src = g if name == "shallow" else f
        d4 = run(src, args.t, seed=args.seed)
        r = d4.report
        eq = pit_equivalent(src, d4).equal
        print(f"{name:8} {r.top_fanin:>10} {r.min_factor_count:>6} "
              f"{r.max_bottom_degree:>6} {r.iteration_count:>5}  {eq}")


if __name__ == "__main__":
    main()
