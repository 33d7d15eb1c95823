"""Cross-group shared-response correlations on synthetic multi-subject views."""
import argparse
import math

from mvtreelet.experiments import METHODS, SPACES, SharedResponseConfig, shared_response
from mvtreelet.synthgraph import KroneckerSpec, generate_views


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epsilon", type=float, default=0.3)
    ap.add_argument("--views", type=int, default=20)
    ap.add_argument("--partitions", type=int, default=5)
    ap.add_argument("--fdr", type=float, default=0.01)
    args = ap.parse_args()

    views = generate_views(KroneckerSpec(noise_level=args.epsilon, seed=args.seed), args.views)
    print(f"{'method':>6} {'space':>8} {'mean':>7} {'std':>7}  per partition")
    for method in METHODS:
        for space in (SPACES if method != "none" else ["feature"]):
            res = shared_response(views, SharedResponseConfig(
                group_split_seed=args.seed, partitions=args.partitions, fdr_q=args.fdr,
                method=method, space=space))
            per = " ".join("  nan" if math.isnan(r["correlation"]) else f"{r['correlation']:.3f}"
                           for r in res.rows)
            print(f"{method:>6} {space:>8} {res.mean:7.3f} {res.std:7.3f}  {per}")


if __name__ == "__main__":
    main()
