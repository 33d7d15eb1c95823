"""SRM reconstruction error of the noise-free graph as the rank grows."""
import argparse

from mvtreelet.experiments import srm_reconstruction_sweep
from mvtreelet.synthgraph import KroneckerSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--power", type=int, default=3)
    ap.add_argument("--views", type=int, default=1)
    args = ap.parse_args()

    truth = KroneckerSpec(power=args.power).truth()
    p = truth.shape[0]
    step = max(1, p // 9)
    rows = srm_reconstruction_sweep(truth, list(range(step, p + 1, step)), M=args.views)
    print(f"{'K':>4} {'error':>12} {'relative':>10} {'iters':>6}")
    for r in rows:
        print(f"{r['K']:4d} {r['error']:12.4e} {r['relative_error']:10.4f} {r['iterations']:6d}")


if __name__ == "__main__":
    main()
