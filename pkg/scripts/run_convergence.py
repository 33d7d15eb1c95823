"""Convergence of E_M with the number of views, plus stability and rate fits."""
import argparse

from mvtreelet.experiments import (
    ConvergenceConfig,
    convergence_experiment,
    convergence_trend,
    rate_fits,
    stability_table,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--views", type=int, nargs="+", default=[1, 2, 5, 10, 25])
    ap.add_argument("--epsilon", type=float, nargs="+", default=[0.1, 0.3, 0.5])
    ap.add_argument("--collections", type=int, default=10)
    args = ap.parse_args()

    cfg = ConvergenceConfig(M_values=args.views, epsilon_values=args.epsilon,
                            collections=args.collections, master_seed=args.seed)
    records = convergence_experiment(cfg)

    print(f"{'eps':>5} {'M':>4} {'E_M mean':>12} {'E_M std':>10}")
    for r in records:
        print(f"{r.epsilon:5.2f} {r.M:4d} {r.E_M_mean:12.3f} {r.E_M_std:10.3f}")
    print("\nSpearman(M, E_M):", {k: round(v, 3) for k, v in convergence_trend(records).items()})
    print("\nstability (mean of per-M std):")
    for row in stability_table(records):
        print(f"  eps={row['epsilon']:.2f}  {row['stability']:.3f} +- {row['std']:.3f}")
    print("\nrate fits  E_M ~ A exp(r M) + bias:")
    for f in rate_fits(records):
        print(f"  eps={f.epsilon:.2f}  r={f.rate:.4f}  A={f.amplitude:.2f}  bias={f.bias:.2f}"
              f"  rms={f.fit_residual:.3f}")


if __name__ == "__main__":
    main()
