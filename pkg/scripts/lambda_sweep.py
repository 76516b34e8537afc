"""Recovery speed and Monte Carlo spread across forgetting factors."""
import argparse
from pathlib import Path

from isbpls.csvio import write_aggregate
from isbpls.montecarlo import MCConfig, lambda_sweep, window_mean


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambdas", type=float, nargs="+", default=[0.9, 0.98, 1.0])
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/lambda")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print("lambda  recovery@101  recovery@301  window_mean  window_std")
    for res in lambda_sweep(MCConfig(), args.lambdas, args.reps, args.seed, args.workers):
        write_aggregate(out / f"aggregate_lambda{res.lam!r}.csv", res.curve)
        m, s = res.curve.mean[:, 0], res.curve.std[:, 0]
        print(f"{res.lam:<7} {str(res.recovery[101]):<13} {str(res.recovery[301]):<13} "
              f"{window_mean(m):<12.3f} {window_mean(s):.3f}")


if __name__ == "__main__":
    main()
