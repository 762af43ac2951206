"""Check the dagger-compact equalities symbolically and in the matrix model."""

import argparse

from daggerlc.model import verify_axioms

ap = argparse.ArgumentParser()
ap.add_argument("--dims", type=int, nargs="+", default=[2, 3])
ap.add_argument("--tol", type=float, default=1e-9)
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()

results = verify_axioms(dims_under_test=tuple(args.dims), tol=args.tol, seed=args.seed)
for r in results:
    print(r.line())
print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
