"""Normalise the teleportation sequent, printing each step and its matrix."""

import argparse

import numpy as np

from daggerlc import examples_path
from daggerlc.model import Signature, as_matrix
from daggerlc.rewrite import normalize
from daggerlc.surface import parse_sequent_file, print_sequent

ap = argparse.ArgumentParser()
ap.add_argument("--seed", type=int, default=None, help="random strategy seed (default: deterministic)")
ap.add_argument("--dim", type=int, default=2)
args = ap.parse_args()

(J,) = parse_sequent_file((examples_path() / "teleport.dlc").read_text())
sig = Signature({"T": args.dim})
strategy = "deterministic" if args.seed is None else "random"
nf, trace = normalize(J, strategy, args.seed)

print("start", print_sequent(J))
for i, st in enumerate(trace, 1):
    m = as_matrix(st.after, sig)
    err = float(np.max(np.abs(m - np.eye(args.dim))))
    print(f"{i:>2} {st.redex.kind:<14} |M-I|={err:.1e}  {print_sequent(st.after)}")
print("normal form", print_sequent(nf))
