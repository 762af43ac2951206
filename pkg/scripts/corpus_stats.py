"""Size, normalisation length and reduction-graph statistics of a random corpus."""

import argparse
import collections
import statistics
import time

from daggerlc.corpus import CorpusConfig, generate_corpus
from daggerlc.rewrite import GraphCapExceeded, normalize, reduction_graph, step_bound
from daggerlc.syntax import expand

ap = argparse.ArgumentParser()
ap.add_argument("--size", type=int, default=500)
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--graphs", action="store_true", help="also build full reduction graphs (slow)")
args = ap.parse_args()

t0 = time.perf_counter()
items = generate_corpus(CorpusConfig(size=args.size, seed=args.seed))
print(f"generated {len(items)} sequents in {time.perf_counter() - t0:.2f}s")

rules = collections.Counter(r for it in items for r in it.rules)
print("rule usage:", ", ".join(f"{k}={v}" for k, v in rules.most_common()))

lengths, ratios, soups = [], [], []
for it in items:
    J = expand(it.sequent)
    _, tr = normalize(J)
    lengths.append(len(tr))
    ratios.append(len(tr) / max(step_bound(J), 1))
    soups.append(len(J.soup))
print(f"soup size mean {statistics.mean(soups):.2f} max {max(soups)}")
print(f"steps mean {statistics.mean(lengths):.2f} max {max(lengths)}; steps/bound max {max(ratios):.2f}")

if args.graphs:
    sizes, multi, capped = [], 0, 0
    for it in items:
        try:
            g = reduction_graph(it.sequent)
        except GraphCapExceeded:
            capped += 1
            continue
        sizes.append(len(g.nodes))
        multi += len(g.sinks()) != 1
    print(f"graphs: largest {max(sizes)}, over cap {capped}, with more than one sink {multi}")
