"""Prepare x+, post-select z+, and ask about an intermediate Jx or Jz
measurement: both answers come out certain."""

import argparse

from afshar import twostate as ts

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("-n", type=int, default=100_000)
p.add_argument("--seed", type=int, default=42)
args = p.parse_args()

pre, post = ts.spin_map("x+"), ts.spin_map("z+")
for name in ("Jx", "Jz"):
    b = ts.BASES[name]
    exact = ts.abl_distribution(pre, post, b)
    run = ts.run_chain(ts.MeasurementChain(pre, (b,), post), args.n, args.seed)
    print(f"{name}: ABL {dict(zip(b.labels, exact))}  sampled {dict(zip(b.labels, run.frequencies(0)))}"
          f"  acceptance {run.acceptance_rate:.4f}")

# prepare, confirm, post-select: the optical grid's spin analogue
chain = ts.parse_chain("pre=x+ steps=Jx,Jz post=z+")
run = ts.run_chain(chain, args.n, args.seed)
print("x+ -> Jx -> Jz -> z+:", run.sequence_counts, f"acceptance {run.acceptance_rate:.4f}")
