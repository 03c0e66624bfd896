"""How blocking and wrong-detector leakage grow with wire width."""

import argparse
import dataclasses

import numpy as np

from afshar.apparatus import AfsharConfig, SlitState, run_scenario

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--points", type=int, default=6)
args = p.parse_args()

base = AfsharConfig()
print(f"{'wire/fringe':>11}{'blocked(S)':>12}{'blocked(U)':>12}{'ratio':>8}{'leak to L':>13}")
for frac in np.linspace(0.02, 0.3, args.points):
    cfg = dataclasses.replace(base, wire_width=float(frac * base.fringe_spacing))
    s = run_scenario(cfg, SlitState.BOTH, True)
    u = run_scenario(cfg, SlitState.UPPER, True)
    print(f"{frac:11.3f}{s.blocked_fraction:12.5f}{u.blocked_fraction:12.5f}"
          f"{s.blocked_fraction / u.blocked_fraction:8.3f}{u.flux_lower:13.3e}")
