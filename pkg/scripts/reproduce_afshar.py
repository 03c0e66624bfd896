"""Run the six optical scenarios at the default geometry and print the
power bookkeeping.  With --plot, also draw the sigma1 and image-plane
profiles (needs matplotlib)."""

import argparse

import numpy as np

from afshar.apparatus import AfsharConfig, SlitState, run_scenario, sample_photons


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--plot", help="save a figure to this path")
    p.add_argument("--photons", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=42)
    args = p.parse_args()

    cfg = AfsharConfig()
    results = {(s, g): run_scenario(cfg, s, g) for s in SlitState for g in (False, True)}
    print(f"fringe spacing {cfg.fringe_spacing * 1e3:.3f} mm, image plane {cfg.detector_plane:.3f} m, "
          f"magnification {cfg.magnification:.3f}")
    print(f"{'scenario':<16}{'V':>8}{'blocked':>10}{'U':>10}{'L':>12}{'spill':>9}   photons U/L/blocked/spill")
    for (s, g), r in results.items():
        t = sample_photons(r, args.photons, args.seed)
        tally = "/".join(str(t[k]) for k in ("U'", "L'", "blocked", "spill"))
        name = f"{s.value}, grid {'on' if g else 'off'}"
        print(f"{name:<16}{r.visibility:8.4f}{r.blocked_fraction:10.5f}{r.flux_upper:10.5f}"
              f"{r.flux_lower:12.3e}{r.spill:9.4f}   {tally}")

    if args.plot:
        import matplotlib.pyplot as plt

        fig, (a1, a2) = plt.subplots(2, 1, figsize=(8, 7))
        half = 3 * cfg.fringe_spacing
        for s in SlitState:
            prof = results[s, False].sigma1_profile
            sel = np.abs(prof.x) < 3 * half
            a1.plot(prof.x[sel] * 1e3, prof.values[sel], label=s.value)
        for c in results[SlitState.BOTH, True].wire_positions:
            a1.axvspan((c - cfg.wire_width / 2) * 1e3, (c + cfg.wire_width / 2) * 1e3, color="k", alpha=0.3)
        a1.set_xlabel("x at wire plane [mm]")
        a1.legend()
        for key in [(SlitState.UPPER, False), (SlitState.UPPER, True), (SlitState.BOTH, True)]:
            prof = results[key].image_profile
            sel = np.abs(prof.x) < 1e-3
            a2.semilogy(prof.x[sel] * 1e3, prof.values[sel] + 1e-12, label=f"{key[0].value}, grid {key[1]}")
        a2.axvline(cfg.detector_boundary * 1e3, color="k", lw=0.8)
        a2.set_xlabel("x at image plane [mm]  (U' left, L' right)")
        a2.legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)
        print(f"wrote {args.plot}")


if __name__ == "__main__":
    main()
