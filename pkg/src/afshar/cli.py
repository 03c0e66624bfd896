"""Command-line front end.

    afshar afshar  [--config PATH] [--override K=V ...] [--grid on|off|both] [--slits ...]
    afshar spin    "pre=x+ steps=Jx,Jz post=z+"
    afshar ledger  fig3b | "E; prep S @t0; meas O=U @t1; post U @t2; D"
    afshar sweep   --param wire_width --values 2e-5,5e-5,1e-4

Common flags: --seed N, --out DIR, --photons N.
Exit codes: 0 success, 2 config/input error, 3 numerical-validation error.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import apparatus, tiledger, twostate
from .apparatus import AfsharConfig, SlitState
from .errors import (
    AfsharError,
    ConfigError,
    IncompleteTimelineError,
    InvalidParameterError,
)
from .io import (
    SCHEMA,
    apply_overrides,
    load_config,
    profile_csv,
    summary_record,
    to_json,
    write_artifacts,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
DEFAULT_SEED = 42


@dataclass
class RunManifest:
    subcommand: str
    config_path: Optional[str] = None
    overrides: list[str] = field(default_factory=list)
    seed: int = DEFAULT_SEED
    out: Path = Path("results")
    photons: int = 100_000

    def resolve_config(self) -> AfsharConfig:
        base = load_config(self.config_path) if self.config_path else AfsharConfig()
        return apply_overrides(base, self.overrides)

    def record(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "config_path": self.config_path,
            "overrides": list(self.overrides),
            "seed": self.seed,
            "photons": self.photons,
        }


def _scenario_name(slits: SlitState, grid_on: bool) -> str:
    return f"{slits.value}_grid-{'on' if grid_on else 'off'}"


def _table(rows: list[dict], columns: list[str]) -> str:
    def fmt(v):
        return f"{v:.6g}" if isinstance(v, float) else str(v)

    cells = [[fmt(r[c]) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def _csv(rows: list[dict], columns: list[str], preamble: list[str] = ()) -> str:
    buf = _io.StringIO()
    for line in preamble:
        buf.write(f"# {line}\n")
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


COMPARISON_COLUMNS = ["scenario", "visibility", "transmitted_visibility", "blocked_fraction",
                      "flux_U_prime", "flux_L_prime", "spill", "closure"]


def cmd_afshar(m: RunManifest, slits: list[SlitState], grids: list[bool], out=None) -> int:
    out = out or sys.stdout
    config = m.resolve_config()
    artifacts, rows = {}, []
    preamble = [f"schema: {SCHEMA}", "config: " + json.dumps(config.to_dict(), sort_keys=True)]
    for s in slits:
        for g in grids:
            name = _scenario_name(s, g)
            result = apparatus.run_scenario(config, s, g)
            extra = {"scenario": name, "manifest": m.record()}
            if m.photons > 0:
                extra["photon_tallies"] = apparatus.sample_photons(result, m.photons, m.seed)
            artifacts[f"{name}.json"] = to_json(summary_record(result, config, **extra))
            artifacts[f"{name}_sigma1.csv"] = profile_csv(result.sigma1_profile, config)
            artifacts[f"{name}_sigma2.csv"] = profile_csv(result.image_profile, config)
            rows.append({"scenario": name, **result.summary()})
    artifacts["comparison.csv"] = _csv(rows, COMPARISON_COLUMNS, preamble)
    write_artifacts(m.out, artifacts)
    print(_table(rows, COMPARISON_COLUMNS), file=out)
    return EXIT_OK


def cmd_spin(m: RunManifest, chain_text: str, out=None) -> int:
    out = out or sys.stdout
    chain = twostate.parse_chain(chain_text)
    doc = {"schema": SCHEMA, "manifest": m.record(), "chain": twostate.format_chain(chain)}
    lines = [f"chain: {twostate.format_chain(chain)}", "", "Born probabilities of the preparation"]
    bases = chain.steps or tuple(twostate.BASES.values())
    born = []
    for b in bases:
        p = twostate.born_distribution(chain.pre, b)
        born.append({"basis": b.name, "outcomes": list(b.labels), "probabilities": list(p)})
        lines.append(f"  {b.name:>3}: " + "  ".join(f"P({lab})={v:.6f}" for lab, v in zip(b.labels, p)))
    doc["born"] = born

    if chain.post is not None and chain.steps:
        lines += ["", f"ABL probabilities (pre={chain.pre}, post={chain.post}, each basis alone)"]
        abl = []
        for b in chain.steps:
            p = twostate.abl_distribution(chain.pre, chain.post, b)
            abl.append({"basis": b.name, "outcomes": list(b.labels), "probabilities": list(p)})
            lines.append(f"  {b.name:>3}: " + "  ".join(f"P({lab})={v:.6f}" for lab, v in zip(b.labels, p)))
        doc["abl"] = abl

    if m.photons > 0 and (chain.steps or chain.post is not None):
        result = twostate.run_chain(chain, m.photons, m.seed)
        lines += ["", f"Monte Carlo: n={result.n} seed={m.seed} accepted={result.accepted} "
                      f"acceptance={result.acceptance_rate:.6f}"]
        mc = {"n": result.n, "seed": m.seed, "accepted": result.accepted,
              "acceptance_rate": result.acceptance_rate,
              "sequences": {",".join(k): v for k, v in sorted(result.sequence_counts.items())},
              "conditional_frequencies": []}
        for i, b in enumerate(chain.steps):
            freq = result.frequencies(i)
            exact = chain.conditional_probabilities(i) if result.accepted else (float("nan"),) * 2
            mc["conditional_frequencies"].append(
                {"step": i, "basis": b.name, "outcomes": list(b.labels),
                 "frequencies": list(freq), "exact": list(exact)})
            lines.append(f"  step {i} {b.name:>3}: " + "  ".join(
                f"{lab}: {fr:.5f} (exact {ex:.5f})" for lab, fr, ex in zip(b.labels, freq, exact)))
        doc["monte_carlo"] = mc

    write_artifacts(m.out, {"spin.json": to_json(doc)})
    print("\n".join(lines), file=out)
    return EXIT_OK


def cmd_ledger(m: RunManifest, target: str, out=None) -> int:
    out = out or sys.stdout
    if ";" in target:
        timeline = tiledger.parse_timeline(target)
        name = "custom"
    else:
        timeline = tiledger.builtin_scenario(target)
        name = target
    reports = tiledger.analyze(timeline)
    doc = {"schema": SCHEMA, "scenario": name, "timeline": tiledger.format_timeline(timeline),
           "intervals": tiledger.to_records(reports)}
    write_artifacts(m.out, {f"ledger_{name}.json": to_json(doc)})
    print(f"{name}: {tiledger.format_timeline(timeline)}\n", file=out)
    print(tiledger.render(reports), file=out)
    return EXIT_OK


SWEEP_COLUMNS = ["param", "value", "visibility", "blocked_both", "blocked_upper",
                 "wrong_detector_grid_off", "wrong_detector_grid_on", "spill_max"]


def _sweep_point(args):
    config, param, value = args
    both = apparatus.run_scenario(config, SlitState.BOTH, True)
    up_on = apparatus.run_scenario(config, SlitState.UPPER, True)
    up_off = apparatus.run_scenario(config, SlitState.UPPER, False)
    return {
        "param": param, "value": value,
        "visibility": both.visibility,
        "blocked_both": both.blocked_fraction,
        "blocked_upper": up_on.blocked_fraction,
        "wrong_detector_grid_off": up_off.flux_lower,
        "wrong_detector_grid_on": up_on.flux_lower,
        "spill_max": max(both.spill, up_on.spill, up_off.spill),
    }


def cmd_sweep(m: RunManifest, param: str, values: list[str], jobs: int = 1, out=None) -> int:
    out = out or sys.stdout
    base = m.resolve_config()
    points = [(apply_overrides(base, [f"{param}={v}"]), param, v) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, points))
    else:
        rows = [_sweep_point(p) for p in points]
    preamble = [f"schema: {SCHEMA}", "config: " + json.dumps(base.to_dict(), sort_keys=True)]
    write_artifacts(m.out, {f"sweep_{param}.csv": _csv(rows, SWEEP_COLUMNS, preamble)})
    print(_table(rows, SWEEP_COLUMNS), file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file (SI units)")
    common.add_argument("--override", action="append", default=[], metavar="K=V",
                        help="override one config key; repeatable")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    common.add_argument("--photons", type=int, default=100_000,
                        help="Monte-Carlo photons / trials (0 disables photon tallies)")

    p = argparse.ArgumentParser(prog="afshar", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="subcommand", required=True)

    a = sub.add_parser("afshar", parents=[common], help="run the optical scenarios")
    a.add_argument("--grid", choices=["on", "off", "both"], default="both")
    a.add_argument("--slits", choices=["both", "upper", "lower", "all"], default="all")

    s = sub.add_parser("spin", parents=[common], help="two-state Born/ABL tables and Monte-Carlo chains")
    s.add_argument("chain", help='e.g. "pre=x+ steps=Jx,Jz post=z+"')

    l = sub.add_parser("ledger", parents=[common], help="offer/confirmation determinacy ledger")
    l.add_argument("target", help=f"scenario ({', '.join(tiledger.SCENARIOS)}) or a timeline string")

    w = sub.add_parser("sweep", parents=[common], help="sweep one config key")
    w.add_argument("--param", required=True)
    w.add_argument("--values", required=True, help="comma-separated values")
    w.add_argument("--jobs", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    m = RunManifest(args.subcommand, args.config, list(args.override), args.seed, args.out, args.photons)
    try:
        if m.photons < 0:
            raise InvalidParameterError("--photons must be >= 0")
        if args.subcommand == "afshar":
            slits = list(SlitState) if args.slits == "all" else [SlitState(args.slits)]
            grids = {"on": [True], "off": [False], "both": [False, True]}[args.grid]
            return cmd_afshar(m, slits, grids)
        if args.subcommand == "spin":
            return cmd_spin(m, args.chain)
        if args.subcommand == "ledger":
            return cmd_ledger(m, args.target)
        return cmd_sweep(m, args.param, args.values.split(","), args.jobs)
    except (ConfigError, InvalidParameterError, IncompleteTimelineError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except AfsharError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
