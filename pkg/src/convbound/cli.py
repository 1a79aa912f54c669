"""Command-line front end emitting deterministic CSV reports."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .bounds import MemoryBudget, offchip_lower_bound, words_to_mb
from .dataflow import DataflowKind, KIND_ORDER, find_minimum, tiling_search
from .energy import EnergyTable, energy_report, energy_table_from_json
from .mapping import HwConfig, IMPLEMENTATIONS, plan_workload
from .simulator import simulate, verify_against_golden
from .workload import Workload, vgg16_workload, workload_from_json

SCHEMA_VERSION = "v1"


def parse_budget(text: str) -> MemoryBudget:
    """'88832' means words; a KB suffix means kilobytes of 16-bit words."""
    text = text.strip()
    if text.lower().endswith("kb"):
        words = int(float(text[:-2]) * 1024 / 2)
    else:
        words = int(text)
    if words < 1:
        raise argparse.ArgumentTypeError(f"infeasible budget {text!r}")
    return MemoryBudget(words)


def load_workload(source: str, batch: int | None) -> Workload:
    if source == "vgg16":
        wl = vgg16_workload(batch if batch is not None else 3)
    else:
        wl = workload_from_json(Path(source).read_text())
        if batch is not None:
            wl = Workload(layers=wl.layers, batch=batch,
                          word_bits=wl.word_bits)
    return wl


def load_hw(source: str) -> HwConfig:
    if source.isdigit():
        idx = int(source)
        if idx not in IMPLEMENTATIONS:
            raise SystemExit(f"error: no hardware preset {idx}; presets are 1-5")
        return IMPLEMENTATIONS[idx]
    return HwConfig(**json.loads(Path(source).read_text()))


def load_energy_table(source: str | None) -> EnergyTable:
    if source is None:
        return EnergyTable()
    return energy_table_from_json(Path(source).read_text())


def parse_kinds(text: str | None) -> tuple[DataflowKind, ...]:
    if text is None:
        return KIND_ORDER
    out = []
    for name in text.split(","):
        name = name.strip().lower()
        try:
            out.append(DataflowKind(name))
        except ValueError:
            valid = ",".join(k.value for k in KIND_ORDER)
            raise SystemExit(f"error: unknown dataflow kind {name!r}; "
                             f"valid kinds: {valid}") from None
    return tuple(out)


def _emit(schema: str, header: list[str], rows: list[list], out: str | None):
    buf = io.StringIO()
    buf.write(f"# schema=convbound-{schema}-{SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    text = buf.getvalue()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_bound(args) -> int:
    wl = load_workload(args.workload, args.batch)
    rows = []
    for budget in args.budget:
        total = 0
        for layer in wl.layers:
            words = offchip_lower_bound(layer, wl.batch, budget)
            total += words
            rows.append([layer.name, budget.s_words, words,
                         f"{words_to_mb(words):.4f}"])
        rows.append(["TOTAL", budget.s_words, total,
                     f"{words_to_mb(total):.4f}"])
    _emit("bound", ["layer", "budget_words", "bound_words", "bound_mb"],
          rows, args.out)
    return 0


def cmd_compare(args) -> int:
    wl = load_workload(args.workload, args.batch)
    kinds = parse_kinds(args.kinds)
    rows = []
    for budget in args.budget:
        for layer in wl.layers:
            bound = offchip_lower_bound(layer, wl.batch, budget)
            best = find_minimum(layer, wl.batch, budget, kinds)
            best_total = best.volume.total if best.feasible else ""
            for kind in kinds:
                res = tiling_search(kind, layer, wl.batch, budget)
                vol = res.volume.total if res.feasible else ""
                mb = f"{words_to_mb(res.volume.total):.4f}" if res.feasible else ""
                rows.append([layer.name, kind.value, budget.s_words, vol, mb,
                             best_total, bound])
    _emit("compare",
          ["layer", "kind", "budget_words", "volume_words", "volume_mb",
           "found_min_words", "bound_words"],
          rows, args.out)
    return 0


_SIM_COUNTER_COLS = [
    "dram_in_r", "dram_wt_r", "dram_out_r", "dram_out_w",
    "gbuf_in_r", "gbuf_in_w", "gbuf_wt_r", "gbuf_wt_w",
    "greg_in_r", "greg_in_w", "greg_wt_r", "greg_wt_w",
    "lreg_r", "lreg_w",
]


def cmd_simulate(args) -> int:
    wl = load_workload(args.workload, args.batch)
    hw = load_hw(args.hw)
    table = load_energy_table(args.energy_table)
    wp = plan_workload(wl, hw)
    rng = np.random.default_rng(args.seed)
    rows = []
    totals = {c: 0 for c in _SIM_COUNTER_COLS
              + ["macs", "total_cycles", "compute_cycles", "stall_cycles"]}
    energy_total = None
    all_verified = True
    for layer, plan, counters in zip(wl.layers, wp.plans, wp.counters):
        if args.functional:
            inp = rng.integers(-8, 8, (wl.batch, layer.ci, layer.hi, layer.wi))
            wts = rng.integers(-8, 8, (layer.co, layer.ci, layer.hk, layer.wk))
            sim = simulate(layer, wl.batch, hw, plan=plan,
                           inputs=inp, weights=wts)
            verified, _ = verify_against_golden(sim, layer, wl.batch, inp, wts)
            all_verified &= verified
        else:
            sim = simulate(layer, wl.batch, hw, plan=plan)
            verified = ""
        br = energy_report(counters, sim, table, hw)
        energy_total = br if energy_total is None else energy_total + br
        row = [layer.name]
        row += [getattr(counters, c) for c in _SIM_COUNTER_COLS]
        row += [counters.macs, sim.total_cycles, sim.compute_cycles,
                sim.stall_cycles,
                f"{sim.pe_utilization:.4f}", f"{sim.lreg_utilization:.4f}",
                f"{sim.gbuf_utilization:.4f}", f"{sim.greg_utilization:.4f}",
                f"{br.total_j:.6e}", f"{br.pj_per_mac:.3f}", str(verified)]
        rows.append(row)
        for c in _SIM_COUNTER_COLS:
            totals[c] += getattr(counters, c)
        totals["macs"] += counters.macs
        totals["total_cycles"] += sim.total_cycles
        totals["compute_cycles"] += sim.compute_cycles
        totals["stall_cycles"] += sim.stall_cycles
    total_row = ["TOTAL"]
    total_row += [totals[c] for c in _SIM_COUNTER_COLS]
    total_row += [totals["macs"], totals["total_cycles"],
                  totals["compute_cycles"], totals["stall_cycles"],
                  f"{wp.pe_utilization:.4f}", f"{wp.lreg_utilization:.4f}",
                  "", "",
                  f"{energy_total.total_j:.6e}",
                  f"{energy_total.pj_per_mac:.3f}",
                  str(all_verified) if args.functional else ""]
    rows.append(total_row)
    header = (["layer"] + _SIM_COUNTER_COLS
              + ["macs", "total_cycles", "compute_cycles", "stall_cycles",
                 "pe_utilization", "lreg_utilization", "gbuf_utilization",
                 "greg_utilization", "energy_j", "pj_per_mac", "verified"])
    _emit("simulate", header, rows, args.out)
    return 0 if (not args.functional or all_verified) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convbound",
        description="Communication analysis for convolution accelerators")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, budgets=False):
        p.add_argument("--workload", default="vgg16",
                       help="preset name 'vgg16' or a workload JSON file")
        p.add_argument("--batch", type=int, default=None)
        p.add_argument("--out", default=None, help="CSV output path (default stdout)")
        if budgets:
            p.add_argument("--budget", type=parse_budget, action="append",
                           required=True,
                           help="on-chip words, or kilobytes with a KB suffix; repeatable")

    p = sub.add_parser("bound", help="off-chip lower bounds per layer")
    common(p, budgets=True)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("compare", help="dataflow search sweep")
    common(p, budgets=True)
    p.add_argument("--kinds", default=None,
                   help="comma-separated dataflow kinds (default all)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="per-layer simulation report")
    common(p)
    p.add_argument("--hw", default="1",
                   help="hardware preset 1-5 or a JSON file")
    p.add_argument("--energy-table", default=None,
                   help="JSON file overriding energy constants")
    p.add_argument("--functional", action="store_true",
                   help="run with random tensors and verify against the oracle")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
