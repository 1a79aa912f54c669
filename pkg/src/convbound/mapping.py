"""Hardware configurations and the iteration planner.

The planner binds a layer to a concrete array: it picks a block shape
for the proposed dataflow, a register subtile, and derives cycle and
per-level traffic counts in closed form. Blocks fall into at most eight
edge classes (interior or clamped in each of batch, row, and column),
so every counter is a short sum instead of a loop over blocks.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .dataflow import Tiling, ceil_div, clamped_extent_sum, proposed_volume
from .workload import ConvLayer, Workload, mac_count


@dataclass(frozen=True)
class HwConfig:
    """One accelerator instance.

    p, q: PE array rows and columns. PEs in a row share inputs, PEs in
    a column share weights. lreg_words_per_pe is the local register
    depth r, so the effective capacity is S = p * q * r words. pg, qg
    describe the PE-group grid that shares each GReg segment.
    """

    p: int
    q: int
    lreg_words_per_pe: int
    igbuf_words: int
    wgbuf_words: int
    greg_words: int
    pg: int = 4
    qg: int = 4
    greg_seg_words: int = 64
    dram_words_per_cycle: float = 6.4
    dram_latency_cycles: int = 100
    clock_hz: float = 500e6

    def __post_init__(self):
        for f in ("p", "q", "lreg_words_per_pe", "igbuf_words", "wgbuf_words",
                  "greg_words", "pg", "qg", "greg_seg_words"):
            if getattr(self, f) < 1:
                raise ValueError(f"{f} must be >= 1")
        if self.dram_latency_cycles < 0 or self.dram_words_per_cycle <= 0:
            raise ValueError("DRAM timing parameters must be positive")
        if self.p % self.pg or self.q % self.qg:
            raise ValueError("group grid must divide the PE array")

    @property
    def s_words(self) -> int:
        return self.p * self.q * self.lreg_words_per_pe


IMPLEMENTATIONS = {
    1: HwConfig(p=16, q=16, lreg_words_per_pe=128, igbuf_words=1024,
                wgbuf_words=256, greg_words=5120),
    2: HwConfig(p=32, q=16, lreg_words_per_pe=64, igbuf_words=1024,
                wgbuf_words=256, greg_words=7680),
    3: HwConfig(p=32, q=32, lreg_words_per_pe=32, igbuf_words=1024,
                wgbuf_words=256, greg_words=9216),
    4: HwConfig(p=32, q=32, lreg_words_per_pe=64, igbuf_words=1600,
                wgbuf_words=256, greg_words=13824),
    5: HwConfig(p=64, q=32, lreg_words_per_pe=32, igbuf_words=1600,
                wgbuf_words=256, greg_words=18432),
}

EPS_SCHEDULE = (0.035, 0.05, 0.08, 0.12)
UTIL_FLOOR = 0.955


@dataclass(frozen=True)
class Subtile:
    """Output patch computed by one PE group per segment load."""

    xs: int
    ys: int
    zs: int


@dataclass(frozen=True)
class IterationPlan:
    tiling: Tiling
    subtile: Subtile
    eps: float

    def cycles_per_pass(self) -> int:
        s = self.subtile
        return s.xs * s.ys * s.zs

    def passes_per_iteration(self, layer: ConvLayer) -> int:
        return self.tiling.k * layer.hk * layer.wk

    def xs_in(self, layer: ConvLayer) -> int:
        return layer.d * (self.subtile.xs - 1) + layer.wk

    def ys_in(self, layer: ConvLayer) -> int:
        return layer.d * (self.subtile.ys - 1) + layer.hk


@dataclass(frozen=True)
class TrafficCounters:
    """Per-level access counts, in words, plus timing aggregates."""

    dram_in_r: int
    dram_wt_r: int
    dram_out_r: int
    dram_out_w: int
    gbuf_in_r: int
    gbuf_in_w: int
    gbuf_wt_r: int
    gbuf_wt_w: int
    greg_in_r: int
    greg_in_w: int
    greg_wt_r: int
    greg_wt_w: int
    lreg_r: int
    lreg_w: int
    cycles: int
    macs: int
    lreg_occupancy: int  # resident output words, for utilization

    @property
    def dram_total(self) -> int:
        return self.dram_in_r + self.dram_wt_r + self.dram_out_r + self.dram_out_w

    def __add__(self, other: "TrafficCounters") -> "TrafficCounters":
        merged = {
            f.name: getattr(self, f.name) + getattr(other, f.name)
            for f in dataclasses.fields(TrafficCounters)
            if f.name != "lreg_occupancy"
        }
        # occupancy is a capacity, not a flow: accumulate cycle-weighted
        merged["lreg_occupancy"] = (
            self.lreg_occupancy * self.cycles + other.lreg_occupancy * other.cycles
        ) // max(self.cycles + other.cycles, 1)
        return TrafficCounters(**merged)


def _edge_classes(dim: int, tile: int):
    """(extent, multiplicity) of interior and clamped tiles along one axis."""
    n = ceil_div(dim, tile)
    return ((tile, n - 1), (dim - (n - 1) * tile, 1))


def subtile_options(hw: HwConfig, layer: ConvLayer, z: int) -> list[Subtile]:
    """Feasible register subtiles for a z-wide block, best area first.

    The regularized input window of the subtile must fit one GReg
    segment and the subtile's outputs must fit one local register file.
    The squarest maximal patch wins; both orientations are returned so
    the planner can pick the one that schedules better.
    """
    zs = ceil_div(min(z, layer.co), hw.q)
    d, hk, wk, seg = layer.d, layer.hk, layer.wk, hw.greg_seg_words
    best = None
    xs = 1
    while d * (xs - 1) + wk <= seg:
        ys = 1
        while (d * (xs - 1) + wk) * (d * (ys - 1) + hk) <= seg:
            if xs * ys * zs <= hw.lreg_words_per_pe:
                key = (xs * ys, -abs(xs - ys))
                if best is None or key > best[0]:
                    best = (key, (xs, ys))
            ys += 1
        xs += 1
    if best is None:
        return []
    xs, ys = best[1]
    out = [Subtile(xs, ys, zs)]
    if xs != ys:
        flipped = Subtile(ys, xs, zs)
        if (d * (ys - 1) + wk) * (d * (xs - 1) + hk) <= seg:
            out.append(flipped)
    return out


def _evaluate(layer: ConvLayer, batch: int, hw: HwConfig, tiling: Tiling,
              sub: Subtile) -> tuple[int, int, int]:
    """(cycles, gbuf_input_reads, gbuf_input_writes) in closed form.

    Work inside a block is position-balanced over the p array rows, and
    each z chunk occupies ceil(z_eff / q) register slots per PE. Input
    reads charge full regularized segment windows per subtile; input
    writes charge one regularized strip per subtile row, so vertically
    overlapping strips are written more than once.
    """
    d, hk, wk = layer.d, layer.hk, layer.wk
    nz = ceil_div(layer.co, tiling.z)
    zl = layer.co - (nz - 1) * tiling.z
    zs_sum = (nz - 1) * ceil_div(tiling.z, hw.q) + ceil_div(zl, hw.q)
    cycles = gir = ibw = 0
    for be, mb in _edge_classes(batch, tiling.b):
        for ye, my in _edge_classes(layer.ho, tiling.y):
            for xe, mx in _edge_classes(layer.wo, tiling.x):
                m = mb * my * mx
                if m == 0:
                    continue
                base = m * nz * layer.ci * be
                cycles += m * layer.ci * hk * wk * ceil_div(be * xe * ye, hw.p) * zs_sum
                gir += (base
                        * ceil_div(ye, sub.ys) * (d * (sub.ys - 1) + hk)
                        * ceil_div(xe, sub.xs) * (d * (sub.xs - 1) + wk))
                ibw += (base * (d * (xe - 1) + wk)
                        * clamped_extent_sum(ye, min(sub.ys, ye), d, hk))
    return cycles, gir, ibw


def gbuf_traffic(layer: ConvLayer, batch: int, hw: HwConfig,
                 plan: IterationPlan) -> dict:
    """GBuf-level counters for one layer.

    Weights pass through untouched: each word streamed from DRAM is
    written and read exactly once. Inputs are written with a clamped
    strip per subtile row (overlapping strips duplicate the halo rows)
    and read as full regularized segment windows.
    """
    vol = proposed_volume(layer, batch, plan.tiling)
    _, gir, ibw = _evaluate(layer, batch, hw, plan.tiling, plan.subtile)
    return {
        "gbuf_in_r": gir,
        "gbuf_in_w": ibw,
        "gbuf_wt_r": vol.weight_reads,
        "gbuf_wt_w": vol.weight_reads,
    }


def reg_traffic(layer: ConvLayer, batch: int, hw: HwConfig,
                plan: IterationPlan) -> dict:
    """Register-level counters for one layer.

    GReg segments are copy-through, so their writes equal the GBuf
    reads of the same tensor. Every cycle each array slot performs one
    MAC, reading one input and one weight from GReg and doing one
    read-modify-write accumulate in its local register, so all four
    read counters equal p * q * cycles. Edge clamping makes some slots
    idle work, which is why lreg_w can exceed the MAC count.
    """
    vol = proposed_volume(layer, batch, plan.tiling)
    cycles, gir, _ = _evaluate(layer, batch, hw, plan.tiling, plan.subtile)
    slot_ops = hw.p * hw.q * cycles
    return {
        "greg_in_r": slot_ops,
        "greg_in_w": gir,
        "greg_wt_r": slot_ops,
        "greg_wt_w": vol.weight_reads,
        "lreg_r": slot_ops,
        "lreg_w": slot_ops,
    }


def layer_traffic(layer: ConvLayer, batch: int, hw: HwConfig,
                  plan: IterationPlan) -> TrafficCounters:
    """All per-level counters for one layer under a fixed plan."""
    t = tiling = plan.tiling
    vol = proposed_volume(layer, batch, tiling)
    cycles, gir, ibw = _evaluate(layer, batch, hw, tiling, plan.subtile)
    slot_ops = hw.p * hw.q * cycles
    return TrafficCounters(
        dram_in_r=vol.input_reads,
        dram_wt_r=vol.weight_reads,
        dram_out_r=vol.output_reads,
        dram_out_w=vol.output_writes,
        gbuf_in_r=gir,
        gbuf_in_w=ibw,
        gbuf_wt_r=vol.weight_reads,
        gbuf_wt_w=vol.weight_reads,
        greg_in_r=slot_ops,
        greg_in_w=gir,
        greg_wt_r=slot_ops,
        greg_wt_w=vol.weight_reads,
        lreg_r=slot_ops,
        lreg_w=slot_ops,
        cycles=cycles,
        macs=mac_count(layer, batch),
        lreg_occupancy=min(t.b * t.x * t.y * t.z, hw.s_words),
    )


def plan_layer(layer: ConvLayer, batch: int, hw: HwConfig,
               eps: float = EPS_SCHEDULE[0]) -> IterationPlan:
    """Pick the block shape and subtile for one layer.

    Stage one collects block shapes within the buffers: the regularized
    input block must fit the input buffer and z fills the remaining
    register capacity (a q-aligned variant of z is also tried). Stage
    two keeps shapes within a fraction eps of the best DRAM volume and
    maximizes utilization, breaking ties toward fewer GBuf input reads,
    less DRAM traffic, then the smallest parameter tuple.
    """
    d, hk, wk = layer.d, layer.hk, layer.wk
    s = hw.s_words
    shapes = set()
    for b in range(1, batch + 1):
        for y in range(1, layer.ho + 1):
            yin = d * (y - 1) + hk
            for x in range(1, layer.wo + 1):
                xin = d * (x - 1) + wk
                if b * xin * yin > hw.igbuf_words:
                    continue
                zmax = min(layer.co, hw.wgbuf_words, s // (b * x * y))
                for z in {zmax, hw.q * (zmax // hw.q)}:
                    if z < 1 or not subtile_options(hw, layer, z):
                        continue
                    vol = proposed_volume(layer, batch, Tiling(b, z, y, x))
                    shapes.add((vol.total, b, z, y, x))
    if not shapes:
        raise ValueError(
            f"{layer.name}: no block shape fits the configured buffers")
    dmin = min(sh[0] for sh in shapes)
    macs = mac_count(layer, batch)
    best = None
    for tot, b, z, y, x in sorted(shapes):
        if tot > dmin * (1 + eps):
            continue
        tiling = Tiling(b, z, y, x)
        vol = proposed_volume(layer, batch, tiling)
        for sub in subtile_options(hw, layer, z):
            cycles, gir, _ = _evaluate(layer, batch, hw, tiling, sub)
            util = macs / (hw.p * hw.q * cycles)
            key = (-round(util, 4), gir, vol.input_reads + vol.weight_reads,
                   b, z, y, x, sub.xs)
            if best is None or key < best[0]:
                best = (key, IterationPlan(tiling, sub, eps))
    return best[1]


@dataclass(frozen=True)
class WorkloadPlan:
    hw: HwConfig
    eps: float
    plans: tuple[IterationPlan, ...]
    counters: tuple[TrafficCounters, ...]

    @property
    def total(self) -> TrafficCounters:
        agg = self.counters[0]
        for c in self.counters[1:]:
            agg = agg + c
        return agg

    @property
    def pe_utilization(self) -> float:
        t = self.total
        return t.macs / (self.hw.p * self.hw.q * t.cycles)

    @property
    def lreg_write_factor(self) -> float:
        """Local register writes per MAC; 1.0 is the floor."""
        t = self.total
        return t.lreg_w / t.macs

    @property
    def lreg_utilization(self) -> float:
        """Cycle-weighted fraction of register capacity holding outputs."""
        num = sum(c.lreg_occupancy * c.cycles for c in self.counters)
        den = sum(c.cycles for c in self.counters) * self.hw.s_words
        return num / den

    @property
    def gbuf_in_read_factor(self) -> float:
        t = self.total
        return t.gbuf_in_r / t.dram_in_r

    @property
    def gbuf_in_write_factor(self) -> float:
        t = self.total
        return t.gbuf_in_w / t.dram_in_r


def plan_workload(workload: Workload, hw: HwConfig,
                  eps_schedule: tuple[float, ...] = EPS_SCHEDULE,
                  util_floor: float = UTIL_FLOOR) -> WorkloadPlan:
    """Plan every layer, relaxing the DRAM slack until the array stays busy.

    The whole workload is replanned at each eps so all layers share one
    slack setting; escalation stops once aggregate PE utilization meets
    the floor or the schedule is exhausted.
    """
    result = None
    for eps in eps_schedule:
        plans = tuple(
            plan_layer(layer, workload.batch, hw, eps)
            for layer in workload.layers
        )
        counters = tuple(
            layer_traffic(layer, workload.batch, hw, plan)
            for layer, plan in zip(workload.layers, plans)
        )
        result = WorkloadPlan(hw=hw, eps=eps, plans=plans, counters=counters)
        if result.pe_utilization >= util_floor:
            break
    return result
