"""Energy accounting from traffic counters and per-access constants.

Per-access energies are keyed by the capacity of the accessed
structure, mirroring how synthesized SRAM and register-file macros are
characterized. An unknown capacity is an explicit error: interpolating
between technology points silently would fabricate data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .mapping import HwConfig, TrafficCounters, plan_workload
from .simulator import SimResult, simulate
from .workload import Workload

PJ = 1e-12

DEFAULT_GBUF_PJ = {512: 0.30, 2048: 1.39, 3200: 2.36}
DEFAULT_LREG_PJ = {256: 3.39, 128: 1.92, 64: 1.16}


@dataclass(frozen=True)
class EnergyTable:
    mac_pj: float = 4.16
    dram_pj: float = 427.9
    gbuf_pj: dict = field(default_factory=lambda: dict(DEFAULT_GBUF_PJ))
    lreg_pj: dict = field(default_factory=lambda: dict(DEFAULT_LREG_PJ))
    # global registers are 64-entry files, characterized like the
    # smallest local register class unless overridden
    greg_pj: float = DEFAULT_LREG_PJ[64]
    lreg_static_pw_per_word: float = 0.0

    def __post_init__(self):
        vals = [self.mac_pj, self.dram_pj, self.greg_pj,
                self.lreg_static_pw_per_word]
        vals += list(self.gbuf_pj.values()) + list(self.lreg_pj.values())
        if any(v < 0 for v in vals):
            raise ValueError("energy constants must be >= 0")

    def gbuf_access_pj(self, capacity_words: int) -> float:
        return _lookup(self.gbuf_pj, capacity_words * 2, "GBuf")

    def lreg_access_pj(self, capacity_words: int) -> float:
        return _lookup(self.lreg_pj, capacity_words * 2, "LReg")


def _lookup(classes: dict, capacity_bytes: int, what: str) -> float:
    try:
        return classes[capacity_bytes]
    except KeyError:
        known = sorted(classes)
        raise ValueError(
            f"no {what} energy class for {capacity_bytes} bytes; "
            f"known classes: {known}") from None


def energy_table_from_json(text: str) -> EnergyTable:
    """Override any default constant from a JSON object.

    Capacity-class dictionaries are keyed by byte counts (JSON keys are
    strings and are converted back to integers here).
    """
    obj = json.loads(text)
    table = EnergyTable()
    for key in ("mac_pj", "dram_pj", "greg_pj", "lreg_static_pw_per_word"):
        if key in obj:
            table = replace(table, **{key: float(obj[key])})
    for key in ("gbuf_pj", "lreg_pj"):
        if key in obj:
            table = replace(
                table, **{key: {int(k): float(v) for k, v in obj[key].items()}})
    return table


@dataclass(frozen=True)
class EnergyBreakdown:
    dram_j: float
    gbuf_j: float
    greg_j: float
    lreg_dynamic_j: float
    lreg_static_j: float
    mac_j: float
    macs: int

    @property
    def total_j(self) -> float:
        return (self.dram_j + self.gbuf_j + self.greg_j + self.lreg_dynamic_j
                + self.lreg_static_j + self.mac_j)

    @property
    def onchip_j(self) -> float:
        return self.total_j - self.dram_j

    @property
    def pj_per_mac(self) -> float:
        return self.total_j / PJ / self.macs if self.macs else 0.0

    @property
    def onchip_pj_per_mac(self) -> float:
        return self.onchip_j / PJ / self.macs if self.macs else 0.0

    def __add__(self, other: "EnergyBreakdown") -> "EnergyBreakdown":
        return EnergyBreakdown(
            dram_j=self.dram_j + other.dram_j,
            gbuf_j=self.gbuf_j + other.gbuf_j,
            greg_j=self.greg_j + other.greg_j,
            lreg_dynamic_j=self.lreg_dynamic_j + other.lreg_dynamic_j,
            lreg_static_j=self.lreg_static_j + other.lreg_static_j,
            mac_j=self.mac_j + other.mac_j,
            macs=self.macs + other.macs,
        )


def energy_report(counters: TrafficCounters, sim: SimResult | None,
                  table: EnergyTable, hw: HwConfig) -> EnergyBreakdown:
    """Joules per component for one layer's counters.

    Every dynamic term is count times per-access energy; the static
    term charges the configured picowatts per register word over the
    simulated wall time (zero when no simulation result is supplied).
    """
    dram = counters.dram_total * table.dram_pj
    gbuf = ((counters.gbuf_in_r + counters.gbuf_in_w)
            * table.gbuf_access_pj(hw.igbuf_words)
            + (counters.gbuf_wt_r + counters.gbuf_wt_w)
            * table.gbuf_access_pj(hw.wgbuf_words))
    greg = (counters.greg_in_r + counters.greg_in_w + counters.greg_wt_r
            + counters.greg_wt_w) * table.greg_pj
    lreg_dyn = ((counters.lreg_r + counters.lreg_w)
                * table.lreg_access_pj(hw.lreg_words_per_pe))
    if table.lreg_static_pw_per_word and sim is not None:
        seconds = sim.total_cycles / hw.clock_hz
        lreg_static = (table.lreg_static_pw_per_word * hw.s_words * seconds)
    else:
        lreg_static = 0.0
    return EnergyBreakdown(
        dram_j=dram * PJ,
        gbuf_j=gbuf * PJ,
        greg_j=greg * PJ,
        lreg_dynamic_j=lreg_dyn * PJ,
        lreg_static_j=lreg_static * PJ,
        mac_j=counters.macs * table.mac_pj * PJ,
        macs=counters.macs,
    )


@dataclass(frozen=True)
class EfficiencySummary:
    per_layer: tuple[EnergyBreakdown, ...]
    total: EnergyBreakdown
    mac_largest_onchip: bool


def efficiency_summary(workload: Workload, hw: HwConfig,
                       table: EnergyTable) -> EfficiencySummary:
    """Plan, simulate, and convert every layer, then aggregate."""
    wp = plan_workload(workload, hw)
    per_layer = []
    for layer, plan, counters in zip(workload.layers, wp.plans, wp.counters):
        sim = simulate(layer, workload.batch, hw, plan=plan)
        per_layer.append(energy_report(counters, sim, table, hw))
    total = per_layer[0]
    for br in per_layer[1:]:
        total = total + br
    onchip_parts = (total.gbuf_j, total.greg_j,
                    total.lreg_dynamic_j + total.lreg_static_j)
    return EfficiencySummary(
        per_layer=tuple(per_layer),
        total=total,
        mac_largest_onchip=total.mac_j >= max(onchip_parts),
    )
