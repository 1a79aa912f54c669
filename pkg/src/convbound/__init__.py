"""Communication analysis toolkit for convolution accelerators.

Computes off-chip communication lower bounds under an on-chip memory
budget, searches tilings for a family of dataflows, and simulates a
blocked output-stationary accelerator down to per-level traffic and
energy.
"""

from .bounds import MemoryBudget, offchip_lower_bound, words_to_mb
from .dataflow import (AccessVolume, DataflowKind, Tiling, find_minimum,
                       proposed_volume, tiling_search)
from .energy import EnergyBreakdown, EnergyTable, efficiency_summary, energy_report
from .mapping import (HwConfig, IMPLEMENTATIONS, IterationPlan, TrafficCounters,
                      plan_layer, plan_workload)
from .simulator import SimResult, simulate, verify_against_golden
from .workload import ConvLayer, Workload, mac_count, reuse_factor, vgg16_workload

__version__ = "0.1.0"

__all__ = [
    "AccessVolume", "ConvLayer", "DataflowKind", "EnergyBreakdown",
    "EnergyTable", "HwConfig", "IMPLEMENTATIONS", "IterationPlan",
    "MemoryBudget", "SimResult", "Tiling", "TrafficCounters", "Workload",
    "efficiency_summary", "energy_report", "find_minimum", "mac_count",
    "offchip_lower_bound", "plan_layer", "plan_workload", "proposed_volume",
    "reuse_factor", "simulate", "tiling_search", "verify_against_golden",
    "vgg16_workload", "words_to_mb",
]
