"""Communication lower bounds at the DRAM, GBuf, and Reg levels."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .workload import ConvLayer, mac_count, reuse_factor

WORD_BYTES = 2
MB_BYTES = 1 << 20


def words_to_mb(words: int) -> float:
    """Convert a word count to MB (2**20 bytes, 2 bytes per word)."""
    return words * WORD_BYTES / MB_BYTES


@dataclass(frozen=True)
class MemoryBudget:
    s_words: int

    def __post_init__(self):
        if self.s_words < 1:
            raise ValueError("effective on-chip capacity must be >= 1 word")


@dataclass(frozen=True)
class BoundReport:
    dram_words: int
    gbuf_read_words: int
    gbuf_write_words: int
    reg_writes: int


def offchip_lower_bound(layer: ConvLayer, batch: int, budget: MemoryBudget) -> int:
    """Minimum off-chip traffic in words for the layer under capacity S.

    The read term 2*MACs/sqrt(R*S) is evaluated in double precision and
    rounded up so the bound is never over-reported; the write term
    counts each output exactly once.
    """
    macs = mac_count(layer, batch)
    r = float(reuse_factor(layer))
    reads = math.ceil(2.0 * macs / math.sqrt(r * budget.s_words))
    return reads + layer.output_words(batch)


def gbuf_lower_bound(input_reads: int, weight_reads: int) -> tuple[int, int]:
    """Floor on GBuf traffic: every loaded word read and written once."""
    total = input_reads + weight_reads
    return total, total


def reg_lower_bound(layer: ConvLayer, batch: int) -> int:
    """Each MAC needs one register write, so MACs is the floor."""
    return mac_count(layer, batch)
