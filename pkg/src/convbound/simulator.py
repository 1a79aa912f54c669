"""Pass-level simulation of the proposed accelerator.

The simulator walks the block schedule explicitly, charging exact
compute cycles per pass and stalls at block boundaries whenever the
double-buffered prefetch (plus the previous block's output writeback,
which shares DRAM bandwidth) cannot finish under the current block's
compute. Functional mode additionally evaluates every block on real
integer tensors.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dataflow import ceil_div
from .mapping import (HwConfig, IterationPlan, TrafficCounters, layer_traffic,
                      plan_layer)
from .workload import ConvLayer, mac_count


@dataclass(frozen=True)
class SimResult:
    total_cycles: int
    compute_cycles: int
    stall_cycles: int
    counters: TrafficCounters
    pe_utilization: float
    lreg_utilization: float
    gbuf_utilization: float
    greg_utilization: float
    runtime_s: float
    outputs: np.ndarray | None = None

    def as_row(self) -> dict:
        row = {
            "total_cycles": self.total_cycles,
            "compute_cycles": self.compute_cycles,
            "stall_cycles": self.stall_cycles,
            "pe_utilization": round(self.pe_utilization, 6),
            "lreg_utilization": round(self.lreg_utilization, 6),
            "gbuf_utilization": round(self.gbuf_utilization, 6),
            "greg_utilization": round(self.greg_utilization, 6),
            "runtime_s": self.runtime_s,
        }
        for name in ("dram_in_r", "dram_wt_r", "dram_out_r", "dram_out_w",
                     "gbuf_in_r", "gbuf_in_w", "gbuf_wt_r", "gbuf_wt_w",
                     "greg_in_r", "greg_in_w", "greg_wt_r", "greg_wt_w",
                     "lreg_r", "lreg_w", "cycles", "macs"):
            row[name] = getattr(self.counters, name)
        return row


def _blocks(layer: ConvLayer, batch: int, tiling):
    """Block schedule of the proposed dataflow, outermost batch first."""
    for b0 in range(0, batch, tiling.b):
        be = min(tiling.b, batch - b0)
        for z0 in range(0, layer.co, tiling.z):
            ze = min(tiling.z, layer.co - z0)
            for y0 in range(0, layer.ho, tiling.y):
                ye = min(tiling.y, layer.ho - y0)
                for x0 in range(0, layer.wo, tiling.x):
                    xe = min(tiling.x, layer.wo - x0)
                    yield b0, be, z0, ze, y0, ye, x0, xe


def simulate(layer: ConvLayer, batch: int, hw: HwConfig,
             plan: IterationPlan | None = None,
             inputs: np.ndarray | None = None,
             weights: np.ndarray | None = None) -> SimResult:
    """Run one layer; functional mode when both tensors are given.

    The first block's load and the last block's writeback cannot
    overlap any compute and are charged as stalls; in between, the
    prefetch of block i+1 and the writeback of block i race the compute
    of block i.
    """
    if plan is None:
        plan = plan_layer(layer, batch, hw)
    functional = inputs is not None or weights is not None
    if functional:
        if inputs is None or weights is None:
            raise ValueError("functional mode needs both inputs and weights")
        if inputs.shape != (batch, layer.ci, layer.hi, layer.wi):
            raise ValueError(f"input shape {inputs.shape} does not match layer")
        if weights.shape != (layer.co, layer.ci, layer.hk, layer.wk):
            raise ValueError(f"weight shape {weights.shape} does not match layer")
        inputs = inputs.astype(np.int64)
        weights = weights.astype(np.int64)
        out = np.zeros((batch, layer.co, layer.ho, layer.wo), dtype=np.int64)
    else:
        out = None

    t = plan.tiling
    d, hk, wk = layer.d, layer.hk, layer.wk
    bw = hw.dram_words_per_cycle
    lat = hw.dram_latency_cycles
    compute_cycles = 0
    stall_cycles = 0
    prev_compute = None  # compute budget available to hide the next transfer
    pending_store = 0

    for b0, be, z0, ze, y0, ye, x0, xe in _blocks(layer, batch, t):
        yin = d * (ye - 1) + hk
        xin = d * (xe - 1) + wk
        load = ze * layer.ci * hk * wk + be * layer.ci * yin * xin
        if prev_compute is None:
            # nothing overlaps the very first fill
            stall_cycles += lat + math.ceil(load / bw)
        else:
            # the DMA pipeline is kept fed, so steady-state boundaries
            # stall on bandwidth alone; latency shows at fill and drain
            transfer = math.ceil((load + pending_store) / bw)
            stall_cycles += max(0, transfer - prev_compute)
        compute = (layer.ci * hk * wk * ceil_div(be * xe * ye, hw.p)
                   * ceil_div(ze, hw.q))
        compute_cycles += compute
        prev_compute = compute
        pending_store = be * ze * ye * xe
        if functional:
            blk_in = inputs[b0:b0 + be, :, d * y0:d * y0 + yin,
                            d * x0:d * x0 + xin]
            blk_wt = weights[z0:z0 + ze]
            out[b0:b0 + be, z0:z0 + ze, y0:y0 + ye, x0:x0 + xe] = \
                _kernels.conv_block(blk_in, blk_wt, d)

    stall_cycles += lat + math.ceil(pending_store / bw)
    total_cycles = compute_cycles + stall_cycles

    counters = layer_traffic(layer, batch, hw, plan)
    macs = mac_count(layer, batch)
    xsp, ysp = plan.xs_in(layer), plan.ys_in(layer)
    gbuf_occ = t.b * t.x_in(layer) * t.y_in(layer) + min(t.z, hw.wgbuf_words)
    greg_occ = (hw.p * (hw.q // hw.qg) * min(xsp * ysp, hw.greg_seg_words)
                + (hw.p // hw.pg) * min(t.z, layer.co))
    return SimResult(
        total_cycles=total_cycles,
        compute_cycles=compute_cycles,
        stall_cycles=stall_cycles,
        counters=counters,
        # occupancy of the array while it is computing; stalled cycles
        # are reported separately rather than folded into this figure
        pe_utilization=macs / (hw.p * hw.q * compute_cycles),
        lreg_utilization=min(1.0, counters.lreg_occupancy / hw.s_words),
        gbuf_utilization=min(1.0, gbuf_occ / (hw.igbuf_words + hw.wgbuf_words)),
        greg_utilization=min(1.0, greg_occ / hw.greg_words),
        runtime_s=total_cycles / hw.clock_hz,
        outputs=out,
    )


def verify_against_golden(result: SimResult, layer: ConvLayer, batch: int,
                          inputs: np.ndarray, weights: np.ndarray):
    """Element-exact check of a functional run against the slow oracle.

    Returns (True, None) on success, (False, coordinate) at the first
    mismatch in (batch, channel, row, col) order.
    """
    from .refcheck import golden_conv

    if result.outputs is None:
        raise ValueError("result has no outputs; run simulate in functional mode")
    golden = golden_conv(layer, batch, inputs, weights)
    if result.outputs.shape != golden.shape:
        raise ValueError("output shape mismatch")
    diff = result.outputs != golden
    if not diff.any():
        return True, None
    coord = tuple(int(v) for v in np.argwhere(diff)[0])
    return False, coord


_TENSOR_MAGIC = b"CBT1"
_DTYPES = {8: np.int8, 16: np.int16, 32: np.int32}


def save_tensor(path, array: np.ndarray, word_bits: int = 16) -> None:
    """Raw little-endian integer tensor with a minimal header."""
    if word_bits not in _DTYPES:
        raise ValueError("word_bits must be one of 8, 16, 32")
    arr = np.ascontiguousarray(array, dtype=_DTYPES[word_bits])
    with open(path, "wb") as fh:
        fh.write(_TENSOR_MAGIC)
        fh.write(struct.pack("<BB", word_bits, arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(arr.astype(arr.dtype.newbyteorder("<")).tobytes())


def load_tensor(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(4) != _TENSOR_MAGIC:
            raise ValueError(f"{path}: not a tensor file")
        word_bits, ndim = struct.unpack("<BB", fh.read(2))
        if word_bits not in _DTYPES:
            raise ValueError(f"{path}: unsupported word width {word_bits}")
        shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
        data = np.frombuffer(fh.read(), dtype=np.dtype(_DTYPES[word_bits]).newbyteorder("<"))
    return data.reshape(shape).astype(_DTYPES[word_bits])
