"""Independent oracles used by the test suite.

Nothing here shares code with the analytic models: volumes are obtained
by replaying schedules event by event, optima by unpruned enumeration,
and outputs by direct evaluation of the convolution definition. The
oracles are deliberately slow.
"""

from __future__ import annotations

from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .bounds import MemoryBudget
from .dataflow import DataflowKind
from .workload import ConvLayer


class TraceEvent(NamedTuple):
    level: str      # DRAM, GBuf, GReg, LReg
    tensor: str     # input, weight, output
    direction: str  # read, write
    index: int      # flat index within the tensor
    timestamp: int


def golden_conv(layer: ConvLayer, batch: int, inputs: np.ndarray,
                weights: np.ndarray) -> np.ndarray:
    """Direct evaluation of the convolution definition.

    inputs: (batch, ci, hi, wi), weights: (co, ci, hk, wk); returns
    (batch, co, ho, wo) accumulated in int64. Each output is the plain
    sum of its receptive-field products, evaluated independently.
    """
    _check_shapes(layer, batch, inputs, weights)
    inputs = inputs.astype(np.int64)
    weights = weights.astype(np.int64)
    out = np.zeros((batch, layer.co, layer.ho, layer.wo), dtype=np.int64)
    d, hk, wk = layer.d, layer.hk, layer.wk
    for b in range(batch):
        for z in range(layer.co):
            for oy in range(layer.ho):
                for ox in range(layer.wo):
                    window = inputs[b, :, oy * d:oy * d + hk, ox * d:ox * d + wk]
                    out[b, z, oy, ox] = int((window * weights[z]).sum())
    return out


def golden_conv_alt(layer: ConvLayer, batch: int, inputs: np.ndarray,
                    weights: np.ndarray) -> np.ndarray:
    """Loop-order-permuted second implementation (kernel-position major)."""
    _check_shapes(layer, batch, inputs, weights)
    inputs = inputs.astype(np.int64)
    weights = weights.astype(np.int64)
    out = np.zeros((batch, layer.co, layer.ho, layer.wo), dtype=np.int64)
    d = layer.d
    for r in range(layer.hk):
        for s in range(layer.wk):
            for c in range(layer.ci):
                plane = inputs[:, c, r:r + d * layer.ho:d, s:s + d * layer.wo:d]
                for z in range(layer.co):
                    out[:, z] += weights[z, c, r, s] * plane
    return out


def _check_shapes(layer, batch, inputs, weights):
    if inputs.shape != (batch, layer.ci, layer.hi, layer.wi):
        raise ValueError(f"input shape {inputs.shape} does not match layer")
    if weights.shape != (layer.co, layer.ci, layer.hk, layer.wk):
        raise ValueError(f"weight shape {weights.shape} does not match layer")


def trace_count(events: Iterable[TraceEvent], layer: ConvLayer | None = None,
                batch: int | None = None) -> dict:
    """Tally an event stream per (level, tensor, direction).

    When a layer is given, flat indices are bounds-checked against the
    tensor sizes. Unique-index counts are reported per key as well.
    """
    bounds = None
    if layer is not None and batch is not None:
        bounds = {
            "input": batch * layer.ci * layer.hi * layer.wi,
            "weight": layer.co * layer.ci * layer.hk * layer.wk,
            "output": batch * layer.co * layer.ho * layer.wo,
        }
    counts: dict = {}
    uniques: dict = {}
    for ev in events:
        if bounds is not None and not (0 <= ev.index < bounds[ev.tensor]):
            raise IndexError(f"index {ev.index} out of bounds for {ev.tensor}")
        key = (ev.level, ev.tensor, ev.direction)
        counts[key] = counts.get(key, 0) + 1
        uniques.setdefault(key, set()).add(ev.index)
    return {
        "counts": counts,
        "unique": {k: len(v) for k, v in uniques.items()},
    }


def dram_volume_from_counts(counts: dict) -> tuple[int, int, int, int]:
    """(input_reads, weight_reads, output_reads, output_writes) at DRAM."""
    c = counts["counts"]
    return (
        c.get(("DRAM", "input", "read"), 0),
        c.get(("DRAM", "weight", "read"), 0),
        c.get(("DRAM", "output", "read"), 0),
        c.get(("DRAM", "output", "write"), 0),
    )


class _Emitter:
    def __init__(self):
        self.t = 0

    def __call__(self, level, tensor, direction, index):
        ev = TraceEvent(level, tensor, direction, index, self.t)
        self.t += 1
        return ev


def _chunks(dim: int, step: int):
    for lo in range(0, dim, step):
        yield lo, min(step, dim - lo)


def replay_proposed(layer: ConvLayer, batch: int, b: int, z: int, y: int,
                    x: int) -> Iterator[TraceEvent]:
    """DRAM events of the proposed schedule, element by element."""
    em = _Emitter()
    d, hk, wk = layer.d, layer.hk, layer.wk
    ci, co, ho, wo = layer.ci, layer.co, layer.ho, layer.wo
    hi, wi = layer.hi, layer.wi
    for b0, be in _chunks(batch, b):
        for z0, ze in _chunks(co, z):
            for y0, ye in _chunks(ho, y):
                for x0, xe in _chunks(wo, x):
                    for zz in range(z0, z0 + ze):
                        for c in range(ci):
                            for r in range(hk):
                                for s in range(wk):
                                    yield em("DRAM", "weight", "read",
                                             ((zz * ci + c) * hk + r) * wk + s)
                    yin = d * (ye - 1) + hk
                    xin = d * (xe - 1) + wk
                    for bb in range(b0, b0 + be):
                        for c in range(ci):
                            for yy in range(d * y0, d * y0 + yin):
                                for xx in range(d * x0, d * x0 + xin):
                                    yield em("DRAM", "input", "read",
                                             ((bb * ci + c) * hi + yy) * wi + xx)
                    for bb in range(b0, b0 + be):
                        for zz in range(z0, z0 + ze):
                            for yy in range(y0, y0 + ye):
                                for xx in range(x0, x0 + xe):
                                    yield em("DRAM", "output", "write",
                                             ((bb * co + zz) * ho + yy) * wo + xx)


def _replay_inr(layer, batch, k, y, x):
    em = _Emitter()
    d, hk, wk = layer.d, layer.hk, layer.wk
    ci, co, ho, wo = layer.ci, layer.co, layer.ho, layer.wo
    hi, wi = layer.hi, layer.wi
    for bb in range(batch):
        for y0, ye in _chunks(ho, y):
            for x0, xe in _chunks(wo, x):
                yin = d * (ye - 1) + hk
                xin = d * (xe - 1) + wk
                for ichunk, (c0, ke) in enumerate(_chunks(ci, k)):
                    for c in range(c0, c0 + ke):
                        for yy in range(d * y0, d * y0 + yin):
                            for xx in range(d * x0, d * x0 + xin):
                                yield em("DRAM", "input", "read",
                                         ((bb * ci + c) * hi + yy) * wi + xx)
                    for zz in range(co):
                        for c in range(c0, c0 + ke):
                            for r in range(hk):
                                for s in range(wk):
                                    yield em("DRAM", "weight", "read",
                                             ((zz * ci + c) * hk + r) * wk + s)
                    for zz in range(co):
                        for yy in range(y0, y0 + ye):
                            for xx in range(x0, x0 + xe):
                                idx = ((bb * co + zz) * ho + yy) * wo + xx
                                if ichunk > 0:
                                    yield em("DRAM", "output", "read", idx)
                                yield em("DRAM", "output", "write", idx)


def _replay_wtr(layer, batch, k, z):
    em = _Emitter()
    d, hk, wk = layer.d, layer.hk, layer.wk
    ci, co, ho, wo = layer.ci, layer.co, layer.ho, layer.wo
    hi, wi = layer.hi, layer.wi
    for z0, ze in _chunks(co, z):
        for ichunk, (c0, ke) in enumerate(_chunks(ci, k)):
            for zz in range(z0, z0 + ze):
                for c in range(c0, c0 + ke):
                    for r in range(hk):
                        for s in range(wk):
                            yield em("DRAM", "weight", "read",
                                     ((zz * ci + c) * hk + r) * wk + s)
            for bb in range(batch):
                for oy in range(ho):
                    # one-row line buffer: the hk input rows of this
                    # output row stream in fully, for every output row
                    for c in range(c0, c0 + ke):
                        for yy in range(d * oy, d * oy + hk):
                            for xx in range(wi):
                                yield em("DRAM", "input", "read",
                                         ((bb * ci + c) * hi + yy) * wi + xx)
                for zz in range(z0, z0 + ze):
                    for yy in range(ho):
                        for xx in range(wo):
                            idx = ((bb * co + zz) * ho + yy) * wo + xx
                            if ichunk > 0:
                                yield em("DRAM", "output", "read", idx)
                            yield em("DRAM", "output", "write", idx)


def _replay_outr(layer, batch, z, y, x, weights_resident):
    em = _Emitter()
    d, hk, wk = layer.d, layer.hk, layer.wk
    ci, co, ho, wo = layer.ci, layer.co, layer.ho, layer.wo
    hi, wi = layer.hi, layer.wi
    for z0, ze in _chunks(co, z):
        first_spatial = True
        for bb in range(batch):
            for y0, ye in _chunks(ho, y):
                for x0, xe in _chunks(wo, x):
                    if first_spatial or not weights_resident:
                        for zz in range(z0, z0 + ze):
                            for c in range(ci):
                                for r in range(hk):
                                    for s in range(wk):
                                        yield em("DRAM", "weight", "read",
                                                 ((zz * ci + c) * hk + r) * wk + s)
                        first_spatial = False
                    yin = d * (ye - 1) + hk
                    xin = d * (xe - 1) + wk
                    for c in range(ci):
                        for yy in range(d * y0, d * y0 + yin):
                            for xx in range(d * x0, d * x0 + xin):
                                yield em("DRAM", "input", "read",
                                         ((bb * ci + c) * hi + yy) * wi + xx)
                    for zz in range(z0, z0 + ze):
                        for yy in range(y0, y0 + ye):
                            for xx in range(x0, x0 + xe):
                                yield em("DRAM", "output", "write",
                                         ((bb * co + zz) * ho + yy) * wo + xx)


def replay_schedule(kind: DataflowKind, layer: ConvLayer, batch: int,
                    params: dict) -> Iterator[TraceEvent]:
    """Event stream of the given dataflow's DRAM schedule."""
    if kind is DataflowKind.PROPOSED:
        return replay_proposed(layer, batch, params["b"], params["z"],
                               params["y"], params["x"])
    if kind in (DataflowKind.INR_A, DataflowKind.INR_B):
        k = layer.ci if kind is DataflowKind.INR_B else params["k"]
        return _replay_inr(layer, batch, k, params["y"], params["x"])
    if kind in (DataflowKind.WTR_A, DataflowKind.WTR_B):
        k = layer.ci if kind is DataflowKind.WTR_B else params["k"]
        return _replay_wtr(layer, batch, k, params["z"])
    if kind in (DataflowKind.OUTR_A, DataflowKind.OUTR_B):
        return _replay_outr(layer, batch, params["z"], params["y"], params["x"],
                            kind is DataflowKind.OUTR_B)
    raise ValueError(f"unknown dataflow kind {kind}")


def brute_force_tiling(kind: DataflowKind, layer: ConvLayer, batch: int,
                       budget: MemoryBudget, limit: int = 10**7):
    """Unpruned enumeration of the full tile lattice.

    Applies the same objective and tie-break as the production search:
    minimize DRAM words, then on-chip footprint, then the parameter
    tuple. Refuses instances whose lattice exceeds `limit` candidates.
    Returns (params, volume) or None when infeasible.
    """
    from .dataflow import baseline_volume, footprint

    s = budget.s_words
    grids = {
        DataflowKind.PROPOSED: [("b", batch), ("z", layer.co),
                                ("y", layer.ho), ("x", layer.wo)],
        DataflowKind.INR_A: [("k", layer.ci), ("y", layer.ho)],
        DataflowKind.INR_B: [("y", layer.ho)],
        DataflowKind.WTR_A: [("k", layer.ci), ("z", layer.co)],
        DataflowKind.WTR_B: [("z", layer.co)],
        DataflowKind.OUTR_A: [("z", layer.co), ("y", layer.ho), ("x", layer.wo)],
        DataflowKind.OUTR_B: [("z", layer.co), ("y", layer.ho), ("x", layer.wo)],
    }[kind]
    size = 1
    for _, n in grids:
        size *= n
    if size > limit:
        raise ValueError(f"lattice of {size} candidates exceeds limit {limit}")

    def lattice(idx, partial):
        if idx == len(grids):
            yield dict(partial)
            return
        name, n = grids[idx]
        for v in range(1, n + 1):
            partial[name] = v
            yield from lattice(idx + 1, partial)

    best = None
    for params in lattice(0, {}):
        if kind in (DataflowKind.INR_A, DataflowKind.INR_B):
            params["x"] = layer.wo  # resident blocks span full rows
        if footprint(kind, layer, params) > s:
            continue
        vol = baseline_volume(kind, layer, batch, params)
        key = (vol.total, footprint(kind, layer, params),
               tuple(params[n] for n, _ in grids))
        if best is None or key < best[0]:
            best = (key, params, vol)
    if best is None:
        return None
    return best[1], best[2]
