"""Property-based checks tying the analytic models to the oracles."""

import numpy as np
from hypothesis import given, settings, strategies as st

from convbound import _kernels
from convbound.bounds import MemoryBudget, offchip_lower_bound
from convbound.dataflow import (DataflowKind, Tiling, proposed_volume,
                                tiling_search)
from convbound.refcheck import (dram_volume_from_counts, golden_conv,
                                golden_conv_alt, replay_schedule, trace_count)
from convbound.workload import ConvLayer, mac_count

dims = st.integers(min_value=1, max_value=12)
layers = st.builds(
    ConvLayer,
    name=st.just("t"),
    co=dims, ci=st.integers(1, 8), ho=dims, wo=dims,
    hk=st.sampled_from([1, 3]), wk=st.sampled_from([1, 3]),
    d=st.sampled_from([1, 2]),
)


@st.composite
def layer_and_tiling(draw):
    layer = draw(layers)
    batch = draw(st.integers(1, 3))
    tiling = Tiling(
        b=draw(st.integers(1, batch)),
        z=draw(st.integers(1, layer.co)),
        y=draw(st.integers(1, layer.ho)),
        x=draw(st.integers(1, layer.wo)),
    )
    return layer, batch, tiling


@settings(max_examples=60, deadline=None)
@given(layer_and_tiling())
def test_proposed_volume_matches_replay(case):
    layer, batch, tiling = case
    counts = trace_count(
        replay_schedule(DataflowKind.PROPOSED, layer, batch,
                        {"b": tiling.b, "z": tiling.z,
                         "y": tiling.y, "x": tiling.x}),
        layer, batch)
    vol = proposed_volume(layer, batch, tiling)
    assert dram_volume_from_counts(counts) == (
        vol.input_reads, vol.weight_reads, vol.output_reads, vol.output_writes)


@settings(max_examples=40, deadline=None)
@given(layers, st.integers(1, 2), st.integers(20, 2000))
def test_search_never_beats_lower_bound(layer, batch, s):
    bud = MemoryBudget(s)
    res = tiling_search(DataflowKind.PROPOSED, layer, batch, bud)
    if res.feasible:
        assert res.volume.total >= offchip_lower_bound(layer, batch, bud)


@settings(max_examples=30, deadline=None)
@given(layers, st.integers(1, 2), st.integers(30, 500))
def test_search_is_monotone_in_capacity(layer, batch, s):
    small = tiling_search(DataflowKind.PROPOSED, layer, batch, MemoryBudget(s))
    large = tiling_search(DataflowKind.PROPOSED, layer, batch,
                          MemoryBudget(4 * s))
    if small.feasible:
        assert large.feasible
        assert large.volume.total <= small.volume.total


@settings(max_examples=25, deadline=None)
@given(layers, st.integers(1, 2), st.integers(0, 2**31))
def test_convolution_loop_order_invariance(layer, batch, seed):
    rng = np.random.default_rng(seed)
    inp = rng.integers(-8, 8, (batch, layer.ci, layer.hi, layer.wi))
    wts = rng.integers(-8, 8, (layer.co, layer.ci, layer.hk, layer.wk))
    ref = golden_conv(layer, batch, inp, wts)
    assert (ref == golden_conv_alt(layer, batch, inp, wts)).all()
    assert (ref == _kernels.conv_block(inp.astype(np.int64),
                                       wts.astype(np.int64), layer.d)).all()


@settings(max_examples=40, deadline=None)
@given(layer_and_tiling())
def test_reg_write_floor(case):
    layer, batch, tiling = case
    vol = proposed_volume(layer, batch, tiling)
    # any schedule moves at least one word per output and per MAC pair
    assert vol.output_writes == layer.output_words(batch)
    assert vol.total >= layer.output_words(batch)
    assert mac_count(layer, batch) >= layer.output_words(batch)
