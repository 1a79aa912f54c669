import numpy as np
import pytest

from convbound.mapping import HwConfig, IMPLEMENTATIONS, layer_traffic, plan_layer
from convbound.simulator import (load_tensor, save_tensor, simulate,
                                 verify_against_golden)
from convbound.workload import ConvLayer, mac_count, vgg16_workload

TINY_HW = HwConfig(p=2, q=2, lreg_words_per_pe=8, igbuf_words=256,
                   wgbuf_words=64, greg_words=256, pg=1, qg=1,
                   dram_words_per_cycle=float("inf"), dram_latency_cycles=0)


def test_identity_convolution():
    layer = ConvLayer("id", co=1, ci=1, ho=4, wo=4, hk=1, wk=1)
    inp = np.arange(16).reshape(1, 1, 4, 4)
    wts = np.ones((1, 1, 1, 1), dtype=np.int64)
    res = simulate(layer, 1, TINY_HW, inputs=inp, weights=wts)
    assert (res.outputs == inp).all()


def test_constant_convolution():
    layer = ConvLayer("c", co=2, ci=2, ho=4, wo=4)
    inp = np.ones((1, 2, 6, 6), dtype=np.int64)
    wts = np.ones((2, 2, 3, 3), dtype=np.int64)
    res = simulate(layer, 1, TINY_HW, inputs=inp, weights=wts)
    assert (res.outputs == 18).all()


def test_no_stalls_with_ideal_memory():
    layer = ConvLayer("t", co=4, ci=1, ho=4, wo=4)
    res = simulate(layer, 1, TINY_HW)
    assert res.stall_cycles == 0
    assert res.total_cycles == res.compute_cycles


def test_cycle_accounting_invariants():
    hw = IMPLEMENTATIONS[1]
    layer = ConvLayer("t", co=48, ci=24, ho=12, wo=12)
    res = simulate(layer, 2, hw)
    assert res.total_cycles == res.compute_cycles + res.stall_cycles
    assert res.total_cycles >= mac_count(layer, 2) / (hw.p * hw.q)
    for u in (res.pe_utilization, res.lreg_utilization,
              res.gbuf_utilization, res.greg_utilization):
        assert 0.0 <= u <= 1.0
    assert res.runtime_s == res.total_cycles / hw.clock_hz


def test_more_bandwidth_never_slower():
    layer = ConvLayer("t", co=64, ci=8, ho=16, wo=16)
    prev = None
    for bw in (0.5, 1, 2, 4, 8, 16):
        hw = HwConfig(p=8, q=8, lreg_words_per_pe=32, igbuf_words=1024,
                      wgbuf_words=128, greg_words=1024, pg=2, qg=2,
                      dram_words_per_cycle=bw)
        res = simulate(layer, 1, hw)
        if prev is not None:
            assert res.total_cycles <= prev
        prev = res.total_cycles


def test_counters_equal_mapping_analytics():
    hw = IMPLEMENTATIONS[2]
    rng = np.random.default_rng(3)
    for _ in range(6):
        layer = ConvLayer("t", co=int(rng.integers(1, 40)),
                          ci=int(rng.integers(1, 20)),
                          ho=int(rng.integers(1, 20)),
                          wo=int(rng.integers(1, 20)))
        batch = int(rng.integers(1, 4))
        plan = plan_layer(layer, batch, hw)
        res = simulate(layer, batch, hw, plan=plan)
        assert res.counters == layer_traffic(layer, batch, hw, plan)


def test_functional_matches_golden_and_reports_mismatch():
    layer = ConvLayer("t", co=5, ci=3, ho=6, wo=7, d=2)
    rng = np.random.default_rng(11)
    inp = rng.integers(-8, 8, (2, layer.ci, layer.hi, layer.wi))
    wts = rng.integers(-8, 8, (layer.co, layer.ci, layer.hk, layer.wk))
    res = simulate(layer, 2, IMPLEMENTATIONS[1], inputs=inp, weights=wts)
    ok, coord = verify_against_golden(res, layer, 2, inp, wts)
    assert ok and coord is None
    res.outputs[1, 2, 3, 4] += 1
    ok, coord = verify_against_golden(res, layer, 2, inp, wts)
    assert not ok and coord == (1, 2, 3, 4)


def test_functional_shape_errors():
    layer = ConvLayer("t", co=2, ci=2, ho=3, wo=3)
    with pytest.raises(ValueError):
        simulate(layer, 1, TINY_HW, inputs=np.zeros((1, 2, 4, 4)),
                 weights=np.zeros((2, 2, 3, 3)))
    with pytest.raises(ValueError):
        simulate(layer, 1, TINY_HW, inputs=np.zeros((1, 2, 5, 5)),
                 weights=None)


def test_simulation_is_deterministic():
    layer = ConvLayer("t", co=24, ci=8, ho=10, wo=10)
    a = simulate(layer, 2, IMPLEMENTATIONS[3])
    b = simulate(layer, 2, IMPLEMENTATIONS[3])
    assert a == b


def test_vgg16_pe_utilization():
    # plan at the workload level so all layers share one slack setting
    from convbound.mapping import plan_workload

    wl = vgg16_workload(3)
    for idx, hw in IMPLEMENTATIONS.items():
        wp = plan_workload(wl, hw)
        macs = cycles = 0
        for layer, plan in zip(wl.layers, wp.plans):
            res = simulate(layer, wl.batch, hw, plan=plan)
            macs += res.counters.macs
            cycles += res.compute_cycles
        assert macs / (hw.p * hw.q * cycles) > 0.95, idx


def test_tensor_file_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    for bits, lo, hi in ((8, -128, 128), (16, -3000, 3000), (32, -10**6, 10**6)):
        arr = rng.integers(lo, hi, (3, 2, 5))
        path = tmp_path / f"t{bits}.bin"
        save_tensor(path, arr, bits)
        back = load_tensor(path)
        assert (back == arr).all()
    with pytest.raises(ValueError):
        save_tensor(tmp_path / "bad.bin", rng.integers(0, 2, (2,)), 24)
    (tmp_path / "junk.bin").write_bytes(b"nope")
    with pytest.raises(ValueError):
        load_tensor(tmp_path / "junk.bin")
