import math

import pytest

from convbound.bounds import (MemoryBudget, gbuf_lower_bound,
                              offchip_lower_bound, reg_lower_bound,
                              words_to_mb)
from convbound.workload import ConvLayer, mac_count, vgg16_workload


def test_formula_matches_direct_evaluation():
    layer = ConvLayer("t", co=32, ci=16, ho=14, wo=14)
    macs = mac_count(layer, 2)
    s = 4096
    expected = math.ceil(2 * macs / math.sqrt(9 * s)) + layer.output_words(2)
    assert offchip_lower_bound(layer, 2, MemoryBudget(s)) == expected


def test_reuse_clamp_in_bound():
    # 1x1 kernel degenerates to matrix multiplication: R = 1
    layer = ConvLayer("mm", co=64, ci=64, ho=8, wo=8, hk=1, wk=1)
    macs = mac_count(layer, 1)
    s = 1024
    expected = math.ceil(2 * macs / math.sqrt(s)) + layer.output_words(1)
    assert offchip_lower_bound(layer, 1, MemoryBudget(s)) == expected


def test_monotone_in_capacity():
    layer = ConvLayer("t", co=16, ci=8, ho=12, wo=12)
    prev = None
    for s in (64, 256, 1024, 4096, 16384):
        cur = offchip_lower_bound(layer, 2, MemoryBudget(s))
        if prev is not None:
            assert cur <= prev
        prev = cur


def test_vgg16_total_at_reference_budget():
    # 173.5 KB of 16-bit words is 88832 words of effective capacity
    wl = vgg16_workload(3)
    bud = MemoryBudget(88832)
    total = sum(offchip_lower_bound(l, wl.batch, bud) for l in wl.layers)
    assert total == 143623856
    assert abs(words_to_mb(total) - 274.8) / 274.8 < 0.02


def test_words_to_mb_uses_binary_megabytes():
    assert words_to_mb(1 << 19) == 1.0


def test_gbuf_and_reg_floors():
    assert gbuf_lower_bound(100, 50) == (150, 150)
    layer = ConvLayer("t", co=4, ci=4, ho=4, wo=4)
    assert reg_lower_bound(layer, 3) == mac_count(layer, 3)


def test_budget_validation():
    with pytest.raises(ValueError):
        MemoryBudget(0)
