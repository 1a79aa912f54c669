"""Convolutional-layer geometry and built-in workloads."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction


@dataclass(frozen=True)
class ConvLayer:
    """One convolutional layer, specified by its output dimensions.

    The input image is treated as the padded input: hi = d*(ho-1)+hk and
    wi = d*(wo-1)+wk, so every traffic model counts padded elements as
    real data.
    """

    name: str
    co: int
    ci: int
    ho: int
    wo: int
    hk: int = 3
    wk: int = 3
    d: int = 1

    def __post_init__(self):
        for f in ("co", "ci", "ho", "wo", "hk", "wk", "d"):
            v = getattr(self, f)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{self.name}: {f} must be a positive integer, got {v!r}")

    @property
    def hi(self) -> int:
        return self.d * (self.ho - 1) + self.hk

    @property
    def wi(self) -> int:
        return self.d * (self.wo - 1) + self.wk

    def input_words(self, batch: int) -> int:
        return batch * self.ci * self.hi * self.wi

    def weight_words(self) -> int:
        return self.co * self.ci * self.hk * self.wk

    def output_words(self, batch: int) -> int:
        return batch * self.co * self.ho * self.wo


@dataclass(frozen=True)
class Workload:
    layers: tuple[ConvLayer, ...]
    batch: int
    word_bits: int = 16

    def __post_init__(self):
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.word_bits not in (8, 16, 32):
            raise ValueError("word_bits must be one of 8, 16, 32")
        object.__setattr__(self, "layers", tuple(self.layers))


def reuse_factor(layer: ConvLayer) -> Fraction:
    """Sliding-window reuse count of each input, clamped below at 1.

    With a 1x1 kernel or a large stride the factor degenerates to 1 and
    the layer behaves like a plain matrix multiplication.
    """
    r = Fraction(layer.wk * layer.hk, layer.d * layer.d)
    return max(r, Fraction(1))


def mac_count(layer: ConvLayer, batch: int) -> int:
    """Number of multiply-accumulate operations for the whole layer.

    Computed in arbitrary-precision integers, so counts beyond 2**32
    are exact rather than an overflow hazard.
    """
    if batch < 1:
        raise ValueError("batch must be >= 1")
    return batch * layer.wo * layer.ho * layer.co * layer.wk * layer.hk * layer.ci


_VGG16 = (
    ("conv1_1", 224, 3, 64),
    ("conv1_2", 224, 64, 64),
    ("conv2_1", 112, 64, 128),
    ("conv2_2", 112, 128, 128),
    ("conv3_1", 56, 128, 256),
    ("conv3_2", 56, 256, 256),
    ("conv3_3", 56, 256, 256),
    ("conv4_1", 28, 256, 512),
    ("conv4_2", 28, 512, 512),
    ("conv4_3", 28, 512, 512),
    ("conv5_1", 14, 512, 512),
    ("conv5_2", 14, 512, 512),
    ("conv5_3", 14, 512, 512),
)


def vgg16_workload(batch: int = 3) -> Workload:
    """The 13 convolutional layers of VGGNet-16 (3x3 kernels, stride 1)."""
    layers = tuple(
        ConvLayer(name=n, co=co, ci=ci, ho=s, wo=s) for n, s, ci, co in _VGG16
    )
    return Workload(layers=layers, batch=batch)


def workload_to_json(workload: Workload) -> str:
    obj = {
        "batch": workload.batch,
        "word_bits": workload.word_bits,
        "layers": [
            {
                "name": l.name, "co": l.co, "ci": l.ci, "ho": l.ho,
                "wo": l.wo, "hk": l.hk, "wk": l.wk, "d": l.d,
            }
            for l in workload.layers
        ],
    }
    return json.dumps(obj, indent=2)


def workload_from_json(text: str) -> Workload:
    obj = json.loads(text)
    layers = tuple(ConvLayer(**spec) for spec in obj["layers"])
    return Workload(
        layers=layers,
        batch=obj["batch"],
        word_bits=obj.get("word_bits", 16),
    )
