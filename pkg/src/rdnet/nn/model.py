"""FFT-RadNet: pre-encoder, FPN, range-angle decoder, detection + seg heads.

The graph consumes the raw RD tensor as stacked real/imaginary channels,
shape (batch, 2*n_rx, b_r, b_d), and emits

    clas  (batch, 1, b_r/4, b_a/8)   sigmoid detection map
    reg   (batch, 2, b_r/4, b_a/8)   range / azimuth offsets
    seg   (batch, 1, b_r/2, b_a/4)   sigmoid free-space map

Structure: a trainable pre-encoder (dilated 1 x n_tx layer initialized to the
exact de-interleaving gather, then a 3x3 combine conv); a feature pyramid of
four residual blocks each downsampling 2x2; a decoder that maps every pyramid
level to the final azimuth width with a 1x1 conv, swaps the Doppler and
azimuth axes, and walks back up the range axis with range-only transposed
convs and concatenations; one shared detection trunk whose first conv has
stride 2; and a segmentation head at decoder resolution.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..config import ValidatedConfig
from ..errors import ShapeMismatch, SpecInconsistent
from ..mimo import atrous_equivalence_weights
from .layers import (AxisSwap, BatchNorm2d, Conv2d, ConvTranspose2dRange,
                     ReLU, ResidualBlock, Sequential, Sigmoid)


@dataclass(frozen=True)
class ModelSpec:
    """Architecture knobs: the graph structure is fixed, widths are not."""

    pre_encoder_out_channels: int = 192
    fpn_depths: Tuple[int, ...] = (3, 6, 6, 3)
    fpn_widths: Tuple[int, ...] = (32, 40, 48, 56)
    decoder_azimuth_width: Optional[int] = None
    """Final azimuth width; must equal b_a // 4 (the default when None)."""
    decoder_deconv_channels: Tuple[int, ...] = (64, 64, 64)
    decoder_latent_channels: int = 128
    det_head_widths: Tuple[int, ...] = (144, 96, 96, 96)
    seg_head_widths: Tuple[int, ...] = (128, 64)

    @classmethod
    def toy(cls) -> "ModelSpec":
        """Slim variant sized for single-core CPU training runs."""
        return cls(
            pre_encoder_out_channels=32,
            fpn_depths=(2, 2, 2, 2),
            fpn_widths=(16, 24, 32, 40),
            decoder_deconv_channels=(16, 16, 16),
            decoder_latent_channels=24,
            det_head_widths=(32, 32, 32, 32),
            seg_head_widths=(24, 16),
        )


_SPEC_FIELDS = [f.name for f in dataclasses.fields(ModelSpec)]


def spec_to_json(spec: ModelSpec) -> str:
    data = {}
    for name in _SPEC_FIELDS:
        value = getattr(spec, name)
        data[name] = list(value) if isinstance(value, tuple) else value
    return json.dumps(data, indent=2) + "\n"


def spec_from_json(text: str) -> ModelSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecInconsistent(f"model spec is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SpecInconsistent("model spec JSON must be an object")
    unknown = sorted(set(data) - set(_SPEC_FIELDS))
    if unknown:
        raise SpecInconsistent(f"model spec has unknown keys: {unknown}")
    kwargs = {}
    for name, value in data.items():
        if isinstance(value, list):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    return ModelSpec(**kwargs)


def load_spec(path) -> ModelSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return spec_from_json(fh.read())


def _conv_bn_relu(in_ch, out_ch, ksize, stride, padding, rng, dtype, name):
    return Sequential([
        Conv2d(in_ch, out_ch, ksize, stride=stride, padding=padding,
               bias=False, rng=rng, dtype=dtype, name=f"{name}.conv"),
        BatchNorm2d(out_ch, dtype=dtype, name=f"{name}.bn"),
        ReLU(),
    ])


class FftRadNet:
    def __init__(self, spec: ModelSpec, config: ValidatedConfig,
                 dtype=np.float32, rng=None):
        _check_spec(spec, config)
        rng = rng or np.random.default_rng(0)
        self.spec = spec
        self.config = config
        self.dtype = dtype
        cfg = config
        in_ch = 2 * cfg.n_rx
        full_ch = 2 * cfg.n_tx * cfg.n_rx
        self.azimuth_width = spec.decoder_azimuth_width or cfg.b_a // 4

        # pre-encoder: the dilated layer starts as the exact replica gather
        self.pre_atrous = Conv2d(
            in_ch, full_ch, (1, cfg.n_tx), dilation=(1, cfg.dilation),
            padding=((0, 0), (0, (cfg.n_tx - 1) * cfg.dilation)),
            pad_mode="circular", bias=False, rng=rng, dtype=dtype,
            name="pre.atrous")
        self.pre_atrous.w.value[...] = \
            atrous_equivalence_weights(cfg).astype(dtype)
        self.pre_combine = _conv_bn_relu(
            full_ch, spec.pre_encoder_out_channels, 3, 1, 1, rng, dtype,
            "pre.combine")

        # feature pyramid: four blocks, each downsampling 2x2
        self.blocks = []
        ch = spec.pre_encoder_out_channels
        for i, (depth, width) in enumerate(zip(spec.fpn_depths,
                                               spec.fpn_widths), start=1):
            layers = [ResidualBlock(ch, width, stride=2, rng=rng, dtype=dtype,
                                    name=f"fpn.b{i}.l0")]
            layers += [ResidualBlock(width, width, rng=rng, dtype=dtype,
                                     name=f"fpn.b{i}.l{j}")
                       for j in range(1, depth)]
            self.blocks.append(Sequential(layers))
            ch = width

        # decoder laterals: 1x1 conv to the azimuth width, then axis swap
        a = self.azimuth_width
        self.laterals = [
            Conv2d(w, a, 1, rng=rng, dtype=dtype, name=f"dec.lat{i}")
            for i, w in enumerate(spec.fpn_widths, start=1)
        ]
        self.swaps = [AxisSwap() for _ in range(4)]

        dc = spec.decoder_deconv_channels
        swapped = [cfg.b_d // 2, cfg.b_d // 4, cfg.b_d // 8, cfg.b_d // 16]
        self.deconvs = [
            ConvTranspose2dRange(swapped[3], dc[0], rng=rng, dtype=dtype,
                                 name="dec.up1"),
            ConvTranspose2dRange(dc[0] + swapped[2], dc[1], rng=rng,
                                 dtype=dtype, name="dec.up2"),
            ConvTranspose2dRange(dc[1] + swapped[1], dc[2], rng=rng,
                                 dtype=dtype, name="dec.up3"),
        ]
        lat_ch = spec.decoder_latent_channels
        self.dec_out = Sequential([
            _conv_bn_relu(dc[2] + swapped[0], lat_ch, 3, 1, 1, rng, dtype,
                          "dec.out1"),
            _conv_bn_relu(lat_ch, lat_ch, 3, 1, 1, rng, dtype, "dec.out2"),
        ])

        # detection head: shared trunk (first conv strides 2), then the
        # sigmoid classification map and a 3x3 regression conv
        dw = spec.det_head_widths
        trunk = [_conv_bn_relu(lat_ch, dw[0], 3, 2, 1, rng, dtype,
                               "det.t0")]
        for j in range(1, 4):
            trunk.append(_conv_bn_relu(dw[j - 1], dw[j], 3, 1, 1, rng, dtype,
                                       f"det.t{j}"))
        self.det_trunk = Sequential(trunk)
        self.det_clas = Conv2d(dw[3], 1, 1, rng=rng, dtype=dtype,
                               name="det.clas")
        self.det_sigmoid = Sigmoid()
        self.det_reg = Conv2d(dw[3], 2, 3, padding=1, rng=rng, dtype=dtype,
                              name="det.reg")

        sw = spec.seg_head_widths
        self.seg_body = Sequential([
            _conv_bn_relu(lat_ch, sw[0], 3, 1, 1, rng, dtype, "seg.p0a"),
            _conv_bn_relu(sw[0], sw[0], 3, 1, 1, rng, dtype, "seg.p0b"),
            _conv_bn_relu(sw[0], sw[1], 3, 1, 1, rng, dtype, "seg.p1a"),
            _conv_bn_relu(sw[1], sw[1], 3, 1, 1, rng, dtype, "seg.p1b"),
        ])
        self.seg_final = Conv2d(sw[1], 1, 1, rng=rng, dtype=dtype,
                                name="seg.final")
        self.seg_sigmoid = Sigmoid()

        self._cache = None

    # -- plumbing ---------------------------------------------------------

    def _ordered_layers(self):
        layers = [self.pre_atrous, self.pre_combine, *self.blocks,
                  *self.laterals, *self.deconvs, self.dec_out,
                  self.det_trunk, self.det_clas, self.det_reg,
                  self.seg_body, self.seg_final]
        return layers

    def parameters(self):
        return [p for l in self._ordered_layers() for p in l.parameters()]

    def state(self):
        out = {}
        for l in self._ordered_layers():
            out.update(l.state())
        return out

    def load_state(self, state):
        for l in self._ordered_layers():
            l.load_state(state)

    # -- execution --------------------------------------------------------

    def forward(self, x, train=False):
        cfg = self.config
        expected = (2 * cfg.n_rx, cfg.b_r, cfg.b_d)
        if x.ndim != 4 or x.shape[1:] != expected:
            raise ShapeMismatch(
                f"model input shape {x.shape} != (n,) + {expected}")
        h = self.pre_atrous.forward(x, train)
        h = self.pre_combine.forward(h, train)

        feats = []
        for block in self.blocks:
            h = block.forward(h, train)
            feats.append(h)

        side = [swap.forward(lat.forward(f, train), train)
                for f, lat, swap in zip(feats, self.laterals, self.swaps)]

        splits = []
        y = side[3]
        for i, deconv in enumerate(self.deconvs):
            y = deconv.forward(y, train)
            skip = side[2 - i]
            splits.append(y.shape[1])
            y = np.concatenate([y, skip], axis=1)
        latent = self.dec_out.forward(y, train)

        trunk = self.det_trunk.forward(latent, train)
        clas = self.det_sigmoid.forward(self.det_clas.forward(trunk, train),
                                        train)
        reg = self.det_reg.forward(trunk, train)
        seg_h = self.seg_body.forward(latent, train)
        seg = self.seg_sigmoid.forward(self.seg_final.forward(seg_h, train),
                                       train)
        self._cache = splits
        return clas, reg, seg

    def backward(self, d_clas, d_reg, d_seg):
        splits = self._cache
        d_trunk = self.det_clas.backward(self.det_sigmoid.backward(d_clas))
        d_trunk = d_trunk + self.det_reg.backward(d_reg)
        d_latent = self.det_trunk.backward(d_trunk)
        d_latent = d_latent + self.seg_body.backward(
            self.seg_final.backward(self.seg_sigmoid.backward(d_seg)))

        dy = self.dec_out.backward(d_latent)
        d_side = [None] * 4
        for i in reversed(range(len(self.deconvs))):
            k = splits[i]
            d_side[2 - i] = dy[:, k:]
            dy = self.deconvs[i].backward(np.ascontiguousarray(dy[:, :k]))
        d_side[3] = dy

        d_feats = [lat.backward(swap.backward(ds))
                   for ds, lat, swap in zip(d_side, self.laterals, self.swaps)]

        dh = d_feats[3]
        for i in reversed(range(4)):
            dh = self.blocks[i].backward(dh)
            if i > 0:
                dh = dh + d_feats[i - 1]

        dh = self.pre_combine.backward(dh)
        return self.pre_atrous.backward(dh)

    # -- analytic complexity ---------------------------------------------

    def complexity(self, batch=1):
        """Per-layer (name, macs, params, out_shape) without running data."""
        cfg = self.config
        records = []

        def conv_rec(conv: Conv2d, in_shape):
            n, c, h, w = in_shape
            oh, ow = conv._out_shape(h, w)
            macs = n * oh * ow * conv.out_ch * conv.in_ch * conv.kh * conv.kw
            params = sum(p.value.size for p in conv.parameters())
            records.append((conv.name, macs, params, (n, conv.out_ch, oh, ow)))
            return (n, conv.out_ch, oh, ow)

        def bn_rec(bn: BatchNorm2d, in_shape):
            records.append((bn.name, 0, 2 * bn.ch, in_shape))
            return in_shape

        def seq_rec(seq: Sequential, in_shape):
            for l in seq.layers:
                in_shape = walk(l, in_shape)
            return in_shape

        def res_rec(block: ResidualBlock, in_shape):
            s = conv_rec(block.conv1, in_shape)
            s = bn_rec(block.bn1, s)
            s = conv_rec(block.conv2, s)
            s = bn_rec(block.bn2, s)
            if block.proj is not None:
                ps = conv_rec(block.proj, in_shape)
                bn_rec(block.proj_bn, ps)
            return s

        def deconv_rec(dc: ConvTranspose2dRange, in_shape):
            n, c, h, w = in_shape
            macs = n * h * w * c * dc.out_ch * 2
            params = sum(p.value.size for p in dc.parameters())
            out = (n, dc.out_ch, 2 * h, w)
            records.append((dc.name, macs, params, out))
            return out

        def walk(layer, in_shape):
            if isinstance(layer, Conv2d):
                return conv_rec(layer, in_shape)
            if isinstance(layer, BatchNorm2d):
                return bn_rec(layer, in_shape)
            if isinstance(layer, ConvTranspose2dRange):
                return deconv_rec(layer, in_shape)
            if isinstance(layer, ResidualBlock):
                return res_rec(layer, in_shape)
            if isinstance(layer, Sequential):
                return seq_rec(layer, in_shape)
            return in_shape        # ReLU / Sigmoid / AxisSwap: no MACs

        shape = (batch, 2 * cfg.n_rx, cfg.b_r, cfg.b_d)
        shape = walk(self.pre_atrous, shape)
        shape = walk(self.pre_combine, shape)
        feats = []
        for block in self.blocks:
            shape = walk(block, shape)
            feats.append(shape)
        side = []
        for f, lat in zip(feats, self.laterals):
            s = walk(lat, f)
            side.append((s[0], s[3], s[2], s[1]))      # axis swap
        y = side[3]
        for i, deconv in enumerate(self.deconvs):
            y = walk(deconv, y)
            skip = side[2 - i]
            y = (y[0], y[1] + skip[1], y[2], y[3])
        latent = walk(self.dec_out, y)
        trunk = walk(self.det_trunk, latent)
        walk(self.det_clas, trunk)
        walk(self.det_reg, trunk)
        seg = walk(self.seg_body, latent)
        walk(self.seg_final, seg)
        return records


def _check_spec(spec: ModelSpec, config: ValidatedConfig) -> None:
    if len(spec.fpn_depths) != 4 or len(spec.fpn_widths) != 4:
        raise SpecInconsistent("the pyramid has exactly four blocks")
    if any(d < 1 for d in spec.fpn_depths):
        raise SpecInconsistent("every pyramid block needs at least one layer")
    if len(spec.decoder_deconv_channels) != 3:
        raise SpecInconsistent("the decoder has exactly three upscaling steps")
    if len(spec.det_head_widths) != 4 or len(spec.seg_head_widths) != 2:
        raise SpecInconsistent("head width lists must have lengths 4 and 2")
    if spec.pre_encoder_out_channels < 1:
        raise SpecInconsistent("pre_encoder_out_channels must be positive")
    if config.b_r % 16 or config.b_d % 16:
        raise SpecInconsistent(
            f"b_r and b_d must be divisible by 16, got "
            f"{config.b_r} x {config.b_d}")
    if config.b_a % 8:
        raise SpecInconsistent(f"b_a must be divisible by 8, got {config.b_a}")
    a = spec.decoder_azimuth_width
    if a is not None and a != config.b_a // 4:
        raise SpecInconsistent(
            f"decoder azimuth width {a} != b_a/4 = {config.b_a // 4}; the "
            "head output contracts fix it")


def build_fftradnet(spec: ModelSpec, config: ValidatedConfig,
                    dtype=np.float32, rng=None) -> FftRadNet:
    """Assemble the network; raises SpecInconsistent on bad spec/config."""
    return FftRadNet(spec, config, dtype=dtype, rng=rng)
