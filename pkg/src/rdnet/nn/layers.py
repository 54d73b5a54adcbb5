"""Differentiable layers: explicit forward/backward, numpy only.

Tensors are (batch, channels, height, width) with height = range axis.
Every layer caches what its backward needs during forward; backward returns
the input gradient and accumulates parameter gradients in place.
"""

from __future__ import annotations

from typing import List, Tuple

import numpy as np

from ..errors import ShapeMismatch, SpecInconsistent


class Parameter:
    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = value
        self.grad = np.zeros_like(value)

    def zero_grad(self):
        self.grad[...] = 0.0


def _pair(v):
    if isinstance(v, int):
        return (v, v)
    return tuple(v)


def _padding4(padding):
    """Normalize int | (ph, pw) | ((pt, pb), (pl, pr))."""
    if isinstance(padding, int):
        return ((padding, padding), (padding, padding))
    a, b = padding
    if isinstance(a, int):
        return ((a, a), (b, b))
    return (tuple(a), tuple(b))


class Layer:
    def parameters(self) -> List[Parameter]:
        return []

    def state(self) -> dict:
        return {p.name: p.value for p in self.parameters()}

    def load_state(self, state: dict) -> None:
        for p in self.parameters():
            value = state[p.name]
            if value.shape != p.value.shape:
                raise ShapeMismatch(
                    f"{p.name}: checkpoint shape {value.shape} != {p.value.shape}")
            p.value[...] = value


def _im2col(xp: np.ndarray, kh: int, kw: int, stride, dilation,
            out_h: int, out_w: int) -> np.ndarray:
    n, c = xp.shape[:2]
    sh, sw = stride
    dh, dw = dilation
    cols = np.empty((n, c, kh, kw, out_h, out_w), dtype=xp.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = xp[:, :,
                                  i * dh:i * dh + sh * out_h:sh,
                                  j * dw:j * dw + sw * out_w:sw]
    return cols.reshape(n, c * kh * kw, out_h * out_w)


def _col2im_add(dcols: np.ndarray, xp_shape, kh, kw, stride, dilation,
                out_h, out_w) -> np.ndarray:
    n, c = xp_shape[:2]
    sh, sw = stride
    dh, dw = dilation
    dxp = np.zeros(xp_shape, dtype=dcols.dtype)
    dcols = dcols.reshape(n, c, kh, kw, out_h, out_w)
    for i in range(kh):
        for j in range(kw):
            dxp[:, :,
                i * dh:i * dh + sh * out_h:sh,
                j * dw:j * dw + sw * out_w:sw] += dcols[:, :, i, j]
    return dxp


class Conv2d(Layer):
    """Cross-correlation with stride, dilation, zero or circular padding."""

    def __init__(self, in_ch, out_ch, ksize, stride=1, dilation=1, padding=0,
                 pad_mode="zero", bias=True, rng=None, dtype=np.float32,
                 name="conv"):
        self.in_ch, self.out_ch = in_ch, out_ch
        self.kh, self.kw = _pair(ksize)
        self.stride = _pair(stride)
        self.dilation = _pair(dilation)
        self.padding = _padding4(padding)
        if pad_mode not in ("zero", "circular"):
            raise SpecInconsistent(f"unknown pad_mode {pad_mode!r}")
        self.pad_mode = pad_mode
        self.name = name
        rng = rng or np.random.default_rng(0)
        fan_in = in_ch * self.kh * self.kw
        w = rng.standard_normal((out_ch, in_ch, self.kh, self.kw))
        self.w = Parameter(f"{name}.w",
                           (w * np.sqrt(2.0 / fan_in)).astype(dtype))
        self.b = Parameter(f"{name}.b", np.zeros(out_ch, dtype=dtype)) \
            if bias else None
        self._x = None

    def parameters(self):
        return [self.w] + ([self.b] if self.b is not None else [])

    def _pad(self, x):
        (pt, pb), (pl, pr) = self.padding
        if pt == pb == pl == pr == 0:
            return x
        mode = "constant" if self.pad_mode == "zero" else "wrap"
        return np.pad(x, ((0, 0), (0, 0), (pt, pb), (pl, pr)), mode=mode)

    def _out_shape(self, h, w):
        (pt, pb), (pl, pr) = self.padding
        eff_h = self.dilation[0] * (self.kh - 1) + 1
        eff_w = self.dilation[1] * (self.kw - 1) + 1
        out_h = (h + pt + pb - eff_h) // self.stride[0] + 1
        out_w = (w + pl + pr - eff_w) // self.stride[1] + 1
        if out_h < 1 or out_w < 1:
            raise ShapeMismatch(
                f"{self.name}: input {h}x{w} too small for kernel")
        return out_h, out_w

    def forward(self, x, train=False):
        if x.ndim != 4 or x.shape[1] != self.in_ch:
            raise ShapeMismatch(
                f"{self.name}: expected (n, {self.in_ch}, h, w), got {x.shape}")
        self._x = x
        out_h, out_w = self._out_shape(x.shape[2], x.shape[3])
        xp = self._pad(x)
        cols = _im2col(xp, self.kh, self.kw, self.stride, self.dilation,
                       out_h, out_w)
        w2 = self.w.value.reshape(self.out_ch, -1)
        out = np.matmul(w2[None], cols)
        out = out.reshape(x.shape[0], self.out_ch, out_h, out_w)
        if self.b is not None:
            out = out + self.b.value[None, :, None, None]
        return out

    def backward(self, dout):
        x = self._x
        out_h, out_w = dout.shape[2], dout.shape[3]
        xp = self._pad(x)
        cols = _im2col(xp, self.kh, self.kw, self.stride, self.dilation,
                       out_h, out_w)
        n = x.shape[0]
        dflat = dout.reshape(n, self.out_ch, -1)
        self.w.grad += np.einsum("nfl,nkl->fk", dflat, cols,
                                 optimize=True).reshape(self.w.value.shape)
        if self.b is not None:
            self.b.grad += dout.sum(axis=(0, 2, 3))
        w2 = self.w.value.reshape(self.out_ch, -1)
        dcols = np.matmul(w2.T[None], dflat)
        dxp = _col2im_add(dcols, xp.shape, self.kh, self.kw, self.stride,
                          self.dilation, out_h, out_w)
        return self._unpad(dxp, x.shape)

    def _unpad(self, dxp, x_shape):
        (pt, pb), (pl, pr) = self.padding
        if pt == pb == pl == pr == 0:
            return dxp
        h, w = x_shape[2], x_shape[3]
        if self.pad_mode == "zero":
            return dxp[:, :, pt:pt + h, pl:pl + w]
        # circular: fold the wrapped borders back; pads must stay below the
        # axis size, which holds for every kernel this package builds
        if max(pt, pb) >= h or max(pl, pr) >= w:
            raise ShapeMismatch(f"{self.name}: circular pad exceeds input")
        dx = dxp[:, :, pt:pt + h, pl:pl + w].copy()
        if pt:
            dx[:, :, h - pt:, :] += dxp[:, :, :pt, pl:pl + w]
        if pb:
            dx[:, :, :pb, :] += dxp[:, :, pt + h:, pl:pl + w]
        if pl:
            dx[:, :, :, w - pl:] += dxp[:, :, pt:pt + h, :pl]
        if pr:
            dx[:, :, :, :pr] += dxp[:, :, pt:pt + h, pl + w:]
        if pt and pl:
            dx[:, :, h - pt:, w - pl:] += dxp[:, :, :pt, :pl]
        if pt and pr:
            dx[:, :, h - pt:, :pr] += dxp[:, :, :pt, pl + w:]
        if pb and pl:
            dx[:, :, :pb, w - pl:] += dxp[:, :, pt + h:, :pl]
        if pb and pr:
            dx[:, :, :pb, :pr] += dxp[:, :, pt + h:, pl + w:]
        return dx


class ConvTranspose2dRange(Layer):
    """Transposed conv upscaling only the range axis: kernel (2,1), stride (2,1)."""

    def __init__(self, in_ch, out_ch, rng=None, dtype=np.float32,
                 name="deconv"):
        self.in_ch, self.out_ch = in_ch, out_ch
        self.name = name
        rng = rng or np.random.default_rng(0)
        w = rng.standard_normal((in_ch, out_ch, 2))
        self.w = Parameter(f"{name}.w",
                           (w * np.sqrt(2.0 / in_ch)).astype(dtype))
        self.b = Parameter(f"{name}.b", np.zeros(out_ch, dtype=dtype))
        self._x = None

    def parameters(self):
        return [self.w, self.b]

    def forward(self, x, train=False):
        if x.ndim != 4 or x.shape[1] != self.in_ch:
            raise ShapeMismatch(
                f"{self.name}: expected (n, {self.in_ch}, h, w), got {x.shape}")
        self._x = x
        n, _, h, w = x.shape
        out = np.empty((n, self.out_ch, 2 * h, w), dtype=x.dtype)
        for i in range(2):
            out[:, :, i::2] = np.einsum("nchw,cf->nfhw", x,
                                        self.w.value[:, :, i], optimize=True)
        return out + self.b.value[None, :, None, None]

    def backward(self, dout):
        x = self._x
        dx = np.zeros_like(x)
        for i in range(2):
            d_i = dout[:, :, i::2]
            self.w.grad[:, :, i] += np.einsum("nchw,nfhw->cf", x, d_i,
                                              optimize=True)
            dx += np.einsum("nfhw,cf->nchw", d_i, self.w.value[:, :, i],
                            optimize=True)
        self.b.grad += dout.sum(axis=(0, 2, 3))
        return dx


class BatchNorm2d(Layer):
    def __init__(self, ch, eps=1e-5, momentum=0.1, dtype=np.float32,
                 name="bn"):
        self.ch = ch
        self.eps = eps
        self.momentum = momentum
        self.name = name
        self.gamma = Parameter(f"{name}.gamma", np.ones(ch, dtype=dtype))
        self.beta = Parameter(f"{name}.beta", np.zeros(ch, dtype=dtype))
        self.running_mean = np.zeros(ch, dtype=dtype)
        self.running_var = np.ones(ch, dtype=dtype)
        self._cache = None

    def parameters(self):
        return [self.gamma, self.beta]

    def state(self):
        return {self.gamma.name: self.gamma.value,
                self.beta.name: self.beta.value,
                f"{self.name}.running_mean": self.running_mean,
                f"{self.name}.running_var": self.running_var}

    def load_state(self, state):
        super().load_state(state)
        self.running_mean[...] = state[f"{self.name}.running_mean"]
        self.running_var[...] = state[f"{self.name}.running_var"]

    def forward(self, x, train=False):
        if x.ndim != 4 or x.shape[1] != self.ch:
            raise ShapeMismatch(
                f"{self.name}: expected (n, {self.ch}, h, w), got {x.shape}")
        if train:
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            self.running_mean += self.momentum * (mean - self.running_mean)
            self.running_var += self.momentum * (var - self.running_var)
        else:
            mean, var = self.running_mean, self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean[None, :, None, None]) * inv_std[None, :, None, None]
        self._cache = (xhat, inv_std, train)
        return self.gamma.value[None, :, None, None] * xhat \
            + self.beta.value[None, :, None, None]

    def backward(self, dout):
        xhat, inv_std, train = self._cache
        self.gamma.grad += (dout * xhat).sum(axis=(0, 2, 3))
        self.beta.grad += dout.sum(axis=(0, 2, 3))
        dxhat = dout * self.gamma.value[None, :, None, None]
        if not train:
            return dxhat * inv_std[None, :, None, None]
        n, _, h, w = dout.shape
        m = n * h * w
        sum_dxhat = dxhat.sum(axis=(0, 2, 3))
        sum_dxhat_xhat = (dxhat * xhat).sum(axis=(0, 2, 3))
        dx = (dxhat
              - sum_dxhat[None, :, None, None] / m
              - xhat * sum_dxhat_xhat[None, :, None, None] / m)
        return dx * inv_std[None, :, None, None]


class ReLU(Layer):
    def __init__(self):
        self._mask = None

    def forward(self, x, train=False):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dout):
        return np.where(self._mask, dout, 0.0)


class Sigmoid(Layer):
    def __init__(self):
        self._out = None

    def forward(self, x, train=False):
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        self._out = out
        return out

    def backward(self, dout):
        return dout * self._out * (1.0 - self._out)


class Sequential(Layer):
    def __init__(self, layers):
        self.layers = list(layers)

    def parameters(self):
        return [p for l in self.layers for p in l.parameters()]

    def state(self):
        out = {}
        for l in self.layers:
            out.update(l.state())
        return out

    def load_state(self, state):
        for l in self.layers:
            l.load_state(state)

    def forward(self, x, train=False):
        for l in self.layers:
            x = l.forward(x, train=train)
        return x

    def backward(self, dout):
        for l in reversed(self.layers):
            dout = l.backward(dout)
        return dout


class ResidualBlock(Layer):
    """conv3x3(stride)-BN-ReLU-conv3x3-BN plus (projected) skip, then ReLU."""

    def __init__(self, in_ch, out_ch, stride=1, rng=None, dtype=np.float32,
                 name="res"):
        self.conv1 = Conv2d(in_ch, out_ch, 3, stride=stride, padding=1,
                            bias=False, rng=rng, dtype=dtype,
                            name=f"{name}.conv1")
        self.bn1 = BatchNorm2d(out_ch, dtype=dtype, name=f"{name}.bn1")
        self.relu1 = ReLU()
        self.conv2 = Conv2d(out_ch, out_ch, 3, padding=1, bias=False,
                            rng=rng, dtype=dtype, name=f"{name}.conv2")
        self.bn2 = BatchNorm2d(out_ch, dtype=dtype, name=f"{name}.bn2")
        if stride != 1 or in_ch != out_ch:
            self.proj = Conv2d(in_ch, out_ch, 1, stride=stride, bias=False,
                               rng=rng, dtype=dtype, name=f"{name}.proj")
            self.proj_bn = BatchNorm2d(out_ch, dtype=dtype,
                                       name=f"{name}.proj_bn")
        else:
            self.proj = None
            self.proj_bn = None
        self._out_mask = None

    def _sublayers(self):
        layers = [self.conv1, self.bn1, self.conv2, self.bn2]
        if self.proj is not None:
            layers += [self.proj, self.proj_bn]
        return layers

    def parameters(self):
        return [p for l in self._sublayers() for p in l.parameters()]

    def state(self):
        out = {}
        for l in self._sublayers():
            out.update(l.state())
        return out

    def load_state(self, state):
        for l in self._sublayers():
            l.load_state(state)

    def forward(self, x, train=False):
        y = self.relu1.forward(
            self.bn1.forward(self.conv1.forward(x, train), train))
        y = self.bn2.forward(self.conv2.forward(y, train), train)
        if self.proj is not None:
            skip = self.proj_bn.forward(self.proj.forward(x, train), train)
        else:
            skip = x
        out = y + skip
        self._out_mask = out > 0
        return np.where(self._out_mask, out, 0.0)

    def backward(self, dout):
        dout = np.where(self._out_mask, dout, 0.0)
        dmain = self.conv1.backward(self.bn1.backward(self.relu1.backward(
            self.conv2.backward(self.bn2.backward(dout)))))
        if self.proj is not None:
            dskip = self.proj.backward(self.proj_bn.backward(dout))
        else:
            dskip = dout
        return dmain + dskip


class AxisSwap(Layer):
    """Swap the channel and width axes: (n, c, h, w) -> (n, w, h, c)."""

    def forward(self, x, train=False):
        return np.ascontiguousarray(np.swapaxes(x, 1, 3))

    def backward(self, dout):
        return np.ascontiguousarray(np.swapaxes(dout, 1, 3))
