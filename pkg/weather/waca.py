#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Weather-aware cross-attention, forward pass only (numpy, no training)

- TGGA: global cross-attention from X_r to a mean-pooled X_e, every row
  biased by beta_t * (1 - |t_i - t_j|^2)
- OGLA: cross-attention inside non-overlapping w x w windows, key j
  biased by beta_o * (1 - alpha_j)
- WAF: depthwise k x k conv -> 1x1 -> 1x1 -> sigmoid on concat(X_t, X_o, t, alpha),
  giving per-pixel weights a_t, a_o; X' = a_t X_t + a_o X_o

Feature maps are float64 arrays of shape (H, W, C).
"""

import os
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage
from scipy.special import expit

from .errors import ConfigError, ShapeError
from .imgcore import ScalarMap

logger = logging.getLogger("WeatherForge.WACA")

FeatureMap = NDArray[np.float64]


def ensure_feature_map(x: np.ndarray, name: str = "features") -> FeatureMap:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[0] == 0 or arr.shape[1] == 0 or arr.shape[2] == 0:
        raise ShapeError(f"{name} must be a non-empty H x W x C feature map, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} contains non-finite values")
    return arr


def _ensure_map(x: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ShapeError(f"{name} must be a non-empty H x W map, got shape {arr.shape}")
    return arr


def _check_spatial(ref_name: str, ref: np.ndarray, *others: Tuple[str, np.ndarray]) -> None:
    for name, arr in others:
        if arr.shape[:2] != ref.shape[:2]:
            raise ShapeError(
                f"size mismatch: {ref_name} is {ref.shape[0]}x{ref.shape[1]}, "
                f"{name} is {arr.shape[0]}x{arr.shape[1]}"
            )


# ==================== PARAMETERS ====================

@dataclass(frozen=True)
class AttentionParams:
    """
    Параметры одного механизма внимания

    W_Q, W_K, W_V map C input channels to heads * head_dim; the optional
    W_O maps heads * head_dim back to the output channel count.
    """
    W_Q: np.ndarray
    W_K: np.ndarray
    W_V: np.ndarray
    heads: int = 1
    head_dim: int = 1
    r: int = 4                 # TGGA: коэффициент даунсэмплинга
    window: int = 4            # OGLA: размер окна
    beta_t: float = 0.0
    beta_o: float = 0.0
    W_O: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.heads < 1 or self.head_dim < 1:
            raise ConfigError(f"heads and head_dim must be >= 1, got {self.heads}, {self.head_dim}")
        if self.r < 1 or self.window < 1:
            raise ConfigError(f"r and window must be >= 1, got {self.r}, {self.window}")
        inner = self.heads * self.head_dim
        for name in ("W_Q", "W_K", "W_V"):
            W = np.asarray(getattr(self, name), dtype=np.float64)
            if W.ndim != 2 or W.shape[1] != inner:
                raise ConfigError(f"{name} must be C x {inner}, got shape {W.shape}")
            object.__setattr__(self, name, W)
        if not (self.W_Q.shape[0] == self.W_K.shape[0] == self.W_V.shape[0]):
            raise ConfigError("W_Q, W_K and W_V must share the input channel count")
        if self.W_O is not None:
            W_O = np.asarray(self.W_O, dtype=np.float64)
            if W_O.ndim != 2 or W_O.shape[0] != inner:
                raise ConfigError(f"W_O must be {inner} x C_out, got shape {W_O.shape}")
            object.__setattr__(self, "W_O", W_O)
        elif inner != self.channels:
            raise ConfigError(
                f"without W_O, heads * head_dim ({inner}) must equal the channel count ({self.channels})"
            )

    @property
    def channels(self) -> int:
        return int(self.W_Q.shape[0])

    @property
    def out_channels(self) -> int:
        return int(self.W_O.shape[1]) if self.W_O is not None else self.heads * self.head_dim

    @classmethod
    def seeded(cls, channels: int, heads: int = 1, head_dim: Optional[int] = None, r: int = 4,
               window: int = 4, beta_t: float = 0.0, beta_o: float = 0.0, seed: int = 0,
               with_output: bool = False) -> "AttentionParams":
        """Случайные (детерминированные по seed) веса для проверок"""
        if head_dim is None:
            if channels % heads:
                raise ConfigError(f"channels ({channels}) not divisible by heads ({heads})")
            head_dim = channels // heads
        inner = heads * head_dim
        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(channels)
        W_O = rng.normal(0.0, 1.0 / np.sqrt(inner), size=(inner, channels)) if with_output else None
        return cls(
            W_Q=rng.normal(0.0, scale, size=(channels, inner)),
            W_K=rng.normal(0.0, scale, size=(channels, inner)),
            W_V=rng.normal(0.0, scale, size=(channels, inner)),
            heads=heads, head_dim=head_dim, r=r, window=window,
            beta_t=beta_t, beta_o=beta_o, W_O=W_O,
        )

    def with_betas(self, beta_t: Optional[float] = None, beta_o: Optional[float] = None) -> "AttentionParams":
        return AttentionParams(
            W_Q=self.W_Q, W_K=self.W_K, W_V=self.W_V, heads=self.heads, head_dim=self.head_dim,
            r=self.r, window=self.window,
            beta_t=self.beta_t if beta_t is None else beta_t,
            beta_o=self.beta_o if beta_o is None else beta_o,
            W_O=self.W_O,
        )

    def save_npz(self, path: Union[str, os.PathLike]) -> None:
        arrays = dict(
            W_Q=self.W_Q, W_K=self.W_K, W_V=self.W_V,
            config=np.array([self.heads, self.head_dim, self.r, self.window], dtype=np.int64),
            betas=np.array([self.beta_t, self.beta_o], dtype=np.float64),
        )
        if self.W_O is not None:
            arrays['W_O'] = self.W_O
        np.savez(path, **arrays)

    @classmethod
    def from_npz(cls, path: Union[str, os.PathLike]) -> "AttentionParams":
        with np.load(path, allow_pickle=False) as data:
            try:
                heads, head_dim, r, window = (int(v) for v in data['config'])
                beta_t, beta_o = (float(v) for v in data['betas'])
                return cls(
                    W_Q=data['W_Q'], W_K=data['W_K'], W_V=data['W_V'],
                    heads=heads, head_dim=head_dim, r=r, window=window,
                    beta_t=beta_t, beta_o=beta_o,
                    W_O=data['W_O'] if 'W_O' in data.files else None,
                )
            except KeyError as e:
                raise ConfigError(f"attention weights file {path} lacks array {e}") from e


@dataclass(frozen=True)
class FuserParams:
    """
    Веса WAF: depthwise (k, k, C_in) + bias, 1x1 (C_in -> hidden) + bias,
    1x1 (hidden -> 2) + bias
    """
    depthwise: np.ndarray
    depthwise_bias: np.ndarray
    pointwise1: np.ndarray
    pointwise1_bias: np.ndarray
    pointwise2: np.ndarray
    pointwise2_bias: np.ndarray

    def __post_init__(self):
        for name in ("depthwise", "depthwise_bias", "pointwise1", "pointwise1_bias",
                     "pointwise2", "pointwise2_bias"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        k1, k2, c_in = self.depthwise.shape if self.depthwise.ndim == 3 else (0, 0, 0)
        if k1 == 0 or k1 != k2 or k1 % 2 == 0:
            raise ConfigError(f"depthwise kernel must be k x k x C_in with odd k, got {self.depthwise.shape}")
        if self.depthwise_bias.shape != (c_in,):
            raise ConfigError(f"depthwise bias must have {c_in} entries")
        if self.pointwise1.ndim != 2 or self.pointwise1.shape[0] != c_in:
            raise ConfigError(f"pointwise1 must be {c_in} x hidden, got {self.pointwise1.shape}")
        hidden = self.pointwise1.shape[1]
        if self.pointwise1_bias.shape != (hidden,):
            raise ConfigError(f"pointwise1 bias must have {hidden} entries")
        if self.pointwise2.shape != (hidden, 2) or self.pointwise2_bias.shape != (2,):
            raise ConfigError("output stage must map hidden -> exactly 2 channels (a_t, a_o)")

    @property
    def in_channels(self) -> int:
        return int(self.depthwise.shape[2])

    @property
    def kernel_size(self) -> int:
        return int(self.depthwise.shape[0])

    @classmethod
    def seeded(cls, feature_channels: int, kernel: int = 3, hidden: Optional[int] = None,
               seed: int = 0) -> "FuserParams":
        """C_in = 2 * feature_channels + 2 (X_t, X_o, t, alpha); hidden defaults to C_in"""
        c_in = 2 * feature_channels + 2
        hidden = hidden or c_in
        rng = np.random.default_rng(seed)
        return cls(
            depthwise=rng.normal(0.0, 1.0 / kernel, size=(kernel, kernel, c_in)),
            depthwise_bias=rng.normal(0.0, 0.1, size=c_in),
            pointwise1=rng.normal(0.0, 1.0 / np.sqrt(c_in), size=(c_in, hidden)),
            pointwise1_bias=rng.normal(0.0, 0.1, size=hidden),
            pointwise2=rng.normal(0.0, 1.0 / np.sqrt(hidden), size=(hidden, 2)),
            pointwise2_bias=rng.normal(0.0, 0.1, size=2),
        )

    def save_npz(self, path: Union[str, os.PathLike]) -> None:
        np.savez(path, depthwise=self.depthwise, depthwise_bias=self.depthwise_bias,
                 pointwise1=self.pointwise1, pointwise1_bias=self.pointwise1_bias,
                 pointwise2=self.pointwise2, pointwise2_bias=self.pointwise2_bias)

    @classmethod
    def from_npz(cls, path: Union[str, os.PathLike]) -> "FuserParams":
        with np.load(path, allow_pickle=False) as data:
            try:
                return cls(**{name: data[name] for name in (
                    "depthwise", "depthwise_bias", "pointwise1", "pointwise1_bias",
                    "pointwise2", "pointwise2_bias")})
            except KeyError as e:
                raise ConfigError(f"fuser weights file {path} lacks array {e}") from e


# ==================== PRIMITIVES ====================

def downsample_avg(x: np.ndarray, r: int) -> np.ndarray:
    """Non-overlapping r x r mean pooling of an H x W map or H x W x C feature map"""
    if r < 1:
        raise ConfigError(f"downsampling ratio must be >= 1, got {r}")
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim not in (2, 3):
        raise ShapeError(f"expected H x W or H x W x C, got shape {arr.shape}")
    h, w = arr.shape[:2]
    if h % r or w % r:
        raise ShapeError(f"size {h}x{w} is not divisible by downsampling ratio {r}")
    if r == 1:
        return arr.copy()
    pooled = arr.reshape(h // r, r, w // r, r, *arr.shape[2:])
    return pooled.mean(axis=(1, 3))


def transmission_similarity(t_q: np.ndarray, t_k: np.ndarray) -> np.ndarray:
    """t_sim(i, j) = 1 - |t_i - t_j|^2 for every query pixel i and key pixel j"""
    tq = np.asarray(t_q, dtype=np.float64).ravel()
    tk = np.asarray(t_k, dtype=np.float64).ravel()
    diff = tq[:, None] - tk[None, :]
    return 1.0 - diff * diff


def softmax_rows(scores: np.ndarray) -> np.ndarray:
    """Softmax over the last axis with max subtraction"""
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _split_heads(x: np.ndarray, heads: int, head_dim: int) -> np.ndarray:
    # (..., N, heads * d) -> (heads, ..., N, d)
    split = x.reshape(*x.shape[:-1], heads, head_dim)
    return np.moveaxis(split, -2, 0)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    # (heads, ..., N, d) -> (..., N, heads * d)
    moved = np.moveaxis(x, 0, -2)
    return moved.reshape(*moved.shape[:-2], -1)


def _attend(q: np.ndarray, k: np.ndarray, v: np.ndarray, bias: np.ndarray,
            head_dim: int) -> Tuple[np.ndarray, np.ndarray]:
    scores = q @ np.swapaxes(k, -1, -2) / np.sqrt(head_dim) + bias
    weights = softmax_rows(scores)
    return weights @ v, weights


def _output(out: np.ndarray, p: AttentionParams) -> np.ndarray:
    merged = _merge_heads(out)
    return merged @ p.W_O if p.W_O is not None else merged


# ==================== TGGA ====================

def tgga_forward(Xr: FeatureMap, Xe: FeatureMap, t: ScalarMap, p: AttentionParams,
                 return_attention: bool = False):
    """
    Transmission-guided global attention

    Q from X_r (full resolution); K, V from X_e mean-pooled by r. Every
    query i sees the bias beta_t * (1 - |t_i - t_ds_j|^2), with t_i taken
    at full resolution.

    Returns:
        Output feature map (H x W x C_out), plus the attention weights
        (heads x H*W x H*W/r^2) when return_attention is set
    """
    Xr = ensure_feature_map(Xr, "Xr")
    Xe = ensure_feature_map(Xe, "Xe")
    t = _ensure_map(t, "transmission")
    if Xr.shape != Xe.shape:
        raise ShapeError(f"Xr and Xe must have the same shape, got {Xr.shape} and {Xe.shape}")
    _check_spatial("Xr", Xr, ("transmission", t))
    if Xr.shape[2] != p.channels:
        raise ShapeError(f"features have {Xr.shape[2]} channels, weights expect {p.channels}")

    h, w, c = Xr.shape
    Xe_ds = downsample_avg(Xe, p.r)
    t_ds = downsample_avg(t, p.r)

    q = _split_heads(Xr.reshape(-1, c) @ p.W_Q, p.heads, p.head_dim)
    keys = Xe_ds.reshape(-1, c)
    k = _split_heads(keys @ p.W_K, p.heads, p.head_dim)
    v = _split_heads(keys @ p.W_V, p.heads, p.head_dim)
    bias = p.beta_t * transmission_similarity(t, t_ds)

    out, weights = _attend(q, k, v, bias, p.head_dim)
    result = _output(out, p).reshape(h, w, -1)
    return (result, weights) if return_attention else result


# ==================== OGLA ====================

def _to_windows(x: np.ndarray, ws: int) -> np.ndarray:
    # (H, W, C) -> (nWin, ws*ws, C), windows in row-major order
    h, w, c = x.shape
    blocks = x.reshape(h // ws, ws, w // ws, ws, c).transpose(0, 2, 1, 3, 4)
    return blocks.reshape(-1, ws * ws, c)


def _from_windows(x: np.ndarray, h: int, w: int, ws: int) -> np.ndarray:
    c = x.shape[-1]
    blocks = x.reshape(h // ws, w // ws, ws, ws, c).transpose(0, 2, 1, 3, 4)
    return blocks.reshape(h, w, c)


def ogla_forward(Xr: FeatureMap, Xe: FeatureMap, alpha: ScalarMap, p: AttentionParams,
                 return_attention: bool = False):
    """
    Occlusion-guided local attention

    Independent cross-attention inside each window x window block; key j
    is biased by beta_o * (1 - alpha_j).

    Returns:
        Output feature map (H x W x C_out), plus the attention weights
        (heads x windows x w^2 x w^2) when return_attention is set
    """
    Xr = ensure_feature_map(Xr, "Xr")
    Xe = ensure_feature_map(Xe, "Xe")
    alpha = _ensure_map(alpha, "alpha")
    if Xr.shape != Xe.shape:
        raise ShapeError(f"Xr and Xe must have the same shape, got {Xr.shape} and {Xe.shape}")
    _check_spatial("Xr", Xr, ("alpha", alpha))
    if Xr.shape[2] != p.channels:
        raise ShapeError(f"features have {Xr.shape[2]} channels, weights expect {p.channels}")
    h, w, _ = Xr.shape
    ws = p.window
    if h % ws or w % ws:
        raise ShapeError(f"size {h}x{w} is not divisible by window size {ws}")

    Xr_w = _to_windows(Xr, ws)
    Xe_w = _to_windows(Xe, ws)
    alpha_w = _to_windows(alpha[..., None], ws)[..., 0]          # (nWin, ws*ws)

    q = _split_heads(Xr_w @ p.W_Q, p.heads, p.head_dim)          # (heads, nWin, N, d)
    k = _split_heads(Xe_w @ p.W_K, p.heads, p.head_dim)
    v = _split_heads(Xe_w @ p.W_V, p.heads, p.head_dim)
    bias = (p.beta_o * (1.0 - alpha_w))[:, None, :]              # (nWin, 1, N)

    out, weights = _attend(q, k, v, bias, p.head_dim)
    result = _from_windows(_output(out, p), h, w, ws)
    return (result, weights) if return_attention else result


# ==================== WAF ====================

def fuser_weights(Xt: FeatureMap, Xo: FeatureMap, t: ScalarMap, alpha: ScalarMap,
                  p: FuserParams) -> Tuple[np.ndarray, np.ndarray]:
    """Per-pixel (a_t, a_o) in [0, 1]"""
    Xt = ensure_feature_map(Xt, "Xt")
    Xo = ensure_feature_map(Xo, "Xo")
    t = _ensure_map(t, "transmission")
    alpha = _ensure_map(alpha, "alpha")
    _check_spatial("Xt", Xt, ("Xo", Xo), ("transmission", t), ("alpha", alpha))

    z = np.concatenate([Xt, Xo, t[..., None], alpha[..., None]], axis=2)
    if z.shape[2] != p.in_channels:
        raise ShapeError(f"fuser expects {p.in_channels} input channels, got {z.shape[2]}")

    dw = np.empty_like(z)
    for ch in range(z.shape[2]):
        dw[..., ch] = ndimage.correlate(z[..., ch], p.depthwise[..., ch], mode="constant", cval=0.0)
    dw += p.depthwise_bias
    hidden = dw @ p.pointwise1 + p.pointwise1_bias
    logits = hidden @ p.pointwise2 + p.pointwise2_bias
    a = expit(logits)
    return a[..., 0], a[..., 1]


def waf_fuse(Xt: FeatureMap, Xo: FeatureMap, t: ScalarMap, alpha: ScalarMap, p: FuserParams,
             return_weights: bool = False):
    """X' = a_t * X_t + a_o * X_o (independent sigmoids, not normalized)"""
    a_t, a_o = fuser_weights(Xt, Xo, t, alpha, p)
    fused = a_t[..., None] * np.asarray(Xt, dtype=np.float64) + a_o[..., None] * np.asarray(Xo, dtype=np.float64)
    return (fused, (a_t, a_o)) if return_weights else fused


def waca_forward(Xr: FeatureMap, Xe: FeatureMap, t: ScalarMap, alpha: ScalarMap,
                 attn_t: AttentionParams, attn_o: AttentionParams, fuser: FuserParams) -> FeatureMap:
    """TGGA and OGLA branches fused by WAF"""
    Xt = tgga_forward(Xr, Xe, t, attn_t)
    Xo = ogla_forward(Xr, Xe, alpha, attn_o)
    if Xt.shape != Xo.shape:
        raise ShapeError(f"TGGA and OGLA outputs differ in shape: {Xt.shape} vs {Xo.shape}")
    return waf_fuse(Xt, Xo, t, alpha, fuser)
