"""Recording-to-image preprocessing chain.

Order of operations, applied by :func:`preprocess_pipeline`:

1. outlier mitigation: per range bin, cells whose rolling-median residual
   z-score exceeds a threshold are replaced by the rolling median;
2. global min-max normalization to [0, 1];
3. false-color mapping through piecewise-linear RGB anchors;
4. aspect-preserving bilinear resize onto a 159x200 RGBA letterbox canvas
   (transparent padding, opaque content).

All steps are pure functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from PIL import Image

from .radar_synth import RangeTimeMap

TARGET_WIDTH = 159
TARGET_HEIGHT = 200

# Jet-like default palette: anchor position in [0,1] -> RGB.
DEFAULT_COLORMAP = (
    (0.0, (0, 0, 255)),
    (0.25, (0, 255, 255)),
    (0.5, (0, 255, 0)),
    (0.75, (255, 255, 0)),
    (1.0, (255, 0, 0)),
)


@dataclass
class PreprocessConfig:
    median_window: int = 5
    z_threshold: float = 3.0
    target_width: int = TARGET_WIDTH
    target_height: int = TARGET_HEIGHT
    colormap: tuple = DEFAULT_COLORMAP

    def validate(self) -> None:
        _check_window(self.median_window)
        if self.z_threshold <= 0:
            raise ValueError(f"z_threshold must be > 0, got {self.z_threshold}")
        if self.target_width < 1 or self.target_height < 1:
            raise ValueError("target dimensions must be positive")
        anchors = [t for t, _ in self.colormap]
        if len(anchors) < 2 or anchors[0] != 0.0 or anchors[-1] != 1.0:
            raise ValueError("colormap anchors must start at 0.0 and end at 1.0")
        if any(b <= a for a, b in zip(anchors, anchors[1:])):
            raise ValueError("colormap anchors must be strictly increasing")

    def to_dict(self) -> dict:
        return {
            "median_window": self.median_window,
            "z_threshold": self.z_threshold,
            "target_width": self.target_width,
            "target_height": self.target_height,
            "colormap": [[t, list(rgb)] for t, rgb in self.colormap],
        }

    @staticmethod
    def from_dict(d: dict) -> "PreprocessConfig":
        d = dict(d)
        if "colormap" in d:
            d["colormap"] = tuple((float(t), tuple(rgb)) for t, rgb in d["colormap"])
        cfg = PreprocessConfig(**d)
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class ContentRect:
    x: int
    y: int
    w: int
    h: int


@dataclass
class FalseColorImage:
    """RGBA raster with a recorded content rectangle inside the letterbox."""

    pixels: np.ndarray  # (height, width, 4) uint8
    content_rect: ContentRect

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def _check_window(window: int) -> None:
    if window < 3 or window % 2 == 0:
        raise ValueError(f"median window must be odd and >= 3, got {window}")


def _rolling_median_rows(rows: np.ndarray, window: int) -> np.ndarray:
    """Rolling median along axis 1, window truncated at the boundaries."""
    half = window // 2
    n = rows.shape[1]
    out = np.empty(rows.shape, dtype=np.float64)
    if n >= window:
        out[:, half:n - half] = np.median(sliding_window_view(rows, window, axis=1), axis=2)
    for i in range(min(half, n)):
        out[:, i] = np.median(rows[:, : min(i + half + 1, n)], axis=1)
        out[:, n - 1 - i] = np.median(rows[:, max(n - 1 - i - half, 0):], axis=1)
    return out


def rolling_median(series, window: int) -> np.ndarray:
    """Rolling median of a 1-D series; the window is clipped at both ends.

    out[i] = median(series[max(0, i-w//2) : i+w//2+1]); an even number of
    in-range cells near the edges gives the usual two-middle average.
    """
    _check_window(window)
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1 or series.size < 1:
        raise ValueError("series must be a non-empty 1-D vector")
    return _rolling_median_rows(series[None, :], window)[0]


def zscore(values) -> np.ndarray:
    """Standardize by mean and population standard deviation.

    A zero standard deviation (constant input) yields all-zero scores
    rather than a division error.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("zscore needs a 1-D vector of length >= 2")
    sd = values.std()
    if sd == 0.0:
        return np.zeros_like(values)
    return (values - values.mean()) / sd


def mitigate_outliers(rtm: RangeTimeMap, cfg: PreprocessConfig) -> tuple[RangeTimeMap, int]:
    """Replace anomalous cells with their rolling-median estimate.

    Each range bin is treated as a time series over frames: residuals
    against the rolling median are z-scored per bin, and cells with
    |z| > cfg.z_threshold take the median value. Returns the cleaned copy
    and the number of replaced cells.
    """
    cfg.validate()
    rows = rtm.data.astype(np.float64)
    med = _rolling_median_rows(rows, cfg.median_window)
    resid = rows - med
    mean = resid.mean(axis=1, keepdims=True)
    sd = resid.std(axis=1, keepdims=True)
    z = np.divide(resid - mean, sd, out=np.zeros_like(resid), where=sd > 0)
    mask = np.abs(z) > cfg.z_threshold
    cleaned = np.where(mask, med, rows).astype(np.float32)
    out = RangeTimeMap(cleaned, rtm.gesture, rtm.distance, rtm.seed)
    return out, int(mask.sum())


def normalize_minmax(rtm: RangeTimeMap) -> np.ndarray:
    """Scale the whole map to [0, 1]; a constant map maps to all zeros."""
    x = rtm.data.astype(np.float64)
    lo = x.min()
    hi = x.max()
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def _round_half_up_u8(x: np.ndarray) -> np.ndarray:
    # np.round would round half to even; the format pins half-up.
    return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)


def apply_colormap(norm: np.ndarray, cfg: PreprocessConfig) -> np.ndarray:
    """Map values in [0, 1] to RGBA through the config's linear color anchors.

    Values outside [0, 1] by more than 1e-6 are rejected; smaller excursions
    are clamped. Returns uint8 of shape (bins, frames, 4) with alpha 255.
    """
    cfg.validate()
    norm = np.asarray(norm, dtype=np.float64)
    if norm.min() < -1e-6 or norm.max() > 1.0 + 1e-6:
        raise ValueError(
            f"normalized values outside [0, 1]: range [{norm.min()}, {norm.max()}]"
        )
    t = np.clip(norm, 0.0, 1.0)
    anchors = np.array([a for a, _ in cfg.colormap], dtype=np.float64)
    colors = np.array([rgb for _, rgb in cfg.colormap], dtype=np.float64)
    out = np.empty(norm.shape + (4,), dtype=np.uint8)
    for c in range(3):
        out[..., c] = _round_half_up_u8(np.interp(t, anchors, colors[:, c]))
    out[..., 3] = 255
    return out


def _bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with half-pixel-center coordinates, channels last."""
    in_h, in_w = src.shape[:2]
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (in_h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (in_w / out_w) - 0.5
    ys = np.clip(ys, 0.0, in_h - 1.0)
    xs = np.clip(xs, 0.0, in_w - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0)[:, None, None]
    wx = (xs - x0)[None, :, None]
    f = src.astype(np.float64)
    top = f[y0][:, x0] * (1 - wx) + f[y0][:, x1] * wx
    bot = f[y1][:, x0] * (1 - wx) + f[y1][:, x1] * wx
    return top * (1 - wy) + bot * wy


def resize_letterbox(
    src: np.ndarray, target_w: int = TARGET_WIDTH, target_h: int = TARGET_HEIGHT
) -> FalseColorImage:
    """Fit an RGBA raster into target_w x target_h without distortion.

    The source is scaled by min(target_w/w, target_h/h) and centered; the
    leftover border splits floor-half to the left/top and the remainder to
    the right/bottom. Padding pixels are fully transparent (0,0,0,0).
    """
    src = np.asarray(src)
    if src.ndim != 3 or src.shape[2] != 4 or src.shape[0] < 1 or src.shape[1] < 1:
        raise ValueError(f"source must be a non-empty (h, w, 4) raster, got {src.shape}")
    in_h, in_w = src.shape[:2]
    scale = min(target_w / in_w, target_h / in_h)
    content_w = int(np.floor(in_w * scale + 0.5))
    content_h = int(np.floor(in_h * scale + 0.5))
    content_w = max(1, min(content_w, target_w))
    content_h = max(1, min(content_h, target_h))

    if (content_h, content_w) == (in_h, in_w):
        content = src.astype(np.uint8).copy()
    else:
        content = _round_half_up_u8(_bilinear_resize(src, content_h, content_w))

    x = (target_w - content_w) // 2
    y = (target_h - content_h) // 2
    canvas = np.zeros((target_h, target_w, 4), dtype=np.uint8)
    canvas[y:y + content_h, x:x + content_w] = content
    return FalseColorImage(canvas, ContentRect(x, y, content_w, content_h))


def preprocess_pipeline(rtm: RangeTimeMap, cfg: PreprocessConfig) -> FalseColorImage:
    """Full chain: mitigation, normalization, false color, letterbox resize."""
    cleaned, _ = mitigate_outliers(rtm, cfg)
    norm = normalize_minmax(cleaned)
    raster = apply_colormap(norm, cfg)
    return resize_letterbox(raster, cfg.target_width, cfg.target_height)


def save_png(image: FalseColorImage, path) -> None:
    """Export as 8-bit RGBA PNG (no interlacing)."""
    Image.fromarray(image.pixels, mode="RGBA").save(Path(path), format="PNG")


def load_png(path) -> np.ndarray:
    """Read a PNG back as an (h, w, 4) uint8 array (for inspection/tests)."""
    with Image.open(Path(path)) as im:
        return np.asarray(im.convert("RGBA"), dtype=np.uint8)
