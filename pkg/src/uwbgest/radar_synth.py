"""Seeded synthesis of UWB range-time maps and on-disk dataset handling.

A recording is a bins x frames matrix of amplitudes: each row is one range
bin, each column one slow-time frame. Gestures are modeled as a sum of
Gaussian reflectors along the range axis, held for the duration of the
recording under a raised-cosine temporal envelope, plus white noise.
Outliers (sensor glitches) are injected separately so that downstream
mitigation can be tested against the exact set of corrupted cells.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import FormatError
from .rng import MASK64, derive_seed, mix64, normals, U64Stream


class GestureClass(IntEnum):
    OK = 0
    VICTORY = 1
    STOP = 2
    PALM = 3
    LIKE = 4
    NO_GESTURE = 5


class DistanceBand(IntEnum):
    D10 = 0
    D25 = 1
    D50 = 2

    @property
    def centimeters(self) -> int:
        return (10, 25, 50)[self.value]


NUM_GESTURES = 6
NUM_SUBCLASSES = 16  # 5 gestures x 3 distances + 1 no-gesture
NO_GESTURE_SUBCLASS = 15

# Synthetic gesture signatures: per gesture, a list of Gaussian reflectors
# (range-bin offset from the base gate, width sigma in bins, amplitude).
# Distinct widths and multiplicities make the six classes separable but not
# trivially so.
REFLECTOR_TABLE = {
    GestureClass.OK: ((0, 1.5, 1.0), (3, 1.0, 0.6)),
    GestureClass.VICTORY: ((0, 1.0, 0.9), (4, 1.0, 0.9)),
    GestureClass.STOP: ((0, 3.0, 1.0),),
    GestureClass.PALM: ((0, 4.0, 0.8), (2, 2.0, 0.5)),
    GestureClass.LIKE: ((0, 1.2, 1.0), (-3, 1.2, 0.7)),
}

# Base range gate per distance band, defined at the reference geometry of
# 64 bins and scaled proportionally for other bin counts.
_R0_AT_64_BINS = {DistanceBand.D10: 8, DistanceBand.D25: 24, DistanceBand.D50: 48}
_REFERENCE_BINS = 64

MANIFEST_VERSION = 1
RTM_MAGIC = b"UWBG"
RTM_VERSION = 1
_RTM_HEADER = struct.Struct("<4sHIIBBQ")
_NO_DISTANCE_BYTE = 255

# Tag mixed into a sample seed to get an independent outlier-injection seed.
_OUTLIER_SEED_TAG = 0x6F75746C


def range_gate_bin(distance: DistanceBand, bins: int) -> int:
    """Base range-bin index r0 for a distance band in a ``bins``-tall map."""
    return int(round(_R0_AT_64_BINS[distance] * bins / _REFERENCE_BINS))


def subclass_index(gesture: GestureClass, distance: Optional[DistanceBand]) -> int:
    """Stable subclass encoding: gesture*3 + distance for real gestures, 15 otherwise."""
    if gesture == GestureClass.NO_GESTURE:
        if distance is not None:
            raise ValueError("NO_GESTURE takes no distance band")
        return NO_GESTURE_SUBCLASS
    if distance is None:
        raise ValueError(f"distance band required for gesture {gesture.name}")
    return int(gesture) * 3 + int(distance)


@dataclass(frozen=True)
class SubclassLabel:
    gesture: GestureClass
    distance: Optional[DistanceBand]

    @property
    def index(self) -> int:
        return subclass_index(self.gesture, self.distance)

    @staticmethod
    def from_index(index: int) -> "SubclassLabel":
        if not 0 <= index < NUM_SUBCLASSES:
            raise ValueError(f"subclass index out of range: {index}")
        if index == NO_GESTURE_SUBCLASS:
            return SubclassLabel(GestureClass.NO_GESTURE, None)
        return SubclassLabel(GestureClass(index // 3), DistanceBand(index % 3))


@dataclass
class RangeTimeMap:
    """One recording: float32 amplitudes shaped (bins, frames), plus provenance."""

    data: np.ndarray
    gesture: GestureClass
    distance: Optional[DistanceBand]
    seed: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim != 2:
            raise ValueError(f"data must be 2-D, got shape {self.data.shape}")
        if self.bins < 8 or self.frames < 8:
            raise ValueError(f"map must be at least 8x8, got {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("map contains non-finite values")

    @property
    def bins(self) -> int:
        return self.data.shape[0]

    @property
    def frames(self) -> int:
        return self.data.shape[1]

    @property
    def subclass(self) -> int:
        return subclass_index(self.gesture, self.distance)


@dataclass
class SynthConfig:
    bins: int = 64
    frames: int = 120
    noise_sigma: float = 0.05
    outlier_rate: float = 0.01
    outlier_magnitude: float = 8.0  # multiple of the clean map's peak amplitude
    samples_per_subclass: int = 60
    seed: int = 0

    def validate(self) -> None:
        if self.bins < 8 or self.frames < 8:
            raise ValueError(f"bins and frames must be >= 8, got {self.bins}x{self.frames}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not 0.0 <= self.outlier_rate <= 1.0:
            raise ValueError(f"outlier_rate must be in [0, 1], got {self.outlier_rate}")
        if self.outlier_magnitude < 0:
            raise ValueError(f"outlier_magnitude must be >= 0, got {self.outlier_magnitude}")
        if self.samples_per_subclass < 0:
            raise ValueError("samples_per_subclass must be >= 0")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must fit in 64 bits")

    def to_dict(self) -> dict:
        return {
            "bins": self.bins,
            "frames": self.frames,
            "noise_sigma": self.noise_sigma,
            "outlier_rate": self.outlier_rate,
            "outlier_magnitude": self.outlier_magnitude,
            "samples_per_subclass": self.samples_per_subclass,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "SynthConfig":
        cfg = SynthConfig(**d)
        cfg.validate()
        return cfg


def gesture_profile(gesture: GestureClass, distance: Optional[DistanceBand], bins: int) -> np.ndarray:
    """Closed-form range profile: sum of the gesture's Gaussian reflectors.

    Returns float64 of length ``bins``; all zeros for NO_GESTURE.
    """
    profile = np.zeros(bins, dtype=np.float64)
    if gesture == GestureClass.NO_GESTURE:
        return profile
    r0 = range_gate_bin(distance, bins)
    b = np.arange(bins, dtype=np.float64)
    for offset, sigma, amplitude in REFLECTOR_TABLE[gesture]:
        center = r0 + offset
        profile += amplitude * np.exp(-((b - center) ** 2) / (2.0 * sigma * sigma))
    return profile


def temporal_envelope(frames: int) -> np.ndarray:
    """Raised-cosine hold envelope: 0.5*(1 - cos(2 pi t / (frames-1)))."""
    t = np.arange(frames, dtype=np.float64)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * t / (frames - 1)))


def synth_recording(
    gesture: GestureClass,
    distance: Optional[DistanceBand],
    cfg: SynthConfig,
    sample_seed: int,
) -> RangeTimeMap:
    """Synthesize one recording, deterministic in all inputs.

    Signal is the outer product of the gesture's range profile and the
    temporal envelope; noise is i.i.d. Gaussian from the portable generator
    in :mod:`uwbgest.rng`, keyed by ``sample_seed``.
    """
    cfg.validate()
    if gesture == GestureClass.NO_GESTURE:
        if distance is not None:
            raise ValueError("NO_GESTURE takes no distance band")
    elif distance is None:
        raise ValueError(f"distance band required for gesture {gesture.name}")

    signal = np.outer(gesture_profile(gesture, distance, cfg.bins), temporal_envelope(cfg.frames))
    if cfg.noise_sigma > 0:
        noise = normals(sample_seed, cfg.bins * cfg.frames).reshape(cfg.bins, cfg.frames)
        signal = signal + cfg.noise_sigma * noise
    return RangeTimeMap(signal.astype(np.float32), gesture, distance, sample_seed & MASK64)


def inject_outliers(
    rtm: RangeTimeMap, rate: float, magnitude: float, seed: int
) -> tuple[RangeTimeMap, list[int]]:
    """Add ``magnitude`` to floor(rate * cells) distinct uniformly-chosen cells.

    Returns the corrupted copy and the sorted flat (row-major) indices of
    the altered cells, for use as a ground-truth oracle by mitigation tests.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    if magnitude <= 0:
        raise ValueError(f"magnitude must be > 0, got {magnitude}")
    cells = rtm.data.size
    k = math.floor(rate * cells)
    out = rtm.data.copy()
    if k == 0:
        return RangeTimeMap(out, rtm.gesture, rtm.distance, rtm.seed), []

    # Partial Fisher-Yates over cell indices, driven by the seeded stream.
    stream = U64Stream(seed)
    idx = np.arange(cells)
    for i in range(k):
        j = i + stream.next_below(cells - i)
        idx[i], idx[j] = idx[j], idx[i]
    chosen = sorted(int(c) for c in idx[:k])
    out.flat[chosen] += np.float32(magnitude)
    return RangeTimeMap(out, rtm.gesture, rtm.distance, rtm.seed), chosen


@dataclass
class ManifestEntry:
    path: str  # relative to the manifest file
    subclass: int
    seed: int


@dataclass
class DatasetManifest:
    config: SynthConfig
    entries: list[ManifestEntry] = field(default_factory=list)
    format_version: int = MANIFEST_VERSION
    root: Optional[Path] = None  # directory entries are relative to, once saved/loaded

    def resolve(self, entry: ManifestEntry) -> Path:
        if self.root is None:
            return Path(entry.path)
        return self.root / entry.path

    def save(self, path) -> None:
        path = Path(path)
        doc = {
            "format_version": self.format_version,
            "config": self.config.to_dict(),
            "entries": [
                {"path": e.path, "subclass": e.subclass, "seed": e.seed} for e in self.entries
            ],
        }
        path.write_text(json.dumps(doc, indent=1) + "\n")
        self.root = path.parent

    @staticmethod
    def load(path) -> "DatasetManifest":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise FormatError(f"manifest JSON: {e}") from e
        for key in ("format_version", "config", "entries"):
            if key not in doc:
                raise FormatError(f"manifest missing field {key!r}")
        if doc["format_version"] != MANIFEST_VERSION:
            raise FormatError(f"format_version: expected {MANIFEST_VERSION}, got {doc['format_version']}")
        entries = []
        for e in doc["entries"]:
            if not 0 <= e["subclass"] < NUM_SUBCLASSES:
                raise FormatError(f"subclass out of range in manifest: {e['subclass']}")
            entries.append(ManifestEntry(e["path"], int(e["subclass"]), int(e["seed"])))
        return DatasetManifest(
            config=SynthConfig.from_dict(doc["config"]),
            entries=entries,
            format_version=doc["format_version"],
            root=path.parent,
        )


def sample_seed_for(cfg_seed: int, subclass: int, sample: int) -> int:
    """Per-sample seed: derive_seed(cfg.seed, subclass, sample). See rng module."""
    return derive_seed(cfg_seed, subclass, sample)


def generate_dataset(cfg: SynthConfig, out_dir) -> DatasetManifest:
    """Write samples_per_subclass recordings for each of the 16 subclasses.

    Files are named ``<subclass>_<sample>.rtm``. When cfg.outlier_rate > 0,
    each clean recording is corrupted by inject_outliers with an absolute
    magnitude of cfg.outlier_magnitude times the map's peak amplitude,
    using a seed mixed from the sample seed. Byte-identical for identical
    configs.
    """
    cfg.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = DatasetManifest(config=cfg)
    for sub in range(NUM_SUBCLASSES):
        label = SubclassLabel.from_index(sub)
        for i in range(cfg.samples_per_subclass):
            seed = sample_seed_for(cfg.seed, sub, i)
            rtm = synth_recording(label.gesture, label.distance, cfg, seed)
            if cfg.outlier_rate > 0:
                peak = float(np.abs(rtm.data).max())
                if peak > 0:
                    rtm, _ = inject_outliers(
                        rtm, cfg.outlier_rate, cfg.outlier_magnitude * peak,
                        mix64(seed ^ _OUTLIER_SEED_TAG),
                    )
            name = f"{sub:02d}_{i:04d}.rtm"
            try:
                save_rtm(rtm, out_dir / name)
            except OSError as e:
                raise OSError(f"writing {out_dir / name}: {e}") from e
            manifest.entries.append(ManifestEntry(name, sub, seed))
    manifest.save(out_dir / "manifest.json")
    return manifest


def save_rtm(rtm: RangeTimeMap, path) -> None:
    """Write the binary RTM format (see package README for the layout)."""
    distance_byte = _NO_DISTANCE_BYTE if rtm.distance is None else int(rtm.distance)
    header = _RTM_HEADER.pack(
        RTM_MAGIC, RTM_VERSION, rtm.bins, rtm.frames, int(rtm.gesture), distance_byte, rtm.seed
    )
    payload = np.ascontiguousarray(rtm.data, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def load_rtm(path) -> RangeTimeMap:
    """Read the binary RTM format; raises FormatError naming the bad field."""
    raw = Path(path).read_bytes()
    if len(raw) < _RTM_HEADER.size:
        raise FormatError(f"header: file truncated at {len(raw)} bytes")
    magic, version, bins, frames, gesture, distance, seed = _RTM_HEADER.unpack_from(raw)
    if magic != RTM_MAGIC:
        raise FormatError(f"magic: expected {RTM_MAGIC!r}, got {magic!r}")
    if version != RTM_VERSION:
        raise FormatError(f"format_version: expected {RTM_VERSION}, got {version}")
    expected = _RTM_HEADER.size + bins * frames * 4
    if len(raw) != expected:
        raise FormatError(f"payload length: expected {expected} bytes, got {len(raw)}")
    try:
        gesture = GestureClass(gesture)
    except ValueError:
        raise FormatError(f"gesture: invalid code {gesture}") from None
    if distance == _NO_DISTANCE_BYTE:
        distance = None
    else:
        try:
            distance = DistanceBand(distance)
        except ValueError:
            raise FormatError(f"distance: invalid code {distance}") from None
    if (distance is None) != (gesture == GestureClass.NO_GESTURE):
        raise FormatError(f"distance: inconsistent with gesture {gesture.name}")
    data = np.frombuffer(raw, dtype="<f4", offset=_RTM_HEADER.size).reshape(bins, frames)
    return RangeTimeMap(data.copy(), gesture, distance, seed)
