"""Synthetic multichannel time series, sliding windows and h-block splits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from penscore.scoring import DomainError


@dataclass(frozen=True, eq=False)
class TimeSeriesDataset:
    channels: np.ndarray  # (d, T)
    labels: np.ndarray  # (T,) ints in 0..classes-1
    classes: int
    sample_rate: float = 1.0

    def __post_init__(self):
        if self.channels.ndim != 2:
            raise DomainError("channels must be a (d, T) array")
        if self.labels.shape != (self.channels.shape[1],):
            raise DomainError("labels must have one entry per time step")
        if np.unique(self.labels).size < 2:
            raise DomainError("labels must cover at least two classes")

    @property
    def length(self) -> int:
        return self.channels.shape[1]

    def slice(self, start: int, stop: int) -> "TimeSeriesDataset":
        # a block may legitimately hold a single class, so skip the 2-class check
        out = object.__new__(TimeSeriesDataset)
        object.__setattr__(out, "channels", self.channels[:, start:stop])
        object.__setattr__(out, "labels", self.labels[start:stop])
        object.__setattr__(out, "classes", self.classes)
        object.__setattr__(out, "sample_rate", self.sample_rate)
        return out


@dataclass(frozen=True, eq=False)
class SegmentSet:
    windows: np.ndarray  # (m, d * L), channel-major
    window_labels: np.ndarray  # (m, c) one-hot
    window_length: int
    overlap: float

    @property
    def m(self) -> int:
        return self.windows.shape[0]

    @property
    def classes(self) -> np.ndarray:
        return np.argmax(self.window_labels, axis=1)

    @staticmethod
    def concat(parts: list["SegmentSet"]) -> "SegmentSet":
        if not parts:
            raise DomainError("nothing to concatenate")
        return SegmentSet(
            np.concatenate([p.windows for p in parts]),
            np.concatenate([p.window_labels for p in parts]),
            parts[0].window_length,
            parts[0].overlap,
        )


def synth_dataset(
    classes: int,
    channels: int,
    length: int,
    seed: int,
    difficulty: float = 0.5,
    regime_length: tuple[int, int] = (80, 240),
) -> TimeSeriesDataset:
    """Piecewise-regime series; each class has its own oscillation signature.

    Every regime holds one class.  In channel ``j`` class ``k`` shows a
    sinusoid of frequency ``f[k, j]`` around offset ``o[k, j]``, plus AR(1)
    noise.  ``difficulty`` in [0, 1] raises the noise level and pulls the
    class signatures together.
    """
    if classes < 2 or channels < 1:
        raise DomainError("need classes >= 2 and channels >= 1")
    if not 0 <= difficulty <= 1:
        raise DomainError("difficulty must be in [0, 1]")
    lo, hi = regime_length
    if length < 2 * hi:
        raise DomainError(f"length must be at least {2 * hi} for two regimes")
    rng = np.random.default_rng(seed)

    labels = np.empty(length, dtype=np.int64)
    t, prev = 0, -1
    while t < length:
        k = int(rng.integers(0, classes - 1))
        k = k + (k >= prev) if prev >= 0 else int(rng.integers(0, classes))
        span = int(rng.integers(lo, hi + 1))
        labels[t : t + span] = k
        t += span
        prev = k
    if np.unique(labels).size < 2:
        labels[lo:] = (labels[0] + 1) % classes

    shrink = 1.0 - 0.75 * difficulty
    freq = 0.02 + 0.18 * rng.random((classes, channels))
    freq = freq.mean(axis=0) + shrink * (freq - freq.mean(axis=0))
    offset = shrink * rng.standard_normal((classes, channels))
    phase = 2 * np.pi * rng.random((classes, channels))

    steps = np.arange(length)
    signal = np.sin(2 * np.pi * freq[labels].T * steps + phase[labels].T) + offset[labels].T

    sigma = 0.05 + 2.0 * difficulty
    phi = 0.7
    eps = rng.standard_normal((channels, length)) * sigma * math.sqrt(1 - phi**2)
    noise = np.empty_like(eps)
    noise[:, 0] = eps[:, 0] / math.sqrt(1 - phi**2)
    for i in range(1, length):
        noise[:, i] = phi * noise[:, i - 1] + eps[:, i]
    return TimeSeriesDataset(signal + noise, labels, classes)


def window_stride(window_length: int, overlap: float) -> int:
    if not 0 <= overlap < 1:
        raise DomainError(f"overlap must be in [0, 1), got {overlap}")
    # the small slack keeps e.g. 10 * (1 - 0.9) from flooring to 0
    stride = math.floor(window_length * (1 - overlap) + 1e-9)
    if stride < 1:
        raise DomainError(
            f"window length {window_length} with overlap {overlap} gives stride < 1"
        )
    return stride


def segment(ds: TimeSeriesDataset, window_length: int, overlap: float) -> SegmentSet:
    """Sliding windows with majority labels (ties go to the lower class)."""
    if window_length < 1:
        raise DomainError("window_length must be >= 1")
    stride = window_stride(window_length, overlap)
    d, T = ds.channels.shape
    if window_length > T:
        raise DomainError(f"window length {window_length} exceeds series length {T}")
    m = (T - window_length) // stride + 1
    starts = np.arange(m) * stride
    idx = starts[:, None] + np.arange(window_length)[None, :]
    windows = ds.channels[:, idx].transpose(1, 0, 2).reshape(m, d * window_length)
    counts = np.zeros((m, ds.classes), dtype=np.int64)
    np.add.at(counts, (np.repeat(np.arange(m), window_length), ds.labels[idx].ravel()), 1)
    onehot = np.zeros((m, ds.classes))
    onehot[np.arange(m), np.argmax(counts, axis=1)] = 1.0
    return SegmentSet(windows, onehot, window_length, overlap)


@dataclass(frozen=True)
class BlockSplit:
    """Roles of the ``h`` blocks in one fold.  Folds and blocks are 1-based."""

    fold: int
    h: int
    train: tuple[int, ...]
    validation: tuple[int, ...]
    test: tuple[int, ...]

    @property
    def nv(self) -> int:
        return len(self.validation)

    @property
    def nt(self) -> int:
        return len(self.test)


def hblock_splits(h: int, wrap: bool = True) -> list[BlockSplit]:
    """h-block cross-validation folds.

    Fold ``i`` validates on blocks ``i .. i+nv-1`` and tests on the next
    ``nt`` blocks, with ``nv = floor(0.2 h)`` and ``nt = floor(0.3 h)``.
    Indices past ``h`` wrap around by default; with ``wrap=False`` folds
    whose ranges would overflow are dropped instead.
    """
    if h < 4:
        raise DomainError(f"h must be >= 4, got {h}")
    nv, nt = (2 * h) // 10, (3 * h) // 10
    folds = []
    for i in range(1, h + 1):
        if not wrap and i + nv + nt - 1 > h:
            continue
        val = tuple((i - 1 + j) % h + 1 for j in range(nv))
        test = tuple((i - 1 + nv + j) % h + 1 for j in range(nt))
        used = set(val) | set(test)
        train = tuple(b for b in range(1, h + 1) if b not in used)
        folds.append(BlockSplit(i, h, train, val, test))
    return folds


def block_bounds(length: int, h: int) -> list[tuple[int, int]]:
    """``[start, stop)`` of each of ``h`` contiguous, near-equal blocks."""
    if h < 1 or length < h:
        raise DomainError(f"cannot cut {length} steps into {h} blocks")
    edges = np.linspace(0, length, h + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def segment_blocks(
    ds: TimeSeriesDataset, h: int, blocks, window_length: int, overlap: float
) -> SegmentSet:
    """Segment each listed block on its own so no window straddles two blocks."""
    bounds = block_bounds(ds.length, h)
    parts = [
        segment(ds.slice(*bounds[b - 1]), window_length, overlap)
        for b in blocks
        if bounds[b - 1][1] - bounds[b - 1][0] >= window_length
    ]
    if not parts:
        raise DomainError("blocks are shorter than one window")
    return SegmentSet.concat(parts)
