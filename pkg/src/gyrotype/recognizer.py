"""DTW distance, template-based 1-NN gesture classification, noise rejection.

The DTW recurrence is the classic one: borders initialized to infinity,
DTW[0,0] = 0, DTW[i,j] = delta(i,j) + min of the three predecessors, with
delta the Euclidean distance between 3-axis points.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.signal import find_peaks

from . import NotReady, RejectedInput
from .signal_core import GestureUnit, SegmentationConfig


class GestureClass(Enum):
    SINGLE_LEFT_TAP = "SingleLeftTap"
    SINGLE_RIGHT_TAP = "SingleRightTap"
    DOUBLE_LEFT_TAP = "DoubleLeftTap"
    DOUBLE_RIGHT_TAP = "DoubleRightTap"
    SINGLE_DOWN_TAP = "SingleDownTap"
    LEFT_SLIDE = "LeftSlide"
    RIGHT_SLIDE = "RightSlide"
    NOISE = "Noise"


TAP_GESTURES = (
    GestureClass.SINGLE_LEFT_TAP,
    GestureClass.SINGLE_RIGHT_TAP,
    GestureClass.DOUBLE_LEFT_TAP,
    GestureClass.DOUBLE_RIGHT_TAP,
)
NON_NOISE_GESTURES = tuple(g for g in GestureClass if g is not GestureClass.NOISE)


@dataclass(frozen=True)
class GestureSeries:
    """An ordered series of 3-axis points (deg/s), shape (L, 3)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 1:
            raise RejectedInput("series must have shape (L, 3) with L >= 1")
        if not np.isfinite(pts).all():
            raise RejectedInput("series contains non-finite values")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_unit(cls, unit: GestureUnit) -> "GestureSeries":
        return cls(np.array([[s.gx, s.gy, s.gz] for s in unit.samples]))

    @classmethod
    def from_axis(cls, values: Sequence[float], axis: int = 0) -> "GestureSeries":
        pts = np.zeros((len(values), 3))
        pts[:, axis] = values
        return cls(pts)

    def znormalized(self) -> "GestureSeries":
        """Per-axis z-normalization (optional experiment knob, off by default)."""
        mu = self.points.mean(axis=0)
        sd = self.points.std(axis=0)
        sd[sd == 0] = 1.0
        return GestureSeries((self.points - mu) / sd)

    def __len__(self) -> int:
        return len(self.points)


def _as_points(series) -> np.ndarray:
    if isinstance(series, GestureSeries):
        return series.points
    if isinstance(series, GestureUnit):
        return GestureSeries.from_unit(series).points
    return GestureSeries(series).points


def dtw_distance(a, b) -> float:
    """DTW alignment cost between two 3-axis series under monotone warping."""
    pa, pb = _as_points(a), _as_points(b)
    m, n = len(pa), len(pb)
    # pairwise Euclidean point distances
    diff = pa[:, None, :] - pb[None, :, :]
    delta = np.sqrt((diff * diff).sum(axis=2))
    inf = math.inf
    prev = [inf] * (n + 1)
    prev[0] = 0.0
    for i in range(1, m + 1):
        row = delta[i - 1]
        cur = [inf] * (n + 1)
        left = inf
        for j in range(1, n + 1):
            up = prev[j]
            diag = prev[j - 1]
            best = up if up < left else left
            if diag < best:
                best = diag
            left = row[j - 1] + best
            cur[j] = left
        prev = cur
    return float(prev[n])


@dataclass(frozen=True)
class TemplateEntry:
    series: GestureSeries
    label: GestureClass
    insertion_index: int


class TemplateSet:
    """Ordered store of labelled gesture templates for k-NN classification."""

    def __init__(self, k: int = 1):
        if k < 1:
            raise RejectedInput("k must be >= 1")
        self.k = k
        self.entries: list[TemplateEntry] = []

    def add(self, series, label: GestureClass) -> None:
        if label is GestureClass.NOISE:
            raise RejectedInput("Noise is not a template class")
        if isinstance(series, GestureUnit):
            series = GestureSeries.from_unit(series)
        elif not isinstance(series, GestureSeries):
            series = GestureSeries(series)
        self.entries.append(TemplateEntry(series, label, len(self.entries)))

    def classes(self) -> set[GestureClass]:
        return {e.label for e in self.entries}

    def __len__(self) -> int:
        return len(self.entries)


def classify(unit, templates: TemplateSet) -> tuple[GestureClass, float]:
    """1-NN (k-NN) classification by DTW distance.

    Ties break deterministically by lowest insertion index; for k > 1 the
    majority vote breaks ties by smaller summed distance, then insertion index.
    """
    if not templates.entries:
        raise NotReady("template set is empty")
    query = _as_points(unit)
    scored = sorted(
        (dtw_distance(query, e.series), e.insertion_index, e.label)
        for e in templates.entries
    )
    if templates.k == 1:
        d, _, label = scored[0]
        return label, d
    top = scored[: templates.k]
    votes = Counter(label for _, _, label in top)
    best = max(votes.values())
    tied = [label for label, c in votes.items() if c == best]
    if len(tied) == 1:
        winner = tied[0]
    else:
        def keyfn(label):
            dsum = sum(d for d, _, lb in top if lb is label)
            first = min(i for _, i, lb in top if lb is label)
            return (dsum, first)
        winner = min(tied, key=keyfn)
    return winner, min(d for d, _, lb in top if lb is winner)


@dataclass(frozen=True)
class NoiseFeatures:
    """Time-domain features of a unit's energy curve."""

    peak_count: int
    duration_ms: float
    mean_energy: float
    max_energy: float

    def vector(self) -> np.ndarray:
        return np.array(
            [self.peak_count, self.duration_ms, self.mean_energy, self.max_energy],
            dtype=float,
        )


def noise_features(
    unit: GestureUnit,
    cfg: SegmentationConfig | None = None,
    prominence_frac: float = 0.2,
) -> NoiseFeatures:
    """Extract peak count / duration / mean / max from the energy curve.

    Peaks are local maxima above peak_threshold with prominence at least
    prominence_frac of the curve maximum (suppresses jitter peaks).
    """
    cfg = cfg or SegmentationConfig()
    energy = np.array(unit.energies())
    max_e = float(energy.max())
    peaks, _ = find_peaks(
        energy,
        height=cfg.peak_threshold,
        prominence=prominence_frac * max_e if max_e > 0 else None,
    )
    return NoiseFeatures(
        peak_count=int(len(peaks)),
        duration_ms=float(unit.duration_ms),
        mean_energy=float(energy.mean()),
        max_energy=max_e,
    )


@dataclass(frozen=True)
class NoiseClassifier:
    """Linear max-margin classifier over standardized noise features.

    Decision function > 0 means noise; exactly 0 is treated as gesture
    (dropping a real gesture costs more than letting one noise unit through).
    """

    means: np.ndarray
    stds: np.ndarray
    weights: np.ndarray
    bias: float

    def decision(self, features: NoiseFeatures) -> float:
        x = (features.vector() - self.means) / self.stds
        return float(x @ self.weights + self.bias)


def _featurize(units, cfg) -> list[NoiseFeatures]:
    out = []
    for u in units:
        if isinstance(u, NoiseFeatures):
            out.append(u)
        else:
            out.append(noise_features(u, cfg))
    return out


def train_noise_classifier(
    gesture_units: Sequence,
    noise_units: Sequence,
    cfg: SegmentationConfig | None = None,
    seed: int = 0,
    epochs: int = 400,
    reg: float = 1e-3,
) -> NoiseClassifier:
    """Fit a linear SVM (hinge loss, Pegasos-style sub-gradient steps).

    Deterministic for a fixed seed. Accepts GestureUnits or precomputed
    NoiseFeatures. Identical feature vectors appearing in both classes are
    rejected rather than silently fit.
    """
    if not gesture_units or not noise_units:
        raise RejectedInput("both gesture and noise training sets must be non-empty")
    gf = _featurize(gesture_units, cfg)
    nf = _featurize(noise_units, cfg)
    g_vecs = {tuple(f.vector()) for f in gf}
    n_vecs = {tuple(f.vector()) for f in nf}
    clash = g_vecs & n_vecs
    if clash:
        raise RejectedInput(
            f"identical feature vectors in both classes: {sorted(clash)[:3]}"
        )
    X = np.array([f.vector() for f in gf + nf])
    y = np.array([-1.0] * len(gf) + [1.0] * len(nf))  # +1 = noise
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds[stds == 0] = 1.0
    Xs = (X - means) / stds

    rng = np.random.default_rng(seed)
    w = np.zeros(X.shape[1])
    b = 0.0
    t = 0
    for _ in range(epochs):
        order = rng.permutation(len(y))
        for i in order:
            t += 1
            lr = 1.0 / (reg * t)
            margin = y[i] * (Xs[i] @ w + b)
            if margin < 1:
                w = (1 - lr * reg) * w + lr * y[i] * Xs[i]
                b = b + lr * y[i]
            else:
                w = (1 - lr * reg) * w
    return NoiseClassifier(means=means, stds=stds, weights=w, bias=float(b))


def is_noise(unit, model: NoiseClassifier, cfg: SegmentationConfig | None = None) -> bool:
    """True iff the unit's features land strictly on the noise side."""
    if model is None:
        raise NotReady("noise classifier not trained")
    feats = unit if isinstance(unit, NoiseFeatures) else noise_features(unit, cfg)
    return model.decision(feats) > 0


# ---------------------------------------------------------------------------
# Persistence


def save_templates(directory: str | Path, templates: TemplateSet) -> None:
    """Write one trace-format CSV per template plus an insertion-order manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    counters: Counter = Counter()
    names = []
    for e in sorted(templates.entries, key=lambda e: e.insertion_index):
        idx = counters[e.label]
        counters[e.label] += 1
        name = f"{e.label.value}_{idx}.csv"
        names.append(name)
        with open(directory / name, "w", newline="\n", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t_ms", "gx", "gy", "gz"])
            for i, p in enumerate(e.series.points):
                writer.writerow([i * 10, p[0], p[1], p[2]])
    with open(directory / "manifest.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(names) + "\n")


def load_templates(directory: str | Path, k: int = 1) -> TemplateSet:
    directory = Path(directory)
    manifest = directory / "manifest.txt"
    if not manifest.exists():
        raise RejectedInput(f"missing manifest {manifest}")
    templates = TemplateSet(k=k)
    by_value = {g.value: g for g in GestureClass}
    for name in manifest.read_text(encoding="utf-8").splitlines():
        name = name.strip()
        if not name:
            continue
        label_name = name.rsplit("_", 1)[0]
        if label_name not in by_value:
            raise RejectedInput(f"unknown gesture class in template name {name!r}")
        pts = []
        with open(directory / name, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                pts.append([float(row["gx"]), float(row["gy"]), float(row["gz"])])
        templates.add(GestureSeries(np.array(pts)), by_value[label_name])
    return templates


def save_noise_model(path: str | Path, model: NoiseClassifier) -> None:
    """Flat text: 4 means, 4 stddevs, 4 weights, bias — one decimal per line."""
    values = [*model.means, *model.stds, *model.weights, model.bias]
    Path(path).write_text(
        "\n".join(repr(float(v)) for v in values) + "\n", encoding="utf-8"
    )


def load_noise_model(path: str | Path) -> NoiseClassifier:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln]
    if len(lines) != 13:
        raise RejectedInput(f"{path}: expected 13 values, got {len(lines)}")
    vals = [float(v) for v in lines]
    return NoiseClassifier(
        means=np.array(vals[0:4]),
        stds=np.array(vals[4:8]),
        weights=np.array(vals[8:12]),
        bias=vals[12],
    )
