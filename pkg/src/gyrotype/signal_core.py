"""Gyroscope sample types, the energy signal, and streaming gesture segmentation.

Segmentation is a three-state machine (Idle -> Active -> Tolerating) over the
per-sample energy sqrt(gx^2 + gy^2 + gz^2). Crossing ``peak_threshold`` opens a
unit seeded with a rolling pre-buffer (the left buffer); a below-threshold run
longer than ``tolerance_ms`` closes it, keeping only the first
``right_buffer_ms`` of the quiet tail.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from . import RejectedInput


@dataclass(frozen=True)
class ImuSample:
    """One timestamped 3-axis gyroscope reading, axes in deg/s."""

    t_ms: int
    gx: float
    gy: float
    gz: float


@dataclass(frozen=True)
class SegmentationConfig:
    peak_threshold: float = 30.0
    left_buffer_ms: float = 200.0
    right_buffer_ms: float = 200.0
    tolerance_ms: float = 300.0
    sample_rate_hz: float = 100.0
    max_unit_ms: float = 5000.0

    def __post_init__(self) -> None:
        if not self.peak_threshold > 0:
            raise RejectedInput("peak_threshold must be > 0")
        if min(self.left_buffer_ms, self.right_buffer_ms, self.tolerance_ms) < 0:
            raise RejectedInput("buffer durations must be >= 0")
        if self.right_buffer_ms > self.tolerance_ms:
            raise RejectedInput("right_buffer_ms must not exceed tolerance_ms")
        if not self.sample_rate_hz > 0:
            raise RejectedInput("sample_rate_hz must be > 0")


@dataclass(frozen=True)
class GestureUnit:
    """A contiguous, time-ordered slice of samples holding one candidate gesture."""

    samples: tuple[ImuSample, ...]
    start_ms: int
    end_ms: int
    peak_energy: float
    truncated: bool = False  # set when max_unit_ms forced finalization

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms

    def energies(self) -> list[float]:
        return [gyro_energy(s) for s in self.samples]


def gyro_energy(s: ImuSample) -> float:
    """Energy of one sample: the Euclidean norm of the three axes (deg/s)."""
    if not (math.isfinite(s.gx) and math.isfinite(s.gy) and math.isfinite(s.gz)):
        raise RejectedInput(f"non-finite axis value in sample at t={s.t_ms}")
    if not (math.isfinite(s.t_ms) and s.t_ms >= 0):
        raise RejectedInput(f"bad timestamp {s.t_ms}")
    # hypot avoids underflow/overflow in the squares; zero iff all axes zero
    return math.hypot(s.gx, s.gy, s.gz)


_IDLE, _ACTIVE, _TOLERATING = 0, 1, 2


class Segmenter:
    """Single-writer streaming segmenter; emitted units are immutable."""

    def __init__(self, cfg: SegmentationConfig | None = None):
        self.cfg = cfg or SegmentationConfig()
        self._state = _IDLE
        self._prebuf: deque[ImuSample] = deque()
        self._unit: list[ImuSample] = []
        self._last_t: Optional[int] = None
        self._last_above_t: int = 0
        self._unit_start_t: int = 0
        self._prev_unit_end: Optional[int] = None

    @property
    def in_unit(self) -> bool:
        return self._state != _IDLE

    def feed(self, s: ImuSample) -> Optional[GestureUnit]:
        """Advance the machine one sample; returns a finalized unit or None."""
        e = gyro_energy(s)
        if self._last_t is not None and s.t_ms < self._last_t:
            raise RejectedInput(
                f"out-of-order timestamp {s.t_ms} after {self._last_t}"
            )
        self._last_t = s.t_ms
        cfg = self.cfg

        if self._state == _IDLE:
            if e >= cfg.peak_threshold:
                self._open_unit(s)
            else:
                self._push_prebuf(s)
            return None

        self._unit.append(s)
        if e >= cfg.peak_threshold:
            self._state = _ACTIVE
            self._last_above_t = s.t_ms
        else:
            self._state = _TOLERATING
            if s.t_ms - self._last_above_t > cfg.tolerance_ms:
                return self._finalize(carve_tail=True)
        if s.t_ms - self._unit_start_t > cfg.max_unit_ms:
            return self._finalize(carve_tail=self._state == _TOLERATING,
                                  truncated=True)
        return None

    def flush(self) -> Optional[GestureUnit]:
        """Finalize any open unit at end-of-stream."""
        if self._state == _IDLE:
            return None
        return self._finalize(carve_tail=self._state == _TOLERATING)

    def _open_unit(self, s: ImuSample) -> None:
        cutoff = s.t_ms - self.cfg.left_buffer_ms
        left = [p for p in self._prebuf if p.t_ms >= cutoff]
        if self._prev_unit_end is not None:
            # left buffer never reaches back into the previous unit
            left = [p for p in left if p.t_ms > self._prev_unit_end]
        self._unit = left + [s]
        self._unit_start_t = self._unit[0].t_ms
        self._last_above_t = s.t_ms
        self._state = _ACTIVE
        self._prebuf.clear()

    def _push_prebuf(self, s: ImuSample) -> None:
        self._prebuf.append(s)
        cutoff = s.t_ms - self.cfg.left_buffer_ms
        while self._prebuf and self._prebuf[0].t_ms < cutoff:
            self._prebuf.popleft()

    def _finalize(self, carve_tail: bool, truncated: bool = False) -> GestureUnit:
        samples = self._unit
        if carve_tail:
            keep_until = self._last_above_t + self.cfg.right_buffer_ms
            kept = [p for p in samples if p.t_ms <= keep_until]
            spill = [p for p in samples if p.t_ms > keep_until]
        else:
            kept, spill = samples, []
        unit = GestureUnit(
            samples=tuple(kept),
            start_ms=kept[0].t_ms,
            end_ms=kept[-1].t_ms,
            peak_energy=max(gyro_energy(p) for p in kept),
            truncated=truncated,
        )
        self._prev_unit_end = unit.end_ms
        self._state = _IDLE
        self._unit = []
        self._prebuf.clear()
        for p in spill:
            self._push_prebuf(p)
        return unit


def segment_trace(
    samples: Iterable[ImuSample], cfg: SegmentationConfig | None = None
) -> list[GestureUnit]:
    """Batch wrapper over feed(): segment a whole trace, flushing at EOF."""
    seg = Segmenter(cfg)
    units = []
    for s in samples:
        u = seg.feed(s)
        if u is not None:
            units.append(u)
    tail = seg.flush()
    if tail is not None:
        units.append(tail)
    return units


def load_trace(path: str | Path) -> list[ImuSample]:
    """Read a trace CSV with header t_ms,gx,gy,gz."""
    samples = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["t_ms", "gx", "gy", "gz"]:
            raise RejectedInput(f"{path}: expected header t_ms,gx,gy,gz")
        for row in reader:
            samples.append(
                ImuSample(
                    t_ms=int(row["t_ms"]),
                    gx=float(row["gx"]),
                    gy=float(row["gy"]),
                    gz=float(row["gz"]),
                )
            )
    return samples


def save_trace(path: str | Path, samples: Iterable[ImuSample]) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_ms", "gx", "gy", "gz"])
        for s in samples:
            writer.writerow([s.t_ms, s.gx, s.gy, s.gz])
