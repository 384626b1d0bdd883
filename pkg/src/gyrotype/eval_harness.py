"""Desk-scale evaluation: synthetic gesture traces, simulated typists,
text-entry metrics, and the peak-threshold sweep.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from . import RejectedInput
from .recognizer import (
    GestureClass,
    GestureSeries,
    NON_NOISE_GESTURES,
    TAP_GESTURES,
    TemplateSet,
    classify,
)
from .signal_core import GestureUnit, ImuSample, SegmentationConfig, segment_trace
from .text_decoder import (
    Decoder,
    DecoderEvent,
    Dictionary,
    KeyboardLayout,
    PredictorConfig,
    SpatialModel,
    default_layout,
)

# ---------------------------------------------------------------------------
# Synthetic gesture waveforms


@dataclass(frozen=True)
class GestureScript:
    """A sequence of (gesture, quiet-gap-after-ms) pairs plus waveform knobs."""

    entries: tuple  # ((GestureClass, gap_ms), ...)
    amplitude: float = 60.0
    stroke_ms: float = 300.0
    noise_sigma: float = 0.0
    intra_gap_ms: float = 100.0  # dip inside double taps; keep < tolerance_ms
    lead_in_ms: float = 600.0
    seed: int = 0

    def __post_init__(self):
        for _, gap in self.entries:
            if gap < 0:
                raise RejectedInput("gap_ms must be >= 0")


def _half_sine(amplitude: float, n: int, sign: float = 1.0) -> np.ndarray:
    # endpoint-free half sine: values strictly inside the stroke
    t = (np.arange(n) + 0.5) / n
    return sign * amplitude * np.sin(np.pi * t)


def gesture_waveform(
    g: GestureClass, amplitude: float, stroke_ms: float, intra_gap_ms: float,
    sample_period_ms: float,
) -> np.ndarray:
    """Canonical noise-free (L, 3) waveform for one gesture class.

    Taps and slides live on the yaw axis (gz); SingleDownTap on pitch (gx).
    """
    n = max(1, round(stroke_ms / sample_period_ms))
    gap = np.zeros(max(1, round(intra_gap_ms / sample_period_ms)))

    def on_axis(curve: np.ndarray, axis: int) -> np.ndarray:
        pts = np.zeros((len(curve), 3))
        pts[:, axis] = curve
        return pts

    if g is GestureClass.SINGLE_LEFT_TAP:
        curve = np.concatenate([_half_sine(amplitude, n), _half_sine(amplitude, n, -1)])
        return on_axis(curve, 2)
    if g is GestureClass.SINGLE_RIGHT_TAP:
        curve = np.concatenate([_half_sine(amplitude, n, -1), _half_sine(amplitude, n)])
        return on_axis(curve, 2)
    if g is GestureClass.DOUBLE_LEFT_TAP:
        single = np.concatenate([_half_sine(amplitude, n), _half_sine(amplitude, n, -1)])
        return on_axis(np.concatenate([single, gap, single]), 2)
    if g is GestureClass.DOUBLE_RIGHT_TAP:
        single = np.concatenate([_half_sine(amplitude, n, -1), _half_sine(amplitude, n)])
        return on_axis(np.concatenate([single, gap, single]), 2)
    if g is GestureClass.SINGLE_DOWN_TAP:
        curve = np.concatenate([_half_sine(amplitude, n, -1), _half_sine(amplitude, n)])
        return on_axis(curve, 0)
    if g is GestureClass.LEFT_SLIDE:
        curve = np.concatenate(
            [
                _half_sine(amplitude, n),
                _half_sine(amplitude, 2 * n, -1),
                _half_sine(amplitude, n),
            ]
        )
        return on_axis(curve, 2)
    if g is GestureClass.RIGHT_SLIDE:
        curve = np.concatenate(
            [
                _half_sine(amplitude, n, -1),
                _half_sine(amplitude, 2 * n),
                _half_sine(amplitude, n, -1),
            ]
        )
        return on_axis(curve, 2)
    raise RejectedInput(f"no canonical waveform for {g}")


def synth_trace(
    script: GestureScript, cfg: SegmentationConfig | None = None
) -> list[ImuSample]:
    """Render a script as a sampled 3-axis trace with optional Gaussian noise."""
    cfg = cfg or SegmentationConfig()
    if not script.entries:
        return []
    if script.amplitude <= cfg.peak_threshold:
        warnings.warn(
            f"amplitude {script.amplitude} <= peak threshold "
            f"{cfg.peak_threshold}: gestures may be undetectable",
            stacklevel=2,
        )
    period = 1000.0 / cfg.sample_rate_hz
    rng = np.random.default_rng(script.seed)
    chunks = [np.zeros((max(0, round(script.lead_in_ms / period)), 3))]
    for g, gap_ms in script.entries:
        chunks.append(
            gesture_waveform(
                g, script.amplitude, script.stroke_ms, script.intra_gap_ms, period
            )
        )
        chunks.append(np.zeros((max(0, round(gap_ms / period)), 3)))
    pts = np.concatenate(chunks) if chunks else np.zeros((0, 3))
    if script.noise_sigma > 0:
        pts = pts + rng.normal(0.0, script.noise_sigma, size=pts.shape)
    return [
        ImuSample(t_ms=round(i * period), gx=p[0], gy=p[1], gz=p[2])
        for i, p in enumerate(pts)
    ]


def make_template_set(
    cfg: SegmentationConfig | None = None,
    amplitude: float = 60.0,
    stroke_ms: float = 300.0,
    k: int = 1,
) -> TemplateSet:
    """Noise-free templates, one per gesture class, from the same generator."""
    cfg = cfg or SegmentationConfig()
    templates = TemplateSet(k=k)
    for g in NON_NOISE_GESTURES:
        script = GestureScript(entries=((g, 1000.0),), amplitude=amplitude,
                               stroke_ms=stroke_ms, noise_sigma=0.0)
        units = segment_trace(synth_trace(script, cfg), cfg)
        if len(units) != 1:
            raise RejectedInput(f"template synthesis for {g} yielded {len(units)} units")
        templates.add(units[0], g)
    return templates


# ---------------------------------------------------------------------------
# Text-entry metrics


def wpm(transcribed: str, elapsed_s: float) -> float:
    """Words-per-minute with a word = 5 characters, spaces included."""
    if elapsed_s <= 0:
        raise RejectedInput("elapsed_s must be > 0")
    return (len(transcribed) / 5.0) / (elapsed_s / 60.0)


def _levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def fixed_chars(events: Iterable) -> int:
    """Characters removed by corrective actions during entry (the IF term)."""
    total = 0
    for e in events:
        kind = getattr(e, "kind", None) or e.get("kind")
        payload = getattr(e, "payload", None) if hasattr(e, "payload") else e
        if kind == "gesture_cancelled":
            total += 1
        elif kind == "word_cancelled":
            total += len(payload.get("word", "")) or 1
        elif kind == "word_deleted":
            total += len(payload.get("word", ""))
    return total


def error_rates(
    target: str, transcribed: str, input_stream_events: Iterable = ()
) -> tuple[float, float]:
    """(UER, TER) from the C / INF / IF decomposition.

    INF is the minimum string distance between target and transcript; C the
    remaining correct characters; IF the characters removed by corrections.
    """
    inf = _levenshtein(target, transcribed)
    c = max(len(target), len(transcribed)) - inf
    if_ = fixed_chars(input_stream_events)
    denom = c + inf + if_
    if denom == 0:
        return 0.0, 0.0
    return inf / (c + inf + if_), (inf + if_) / (c + inf + if_)


def auto_complete_rate(word: str, gestures_used: int) -> float:
    """Fraction of letters filled automatically: (|word| - gestures) / |word|."""
    if not 1 <= gestures_used <= len(word):
        raise RejectedInput(
            f"gestures_used {gestures_used} outside [1, {len(word)}]"
        )
    return (len(word) - gestures_used) / len(word)


# ---------------------------------------------------------------------------
# Simulated typist


@dataclass(frozen=True)
class TypistModel:
    """Stochastic gesture-confusion typist with a greedy candidate policy."""

    confusion: np.ndarray  # 7x7 row-stochastic, rows/cols in NON_NOISE_GESTURES order
    max_attempts: int = 3
    gesture_ms: float = 800.0

    def __post_init__(self):
        c = np.asarray(self.confusion, dtype=float)
        if c.shape != (7, 7):
            raise RejectedInput("confusion matrix must be 7x7")
        if np.abs(c.sum(axis=1) - 1.0).max() > 1e-9:
            raise RejectedInput("confusion rows must sum to 1")
        if (c < 0).any():
            raise RejectedInput("confusion entries must be non-negative")
        object.__setattr__(self, "confusion", c)


_GESTURE_INDEX = {g: i for i, g in enumerate(NON_NOISE_GESTURES)}


def default_confusion(
    p_correct: float = 0.94, layout: KeyboardLayout | None = None
) -> np.ndarray:
    """Diagonal p_correct for tap gestures; residual split 0.025/0.025/0.01
    across the taps of adjacent/diagonal blocks; identity for the other rows.
    """
    layout = layout or default_layout()
    residual = 1.0 - p_correct
    c = np.eye(7)
    block_to_gesture = {b: g for g, b in layout.gesture_to_block.items()}
    for g in TAP_GESTURES:
        i = _GESTURE_INDEX[g]
        gb = layout.gesture_to_block[g]
        c[i, i] = p_correct
        for other_b, other_g in block_to_gesture.items():
            if other_b is gb:
                continue
            j = _GESTURE_INDEX[other_g]
            if other_b.row == gb.row or other_b.col == gb.col:
                share = 0.025
            else:
                share = 0.01
            c[i, j] = residual * share / 0.06
    return c


def identity_confusion() -> np.ndarray:
    return np.eye(7)


def _perturb(
    intended: GestureClass,
    confusion: np.ndarray,
    seed: int,
    key: tuple,
) -> GestureClass:
    # Draws are a pure function of (seed, position key): decoders under paired
    # comparison see identical perturbations regardless of their own behavior.
    rng = random.Random(hash((seed,) + key))
    row = confusion[_GESTURE_INDEX[intended]]
    r = rng.random()
    acc = 0.0
    for j, p in enumerate(row):
        acc += p
        if r < acc:
            return NON_NOISE_GESTURES[j]
    return NON_NOISE_GESTURES[len(row) - 1]


@dataclass
class SessionMetrics:
    wpm: float
    uer: float
    ter: float
    auto_complete_rate: float
    phrase_count: int
    gesture_count: int
    word_recovery_rate: float = 0.0


@dataclass
class SimulationResult:
    metrics: SessionMetrics
    transcripts: list


def simulate_typist(
    phrases: Sequence[str],
    typist: TypistModel,
    dictionary: Dictionary,
    seed: int = 0,
    layout: KeyboardLayout | None = None,
    spatial: SpatialModel | None = None,
    cfg: PredictorConfig | None = None,
) -> SimulationResult:
    """Simulate a typist entering phrases through the decoder.

    Per word: emit (possibly confused) block gestures one by one; after each,
    scan the candidate list and select the target with down-taps as soon as it
    appears. If the fully typed word never surfaces, cancel with left-slides
    and retry; after max_attempts, settle for the top candidate.
    """
    layout = layout or default_layout()
    decoder = Decoder(dictionary, layout, spatial, cfg)
    top_k = decoder.cfg.top_k

    for phrase in phrases:
        for word in phrase.split():
            if word not in dictionary:
                raise RejectedInput(f"phrase word {word!r} not in dictionary")

    gesture_count = 0
    total_c = total_inf = total_if = 0
    ac_rates: list[float] = []
    recovered = 0
    word_total = 0
    transcripts: list[str] = []

    gesture_for_block = {b: g for g, b in layout.gesture_to_block.items()}

    for pi, phrase in enumerate(phrases):
        state = decoder.initial_state()
        phrase_events: list = []

        for wi, word in enumerate(phrase.split()):
            word_total += 1
            intended = [gesture_for_block[b] for b in layout.blocks_of(word)]
            done = False
            for attempt in range(typist.max_attempts):
                used = 0
                found = False
                for pos, g in enumerate(intended):
                    actual = _perturb(g, typist.confusion, seed, (pi, wi, attempt, pos))
                    state, ev = decoder.apply_gesture(state, actual)
                    phrase_events.extend(ev)
                    gesture_count += 1
                    used += 1
                    idx = next(
                        (i for i, c in enumerate(state.candidates) if c.word == word),
                        None,
                    )
                    if idx is not None:
                        for _ in range(idx + 1):
                            state, ev = decoder.apply_gesture(
                                state, GestureClass.SINGLE_DOWN_TAP
                            )
                            phrase_events.extend(ev)
                            gesture_count += 1
                        found = True
                        break
                if found:
                    ac_rates.append(auto_complete_rate(word, used))
                    recovered += 1
                    done = True
                    break
                # word absent after full typing: cancel the attempt
                if attempt < typist.max_attempts - 1:
                    while state.pending:
                        state, ev = decoder.apply_gesture(state, GestureClass.LEFT_SLIDE)
                        # left-slide on unselected pending = gesture cancel
                        phrase_events.append(DecoderEvent("gesture_cancelled", {}))
                        phrase_events.extend(ev)
                        gesture_count += 1
            if not done:
                # settle for the top candidate, or skip the word entirely
                if state.candidates:
                    state, ev = decoder.apply_gesture(state, GestureClass.SINGLE_DOWN_TAP)
                    phrase_events.extend(ev)
                    gesture_count += 1
                    if state.candidates[state.selection].word == word:
                        recovered += 1
                ac_rates.append(0.0)

        state, ev = decoder.apply_gesture(state, GestureClass.RIGHT_SLIDE)
        phrase_events.extend(ev)
        gesture_count += 1
        transcript = next(
            e.payload["phrase"] for e in ev if e.kind == "phrase_committed"
        )
        transcripts.append(transcript)

        inf = _levenshtein(phrase, transcript)
        c = max(len(phrase), len(transcript)) - inf
        total_c += c
        total_inf += inf
        total_if += fixed_chars(phrase_events)

    elapsed_s = gesture_count * typist.gesture_ms / 1000.0
    denom = total_c + total_inf + total_if
    metrics = SessionMetrics(
        wpm=wpm("\n".join(transcripts), elapsed_s) if elapsed_s > 0 else 0.0,
        uer=total_inf / denom if denom else 0.0,
        ter=(total_inf + total_if) / denom if denom else 0.0,
        auto_complete_rate=float(np.mean(ac_rates)) if ac_rates else 0.0,
        phrase_count=len(phrases),
        gesture_count=gesture_count,
        word_recovery_rate=recovered / word_total if word_total else 0.0,
    )
    return SimulationResult(metrics=metrics, transcripts=transcripts)


# ---------------------------------------------------------------------------
# Peak-threshold sweep


@dataclass(frozen=True)
class LabelledTrace:
    samples: tuple
    labels: tuple  # ground-truth GestureClass per expected unit, in order


@dataclass(frozen=True)
class SweepRow:
    threshold: float
    accuracy: float
    mean_lasting_ms: float
    detected: int
    expected: int
    no_detection: bool


DEFAULT_THRESHOLDS = (10.0, 20.0, 30.0, 40.0, 50.0)


def sweep_threshold(
    labelled_traces: Sequence[LabelledTrace],
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    templates: TemplateSet | None = None,
    base_cfg: SegmentationConfig | None = None,
) -> list[SweepRow]:
    """Re-segment and re-classify each trace at each threshold.

    Accuracy pairs predicted units with ground-truth labels in order; missing
    or surplus units count as errors.
    """
    base_cfg = base_cfg or SegmentationConfig()
    templates = templates or make_template_set(base_cfg)
    for tr in labelled_traces:
        if not tr.labels:
            raise RejectedInput("labelled trace without ground-truth labels")
    rows = []
    for th in thresholds:
        cfg = replace(base_cfg, peak_threshold=th)
        correct = 0
        expected = 0
        detected = 0
        durations: list[float] = []
        for tr in labelled_traces:
            units = segment_trace(tr.samples, cfg)
            detected += len(units)
            expected += len(tr.labels)
            durations.extend(u.duration_ms for u in units)
            preds = [classify(u, templates)[0] for u in units]
            correct += sum(p is l for p, l in zip(preds, tr.labels))
        rows.append(
            SweepRow(
                threshold=th,
                accuracy=correct / expected if expected else 0.0,
                mean_lasting_ms=float(np.mean(durations)) if durations else 0.0,
                detected=detected,
                expected=expected,
                no_detection=detected == 0,
            )
        )
    return rows
