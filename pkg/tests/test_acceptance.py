"""Acceptance suite: one test and one PASS/FAIL line per release criterion.

Every check here compares the implementation against an independent oracle
or a hand-constructed scenario; run with ``-s`` to see the summary lines.
"""

import math
import random
import time

import numpy as np

from gyrotype.eval_harness import (
    DEFAULT_THRESHOLDS,
    GestureScript,
    LabelledTrace,
    TypistModel,
    default_confusion,
    make_template_set,
    simulate_typist,
    sweep_threshold,
    synth_trace,
)
from gyrotype.gateway import GESTURE_EVENTS, RAW_SAMPLES, Session, SessionConfig, snapshot_json
from gyrotype.recognizer import (
    NON_NOISE_GESTURES,
    GestureClass,
    NoiseFeatures,
    classify,
    dtw_distance,
    train_noise_classifier,
)
from gyrotype.signal_core import SegmentationConfig, Segmenter, segment_trace
from gyrotype.text_decoder import (
    BLOCKS,
    PredictorConfig,
    SpatialModel,
    decode_gesture_stream,
    default_layout,
    spatial_prob,
    top_candidates,
)

from conftest import candidates_oracle, dtw_oracle, make_big_dictionary, rect_pulse_trace

CFG = SegmentationConfig()


def _report(name: str, ok: bool) -> None:
    print(f"{'PASS' if ok else 'FAIL'}: {name}")
    assert ok, name


# -- 1. DTW matches the exhaustive warping-path oracle -------------------------


def test_dtw_oracle_equivalence():
    def series(rng, length, dims, draw):
        # 1-D series become 3-axis points with the other axes zeroed,
        # which leaves pointwise distances (and the oracle) unchanged
        return [
            [draw() for _ in range(dims)] + [0.0] * (3 - dims)
            for _ in range(length)
        ]

    rng = random.Random(1234)
    start = time.monotonic()
    ok = True
    checked = 0
    for _ in range(500):  # 500 integer pairs + 500 float pairs
        dims = rng.choice((1, 3))
        a = series(rng, rng.randint(1, 6), dims, lambda: rng.randint(-9, 9))
        b = series(rng, rng.randint(1, 6), dims, lambda: rng.randint(-9, 9))
        if dtw_distance(a, b) != dtw_oracle(np.array(a, float), np.array(b, float)):
            ok = False
        checked += 1
    for _ in range(500):
        dims = rng.choice((1, 3))
        a = series(rng, rng.randint(1, 6), dims, lambda: rng.uniform(-50, 50))
        b = series(rng, rng.randint(1, 6), dims, lambda: rng.uniform(-50, 50))
        got = dtw_distance(a, b)
        want = dtw_oracle(np.array(a), np.array(b))
        if not math.isclose(got, want, rel_tol=1e-9, abs_tol=0.0):
            ok = False
        checked += 1
    elapsed = time.monotonic() - start
    _report(
        f"dtw equals exhaustive-path oracle on {checked} pairs "
        f"({elapsed:.1f}s < 10s)",
        ok and checked >= 1000 and elapsed < 10.0,
    )


# -- 2. Segmentation scenarios and batch/stream equivalence --------------------


def _scenarios_ok() -> bool:
    tol_ms = 10  # one sample at 100 Hz

    # zero stream: nothing detected
    if segment_trace(rect_pulse_trace([]), CFG) != []:
        return False

    # single pulse: one unit, buffers carved around the active span
    units = segment_trace(rect_pulse_trace([(2000, 2500)]), CFG)
    if len(units) != 1:
        return False
    u = units[0]
    if abs(u.start_ms - 1800) > tol_ms or abs(u.end_ms - 2690) > tol_ms:
        return False

    # dip shorter than the tolerance: still one unit
    units = segment_trace(rect_pulse_trace([(2000, 2400), (2600, 3000)]), CFG)
    if len(units) != 1:
        return False

    # gap longer than the tolerance: two units
    units = segment_trace(rect_pulse_trace([(2000, 2400), (2900, 3300)]), CFG)
    return len(units) == 2


def _batch_stream_equal(n_traces: int = 100) -> bool:
    rng = random.Random(77)
    for _ in range(n_traces):
        k = rng.randint(1, 4)
        script = GestureScript(
            entries=tuple(
                (rng.choice(NON_NOISE_GESTURES), rng.uniform(600, 1500))
                for _ in range(k)
            ),
            amplitude=rng.uniform(40, 80),
            noise_sigma=rng.uniform(0, 3),
            seed=rng.randint(0, 10_000),
        )
        trace = synth_trace(script, CFG)
        batch = segment_trace(trace, CFG)
        seg = Segmenter(CFG)
        streamed = [u for s in trace if (u := seg.feed(s)) is not None]
        tail = seg.flush()
        if tail is not None:
            streamed.append(tail)
        if [(u.start_ms, u.end_ms, u.samples) for u in batch] != [
            (u.start_ms, u.end_ms, u.samples) for u in streamed
        ]:
            return False
    return True


def test_segmentation_scenarios_and_equivalence():
    _report(
        "segmentation: 4 hand-traced scenarios exact, batch==stream on "
        "100 random traces",
        _scenarios_ok() and _batch_stream_equal(),
    )


# -- 3. Spatial model rows are normalized --------------------------------------


def test_spatial_rows_normalized():
    model = SpatialModel()
    ok = (model.p_same, model.p_adjacent, model.p_diagonal) == (0.94, 0.025, 0.01)
    for obs in BLOCKS:
        row = sum(spatial_prob(obs, intended, model) for intended in BLOCKS)
        if abs(row - 1.0) > math.ulp(1.0):
            ok = False
    _report("spatial confusion rows sum to 1.0 within one ulp (0.94/0.025/0.01)", ok)


# -- 4. Candidate ranking matches the exhaustive-scoring oracle ----------------


def test_candidate_ranking_oracle_equivalence():
    dictionary = make_big_dictionary()
    layout = default_layout()
    spatial = SpatialModel()
    cfg = PredictorConfig()
    rng = random.Random(99)
    start = time.monotonic()
    ok = True
    for _ in range(500):
        pending = [rng.choice(BLOCKS) for _ in range(rng.randint(1, 10))]
        got = top_candidates(pending, dictionary, layout, spatial, cfg)
        want = candidates_oracle(pending, dictionary, layout, spatial, cfg)
        if [c.word for c in got] != [w for _, w in want]:
            ok = False
            break
        for c, (log_score, _) in zip(got, want):
            if not math.isclose(c.log_score, log_score, rel_tol=1e-12):
                ok = False
    elapsed = time.monotonic() - start
    _report(
        f"candidate ranking equals exhaustive oracle on 500 pending "
        f"sequences over 10k words ({elapsed:.1f}s < 30s)",
        ok and elapsed < 30.0,
    )


# -- 5. Exact block sequences recover their word when ranked top-k -------------


def test_exact_match_recovery():
    dictionary = make_big_dictionary()
    layout = default_layout()
    spatial = SpatialModel()
    cfg = PredictorConfig()
    tap_for_block = {b: g for g, b in layout.gesture_to_block.items()}
    rng = random.Random(5)
    words = rng.sample(sorted(dictionary.entries), 1000)
    agree = 0
    for word in words:
        pending = layout.blocks_of(word)
        oracle_top = [w for _, w in
                      candidates_oracle(pending, dictionary, layout, spatial, cfg)]
        gestures = [tap_for_block[b] for b in pending]
        if word in oracle_top:
            # the first down-tap selects the top candidate
            gestures += [GestureClass.SINGLE_DOWN_TAP] * (oracle_top.index(word) + 1)
            gestures.append(GestureClass.RIGHT_SLIDE)
            transcript, _ = decode_gesture_stream(gestures, dictionary, layout,
                                                  spatial, cfg)
            agree += transcript == word
        else:
            _, state = decode_gesture_stream(gestures, dictionary, layout,
                                             spatial, cfg)
            agree += word not in [c.word for c in state.candidates]
    _report(
        f"exact-match recovery: {agree}/1000 words agree with the oracle's "
        "top-3 membership",
        agree == 1000,
    )


# -- 6. End-to-end pipeline: streaming equals offline batch --------------------


def test_end_to_end_pipeline(assets_dir):
    rng = random.Random(11)
    labels = [rng.choice(NON_NOISE_GESTURES) for _ in range(50)]
    script = GestureScript(entries=tuple((g, 1200.0) for g in labels))
    trace = synth_trace(script, CFG)

    units = segment_trace(trace, CFG)
    templates = make_template_set(CFG)
    predicted = [classify(u, templates)[0] for u in units]

    streaming = Session(SessionConfig.from_assets(assets_dir, mode=RAW_SAMPLES))
    for s in trace:
        streaming.push_sample(s)
    streaming.flush()

    dictionary = streaming.cfg.dictionary
    _, batch_state = decode_gesture_stream(predicted, dictionary)

    offline = Session(SessionConfig(dictionary=dictionary, mode=GESTURE_EVENTS))
    for g in predicted:
        offline.push_gesture(g)

    ok = (
        len(units) == 50
        and predicted == labels
        and snapshot_json(streaming.snapshot()) == snapshot_json(offline.snapshot())
        and offline.snapshot()["text"] == batch_state.text
    )
    _report(
        "end-to-end: 50 gestures -> 50 units, 100% classification, "
        "streaming state == batch decode",
        ok,
    )


# -- 7. Bayesian spatial model recovers at least as many words -----------------


def test_auto_correct_benefit(english_dict, phrases):
    from gyrotype.text_decoder import indicator_spatial_model

    typist = TypistModel(confusion=default_confusion())
    bayes = simulate_typist(phrases[:40], typist, english_dict, seed=20)
    base = simulate_typist(phrases[:40], typist, english_dict, seed=20,
                           spatial=indicator_spatial_model())
    b, i = bayes.metrics.word_recovery_rate, base.metrics.word_recovery_rate
    _report(
        f"auto-correct benefit over 40 phrases: bayesian recovery {b:.3f} "
        f">= indicator baseline {i:.3f}",
        b >= i,
    )


# -- 8. Noise rejection on separable and 80/20-split corpora -------------------


def _separable_holdout_ok() -> bool:
    rng = random.Random(3)
    gestures = [
        NoiseFeatures(rng.randint(1, 2), rng.uniform(500, 1200),
                      rng.uniform(20, 35), rng.uniform(45, 75))
        for _ in range(40)
    ]
    noise = [
        NoiseFeatures(rng.randint(5, 8), rng.uniform(2000, 4000),
                      rng.uniform(20, 35), rng.uniform(45, 75))
        for _ in range(40)
    ]
    model = train_noise_classifier(gestures[:30], noise[:30], seed=0)
    held_g = [model.decision(f) <= 0 for f in gestures[30:]]
    held_n = [model.decision(f) > 0 for f in noise[30:]]
    return all(held_g) and all(held_n)


def _synthetic_split_ok() -> bool:
    # 102 synthetic units: 81 single gestures, 21 walking-like merged bursts
    rng = random.Random(8)
    gesture_units = []
    while len(gesture_units) < 81:
        script = GestureScript(
            entries=((rng.choice(NON_NOISE_GESTURES), 1200.0),),
            amplitude=rng.uniform(45, 75),
            stroke_ms=rng.uniform(250, 350),
        )
        gesture_units.extend(segment_trace(synth_trace(script, CFG), CFG))
    gesture_units = gesture_units[:81]
    noise_units = []
    while len(noise_units) < 21:
        reps = rng.randint(6, 10)
        script = GestureScript(
            entries=((GestureClass.SINGLE_LEFT_TAP, 100.0),) * reps,
            amplitude=rng.uniform(45, 75),
        )
        noise_units.extend(segment_trace(synth_trace(script, CFG), CFG))
    noise_units = noise_units[:21]

    rng.shuffle(gesture_units)
    rng.shuffle(noise_units)
    g_cut, n_cut = 65, 17  # ~80% of 81 and of 21
    model = train_noise_classifier(gesture_units[:g_cut], noise_units[:n_cut],
                                   cfg=CFG, seed=0)
    errors = sum(model.decision(u) > 0 for u in _features(gesture_units[g_cut:]))
    errors += sum(model.decision(u) <= 0 for u in _features(noise_units[n_cut:]))
    return errors == 0


def _features(units):
    from gyrotype.recognizer import noise_features

    return [noise_features(u, CFG) for u in units]


def test_noise_rejection():
    _report(
        "noise rejection: 100% held-out accuracy on the separable corpus and "
        "0 errors on the 80/20 split of 102 synthetic units",
        _separable_holdout_ok() and _synthetic_split_ok(),
    )


# -- 9. Replaying an event log reproduces the snapshot byte for byte -----------


def test_replay_determinism(english_dict):
    ok = True
    usable = [g for g in NON_NOISE_GESTURES]
    for seed in (0, 1, 2, 3, 4):
        rng = random.Random(seed)
        live = Session(SessionConfig(dictionary=english_dict, mode=GESTURE_EVENTS))
        for _ in range(rng.randint(5, 40)):
            live.push_gesture(rng.choice(usable))
        replayed = Session(
            SessionConfig(dictionary=english_dict, mode=GESTURE_EVENTS)
        ).replay(live.event_log_lines())
        if snapshot_json(replayed) != snapshot_json(live.snapshot()):
            ok = False
    _report("replaying session event logs yields byte-identical snapshots", ok)


# -- 10. Threshold sweep over the default grid ---------------------------------


def test_threshold_sweep(english_dict):
    rng = random.Random(31)
    traces = []
    for _ in range(6):
        labels = tuple(rng.choices(NON_NOISE_GESTURES, k=4))
        script = GestureScript(
            entries=tuple((g, 1200.0) for g in labels),
            amplitude=60.0,
            intra_gap_ms=80.0,
        )
        traces.append(
            LabelledTrace(samples=tuple(synth_trace(script, CFG)), labels=labels)
        )
    rows = sweep_threshold(traces, DEFAULT_THRESHOLDS, make_template_set(CFG), CFG)
    lasting = [r.mean_lasting_ms for r in rows]
    ok = (
        [r.threshold for r in rows] == list(DEFAULT_THRESHOLDS)
        and all(a >= b for a, b in zip(lasting, lasting[1:]))
        and all(r.accuracy == 1.0 for r in rows)  # amplitude 60 > all thresholds
        and not any(r.no_detection for r in rows)
    )
    _report(
        "threshold sweep completes: lasting time monotone non-increasing, "
        "100% accuracy below the 60 deg/s amplitude",
        ok,
    )
