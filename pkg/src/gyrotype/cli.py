"""Command-line entry points for the decoding pipeline and the eval harness."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import RejectedInput
from .eval_harness import (
    GestureScript,
    LabelledTrace,
    TypistModel,
    default_confusion,
    make_template_set,
    simulate_typist,
    sweep_threshold,
    synth_trace,
)
from .recognizer import (
    GestureClass,
    classify,
    is_noise,
    load_noise_model,
    load_templates,
    noise_features,
    save_noise_model,
    train_noise_classifier,
)
from .signal_core import SegmentationConfig, load_trace, save_trace, segment_trace
from .text_decoder import (
    Dictionary,
    PredictorConfig,
    SpatialModel,
    decode_gesture_stream,
    default_layout,
    load_layout,
)

GESTURE_BY_NAME = {g.value: g for g in GestureClass}


def load_config(path: str | None) -> dict:
    """Key/value config file (`key = value`, # comments) overriding defaults."""
    values: dict[str, float] = {}
    if path is None:
        return values
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise RejectedInput(f"{path}:{lineno}: expected key = value")
        key, _, val = line.partition("=")
        values[key.strip()] = float(val.strip())
    return values


def _build(cls, overrides: dict):
    names = {f.name for f in fields(cls)}
    return cls(**{k: v for k, v in overrides.items() if k in names})


def _seg_config(args) -> SegmentationConfig:
    overrides = load_config(getattr(args, "config", None))
    if getattr(args, "threshold", None) is not None:
        overrides["peak_threshold"] = args.threshold
    return _build(SegmentationConfig, overrides)


def _predictor_config(args) -> PredictorConfig:
    overrides = load_config(getattr(args, "config", None))
    if "top_k" in overrides:
        overrides["top_k"] = int(overrides["top_k"])
    if "max_extra_letters" in overrides:
        overrides["max_extra_letters"] = int(overrides["max_extra_letters"])
    return _build(PredictorConfig, overrides)


def _spatial_model(args) -> SpatialModel:
    return _build(SpatialModel, load_config(getattr(args, "config", None)))


def _emit(args, rows: list[dict], headers: list[str]) -> None:
    if args.json:
        json.dump(rows, sys.stdout, indent=2, default=str)
        print()
        return
    widths = [max(len(h), *(len(str(r[h])) for r in rows)) if rows else len(h)
              for h in headers]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    for r in rows:
        print("  ".join(str(r[h]).ljust(w) for h, w in zip(headers, widths)))


def cmd_segment(args) -> int:
    cfg = _seg_config(args)
    units = segment_trace(load_trace(args.trace), cfg)
    rows = [
        {"start_ms": u.start_ms, "end_ms": u.end_ms,
         "duration_ms": u.duration_ms, "peak_energy": round(u.peak_energy, 3),
         "samples": len(u.samples), "truncated": u.truncated}
        for u in units
    ]
    _emit(args, rows, ["start_ms", "end_ms", "duration_ms", "peak_energy",
                       "samples", "truncated"])
    return 0


def cmd_recognize(args) -> int:
    cfg = _seg_config(args)
    templates = load_templates(args.templates)
    noise_model = load_noise_model(args.noise_model) if args.noise_model else None
    rows = []
    for u in segment_trace(load_trace(args.trace), cfg):
        if noise_model is not None and is_noise(u, noise_model, cfg):
            rows.append({"start_ms": u.start_ms, "class": "Noise", "distance": ""})
            continue
        label, d = classify(u, templates)
        rows.append({"start_ms": u.start_ms, "class": label.value,
                     "distance": round(d, 3)})
    _emit(args, rows, ["start_ms", "class", "distance"])
    return 0


def cmd_train_noise(args) -> int:
    cfg = _seg_config(args)

    def units_of(directory):
        units = []
        for path in sorted(Path(directory).glob("*.csv")):
            units.extend(segment_trace(load_trace(path), cfg))
        return units

    model = train_noise_classifier(units_of(args.pos_dir), units_of(args.neg_dir),
                                   cfg=cfg, seed=args.seed)
    save_noise_model(args.output, model)
    print(f"noise model written to {args.output}")
    return 0


def _load_gestures(path) -> list[GestureClass]:
    gestures = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        name = line.strip()
        if not name:
            continue
        if name not in GESTURE_BY_NAME:
            raise RejectedInput(f"{path}:{lineno}: unknown gesture {name!r}")
        gestures.append(GESTURE_BY_NAME[name])
    return gestures


def cmd_decode(args) -> int:
    dictionary = Dictionary.from_file(args.dict)
    layout = load_layout(args.layout) if args.layout else default_layout()
    transcript, state = decode_gesture_stream(
        _load_gestures(args.gestures), dictionary, layout,
        _spatial_model(args), _predictor_config(args),
    )
    if args.json:
        print(json.dumps({"transcript": transcript,
                          "pending": [b.name for b in state.pending]}))
    else:
        print(transcript)
    return 0


def _load_confusion(path) -> np.ndarray:
    rows = [
        [float(v) for v in line.split(",")]
        for line in Path(path).read_text().splitlines()
        if line.strip()
    ]
    return np.array(rows)


def cmd_simulate(args) -> int:
    dictionary = Dictionary.from_file(args.dict)
    phrases = [
        ln.strip() for ln in Path(args.phrases).read_text().splitlines() if ln.strip()
    ]
    confusion = (_load_confusion(args.confusion) if args.confusion
                 else default_confusion())
    typist = TypistModel(confusion=confusion)
    result = simulate_typist(
        phrases, typist, dictionary, seed=args.seed,
        spatial=_spatial_model(args), cfg=_predictor_config(args),
    )
    m = result.metrics
    rows = [{
        "wpm": round(m.wpm, 3), "uer": round(m.uer, 4), "ter": round(m.ter, 4),
        "auto_complete_rate": round(m.auto_complete_rate, 4),
        "word_recovery_rate": round(m.word_recovery_rate, 4),
        "phrases": m.phrase_count, "gestures": m.gesture_count,
    }]
    _emit(args, rows, list(rows[0]))
    return 0


def cmd_sweep(args) -> int:
    cfg = _seg_config(args)
    thresholds = [float(t) for t in args.thresholds.split(",")]
    traces = []
    for path in sorted(Path(args.traces).glob("*.csv")):
        label_path = path.with_suffix(".labels")
        if not label_path.exists():
            raise RejectedInput(f"missing label file {label_path}")
        labels = tuple(
            GESTURE_BY_NAME[ln.strip()]
            for ln in label_path.read_text().splitlines()
            if ln.strip()
        )
        traces.append(LabelledTrace(samples=tuple(load_trace(path)), labels=labels))
    templates = load_templates(args.templates) if args.templates else None
    rows = sweep_threshold(traces, thresholds, templates, cfg)
    _emit(
        args,
        [
            {"threshold": r.threshold, "accuracy": round(r.accuracy, 4),
             "mean_lasting_ms": round(r.mean_lasting_ms, 1),
             "detected": r.detected, "expected": r.expected,
             "no_detection": r.no_detection}
            for r in rows
        ],
        ["threshold", "accuracy", "mean_lasting_ms", "detected", "expected",
         "no_detection"],
    )
    return 0


def cmd_synth(args) -> int:
    cfg = _seg_config(args)
    entries = []
    for lineno, line in enumerate(Path(args.script).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        name = parts[0]
        if name not in GESTURE_BY_NAME:
            raise RejectedInput(f"{args.script}:{lineno}: unknown gesture {name!r}")
        gap = float(parts[1]) if len(parts) > 1 else 1000.0
        entries.append((GESTURE_BY_NAME[name], gap))
    script = GestureScript(
        entries=tuple(entries), amplitude=args.amplitude,
        stroke_ms=args.stroke_ms, noise_sigma=args.noise_sigma, seed=args.seed,
    )
    samples = synth_trace(script, cfg)
    save_trace(args.output, samples)
    print(f"{len(samples)} samples written to {args.output}")
    return 0


def cmd_serve(args) -> int:
    from .gateway import create_app, serve_tcp

    if args.tcp:
        import asyncio

        asyncio.run(serve_tcp(host=args.host, port=args.port,
                              assets_dir=args.assets))
        return 0
    import uvicorn

    app = create_app(assets_dir=args.assets, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gyrotype", description="gesture-to-text decoding pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--config", help="key/value config file overriding defaults")

    p = sub.add_parser("segment", help="segment a trace CSV into gesture units")
    p.add_argument("trace")
    p.add_argument("--threshold", type=float)
    common(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("recognize", help="segment and classify a trace")
    p.add_argument("trace")
    p.add_argument("--templates", required=True)
    p.add_argument("--noise-model")
    p.add_argument("--threshold", type=float)
    common(p)
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("train-noise", help="train the noise rejection model")
    p.add_argument("pos_dir", help="directory of gesture trace CSVs")
    p.add_argument("neg_dir", help="directory of noise trace CSVs")
    p.add_argument("-o", "--output", default="noise_model.txt")
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_train_noise)

    p = sub.add_parser("decode", help="decode a gesture-name stream to text")
    p.add_argument("--gestures", required=True, help="one gesture name per line")
    p.add_argument("--dict", required=True)
    p.add_argument("--layout")
    common(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="simulated typist over a phrase set")
    p.add_argument("--phrases", required=True)
    p.add_argument("--dict", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--confusion", help="7x7 comma-separated confusion matrix file")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="peak-threshold sweep over labelled traces")
    p.add_argument("--traces", required=True,
                   help="directory of trace CSVs with .labels sidecars")
    p.add_argument("--thresholds", default="10,20,30,40,50")
    p.add_argument("--templates")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="synthesize a gesture trace CSV")
    p.add_argument("--script", required=True,
                   help="lines: <GestureName> [gap_ms]")
    p.add_argument("-o", "--output", default="trace.csv")
    p.add_argument("--amplitude", type=float, default=60.0)
    p.add_argument("--stroke-ms", type=float, default=300.0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the local streaming gateway")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--assets", required=True)
    p.add_argument("--static", help="directory with the typing UI build")
    p.add_argument("--tcp", action="store_true",
                   help="serve the newline-JSON TCP protocol instead of HTTP")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RejectedInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
