"""Local streaming service: samples or gesture events in, ordered decoder
events out.

One session = one ordered ingestion queue driving segmentation -> noise
filter -> classification -> decoding. Every event carries a strictly
increasing ``seq``; ``decoder_state`` events carry a full snapshot so clients
never render stale state. Transport is JSON over a local WebSocket
(``/session``) or newline-delimited JSON over TCP for headless use.
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional

# WebSocket must be importable at module scope: with postponed annotation
# evaluation, FastAPI resolves the handler's `ws: WebSocket` hint against
# this module's globals.
from fastapi import WebSocket

from . import NotReady, RejectedInput
from .recognizer import (
    GestureClass,
    NoiseClassifier,
    TemplateSet,
    classify,
    is_noise,
    load_noise_model,
    load_templates,
)
from .signal_core import ImuSample, SegmentationConfig, Segmenter
from .text_decoder import (
    Decoder,
    DecoderState,
    Dictionary,
    KeyboardLayout,
    PredictorConfig,
    SpatialModel,
    default_layout,
    load_layout,
)

RAW_SAMPLES = "raw-samples"
GESTURE_EVENTS = "gesture-events"


@dataclass
class SessionConfig:
    dictionary: Dictionary
    mode: str = GESTURE_EVENTS
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    layout: KeyboardLayout = field(default_factory=default_layout)
    spatial: SpatialModel = field(default_factory=SpatialModel)
    templates: Optional[TemplateSet] = None
    noise_model: Optional[NoiseClassifier] = None

    def __post_init__(self):
        if self.mode not in (RAW_SAMPLES, GESTURE_EVENTS):
            raise RejectedInput(f"unknown mode {self.mode!r}")
        if self.mode == RAW_SAMPLES:
            if self.templates is None or not len(self.templates):
                raise RejectedInput("raw-samples mode: templates required")
            if self.noise_model is None:
                raise RejectedInput("raw-samples mode: noise model required")

    @classmethod
    def from_assets(cls, assets_dir: str | Path, mode: str = GESTURE_EVENTS,
                    **overrides) -> "SessionConfig":
        """Load dictionary/layout/templates/noise model from an asset directory."""
        assets = Path(assets_dir)
        dict_path = assets / "dictionary.txt"
        if not dict_path.exists():
            raise RejectedInput(f"missing asset {dict_path}")
        kwargs = dict(
            dictionary=Dictionary.from_file(dict_path),
            mode=mode,
        )
        layout_path = assets / "layout.txt"
        if layout_path.exists():
            kwargs["layout"] = load_layout(layout_path)
        tpl_dir = assets / "templates"
        if tpl_dir.is_dir():
            kwargs["templates"] = load_templates(tpl_dir)
        noise_path = assets / "noise_model.txt"
        if noise_path.exists():
            kwargs["noise_model"] = load_noise_model(noise_path)
        kwargs.update(overrides)
        return cls(**kwargs)


def _snapshot(state: DecoderState) -> dict:
    return {
        "text": state.text,
        "committed_words": list(state.committed_words),
        "pending": [b.name for b in state.pending],
        "candidates": [
            {"word": c.word, "score": c.score} for c in state.candidates
        ],
        "selection": state.selection,
    }


def snapshot_json(snapshot: dict) -> str:
    """Canonical serialized form used for byte-identical replay comparison."""
    return json.dumps(snapshot, sort_keys=True, separators=(",", ":"))


class Session:
    """One live decoding session: ordered events, isolated state."""

    def __init__(self, cfg: SessionConfig):
        self.cfg = cfg
        self.decoder = Decoder(cfg.dictionary, cfg.layout, cfg.spatial, cfg.predictor)
        self.state = self.decoder.initial_state()
        self.segmenter = Segmenter(cfg.segmentation)
        self.seq = 0
        self.events: list[dict] = []
        self._subscribers: list[Callable[[dict], None]] = []
        self._emit("decoder_state", cause=None, state=_snapshot(self.state))

    # -- event plumbing -----------------------------------------------------

    def _emit(self, kind: str, **payload) -> dict:
        event = {"seq": self.seq, "event": kind, **payload}
        self.seq += 1
        self.events.append(event)
        for cb in self._subscribers:
            cb(event)
        return event

    def subscribe(self, callback: Callable[[dict], None]) -> None:
        """Attach a subscriber; it receives the current snapshot immediately."""
        callback(
            {"seq": self.seq - 1, "event": "decoder_state", "cause": None,
             "state": _snapshot(self.state), "replayed": True}
        )
        self._subscribers.append(callback)

    def unsubscribe(self, callback: Callable[[dict], None]) -> None:
        if callback in self._subscribers:
            self._subscribers.remove(callback)

    def snapshot(self) -> dict:
        return _snapshot(self.state)

    # -- ingestion ----------------------------------------------------------

    def push_sample(self, s: ImuSample) -> list[dict]:
        if self.cfg.mode != RAW_SAMPLES:
            return [self._emit("error", message="session is not in raw-samples mode")]
        batch: list[dict] = []
        was_in_unit = self.segmenter.in_unit
        try:
            unit = self.segmenter.feed(s)
        except RejectedInput as exc:
            return [self._emit("error", message=str(exc))]
        batch.append(self._emit("sample_ack", t_ms=s.t_ms))
        if not was_in_unit and self.segmenter.in_unit:
            batch.append(self._emit("segment_started", t_ms=s.t_ms))
        if unit is not None:
            batch.extend(self._handle_unit(unit))
        return batch

    def flush(self) -> list[dict]:
        """End-of-stream: finalize any open unit (raw-samples mode)."""
        unit = self.segmenter.flush()
        if unit is None:
            return []
        return self._handle_unit(unit)

    def _handle_unit(self, unit) -> list[dict]:
        batch = []
        if is_noise(unit, self.cfg.noise_model, self.cfg.segmentation):
            batch.append(
                self._emit("noise_rejected", start_ms=unit.start_ms, end_ms=unit.end_ms)
            )
            return batch
        label, distance = classify(unit, self.cfg.templates)
        batch.append(
            self._emit(
                "gesture_recognized",
                **{"class": label.value, "distance": distance,
                   "start_ms": unit.start_ms, "end_ms": unit.end_ms},
            )
        )
        batch.extend(self._apply(label))
        return batch

    def push_gesture(self, g: GestureClass) -> list[dict]:
        if self.cfg.mode != GESTURE_EVENTS:
            return [self._emit("error", message="session is not in gesture-events mode")]
        if g is GestureClass.NOISE:
            return [self._emit("error", message="Noise is not an input gesture")]
        return self._apply(g)

    def _apply(self, g: GestureClass) -> list[dict]:
        self.state, decoder_events = self.decoder.apply_gesture(self.state, g)
        batch = []
        for ev in decoder_events:
            if ev.kind == "word_committed":
                batch.append(self._emit("word_committed", word=ev.payload["word"]))
            elif ev.kind == "phrase_committed":
                batch.append(self._emit("phrase_committed", phrase=ev.payload["phrase"]))
        batch.append(
            self._emit("decoder_state", cause=g.value, state=_snapshot(self.state))
        )
        return batch

    def reset(self) -> list[dict]:
        self.state = self.decoder.initial_state()
        self.segmenter = Segmenter(self.cfg.segmentation)
        return [self._emit("decoder_state", cause=None, state=_snapshot(self.state))]

    # -- replay ---------------------------------------------------------------

    def replay(self, event_log: Iterable) -> dict:
        """Re-derive the final decoder snapshot from a session event log.

        Accepts parsed event dicts or JSON lines. Seq gaps and malformed lines
        are rejected with their position.
        """
        by_value = {g.value: g for g in GestureClass}
        state = self.decoder.initial_state()
        expected_seq = None
        last_snapshot = _snapshot(state)
        for lineno, raw in enumerate(event_log, start=1):
            if isinstance(raw, (str, bytes)):
                if isinstance(raw, bytes):
                    raw = raw.decode("utf-8")
                if not raw.strip():
                    continue
                try:
                    event = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise RejectedInput(f"malformed log line {lineno}: {exc}") from exc
            else:
                event = raw
            if "seq" not in event or "event" not in event:
                raise RejectedInput(f"malformed log line {lineno}: missing seq/event")
            seq = event["seq"]
            if expected_seq is not None and seq != expected_seq:
                raise RejectedInput(
                    f"seq gap at line {lineno}: expected {expected_seq}, got {seq}"
                )
            expected_seq = seq + 1
            if event["event"] == "decoder_state":
                cause = event.get("cause")
                if cause is not None:
                    state, _ = self.decoder.apply_gesture(state, by_value[cause])
                last_snapshot = _snapshot(state)
        return last_snapshot

    def event_log_lines(self) -> list[str]:
        return [json.dumps(e, sort_keys=True, separators=(",", ":")) for e in self.events]


# ---------------------------------------------------------------------------
# Shared command processing for both transports


class CommandProcessor:
    """Interprets client command dicts and routes them to a session."""

    def __init__(self, assets_dir: Optional[str | Path] = None,
                 config_factory: Optional[Callable[[str], SessionConfig]] = None):
        self.assets_dir = assets_dir
        self.config_factory = config_factory
        self.session: Optional[Session] = None
        self.closed = False

    def _make_config(self, mode: str) -> SessionConfig:
        if self.config_factory is not None:
            return self.config_factory(mode)
        if self.assets_dir is None:
            raise RejectedInput("no assets directory configured")
        return SessionConfig.from_assets(self.assets_dir, mode=mode)

    def handle(self, command: dict) -> list[dict]:
        cmd = command.get("cmd")
        if cmd == "open":
            mode = command.get("mode", GESTURE_EVENTS)
            try:
                cfg = self._make_config(mode)
            except (RejectedInput, NotReady) as exc:
                return [{"seq": -1, "event": "error", "message": str(exc)}]
            self.session = Session(cfg)
            return list(self.session.events)
        if self.session is None:
            return [{"seq": -1, "event": "error", "message": "no open session"}]
        if cmd == "sample":
            try:
                sample = ImuSample(
                    t_ms=int(command["t"]),
                    gx=float(command["gx"]),
                    gy=float(command["gy"]),
                    gz=float(command["gz"]),
                )
            except (KeyError, TypeError, ValueError):
                return [self.session._emit("error", message="bad sample command")]
            return self.session.push_sample(sample)
        if cmd == "gesture":
            name = command.get("name")
            by_value = {g.value: g for g in GestureClass}
            if name not in by_value:
                return [self.session._emit("error", message=f"unknown gesture {name!r}")]
            return self.session.push_gesture(by_value[name])
        if cmd == "reset":
            return self.session.reset()
        if cmd == "close":
            self.closed = True
            return []
        return [self.session._emit("error", message=f"unknown cmd {cmd!r}")]


# ---------------------------------------------------------------------------
# Transports


def create_app(assets_dir: str | Path | None = None,
               config_factory=None, static_dir: str | Path | None = None):
    """FastAPI app exposing the /session WebSocket and optional static UI."""
    from fastapi import FastAPI, WebSocketDisconnect

    app = FastAPI(title="gyrotype gateway")

    @app.websocket("/session")
    async def session_ws(ws: WebSocket):
        await ws.accept()
        proc = CommandProcessor(assets_dir, config_factory)
        try:
            while not proc.closed:
                message = await ws.receive_text()
                try:
                    command = json.loads(message)
                except json.JSONDecodeError:
                    command = {"cmd": None}
                for event in proc.handle(command):
                    await ws.send_text(json.dumps(event))
        except WebSocketDisconnect:
            pass

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app


async def serve_tcp(host: str = "127.0.0.1", port: int = 8765,
                    assets_dir: str | Path | None = None, config_factory=None):
    """Newline-delimited JSON over TCP: same commands/events as the WebSocket."""

    async def handler(reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        proc = CommandProcessor(assets_dir, config_factory)
        try:
            while not proc.closed:
                line = await reader.readline()
                if not line:
                    break
                try:
                    command = json.loads(line)
                except json.JSONDecodeError:
                    command = {"cmd": None}
                for event in proc.handle(command):
                    writer.write((json.dumps(event) + "\n").encode("utf-8"))
                await writer.drain()
        finally:
            writer.close()

    server = await asyncio.start_server(handler, host, port)
    async with server:
        await server.serve_forever()
