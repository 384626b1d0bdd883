#!/usr/bin/env python3
"""Build the runnable asset directory: dictionary, layout, phrase set,
gesture templates, and a noise model trained on synthetic walking traces.

Usage: python3 scripts/gen_assets.py [assets_dir]
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from gyrotype.eval_harness import GestureScript, make_template_set, synth_trace
from gyrotype.recognizer import (
    GestureClass,
    save_noise_model,
    save_templates,
    train_noise_classifier,
)
from gyrotype.signal_core import ImuSample, SegmentationConfig, segment_trace
from gyrotype.text_decoder import default_layout, save_layout

# Rank-ordered common-word list; counts follow a Zipf curve below.
WORDS = """
the of and to a in is it you that he was for on are as with his they at be
this have from or one had by word but not what all were we when your can
said there use an each which she do how their if will up other about out
many then them these so some her would make like him into time has look two
more write go see number no way could people my than first water been call
who oil its now find long down day did get come made may part over new
sound take only little work know place year live me back give most very
after thing our just name good sentence man think say great where help
through much before line right too mean old any same tell boy follow came
want show also around form three small set put end does another well large
must big even such because turn here why ask went men read need land
different home us move try kind hand picture again change off play spell
air away animal house point page letter mother answer found study still
learn should world high every near add food between own below country
plant last school father keep tree never start city earth eye light
thought head under story saw left dont few while along might close
something seem next hard open example begin life always those both paper
together got group often run important until children side feet car mile
night walk white sea began grow took river four carry state once book hear
stop without second later miss idea enough eat face watch far really
almost let above girl sometimes mountain cut young talk soon list song
being leave family hello world friend happy quick brown fox jumps lazy dog
time flies when you are having fun please thank welcome morning evening
coffee music garden window summer winter spring autumn bright simple
""".split()


def build_dictionary(path: Path) -> None:
    seen = []
    for w in WORDS:
        if w not in seen:
            seen.append(w)
    lines = []
    for rank, w in enumerate(seen, start=1):
        count = max(1, round(1_000_000 / rank))
        lines.append(f"{w}\t{count}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"dictionary: {len(seen)} words -> {path}")


PHRASES = [
    "the quick brown fox",
    "time flies when you are having fun",
    "hello world",
    "a good day to write",
    "we can see the light",
    "my mother said hello",
    "the children play near the river",
    "a little work every day",
    "think before you talk",
    "the sea is far away",
    "open the book and read",
    "she can write a letter",
    "he took the long way home",
    "water runs down the mountain",
    "the young girl can sing a song",
    "keep your eyes on the road",
    "we walk to school together",
    "the sun is high and bright",
    "give me a hand with this",
    "a friend in need",
    "the answer is in the book",
    "put the paper on the table",
    "they live in a white house",
    "start at the top of the page",
    "the night air is cold",
    "every story has an end",
    "we need more time to think",
    "the old man told a story",
    "turn left at the light",
    "food and water for the trip",
    "the world is a big place",
    "a picture is worth many words",
    "listen and learn something new",
    "the car will not start",
    "close the window before night",
    "good morning my friend",
    "the garden is full of life",
    "music makes the work light",
    "spring comes after winter",
    "a simple plan works best",
]


def build_phrases(path: Path, dict_path: Path) -> None:
    from gyrotype.text_decoder import (
        Dictionary,
        PredictorConfig,
        SpatialModel,
        top_candidates,
    )

    entries = {}
    for ln in dict_path.read_text().splitlines():
        if ln:
            w, c = ln.split("\t")
            entries[w] = int(c)
    phrase_words = sorted({w for p in PHRASES for w in p.split()})
    missing = [w for w in phrase_words if w not in entries]
    for w in missing:
        entries[w] = 500
    if missing:
        print(f"added {len(missing)} phrase words to dictionary: {missing}")

    # a phrase set is only typable if each word is top-3 for its exact block
    # sequence; bump counts until that holds
    layout = default_layout()
    spatial = SpatialModel()
    cfg = PredictorConfig()
    for _ in range(20):
        d = Dictionary(dict(entries))
        bumped = False
        for w in phrase_words:
            cands = top_candidates(layout.blocks_of(w), d, layout, spatial, cfg)
            if w not in [c.word for c in cands]:
                entries[w] = max(entries[w] * 4, entries[cands[-1].word] + 1)
                bumped = True
        if not bumped:
            break
    else:
        raise RuntimeError("phrase words not top-3 reachable after 20 passes")

    dict_path.write_text(
        "\n".join(f"{w}\t{c}" for w, c in entries.items()) + "\n", encoding="utf-8"
    )
    path.write_text("\n".join(PHRASES) + "\n", encoding="utf-8")
    print(f"phrases: {len(PHRASES)} -> {path}")


def build_noise_model(path: Path, cfg: SegmentationConfig) -> None:
    # gesture units: clean synthetic gestures; noise units: walking-like
    # periodic multi-peak wobble
    gesture_units = []
    for g in (GestureClass.SINGLE_LEFT_TAP, GestureClass.SINGLE_RIGHT_TAP,
              GestureClass.DOUBLE_LEFT_TAP, GestureClass.SINGLE_DOWN_TAP,
              GestureClass.LEFT_SLIDE, GestureClass.RIGHT_SLIDE,
              GestureClass.DOUBLE_RIGHT_TAP):
        for amp in (45.0, 60.0, 75.0):
            script = GestureScript(entries=((g, 1000.0),), amplitude=amp)
            gesture_units.extend(segment_trace(synth_trace(script, cfg), cfg))

    noise_units = []
    rng = np.random.default_rng(7)
    period = 1000.0 / cfg.sample_rate_hz
    for trial in range(21):
        n_steps = int(rng.integers(5, 9))
        step_ms = float(rng.uniform(260, 420))
        n = round(n_steps * step_ms / period)
        t = np.arange(n) * period
        amp = float(rng.uniform(40, 70))
        curve = np.abs(amp * np.sin(np.pi * t / step_ms))
        samples = [ImuSample(t_ms=round(i * period + 1000), gx=float(c), gy=0.0,
                             gz=0.0)
                   for i, c in enumerate(curve)]
        lead = [ImuSample(t_ms=round(i * period), gx=0.0, gy=0.0, gz=0.0)
                for i in range(round(1000 / period))]
        tail_start = samples[-1].t_ms + round(period)
        tail = [ImuSample(t_ms=tail_start + round(i * period), gx=0.0, gy=0.0,
                          gz=0.0) for i in range(round(1000 / period))]
        noise_units.extend(segment_trace(lead + samples + tail, cfg))

    model = train_noise_classifier(gesture_units, noise_units, cfg=cfg, seed=0)
    save_noise_model(path, model)
    print(f"noise model ({len(gesture_units)} gesture / {len(noise_units)} noise "
          f"units) -> {path}")


def main() -> None:
    assets = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parents[1] / "assets"
    )
    assets.mkdir(parents=True, exist_ok=True)
    cfg = SegmentationConfig()

    build_dictionary(assets / "dictionary.txt")
    build_phrases(assets / "phrases.txt", assets / "dictionary.txt")
    save_layout(assets / "layout.txt", default_layout())
    print(f"layout -> {assets / 'layout.txt'}")

    templates = make_template_set(cfg)
    save_templates(assets / "templates", templates)
    print(f"templates: {len(templates)} -> {assets / 'templates'}")

    build_noise_model(assets / "noise_model.txt", cfg)


if __name__ == "__main__":
    main()
