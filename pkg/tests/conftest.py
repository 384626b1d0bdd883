import math
import random
from pathlib import Path

import numpy as np
import pytest

from gyrotype.signal_core import ImuSample
from gyrotype.text_decoder import (
    BLOCKS,
    Dictionary,
    PredictorConfig,
    SpatialModel,
    default_layout,
    spatial_prob,
)

ASSETS = Path(__file__).resolve().parents[1] / "assets"


@pytest.fixture(scope="session")
def assets_dir() -> Path:
    assert ASSETS.is_dir(), "run scripts/gen_assets.py first"
    return ASSETS


@pytest.fixture(scope="session")
def english_dict(assets_dir) -> Dictionary:
    return Dictionary.from_file(assets_dir / "dictionary.txt")


@pytest.fixture(scope="session")
def phrases(assets_dir) -> list:
    return [
        ln.strip()
        for ln in (assets_dir / "phrases.txt").read_text().splitlines()
        if ln.strip()
    ]


def make_big_dictionary(n_words: int = 10_000, seed: int = 42) -> Dictionary:
    """Deterministic synthetic fixture dictionary with Zipf-like counts."""
    rng = random.Random(seed)
    letters = "abcdefghijklmnopqrstuvwxyz"
    words = set()
    while len(words) < n_words:
        length = rng.randint(1, 12)
        words.add("".join(rng.choice(letters) for _ in range(length)))
    entries = {
        w: max(1, round(1_000_000 / rank))
        for rank, w in enumerate(sorted(words), start=1)
    }
    return Dictionary(entries)


@pytest.fixture(scope="session")
def big_dict() -> Dictionary:
    return make_big_dictionary()


def rect_pulse_trace(
    pulse_spans,
    amplitude: float = 60.0,
    total_ms: int = 6000,
    period_ms: int = 10,
) -> list:
    """Rectangular gz pulses over a zero baseline; spans are [start, end) ms."""
    samples = []
    for t in range(0, total_ms, period_ms):
        gz = amplitude if any(a <= t < b for a, b in pulse_spans) else 0.0
        samples.append(ImuSample(t_ms=t, gx=0.0, gy=0.0, gz=gz))
    return samples


def dtw_oracle(a: np.ndarray, b: np.ndarray) -> float:
    """Exhaustive minimum over all monotone warping paths (independent of the
    DP implementation): depth-first walk of every path from (0,0) to (m-1,n-1).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = len(a), len(b)
    delta = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    best = math.inf
    stack = [(0, 0, delta[0, 0])]
    while stack:
        i, j, cost = stack.pop()
        if cost >= best:
            continue
        if i == m - 1 and j == n - 1:
            best = cost
            continue
        if i + 1 < m:
            stack.append((i + 1, j, cost + delta[i + 1, j]))
        if j + 1 < n:
            stack.append((i, j + 1, cost + delta[i, j + 1]))
        if i + 1 < m and j + 1 < n:
            stack.append((i + 1, j + 1, cost + delta[i + 1, j + 1]))
    return best


def score_oracle(word, pending, dictionary, layout, spatial, cfg):
    """Plain recomputation of the posterior log-score, kept deliberately simple."""
    p = math.log(dictionary.entries[word]) - math.log(dictionary.total_count)
    for obs, letter in zip(pending, word):
        p += math.log(spatial_prob(obs, layout.letter_to_block[letter], spatial))
    p += (len(word) - len(pending)) * math.log(cfg.alpha)
    return p


def candidates_oracle(pending, dictionary, layout, spatial, cfg):
    """Exhaustive scoring of every window word, full sort, top-k."""
    n = len(pending)
    scored = []
    for word in dictionary.entries:
        if n <= len(word) <= n + cfg.max_extra_letters:
            scored.append(
                (score_oracle(word, pending, dictionary, layout, spatial, cfg), word)
            )
    scored.sort(key=lambda t: (-t[0], t[1]))
    return scored[: cfg.top_k]
