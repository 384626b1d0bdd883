"""Ambiguous 2x2 keyboard decoding with Bayesian auto-complete/auto-correct.

A word W is scored against the observed block sequence S as
P(W) * prod_i P(S_i | W_i) * alpha^(m - n), where the spatial factors come
from the grid relation between observed and intended blocks and alpha
penalizes auto-completed letters. Scores are accumulated in log space; the
linear-scale value is exposed on candidates.
"""

from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import RejectedInput
from .recognizer import GestureClass, TAP_GESTURES


class Block(Enum):
    """Grid positions of the four keyboard blocks."""

    TL = (0, 0)
    TR = (0, 1)
    BL = (1, 0)
    BR = (1, 1)

    @property
    def row(self) -> int:
        return self.value[0]

    @property
    def col(self) -> int:
        return self.value[1]


BLOCKS = (Block.TL, Block.TR, Block.BL, Block.BR)
_BLOCK_INDEX = {b: i for i, b in enumerate(BLOCKS)}


@dataclass(frozen=True, eq=False)
class KeyboardLayout:
    blocks: dict  # Block -> frozenset of letters
    gesture_to_block: dict  # tap GestureClass -> Block
    letter_to_block: dict = field(default=None)

    def __post_init__(self):
        letters = [l for b in BLOCKS for l in sorted(self.blocks[b])]
        if sorted(letters) != [chr(c) for c in range(ord("a"), ord("z") + 1)]:
            raise RejectedInput("blocks must partition a..z exactly")
        if set(self.gesture_to_block) != set(TAP_GESTURES) or set(
            self.gesture_to_block.values()
        ) != set(BLOCKS):
            raise RejectedInput("gesture map must be a bijection taps <-> blocks")
        mapping = {l: b for b in BLOCKS for l in self.blocks[b]}
        object.__setattr__(self, "letter_to_block", mapping)

    def blocks_of(self, word: str) -> tuple[Block, ...]:
        return tuple(self.letter_to_block[c] for c in word)


def default_layout() -> KeyboardLayout:
    """Alphabetical 2x2 partition: TL=a..g, TR=h..m, BL=n..s, BR=t..z."""
    return KeyboardLayout(
        blocks={
            Block.TL: frozenset("abcdefg"),
            Block.TR: frozenset("hijklm"),
            Block.BL: frozenset("nopqrs"),
            Block.BR: frozenset("tuvwxyz"),
        },
        gesture_to_block={
            GestureClass.SINGLE_LEFT_TAP: Block.TL,
            GestureClass.SINGLE_RIGHT_TAP: Block.TR,
            GestureClass.DOUBLE_LEFT_TAP: Block.BL,
            GestureClass.DOUBLE_RIGHT_TAP: Block.BR,
        },
    )


@dataclass(frozen=True)
class SpatialModel:
    """P(observed block | intended block) by grid relation on the 2x2 keyboard."""

    p_same: float = 0.94
    p_adjacent: float = 0.025
    p_diagonal: float = 0.01

    def __post_init__(self):
        for p in (self.p_same, self.p_adjacent, self.p_diagonal):
            if not 0 < p < 1:
                raise RejectedInput("spatial probabilities must lie in (0, 1)")
        total = self.p_same + 2 * self.p_adjacent + self.p_diagonal
        if abs(total - 1.0) > 4 * math.ulp(1.0):
            raise RejectedInput(f"spatial row must sum to 1, got {total!r}")


def indicator_spatial_model() -> SpatialModel:
    """Near-indicator spatial model: the no-auto-correct baseline."""
    eps = 1e-12
    return SpatialModel(p_same=1.0 - 4 * eps, p_adjacent=eps, p_diagonal=2 * eps)


def spatial_prob(observed: Block, intended: Block, model: SpatialModel) -> float:
    if observed is intended:
        return model.p_same
    if observed.row == intended.row or observed.col == intended.col:
        return model.p_adjacent
    return model.p_diagonal


MAX_WORD_LEN = 28
_WORD_RE = re.compile(r"^[a-z]{1,28}$")


@dataclass(eq=False)
class Dictionary:
    """Unigram language model: word -> frequency count."""

    entries: dict
    total_count: int = 0
    _by_length: dict = field(default=None, repr=False)

    def __post_init__(self):
        for w, c in self.entries.items():
            if not _WORD_RE.match(w):
                raise RejectedInput(f"bad dictionary word {w!r}")
            if c <= 0:
                raise RejectedInput(f"non-positive count for {w!r}")
        self.total_count = sum(self.entries.values())
        by_len: dict[int, list[str]] = {}
        for w in self.entries:
            by_len.setdefault(len(w), []).append(w)
        self._by_length = by_len

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def prob(self, word: str) -> float:
        return self.entries[word] / self.total_count

    def log_prob(self, word: str) -> float:
        return math.log(self.entries[word]) - math.log(self.total_count)

    def words_with_length(self, lo: int, hi: int) -> Iterable[str]:
        for length in range(lo, hi + 1):
            yield from self._by_length.get(length, ())

    @classmethod
    def from_file(cls, path: str | Path) -> "Dictionary":
        """Load `word<TAB>count` lines; malformed lines fail with their number."""
        entries: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise RejectedInput(f"{path}:{lineno}: expected word<TAB>count")
                word, count = parts
                if not _WORD_RE.match(word):
                    raise RejectedInput(f"{path}:{lineno}: bad word {word!r}")
                try:
                    c = int(count)
                except ValueError:
                    raise RejectedInput(f"{path}:{lineno}: bad count {count!r}")
                if c <= 0:
                    raise RejectedInput(f"{path}:{lineno}: count must be positive")
                entries[word] = entries.get(word, 0) + c
        if not entries:
            raise RejectedInput(f"{path}: empty dictionary")
        return cls(entries)

    def save(self, path: str | Path) -> None:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            for w, c in self.entries.items():
                fh.write(f"{w}\t{c}\n")


@dataclass(frozen=True)
class PredictorConfig:
    alpha: float = 0.65
    max_extra_letters: int = 8
    top_k: int = 3

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise RejectedInput("alpha must be in (0, 1]")
        if self.max_extra_letters < 0 or self.top_k < 1:
            raise RejectedInput("bad predictor config")


@dataclass(frozen=True)
class Candidate:
    word: str
    score: float  # linear-scale unnormalized posterior
    log_score: float


def log_word_score(
    word: str,
    pending: Sequence[Block],
    dictionary: Dictionary,
    layout: KeyboardLayout,
    spatial: SpatialModel,
    cfg: PredictorConfig,
) -> float:
    n = len(pending)
    m = len(word)
    if n < 1:
        raise RejectedInput("pending sequence is empty")
    if not n <= m <= n + cfg.max_extra_letters:
        raise RejectedInput(
            f"word {word!r} outside length window [{n}, {n + cfg.max_extra_letters}]"
        )
    if word not in dictionary:
        raise RejectedInput(f"word {word!r} not in dictionary")
    score = dictionary.log_prob(word)
    for obs, letter in zip(pending, word):
        score += math.log(spatial_prob(obs, layout.letter_to_block[letter], spatial))
    score += (m - n) * math.log(cfg.alpha)
    return score


def word_score(word, pending, dictionary, layout, spatial, cfg) -> float:
    """Linear-scale posterior score (Bayesian LM x spatial x length penalty)."""
    return math.exp(log_word_score(word, pending, dictionary, layout, spatial, cfg))


class _Scorer:
    """Vectorized scorer: per-length block-code arrays built once per model."""

    def __init__(self, dictionary: Dictionary, layout: KeyboardLayout):
        self.tables = {}
        log_total = math.log(dictionary.total_count)
        for length, words in dictionary._by_length.items():
            codes = np.array(
                [[_BLOCK_INDEX[layout.letter_to_block[c]] for c in w] for w in words],
                dtype=np.int8,
            ).reshape(len(words), length)
            logp = np.array(
                [math.log(dictionary.entries[w]) for w in words]
            ) - log_total
            self.tables[length] = (words, codes, logp)


_scorer_cache: dict[tuple[int, int], tuple] = {}


def _get_scorer(dictionary: Dictionary, layout: KeyboardLayout) -> _Scorer:
    # keyed by identity; cached references keep the ids from being recycled
    key = (id(dictionary), id(layout))
    hit = _scorer_cache.get(key)
    if hit is not None and hit[0] is dictionary and hit[1] is layout:
        return hit[2]
    if len(_scorer_cache) > 16:
        _scorer_cache.clear()
    scorer = _Scorer(dictionary, layout)
    _scorer_cache[key] = (dictionary, layout, scorer)
    return scorer


def top_candidates(
    pending: Sequence[Block],
    dictionary: Dictionary,
    layout: KeyboardLayout,
    spatial: SpatialModel,
    cfg: PredictorConfig,
) -> list[Candidate]:
    """Top-k dictionary words for the pending block sequence.

    Ordered by score descending, ties lexicographically ascending; empty when
    no word's length falls in [n, n + max_extra_letters].
    """
    n = len(pending)
    if n == 0:
        return []
    scorer = _get_scorer(dictionary, layout)
    log_sp = np.log(
        np.array(
            [
                [spatial_prob(obs, intended, spatial) for intended in BLOCKS]
                for obs in BLOCKS
            ]
        )
    )
    obs_idx = np.array([_BLOCK_INDEX[b] for b in pending])
    log_alpha = math.log(cfg.alpha)
    pool: list[tuple[float, str]] = []
    for length in range(n, n + cfg.max_extra_letters + 1):
        table = scorer.tables.get(length)
        if table is None:
            continue
        words, codes, logp = table
        scores = logp + log_sp[obs_idx, codes[:, :n]].sum(axis=1)
        scores = scores + (length - n) * log_alpha
        pool.extend(zip(scores.tolist(), words))
    best = heapq.nsmallest(cfg.top_k, pool, key=lambda t: (-t[0], t[1]))
    return [Candidate(word=w, score=math.exp(s), log_score=s) for s, w in best]


# ---------------------------------------------------------------------------
# Decoder state machine


@dataclass(frozen=True)
class DecoderEvent:
    kind: str  # word_committed | phrase_committed | pending_changed |
    #            selection_changed | word_cancelled | word_deleted | noop
    payload: dict


@dataclass(frozen=True)
class DecoderState:
    committed_words: tuple[str, ...] = ()
    pending: tuple[Block, ...] = ()
    candidates: tuple[Candidate, ...] = ()
    selection: Optional[int] = None
    event_log: tuple[DecoderEvent, ...] = ()

    @property
    def text(self) -> str:
        return " ".join(self.committed_words)


class Decoder:
    """Pure gesture -> state transitions over a fixed language/spatial model."""

    def __init__(
        self,
        dictionary: Dictionary,
        layout: KeyboardLayout | None = None,
        spatial: SpatialModel | None = None,
        cfg: PredictorConfig | None = None,
    ):
        self.dictionary = dictionary
        self.layout = layout or default_layout()
        self.spatial = spatial or SpatialModel()
        self.cfg = cfg or PredictorConfig()

    def initial_state(self) -> DecoderState:
        return DecoderState()

    def _candidates(self, pending: tuple[Block, ...]) -> tuple[Candidate, ...]:
        if not pending:
            return ()
        return tuple(
            top_candidates(pending, self.dictionary, self.layout, self.spatial, self.cfg)
        )

    def apply_gesture(
        self, state: DecoderState, g: GestureClass
    ) -> tuple[DecoderState, list[DecoderEvent]]:
        """Total transition function; every gesture is valid in every state."""
        if g is GestureClass.NOISE:
            raise RejectedInput("noise gestures must be filtered before decoding")
        events: list[DecoderEvent] = []
        committed = state.committed_words
        pending = state.pending
        selection = state.selection

        if g in self.layout.gesture_to_block:
            if selection is not None:
                word = state.candidates[selection].word
                committed = committed + (word,)
                events.append(DecoderEvent("word_committed", {"word": word}))
                pending = ()
                selection = None
            pending = pending + (self.layout.gesture_to_block[g],)
            candidates = self._candidates(pending)
            events.append(
                DecoderEvent("pending_changed", {"pending": [b.name for b in pending]})
            )
        elif g is GestureClass.SINGLE_DOWN_TAP:
            candidates = state.candidates
            if candidates:
                selection = 0 if selection is None else (selection + 1) % len(candidates)
                events.append(DecoderEvent("selection_changed", {"selection": selection}))
            else:
                events.append(DecoderEvent("noop", {}))
        elif g is GestureClass.LEFT_SLIDE:
            if selection is not None:
                word = state.candidates[selection].word
                pending = ()
                candidates = ()
                selection = None
                events.append(DecoderEvent("word_cancelled", {"word": word}))
            elif pending:
                pending = pending[:-1]
                candidates = self._candidates(pending)
                events.append(
                    DecoderEvent(
                        "pending_changed", {"pending": [b.name for b in pending]}
                    )
                )
            elif committed:
                word = committed[-1]
                committed = committed[:-1]
                candidates = state.candidates
                events.append(DecoderEvent("word_deleted", {"word": word}))
            else:
                candidates = state.candidates
                events.append(DecoderEvent("noop", {}))
        elif g is GestureClass.RIGHT_SLIDE:
            if selection is not None:
                word = state.candidates[selection].word
                committed = committed + (word,)
                events.append(DecoderEvent("word_committed", {"word": word}))
            # un-selected pending blocks are discarded at phrase end
            phrase = " ".join(committed)
            events.append(DecoderEvent("phrase_committed", {"phrase": phrase}))
            committed = ()
            pending = ()
            candidates = ()
            selection = None
        else:  # pragma: no cover - exhaustive over GestureClass
            raise RejectedInput(f"unhandled gesture {g}")

        new_state = DecoderState(
            committed_words=committed,
            pending=pending,
            candidates=candidates,
            selection=selection,
            event_log=state.event_log + tuple(events),
        )
        return new_state, events


def decode_gesture_stream(
    gestures: Iterable[GestureClass],
    dictionary: Dictionary,
    layout: KeyboardLayout | None = None,
    spatial: SpatialModel | None = None,
    cfg: PredictorConfig | None = None,
) -> tuple[str, DecoderState]:
    """Fold apply_gesture from the empty state; transcript joins committed phrases."""
    decoder = Decoder(dictionary, layout, spatial, cfg)
    state = decoder.initial_state()
    for g in gestures:
        state, _ = decoder.apply_gesture(state, g)
    phrases = [
        e.payload["phrase"]
        for e in state.event_log
        if e.kind == "phrase_committed" and e.payload["phrase"]
    ]
    return "\n".join(phrases), state


# ---------------------------------------------------------------------------
# Layout file format: 4 lines `position:letters` then 4 lines `gesture:position`


def save_layout(path: str | Path, layout: KeyboardLayout) -> None:
    lines = [f"{b.name}:{''.join(sorted(layout.blocks[b]))}" for b in BLOCKS]
    lines += [f"{g.value}:{b.name}" for g, b in layout.gesture_to_block.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_layout(path: str | Path) -> KeyboardLayout:
    blocks: dict[Block, frozenset] = {}
    gesture_map: dict[GestureClass, Block] = {}
    by_value = {g.value: g for g in GestureClass}
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = line.strip()
        if not line:
            continue
        key, _, val = line.partition(":")
        if key in Block.__members__:
            blocks[Block[key]] = frozenset(val)
        elif key in by_value:
            if val not in Block.__members__:
                raise RejectedInput(f"{path}:{lineno}: unknown block {val!r}")
            gesture_map[by_value[key]] = Block[val]
        else:
            raise RejectedInput(f"{path}:{lineno}: unknown key {key!r}")
    return KeyboardLayout(blocks=blocks, gesture_to_block=gesture_map)
