import { DecoderSnapshot, GestureName, WireEvent } from "./protocol.js";
import { characterAccuracy, wpm } from "./metrics.js";

const FEED_LIMIT = 20;

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

export interface PhraseResult {
	target: string;
	actual: string;
	wpm: number;
	accuracy: number;
}

export interface PracticeState {
	targets: string[];
	index: number;
	startedAtMs: number | null;
	lastResult: PhraseResult | null;
}

export interface UiState {
	connection: ConnectionStatus;
	snapshot: DecoderSnapshot;
	snapshotSeq: number;
	lastCause: GestureName | null;
	feed: WireEvent[];
	history: string[];
	practice: PracticeState | null;
}

export const EMPTY_SNAPSHOT: DecoderSnapshot = {
	text: "",
	committed_words: [],
	pending: [],
	candidates: [],
	selection: null,
};

export function initialState(): UiState {
	return {
		connection: "disconnected",
		snapshot: EMPTY_SNAPSHOT,
		snapshotSeq: -1,
		lastCause: null,
		feed: [],
		history: [],
		practice: null,
	};
}

export function setConnection(state: UiState, connection: ConnectionStatus): UiState {
	return { ...state, connection };
}

export function startPractice(state: UiState, targets: string[], nowMs: number): UiState {
	if (targets.length === 0) throw new Error("practice needs at least one phrase");
	return {
		...state,
		practice: { targets, index: 0, startedAtMs: nowMs, lastResult: null },
	};
}

/**
 * Folds one server event into the view state. Pure: the caller owns the
 * clock, so replays of the same log always land on the same state.
 */
export function applyEvent(state: UiState, event: WireEvent, nowMs = 0): UiState {
	const feed = [...state.feed, event].slice(-FEED_LIMIT);
	switch (event.event) {
		case "decoder_state":
			// the highest-seq snapshot wins; never render a stale one
			if (event.seq < state.snapshotSeq) return { ...state, feed };
			return {
				...state,
				feed,
				snapshot: event.state,
				snapshotSeq: event.seq,
				lastCause: event.cause ?? state.lastCause,
			};
		case "phrase_committed":
			return {
				...state,
				feed,
				history: [...state.history, event.phrase],
				practice: advancePractice(state.practice, event.phrase, nowMs),
			};
		default:
			return { ...state, feed };
	}
}

function advancePractice(
	practice: PracticeState | null,
	phrase: string,
	nowMs: number,
): PracticeState | null {
	if (practice === null || practice.index >= practice.targets.length) return practice;
	const target = practice.targets[practice.index];
	const elapsed = nowMs - (practice.startedAtMs ?? nowMs);
	const lastResult: PhraseResult = {
		target,
		actual: phrase,
		wpm: elapsed > 0 ? wpm(phrase.length, elapsed) : 0,
		accuracy: characterAccuracy(target, phrase),
	};
	return { ...practice, index: practice.index + 1, startedAtMs: nowMs, lastResult };
}

export function currentTarget(state: UiState): string | null {
	const p = state.practice;
	if (p === null || p.index >= p.targets.length) return null;
	return p.targets[p.index];
}
