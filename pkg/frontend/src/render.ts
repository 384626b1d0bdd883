import { BlockName } from "./protocol.js";
import { UiState, currentTarget } from "./state.js";
import { formatWpm } from "./metrics.js";

// Display copy of the 2x2 letter partition. Candidate ordering and text all
// come from the server; this is labelling only.
const BLOCK_LETTERS: Record<BlockName, string> = {
	TL: "abcdefg",
	TR: "hijklm",
	BL: "nopqrs",
	BR: "tuvwxyz",
};

const BLOCK_ORDER: BlockName[] = ["TL", "TR", "BL", "BR"];

function esc(text: string): string {
	return text
		.replaceAll("&", "&amp;")
		.replaceAll("<", "&lt;")
		.replaceAll(">", "&gt;")
		.replaceAll('"', "&quot;");
}

function keyboard(state: UiState): string {
	const highlighted = state.snapshot.pending.at(-1) ?? null;
	const cells = BLOCK_ORDER.map((block) => {
		const cls = block === highlighted ? "block active" : "block";
		return `<div class="${cls}" data-block="${block}">${BLOCK_LETTERS[block]}</div>`;
	});
	return `<div class="keyboard">${cells.join("")}</div>`;
}

function candidates(state: UiState): string {
	const items = state.snapshot.candidates.map((c, i) => {
		const cls = i === state.snapshot.selection ? "candidate selected" : "candidate";
		return `<li class="${cls}">${esc(c.word)}</li>`;
	});
	return `<ol class="candidates">${items.join("")}</ol>`;
}

function composition(state: UiState): string {
	const pending = state.snapshot.pending.join(" ");
	return (
		`<div class="text">${esc(state.snapshot.text)}</div>` +
		`<div class="pending">${pending}</div>`
	);
}

function history(state: UiState): string {
	const items = state.history.map((p) => `<li>${esc(p)}</li>`);
	return `<ul class="history">${items.join("")}</ul>`;
}

function practice(state: UiState): string {
	if (state.practice === null) return "";
	const target = currentTarget(state);
	const last = state.practice.lastResult;
	const readout = last
		? `<div class="readout">wpm ${last.wpm.toFixed(2)} · accuracy ${(last.accuracy * 100).toFixed(1)}%</div>`
		: "";
	const prompt = target !== null ? `<div class="target">${esc(target)}</div>` : `<div class="target done">done</div>`;
	return `<div class="practice">${prompt}${readout}</div>`;
}

/** The whole screen as one HTML string; pure so logs snapshot-test cleanly. */
export function renderScreen(state: UiState): string {
	return (
		`<main class="${state.connection}">` +
		keyboard(state) +
		candidates(state) +
		composition(state) +
		practice(state) +
		history(state) +
		`</main>`
	);
}

export { formatWpm };
