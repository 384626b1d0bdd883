// Display-only text entry metrics. The WPM formula mirrors the evaluation
// harness (chars / 5 per minute); everything else comes from the server.

const CHARS_PER_WORD = 5;
const MS_PER_MINUTE = 60_000;

export function wpm(charCount: number, elapsedMs: number): number {
	if (charCount < 0 || elapsedMs <= 0) {
		throw new Error("wpm needs charCount >= 0 and elapsedMs > 0");
	}
	return (charCount / CHARS_PER_WORD) / (elapsedMs / MS_PER_MINUTE);
}

export function formatWpm(charCount: number, elapsedMs: number): string {
	return wpm(charCount, elapsedMs).toFixed(2);
}

/** Character accuracy of `actual` against `target`: 1 - edits/max(len). */
export function characterAccuracy(target: string, actual: string): number {
	const edits = levenshtein(target, actual);
	const denom = Math.max(target.length, actual.length);
	return denom === 0 ? 1 : 1 - edits / denom;
}

function levenshtein(a: string, b: string): number {
	let prev = Array.from({ length: b.length + 1 }, (_, j) => j);
	for (let i = 1; i <= a.length; i++) {
		const cur = [i];
		for (let j = 1; j <= b.length; j++) {
			const sub = prev[j - 1] + (a[i - 1] === b[j - 1] ? 0 : 1);
			cur.push(Math.min(prev[j] + 1, cur[j - 1] + 1, sub));
		}
		prev = cur;
	}
	return prev[b.length];
}
