// Wire protocol shared with the gateway: JSON commands in, JSON events out.
// One object per WebSocket message (or per line over TCP).

export const GESTURES = [
	"SingleLeftTap",
	"SingleRightTap",
	"DoubleLeftTap",
	"DoubleRightTap",
	"SingleDownTap",
	"LeftSlide",
	"RightSlide",
] as const;

export type GestureName = (typeof GESTURES)[number];

export type BlockName = "TL" | "TR" | "BL" | "BR";

export interface Candidate {
	word: string;
	score: number;
}

export interface DecoderSnapshot {
	text: string;
	committed_words: string[];
	pending: BlockName[];
	candidates: Candidate[];
	selection: number | null;
}

export type WireEvent =
	| { seq: number; event: "decoder_state"; cause: GestureName | null; state: DecoderSnapshot }
	| { seq: number; event: "word_committed"; word: string }
	| { seq: number; event: "phrase_committed"; phrase: string }
	| { seq: number; event: "sample_ack"; t_ms: number }
	| { seq: number; event: "segment_started"; t_ms: number }
	| { seq: number; event: "gesture_recognized"; class: GestureName; distance: number }
	| { seq: number; event: "noise_rejected"; start_ms: number; end_ms: number }
	| { seq: number; event: "error"; message: string };

export type Command =
	| { cmd: "open"; mode?: "raw-samples" | "gesture-events" }
	| { cmd: "sample"; t: number; gx: number; gy: number; gz: number }
	| { cmd: "gesture"; name: GestureName }
	| { cmd: "reset" }
	| { cmd: "close" };

export function parseEvent(raw: string): WireEvent {
	const parsed = JSON.parse(raw);
	if (typeof parsed.seq !== "number" || typeof parsed.event !== "string") {
		throw new Error(`malformed event: ${raw}`);
	}
	return parsed as WireEvent;
}

/**
 * Delivers events in strict seq order. The transport already orders messages,
 * but replays and multi-source feeds may interleave, so out-of-order arrivals
 * are buffered until the gap fills.
 */
export class OrderedEventBuffer {
	private next: number | null = null;
	private held = new Map<number, WireEvent>();

	push(event: WireEvent, deliver: (event: WireEvent) => void): void {
		if (this.next === null) this.next = event.seq;
		if (event.seq < this.next || this.held.has(event.seq)) {
			throw new Error(`duplicate seq ${event.seq}`);
		}
		this.held.set(event.seq, event);
		while (this.held.has(this.next)) {
			const ready = this.held.get(this.next)!;
			this.held.delete(this.next);
			this.next += 1;
			deliver(ready);
		}
	}

	get pendingCount(): number {
		return this.held.size;
	}
}
