import { GESTURES, GestureName } from "./protocol.js";

/** Key (KeyboardEvent.code) -> gesture, one entry per gesture. */
export type KeyBindings = ReadonlyMap<string, GestureName>;

export const DEFAULT_BINDINGS: ReadonlyArray<[string, GestureName]> = [
	["ArrowLeft", "SingleLeftTap"],
	["ArrowRight", "SingleRightTap"],
	["KeyA", "DoubleLeftTap"],
	["KeyD", "DoubleRightTap"],
	["ArrowDown", "SingleDownTap"],
	["Backspace", "LeftSlide"],
	["Enter", "RightSlide"],
];

/**
 * Validates a full binding set: every gesture bound exactly once, no key
 * carrying two gestures. Throws with a message naming the offender.
 */
export function bindKeys(pairs: ReadonlyArray<[string, GestureName]>): KeyBindings {
	const byKey = new Map<string, GestureName>();
	const bound = new Set<GestureName>();
	for (const [key, gesture] of pairs) {
		if (byKey.has(key)) {
			throw new Error(`key ${key} is already bound to ${byKey.get(key)}`);
		}
		if (bound.has(gesture)) {
			throw new Error(`gesture ${gesture} is bound twice`);
		}
		byKey.set(key, gesture);
		bound.add(gesture);
	}
	for (const gesture of GESTURES) {
		if (!bound.has(gesture)) throw new Error(`gesture ${gesture} is unbound`);
	}
	return byKey;
}

export function gestureForKey(bindings: KeyBindings, key: string): GestureName | null {
	return bindings.get(key) ?? null;
}
