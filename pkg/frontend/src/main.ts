// Browser entry point: opens the gateway WebSocket, maps keys to gestures,
// and re-renders on every event. All logic lives in the pure modules; this
// file is wiring only.

import { Command, OrderedEventBuffer, parseEvent } from "./protocol.js";
import { DEFAULT_BINDINGS, bindKeys, gestureForKey } from "./keys.js";
import { applyEvent, initialState, setConnection, startPractice } from "./state.js";
import { renderScreen } from "./render.js";

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app container");

let state = initialState();
let bindings = bindKeys(DEFAULT_BINDINGS);
const buffer = new OrderedEventBuffer();

const ws = new WebSocket(`ws://${location.host}/session`);

function send(command: Command): void {
	ws.send(JSON.stringify(command));
}

function redraw(): void {
	root!.innerHTML = renderScreen(state);
}

ws.addEventListener("open", () => {
	state = setConnection(state, "connected");
	send({ cmd: "open", mode: "gesture-events" });
	redraw();
});

ws.addEventListener("close", () => {
	state = setConnection(state, "disconnected");
	redraw();
});

ws.addEventListener("message", (msg) => {
	buffer.push(parseEvent(String(msg.data)), (event) => {
		state = applyEvent(state, event, performance.now());
	});
	redraw();
});

document.addEventListener("keydown", (e) => {
	const gesture = gestureForKey(bindings, e.code);
	if (gesture !== null) {
		e.preventDefault();
		send({ cmd: "gesture", name: gesture });
	}
});

const practiceButton = document.getElementById("practice");
practiceButton?.addEventListener("click", async () => {
	const response = await fetch("/phrases.txt");
	if (!response.ok) {
		alert("no phrase file available");
		return;
	}
	const phrases = (await response.text()).split("\n").filter((l) => l.trim());
	state = startPractice(state, phrases, performance.now());
	redraw();
});

state = setConnection(state, "connecting");
redraw();
