import assert from "node:assert/strict";
import { test } from "node:test";

import {
  applyStreamLine,
  canSubmit,
  initialState,
  setFailed,
  setFilters,
  startStreaming,
  streamEnded,
} from "../src/state.js";

const completedLine = JSON.stringify({
  event: "completed",
  at: "2000-01-01T00:00:00Z",
  document: { slides: [], deck_metadata: {}, deck_analysis: {}, reconciliation: {} },
});

test("exactly one source enables submission", () => {
  assert.equal(canSubmit(false, ""), false);
  assert.equal(canSubmit(true, ""), true);
  assert.equal(canSubmit(false, "https://x/d.pdf"), true);
  assert.equal(canSubmit(true, "https://x/d.pdf"), false);
  assert.equal(canSubmit(false, "   "), false);
});

test("every stream line adds exactly one log entry", () => {
  let state = startStreaming(initialState());
  const lines = [
    JSON.stringify({ event: "phase_started", at: "t", phase: "preprocess" }),
    JSON.stringify({ event: "window_planned", at: "t", window_index: 0 }),
    "not json at all",
    completedLine,
  ];
  for (const line of lines) state = applyStreamLine(state, line);
  assert.equal(state.logLines.length, lines.length);
});

test("completed event sets document and done", () => {
  let state = startStreaming(initialState());
  state = applyStreamLine(state, completedLine);
  assert.equal(state.connection, "done");
  assert.notEqual(state.document, null);
});

test("error event fails without a document", () => {
  let state = startStreaming(initialState());
  state = applyStreamLine(
    state,
    JSON.stringify({ event: "error", at: "t", message: "boom" }),
  );
  assert.equal(state.connection, "failed");
  assert.equal(state.document, null);
  assert.equal(state.errorMessage, "boom");
});

test("document present only when connection is done", () => {
  let state = startStreaming(initialState());
  assert.equal(state.document, null);
  state = applyStreamLine(state, completedLine);
  assert.equal(state.connection, "done");
  const failed = setFailed(state, "later failure");
  assert.equal(failed.document, null);
});

test("stream ending mid-flight marks failure", () => {
  const dangling = streamEnded(startStreaming(initialState()));
  assert.equal(dangling.connection, "failed");
  const finished = streamEnded(applyStreamLine(startStreaming(initialState()), completedLine));
  assert.equal(finished.connection, "done");
});

test("filters update without touching the document", () => {
  let state = applyStreamLine(startStreaming(initialState()), completedLine);
  const before = state.document;
  state = setFilters(state, { role: "mechanism", minScore: 3 });
  assert.equal(state.document, before);
  assert.equal(state.filters.role, "mechanism");
  assert.equal(state.filters.minScore, 3);
  assert.equal(state.filters.modality, "");
});
