// View state and pure reducers. The invariant maintained throughout:
// `document` is non-null only when `connection` is "done", and the log pane
// receives exactly one entry per NDJSON line consumed from the stream.

import { FinalDocument, StreamEvent } from "./types.js";

export type Connection = "idle" | "streaming" | "done" | "failed";

export interface Filters {
  role: string;      // "" matches every role
  modality: string;  // "" matches every modality
  minScore: number;  // 0 disables the score filter
}

export interface ViewState {
  connection: Connection;
  logLines: string[];
  document: FinalDocument | null;
  filters: Filters;
  errorMessage: string | null;
}

export function initialState(): ViewState {
  return {
    connection: "idle",
    logLines: [],
    document: null,
    filters: { role: "", modality: "", minScore: 0 },
    errorMessage: null,
  };
}

export function canSubmit(hasFile: boolean, url: string): boolean {
  return hasFile !== (url.trim().length > 0);
}

export function startStreaming(state: ViewState): ViewState {
  return { ...state, connection: "streaming", logLines: [], document: null, errorMessage: null };
}

function describeEvent(event: StreamEvent): string {
  const rest: Record<string, unknown> = {};
  for (const key of Object.keys(event)) {
    if (key !== "event" && key !== "at" && key !== "document") rest[key] = event[key];
  }
  const detail = Object.keys(rest).length ? " " + JSON.stringify(rest) : "";
  return `${event.at} ${event.event}${detail}`;
}

export function applyStreamLine(state: ViewState, line: string): ViewState {
  let event: StreamEvent;
  try {
    event = JSON.parse(line) as StreamEvent;
  } catch {
    return { ...state, logLines: [...state.logLines, `unparseable line: ${line}`] };
  }
  const logLines = [...state.logLines, describeEvent(event)];
  if (event.event === "completed") {
    return {
      ...state,
      logLines,
      connection: "done",
      document: (event as { document?: FinalDocument }).document ?? null,
    };
  }
  if (event.event === "error") {
    return {
      ...state,
      logLines,
      connection: "failed",
      document: null,
      errorMessage: String((event as { message?: unknown }).message ?? "pipeline error"),
    };
  }
  return { ...state, logLines };
}

export function streamEnded(state: ViewState): ViewState {
  if (state.connection === "streaming") {
    return {
      ...state,
      connection: "failed",
      document: null,
      errorMessage: "stream ended without a terminal event",
    };
  }
  return state;
}

export function setFailed(state: ViewState, message: string): ViewState {
  return { ...state, connection: "failed", document: null, errorMessage: message };
}

export function setFilters(state: ViewState, filters: Partial<Filters>): ViewState {
  return { ...state, filters: { ...state.filters, ...filters } };
}
