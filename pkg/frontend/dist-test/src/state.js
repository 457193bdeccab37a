// View state and pure reducers. The invariant maintained throughout:
// `document` is non-null only when `connection` is "done", and the log pane
// receives exactly one entry per NDJSON line consumed from the stream.
export function initialState() {
    return {
        connection: "idle",
        logLines: [],
        document: null,
        filters: { role: "", modality: "", minScore: 0 },
        errorMessage: null,
    };
}
export function canSubmit(hasFile, url) {
    return hasFile !== (url.trim().length > 0);
}
export function startStreaming(state) {
    return { ...state, connection: "streaming", logLines: [], document: null, errorMessage: null };
}
function describeEvent(event) {
    const rest = {};
    for (const key of Object.keys(event)) {
        if (key !== "event" && key !== "at" && key !== "document")
            rest[key] = event[key];
    }
    const detail = Object.keys(rest).length ? " " + JSON.stringify(rest) : "";
    return `${event.at} ${event.event}${detail}`;
}
export function applyStreamLine(state, line) {
    let event;
    try {
        event = JSON.parse(line);
    }
    catch {
        return { ...state, logLines: [...state.logLines, `unparseable line: ${line}`] };
    }
    const logLines = [...state.logLines, describeEvent(event)];
    if (event.event === "completed") {
        return {
            ...state,
            logLines,
            connection: "done",
            document: event.document ?? null,
        };
    }
    if (event.event === "error") {
        return {
            ...state,
            logLines,
            connection: "failed",
            document: null,
            errorMessage: String(event.message ?? "pipeline error"),
        };
    }
    return { ...state, logLines };
}
export function streamEnded(state) {
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
export function setFailed(state, message) {
    return { ...state, connection: "failed", document: null, errorMessage: message };
}
export function setFilters(state, filters) {
    return { ...state, filters: { ...state.filters, ...filters } };
}
