// DOM wiring: form submission, stream consumption, incremental re-render.
// The upload form lives in static HTML and is never re-rendered, so the
// chosen file survives view updates; only banner/log/doc regions are redrawn.
import { renderApp } from "./render.js";
import { applyStreamLine, canSubmit, initialState, setFailed, setFilters, startStreaming, streamEnded, } from "./state.js";
import { consumeNdjsonStream } from "./stream.js";
let state = initialState();
const fileInput = document.getElementById("file");
const urlInput = document.getElementById("url");
const submitButton = document.getElementById("submit");
const form = document.getElementById("analyze-form");
const bannerRegion = document.getElementById("banner");
const logRegion = document.getElementById("log");
const docRegion = document.getElementById("doc");
const healthDot = document.getElementById("health");
function render() {
    const view = renderApp(state);
    bannerRegion.innerHTML = view.banner;
    logRegion.innerHTML = view.log;
    logRegion.scrollTop = logRegion.scrollHeight;
    docRegion.innerHTML = view.doc;
}
function update(next) {
    state = next;
    render();
}
function refreshSubmitEnabled() {
    const hasFile = fileInput.files !== null && fileInput.files.length > 0;
    submitButton.disabled = !canSubmit(hasFile, urlInput.value) || state.connection === "streaming";
}
fileInput.addEventListener("change", refreshSubmitEnabled);
urlInput.addEventListener("input", refreshSubmitEnabled);
docRegion.addEventListener("change", (event) => {
    const target = event.target;
    const filterName = target.getAttribute("data-filter");
    if (!filterName || !(target instanceof HTMLSelectElement))
        return;
    if (filterName === "minScore") {
        update(setFilters(state, { minScore: Number(target.value) }));
    }
    else if (filterName === "role" || filterName === "modality") {
        update(setFilters(state, { [filterName]: target.value }));
    }
});
form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const hasFile = fileInput.files !== null && fileInput.files.length > 0;
    if (!canSubmit(hasFile, urlInput.value))
        return;
    update(startStreaming(state));
    refreshSubmitEnabled();
    try {
        let response;
        if (hasFile) {
            const body = new FormData();
            body.append("file", fileInput.files[0]);
            response = await fetch("/api/analyze", { method: "POST", body });
        }
        else {
            response = await fetch("/api/analyze", {
                method: "POST",
                headers: { "content-type": "application/json" },
                body: JSON.stringify({ url: urlInput.value.trim() }),
            });
        }
        if (!response.ok || response.body === null) {
            const detail = await response.text();
            update(setFailed(state, `HTTP ${response.status}: ${detail}`));
            return;
        }
        await consumeNdjsonStream(response.body, (line) => {
            update(applyStreamLine(state, line));
        });
        update(streamEnded(state));
    }
    catch (error) {
        update(setFailed(state, String(error)));
    }
    finally {
        refreshSubmitEnabled();
    }
});
async function checkHealth() {
    try {
        const response = await fetch("/healthz");
        healthDot.className = response.ok ? "health health-up" : "health health-down";
        healthDot.title = response.ok ? "service reachable" : "service unhealthy";
    }
    catch {
        healthDot.className = "health health-down";
        healthDot.title = "service unreachable";
    }
}
checkHealth();
refreshSubmitEnabled();
render();
