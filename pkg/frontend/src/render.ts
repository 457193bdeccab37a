// Pure view rendering: every function maps state to an HTML string, so the
// same state always yields the same markup. No DOM access happens here.

import { Filters, ViewState } from "./state.js";
import { FinalDocument, Question, Slide } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function badge(label: string, value: string | number, kind: string): string {
  return `<span class="badge badge-${kind}" title="${escapeHtml(label)}">` +
    `${escapeHtml(label)}: ${escapeHtml(String(value))}</span>`;
}

export function isRenderableDocument(doc: unknown): doc is FinalDocument {
  if (typeof doc !== "object" || doc === null) return false;
  const candidate = doc as Partial<FinalDocument>;
  return Array.isArray(candidate.slides)
    && typeof candidate.deck_metadata === "object" && candidate.deck_metadata !== null
    && typeof candidate.deck_analysis === "object" && candidate.deck_analysis !== null
    && typeof candidate.reconciliation === "object" && candidate.reconciliation !== null;
}

export function matchesFilters(slide: Slide, filters: Filters): boolean {
  if (filters.role && slide.role_in_deck !== filters.role) return false;
  if (filters.modality && slide.modality_type !== filters.modality) return false;
  if (filters.minScore > 0) {
    const { coverage_score, scaffolding_score } = slide.evaluation;
    if (coverage_score === null || scaffolding_score === null) return false;
    if (Math.min(coverage_score, scaffolding_score) < filters.minScore) return false;
  }
  return true;
}

function renderQuestion(question: Question): string {
  const options = question.question_type === "mcq"
    ? `<ul class="options">${question.options
        .map((option) => `<li class="option">${escapeHtml(option)}</li>`)
        .join("")}</ul>`
    : "";
  return `<li class="question" data-question-id="${escapeHtml(question.question_id)}">
    <div class="question-head">
      <span class="question-type">${escapeHtml(question.question_type)}</span>
      <span class="question-difficulty">${escapeHtml(question.difficulty)}</span>
      ${badge("fidelity", question.fidelity_score, "fidelity")}
    </div>
    <p class="prompt">${escapeHtml(question.prompt)}</p>
    ${options}
    <details class="answer">
      <summary>Show answer</summary>
      <p>${escapeHtml(question.answer)}</p>
      <p class="evidence">Evidence: ${escapeHtml(question.evidence_span)}</p>
    </details>
  </li>`;
}

export function renderCard(slide: Slide): string {
  const evaluation = slide.evaluation;
  const scores = slide.questions.length
    ? badge("coverage", evaluation.coverage_score ?? "-", "coverage") +
      badge("scaffolding", evaluation.scaffolding_score ?? "-", "scaffolding")
    : `<span class="no-questions">no questions</span>`;
  const questions = slide.questions.length
    ? `<ol class="questions">${slide.questions.map(renderQuestion).join("")}</ol>`
    : "";
  return `<article class="slide-card" data-slide-number="${slide.slide_number}">
    <header>
      <h3>#${slide.slide_number} ${escapeHtml(slide.slide_title)}</h3>
      <div class="badges">
        ${badge("role", slide.role_in_deck, "role")}
        ${badge("modality", slide.modality_type, "modality")}
        ${badge("budget", slide.question_budget, "budget")}
        ${scores}
      </div>
    </header>
    <p class="summary">${escapeHtml(slide.local_summary)}</p>
    ${questions}
  </article>`;
}

function renderFilterControls(doc: FinalDocument, filters: Filters): string {
  const roles = [...new Set(doc.slides.map((slide) => slide.role_in_deck))].sort();
  const modalities = [...new Set(doc.slides.map((slide) => slide.modality_type))].sort();
  const option = (value: string, selected: string) =>
    `<option value="${escapeHtml(value)}"${value === selected ? " selected" : ""}>` +
    `${escapeHtml(value || "all")}</option>`;
  const scoreOption = (value: number) =>
    `<option value="${value}"${value === filters.minScore ? " selected" : ""}>` +
    `${value === 0 ? "any score" : `min score ${value}`}</option>`;
  return `<div class="filters">
    <label>Role <select data-filter="role">${["", ...roles]
      .map((role) => option(role, filters.role)).join("")}</select></label>
    <label>Modality <select data-filter="modality">${["", ...modalities]
      .map((modality) => option(modality, filters.modality)).join("")}</select></label>
    <label>Score <select data-filter="minScore">${[0, 1, 2, 3, 4, 5]
      .map(scoreOption).join("")}</select></label>
  </div>`;
}

function renderSidePanel(doc: FinalDocument): string {
  const warnings = doc.reconciliation.redundancy_warnings;
  const uncovered = doc.reconciliation.uncovered_learning_goals;
  return `<aside class="side-panel">
    <h3>Reconciliation</h3>
    <p class="recon-notes">${escapeHtml(doc.reconciliation.deck_reconciliation_notes)}</p>
    <h4>Redundancy warnings (${warnings.length})</h4>
    <ul class="warnings">${warnings
      .map((warning) => `<li>${escapeHtml(warning)}</li>`).join("")}</ul>
    <h4>Uncovered goals (${uncovered.length})</h4>
    <ul class="uncovered">${uncovered
      .map((goal) => `<li>${escapeHtml(goal)}</li>`).join("")}</ul>
  </aside>`;
}

export function renderDocumentView(doc: unknown, filters: Filters): string {
  if (!isRenderableDocument(doc)) {
    return `<div class="invalid-document">
      <p class="warning">Document did not match the expected structure; raw JSON below.</p>
      <pre class="raw-json">${escapeHtml(JSON.stringify(doc, null, 2))}</pre>
    </div>`;
  }
  const analysis = doc.deck_analysis;
  const visible = doc.slides.filter((slide) => matchesFilters(slide, filters));
  const cards = visible.map(renderCard).join("");
  return `<div class="document-view">
    <section class="deck-summary">
      <h2>${escapeHtml(analysis.deck_topic)}</h2>
      <p class="audience">Audience: ${escapeHtml(analysis.target_audience)}</p>
      <ul class="goals">${analysis.learning_goals
        .map((goal) => `<li>${escapeHtml(goal)}</li>`).join("")}</ul>
      <ol class="sections">${analysis.sections
        .map((section) =>
          `<li>${escapeHtml(section.section_title)} ` +
          `<span class="range">(${section.start_slide}-${section.end_slide})</span></li>`)
        .join("")}</ol>
    </section>
    <div class="document-body">
      <section class="cards" data-visible-count="${visible.length}">${cards}</section>
      ${renderSidePanel(doc)}
    </div>
  </div>`;
}

export function renderLogPane(lines: string[]): string {
  return lines.map((line) => `<div class="log-line">${escapeHtml(line)}</div>`).join("");
}

export function renderBanner(state: ViewState): string {
  switch (state.connection) {
    case "idle":
      return `<div class="banner banner-idle">Upload a PDF deck or paste a URL to begin.</div>`;
    case "streaming":
      return `<div class="banner banner-streaming">Analyzing… ${state.logLines.length} events</div>`;
    case "done":
      return `<div class="banner banner-done">Analysis complete.</div>`;
    case "failed":
      return `<div class="banner banner-failed">Failed: ${escapeHtml(state.errorMessage ?? "unknown error")}</div>`;
  }
}

export function renderApp(state: ViewState): { banner: string; log: string; doc: string } {
  let doc = "";
  if (state.connection === "done" && state.document !== null) {
    const controls = isRenderableDocument(state.document)
      ? renderFilterControls(state.document, state.filters)
      : "";
    doc = controls + renderDocumentView(state.document, state.filters);
  }
  return {
    banner: renderBanner(state),
    log: renderLogPane(state.logLines),
    doc,
  };
}
