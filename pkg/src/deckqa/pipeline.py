"""Pipeline orchestration: preprocessing through final document compilation.

Phase order is fixed: preprocess, window planning, deck synthesis, static
heuristics, slide annotation, reconciliation, conditional re-annotation,
compile. Progress is observable only through the event stream; nothing is
persisted mid-run unless a debug directory is configured.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from .heuristics import apply_static_heuristics
from .ingest import ExtractedDeck, build_contact_sheet, encode_png, extract_deck
from .provider import (
    Phase,
    ProviderConfig,
    Transport,
    generate_structured,
    make_request,
    make_transport,
)
from .schema import (
    FIELD_DESCRIPTIONS,
    SCHEMA_VERSION,
    ActionType,
    DeckAnalysis,
    DeckMetadata,
    DeckSynthesisOutput,
    FinalDocument,
    ReconciliationResult,
    SlideAnnotation,
    SlideEvaluation,
    SlidePlan,
    WindowPlannerOutput,
    deck_id_for,
    question_id_for,
    slide_id_for,
    validate_final_document,
)
from .windowing import (
    SlideCandidates,
    WindowPlanResult,
    WindowSpec,
    collate_candidates,
    plan_windows,
)

DEFAULT_CONTACT_CELL_WIDTH = 320


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def format_timestamp(moment: datetime) -> str:
    return moment.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class PipelineConfig:
    window_size: int = 8
    overlap: int = 2
    render_scale: float = 2.0
    contact_columns: int = 4
    max_inflight: int = 4
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    clock: Callable[[], datetime] = utc_now
    debug_dir: Optional[Path] = None
    source_file: str = "deck.pdf"
    deck_citation: str = ""
    deck_url: Optional[str] = None


class EventKind(str, Enum):
    PHASE_STARTED = "phase_started"
    WINDOW_PLANNED = "window_planned"
    SYNTHESIS_DONE = "synthesis_done"
    HEURISTICS_APPLIED = "heuristics_applied"
    SLIDE_ANNOTATED = "slide_annotated"
    RECONCILIATION_DONE = "reconciliation_done"
    SLIDE_REANNOTATED = "slide_reannotated"
    COMPLETED = "completed"
    ERROR = "error"


PHASE_SEQUENCE = (
    "preprocess",
    "window_planning",
    "deck_synthesis",
    "heuristics",
    "annotation",
    "reconciliation",
    "re_annotation",  # only when reconciliation scheduled reruns
    "compile",
)


@dataclass(frozen=True)
class PipelineEvent:
    kind: EventKind
    at: str
    payload: dict[str, Any]

    def to_json_line(self) -> str:
        body = {"event": self.kind.value, "at": self.at, **self.payload}
        return json.dumps(body, ensure_ascii=False)


def parse_event_line(line: str) -> PipelineEvent:
    """Parse one NDJSON stream line back into a PipelineEvent."""
    body = json.loads(line)
    if not isinstance(body, dict):
        raise ValueError("event line is not a JSON object")
    kind = EventKind(body.pop("event"))
    at = body.pop("at")
    datetime.fromisoformat(at.replace("Z", "+00:00"))
    return PipelineEvent(kind=kind, at=at, payload=body)


EventSink = Callable[[PipelineEvent], None]


class _Emitter:
    """Serializes event emission from worker threads and stamps timestamps."""

    def __init__(self, sink: Optional[EventSink], clock: Callable[[], datetime]):
        self._sink = sink
        self._clock = clock
        self._lock = threading.Lock()

    def __call__(self, kind: EventKind, **payload: Any) -> None:
        if self._sink is None:
            return
        event = PipelineEvent(kind=kind, at=format_timestamp(self._clock()), payload=payload)
        with self._lock:
            self._sink(event)


class CompilationError(ValueError):
    """Assembled parts failed final validation; indicates an internal bug."""


# -- request builders ----------------------------------------------------------


def build_window_request(deck: ExtractedDeck, window: WindowSpec, columns: int):
    slides = deck.slides[window.start_slide - 1:window.end_slide]
    sheet = build_contact_sheet(
        slides, columns=columns, cell_width=DEFAULT_CONTACT_CELL_WIDTH, window=window
    )
    text_parts = tuple(
        f"Slide {slide.slide_number}:\n{slide.native_text}" for slide in slides
    )
    return make_request(
        Phase.WINDOW_PLANNER,
        text_parts=text_parts,
        image_parts=(encode_png(sheet.image),),
    )


def build_synthesis_request(candidates: Sequence[SlideCandidates], total_slides: int):
    payload = {
        "total_slides": total_slides,
        "slide_candidates": [
            {
                "slide_number": entry.slide_number,
                "candidates": [
                    {"window_index": window_index, "plan": plan.model_dump(mode="json")}
                    for window_index, plan in entry.candidates
                ],
            }
            for entry in candidates
        ],
    }
    return make_request(Phase.DECK_SYNTHESIS, text_parts=(json.dumps(payload, ensure_ascii=False),))


def build_annotation_request(
    plan: SlidePlan,
    deck: ExtractedDeck,
    analysis: DeckAnalysis,
    neighbor_summaries: tuple[Optional[str], Optional[str]],
):
    slide = deck.slides[plan.slide_number - 1]
    section_summary = ""
    for section in analysis.sections:
        if section.start_slide <= plan.slide_number <= section.end_slide:
            section_summary = section.section_summary
            break
    context = {
        "slide_number": plan.slide_number,
        "slide_plan": plan.model_dump(mode="json"),
        "deck_topic": analysis.deck_topic,
        "learning_goals": analysis.learning_goals,
        "section_summary": section_summary,
        "neighbor_summaries": {
            "previous": neighbor_summaries[0],
            "next": neighbor_summaries[1],
        },
        "slide_text": slide.native_text,
    }
    return make_request(
        Phase.SLIDE_ANNOTATOR,
        text_parts=(
            json.dumps(context, ensure_ascii=False),
            f"Slide {plan.slide_number}:\n{slide.native_text}",
        ),
        image_parts=(encode_png(slide.image),),
    )


def build_reconciliation_request(
    deck_info: dict[str, Any],
    analysis: DeckAnalysis,
    plans: Sequence[SlidePlan],
    annotations: Sequence[SlideAnnotation],
):
    payload = {
        "deck_metadata": deck_info,
        "deck_analysis": analysis.model_dump(mode="json"),
        "slide_plans": [plan.model_dump(mode="json") for plan in plans],
        "slide_annotations": [annotation.model_dump(mode="json") for annotation in annotations],
    }
    return make_request(Phase.RECONCILIATION, text_parts=(json.dumps(payload, ensure_ascii=False),))


# -- phases -----------------------------------------------------------------------


def run_window_phase(
    deck: ExtractedDeck,
    windows: Sequence[WindowSpec],
    config: PipelineConfig,
    transport: Transport,
    emit: Optional[Callable[..., None]] = None,
) -> list[WindowPlanResult]:
    def plan_one(window: WindowSpec) -> WindowPlanResult:
        request = build_window_request(deck, window, config.contact_columns)
        expected = set(window.slide_numbers())

        def check(output: WindowPlannerOutput) -> list[str]:
            numbers = sorted(plan.slide_number for plan in output.slides)
            if numbers != sorted(expected):
                return [
                    f"slides: must cover slides {window.start_slide}..{window.end_slide} "
                    f"exactly once (got {numbers})"
                ]
            return []

        output, _ = generate_structured(request, config.provider, transport, extra_check=check)
        plans = tuple(sorted(output.slides, key=lambda plan: plan.slide_number))
        return WindowPlanResult(window=window, plans=plans)

    results = _run_concurrently(
        [(window, plan_one) for window in windows],
        config.max_inflight,
        on_done=(
            (lambda window, result: emit(
                EventKind.WINDOW_PLANNED,
                window_index=window.index,
                start_slide=window.start_slide,
                end_slide=window.end_slide,
                slide_count=len(result.plans),
            )) if emit else None
        ),
    )
    return results


def run_synthesis_phase(
    candidates: Sequence[SlideCandidates],
    total_slides: int,
    config: PipelineConfig,
    transport: Transport,
) -> tuple[DeckAnalysis, list[SlidePlan]]:
    request = build_synthesis_request(candidates, total_slides)

    def check(output: DeckSynthesisOutput) -> list[str]:
        problems: list[str] = []
        numbers = sorted(plan.slide_number for plan in output.slide_plans)
        if numbers != list(range(1, total_slides + 1)):
            problems.append(
                f"slide_plans: exactly one plan per slide in 1..{total_slides} required "
                f"(got {numbers})"
            )
        sections = output.deck_analysis.sections
        if not sections or sections[-1].end_slide != total_slides:
            problems.append(
                f"deck_analysis.sections: must cover 1..{total_slides} contiguously"
            )
        return problems

    output, _ = generate_structured(request, config.provider, transport, extra_check=check)
    plans = sorted(output.slide_plans, key=lambda plan: plan.slide_number)
    return output.deck_analysis, plans


def _zero_budget_annotation(plan: SlidePlan) -> SlideAnnotation:
    return SlideAnnotation(
        slide_id=slide_id_for(plan.slide_number),
        slide_number=plan.slide_number,
        slide_title=plan.slide_title,
        modality_type=plan.modality_type,
        role_in_deck=plan.role_in_deck,
        local_summary=plan.local_summary,
        key_concepts=[],
        evidence_regions=[],
        eligible_for_questions=plan.eligible_for_questions,
        eligibility_reason=plan.eligibility_reason,
        question_budget=0,
        question_mix=list(plan.question_mix),
        questions=[],
        evaluation=SlideEvaluation(
            coverage_score=None, coverage_notes="", scaffolding_score=None, scaffolding_notes=""
        ),
    )


def _canonicalize_ids(annotation: SlideAnnotation) -> SlideAnnotation:
    questions = [
        question.model_copy(
            update={"question_id": question_id_for(annotation.slide_number, index + 1)}
        )
        for index, question in enumerate(annotation.questions)
    ]
    return annotation.model_copy(
        update={"slide_id": slide_id_for(annotation.slide_number), "questions": questions}
    )


def run_annotation_phase(
    plans: Sequence[SlidePlan],
    analysis: DeckAnalysis,
    deck: ExtractedDeck,
    config: PipelineConfig,
    transport: Transport,
    emit: Optional[Callable[..., None]] = None,
    event_kind: EventKind = EventKind.SLIDE_ANNOTATED,
    neighbor_plans: Optional[Sequence[SlidePlan]] = None,
) -> list[SlideAnnotation]:
    """Annotate the given plans; zero-budget slides are built locally.

    neighbor_plans supplies local summaries for adjacent slides (defaults to
    the plan list itself; passed explicitly for partial re-annotation runs).
    """
    context_plans = list(neighbor_plans) if neighbor_plans is not None else list(plans)
    summary_by_number = {plan.slide_number: plan.local_summary for plan in context_plans}

    def annotate_one(plan: SlidePlan) -> SlideAnnotation:
        if plan.question_budget == 0 or not plan.eligible_for_questions:
            return _zero_budget_annotation(plan)
        neighbors = (
            summary_by_number.get(plan.slide_number - 1),
            summary_by_number.get(plan.slide_number + 1),
        )
        request = build_annotation_request(plan, deck, analysis, neighbors)

        def check(annotation: SlideAnnotation) -> list[str]:
            problems: list[str] = []
            if annotation.slide_number != plan.slide_number:
                problems.append(
                    f"slide_number: expected {plan.slide_number} (got {annotation.slide_number})"
                )
            if annotation.question_budget != plan.question_budget:
                problems.append(
                    f"question_budget: must equal the assigned budget {plan.question_budget} "
                    f"(got {annotation.question_budget})"
                )
            return problems

        annotation, _ = generate_structured(
            request, config.provider, transport, extra_check=check
        )
        return _canonicalize_ids(annotation)

    ordered = sorted(plans, key=lambda plan: plan.slide_number)
    results = _run_concurrently(
        [(plan, annotate_one) for plan in ordered],
        config.max_inflight,
        on_done=(
            (lambda plan, annotation: emit(
                event_kind,
                slide_number=plan.slide_number,
                question_count=len(annotation.questions),
            )) if emit else None
        ),
    )
    return results


def run_reconciliation_phase(
    deck_info: dict[str, Any],
    analysis: DeckAnalysis,
    plans: Sequence[SlidePlan],
    annotations: Sequence[SlideAnnotation],
    config: PipelineConfig,
    transport: Transport,
) -> ReconciliationResult:
    request = build_reconciliation_request(deck_info, analysis, plans, annotations)
    total = len(annotations)
    budgets = {annotation.slide_number: annotation.question_budget for annotation in annotations}

    def check(result: ReconciliationResult) -> list[str]:
        problems: list[str] = []
        numbers = sorted(action.slide_number for action in result.revised_slide_actions)
        if numbers != list(range(1, total + 1)):
            problems.append(
                f"revised_slide_actions: exactly one action per slide in 1..{total} "
                f"required (got {numbers})"
            )
        for action in result.revised_slide_actions:
            if (
                action.action is ActionType.KEEP
                and action.slide_number in budgets
                and action.new_question_budget != budgets[action.slide_number]
            ):
                problems.append(
                    f"revised_slide_actions: 'keep' for slide {action.slide_number} must "
                    f"carry the current budget {budgets[action.slide_number]} "
                    f"(got {action.new_question_budget})"
                )
        return problems

    result, _ = generate_structured(request, config.provider, transport, extra_check=check)
    return result


def plan_from_annotation(annotation: SlideAnnotation) -> SlidePlan:
    """Reconstruct the planning view of a slide from its current annotation.

    Used for re-annotation after reconciliation adjusts budgets; eligibility
    tracks the (possibly updated) budget.
    """
    return SlidePlan(
        slide_number=annotation.slide_number,
        slide_title=annotation.slide_title,
        local_summary=annotation.local_summary,
        modality_type=annotation.modality_type,
        role_in_deck=annotation.role_in_deck,
        eligible_for_questions=annotation.question_budget > 0,
        eligibility_reason=annotation.eligibility_reason,
        question_budget=annotation.question_budget,
        question_mix=list(annotation.question_mix),
    )


def _append_reconciliation_reason(existing: str, reason: str) -> str:
    note = f"reconciliation: {reason}" if reason else "reconciliation: zeroed"
    return f"{existing} | {note}" if existing else note


def _zero_out(annotation: SlideAnnotation, reason: str) -> SlideAnnotation:
    return annotation.model_copy(
        update={
            "question_budget": 0,
            "questions": [],
            "evaluation": SlideEvaluation(
                coverage_score=None,
                coverage_notes="",
                scaffolding_score=None,
                scaffolding_notes="",
            ),
            "eligibility_reason": _append_reconciliation_reason(
                annotation.eligibility_reason, reason
            ),
        }
    )


def apply_reconciliation(
    annotations: Sequence[SlideAnnotation],
    result: ReconciliationResult,
) -> tuple[list[SlideAnnotation], set[int]]:
    """Apply the deck-level action list; returns updated annotations and the
    slide numbers that must be re-annotated.

    keep leaves the slide untouched. zero_out empties it in place (budget 0,
    no questions, null scores, reason appended) without a rerun. reduce,
    expand, and rewrite set the budget to new_question_budget clamped to
    0..5 and schedule a rerun; reduce/expand arriving at budget 0 degrade to
    zero_out semantics instead.
    """
    by_number = {annotation.slide_number: annotation for annotation in annotations}
    action_numbers = {action.slide_number for action in result.revised_slide_actions}
    unknown = action_numbers - set(by_number)
    if unknown:
        raise ValueError(f"actions reference unknown slide number(s) {sorted(unknown)}")
    missing = set(by_number) - action_numbers
    if missing:
        raise ValueError(f"no action for slide number(s) {sorted(missing)}")

    updated: dict[int, SlideAnnotation] = dict(by_number)
    rerun_set: set[int] = set()
    for action in result.revised_slide_actions:
        annotation = by_number[action.slide_number]
        if action.action is ActionType.KEEP:
            continue
        if action.action is ActionType.ZERO_OUT:
            updated[action.slide_number] = _zero_out(annotation, action.reason)
            continue
        new_budget = max(0, min(5, action.new_question_budget))
        if new_budget == 0 and action.action in (ActionType.REDUCE, ActionType.EXPAND):
            updated[action.slide_number] = _zero_out(annotation, action.reason)
            continue
        updated[action.slide_number] = annotation.model_copy(
            update={"question_budget": new_budget}
        )
        rerun_set.add(action.slide_number)
    return [updated[number] for number in sorted(updated)], rerun_set


def compile_final_document(
    metadata: DeckMetadata,
    analysis: DeckAnalysis,
    reconciliation: ReconciliationResult,
    annotations: Sequence[SlideAnnotation],
) -> FinalDocument:
    try:
        document = FinalDocument(
            schema_version=SCHEMA_VERSION,
            field_descriptions=dict(FIELD_DESCRIPTIONS),
            deck_metadata=metadata,
            deck_analysis=analysis,
            reconciliation=reconciliation,
            slides=sorted(annotations, key=lambda annotation: annotation.slide_number),
        )
    except Exception as exc:
        raise CompilationError(f"assembled document failed validation: {exc}") from exc
    verdict = validate_final_document(document)
    if not verdict.ok:
        raise CompilationError(
            "assembled document failed validation: " + "; ".join(verdict.violations)
        )
    return document


# -- full run -------------------------------------------------------------------


def _run_concurrently(
    jobs: Sequence[tuple[Any, Callable[[Any], Any]]],
    max_inflight: int,
    on_done: Optional[Callable[[Any, Any], None]] = None,
) -> list[Any]:
    """Run jobs with bounded parallelism, returning results in job order."""
    if len(jobs) <= 1 or max_inflight <= 1:
        results = []
        for key, fn in jobs:
            result = fn(key)
            if on_done is not None:
                on_done(key, result)
            results.append(result)
        return results
    with ThreadPoolExecutor(max_workers=max_inflight) as executor:
        futures = {executor.submit(fn, key): (index, key) for index, (key, fn) in enumerate(jobs)}
        indexed: list[tuple[int, Any]] = []
        try:
            for future in as_completed(futures):
                index, key = futures[future]
                result = future.result()  # re-raises worker failures
                if on_done is not None:
                    on_done(key, result)
                indexed.append((index, result))
        except Exception:
            for pending in futures:
                pending.cancel()
            raise
        return [result for _, result in sorted(indexed, key=lambda pair: pair[0])]


def _dump_debug(config: PipelineConfig, name: str, payload: Any) -> None:
    if config.debug_dir is None:
        return
    config.debug_dir.mkdir(parents=True, exist_ok=True)
    path = config.debug_dir / name
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def run_pipeline(
    pdf_bytes: bytes,
    config: PipelineConfig,
    transport: Optional[Transport] = None,
    event_sink: Optional[EventSink] = None,
) -> FinalDocument:
    """Run the full flow over raw PDF bytes and return the final document.

    Failures surface both ways: a terminal error event is emitted and the
    original exception propagates to the caller.
    """
    emit = _Emitter(event_sink, config.clock)
    if transport is None:
        transport = make_transport(config.provider)
    try:
        emit(EventKind.PHASE_STARTED, phase="preprocess")
        deck = extract_deck(
            pdf_bytes, render_scale=config.render_scale, source_file=config.source_file
        )
        total = deck.total_slides
        windows = plan_windows(total, config.window_size, config.overlap)

        emit(EventKind.PHASE_STARTED, phase="window_planning")
        window_results = run_window_phase(deck, windows, config, transport, emit)
        _dump_debug(
            config,
            "phase1_windows.json",
            [
                {
                    "window": {
                        "index": result.window.index,
                        "start_slide": result.window.start_slide,
                        "end_slide": result.window.end_slide,
                    },
                    "plans": [plan.model_dump(mode="json") for plan in result.plans],
                }
                for result in window_results
            ],
        )

        emit(EventKind.PHASE_STARTED, phase="deck_synthesis")
        candidates = collate_candidates(window_results, total)
        analysis, plans = run_synthesis_phase(candidates, total, config, transport)
        emit(
            EventKind.SYNTHESIS_DONE,
            total_slides=total,
            section_count=len(analysis.sections),
            deck_topic=analysis.deck_topic,
        )
        _dump_debug(
            config,
            "phase2_deck.json",
            {
                "deck_analysis": analysis.model_dump(mode="json"),
                "slide_plans": [plan.model_dump(mode="json") for plan in plans],
            },
        )

        emit(EventKind.PHASE_STARTED, phase="heuristics")
        plans, report = apply_static_heuristics(plans, deck)
        emit(
            EventKind.HEURISTICS_APPLIED,
            zeroed_duplicates=[list(pair) for pair in report.zeroed_duplicates],
            zeroed_titles=list(report.zeroed_titles),
            untouched=report.untouched,
        )
        _dump_debug(
            config,
            "phase2b_heuristics.json",
            {
                "report": {
                    "zeroed_duplicates": [list(pair) for pair in report.zeroed_duplicates],
                    "zeroed_titles": list(report.zeroed_titles),
                    "untouched": report.untouched,
                },
                "plans": [plan.model_dump(mode="json") for plan in plans],
            },
        )

        emit(EventKind.PHASE_STARTED, phase="annotation")
        annotations = run_annotation_phase(plans, analysis, deck, config, transport, emit)
        _dump_debug(
            config,
            "phase3_annotations.json",
            [annotation.model_dump(mode="json") for annotation in annotations],
        )

        emit(EventKind.PHASE_STARTED, phase="reconciliation")
        deck_info = {
            "deck_id": deck_id_for(pdf_bytes),
            "deck": config.deck_citation,
            "deck_url": config.deck_url,
            "source_file": config.source_file,
            "total_slides": total,
        }
        reconciliation = run_reconciliation_phase(
            deck_info, analysis, plans, annotations, config, transport
        )
        action_counts: dict[str, int] = {}
        for action in reconciliation.revised_slide_actions:
            action_counts[action.action.value] = action_counts.get(action.action.value, 0) + 1
        annotations, rerun_set = apply_reconciliation(annotations, reconciliation)
        emit(
            EventKind.RECONCILIATION_DONE,
            action_counts=action_counts,
            rerun_slides=sorted(rerun_set),
        )
        _dump_debug(config, "phase4_reconciliation.json", reconciliation.model_dump(mode="json"))

        if rerun_set:
            emit(EventKind.PHASE_STARTED, phase="re_annotation")
            annotation_by_number = {
                annotation.slide_number: annotation for annotation in annotations
            }
            rerun_plans = [
                plan_from_annotation(annotation_by_number[number]) for number in sorted(rerun_set)
            ]
            neighbor_plans = [plan_from_annotation(annotation) for annotation in annotations]
            redone = run_annotation_phase(
                rerun_plans,
                analysis,
                deck,
                config,
                transport,
                emit,
                event_kind=EventKind.SLIDE_REANNOTATED,
                neighbor_plans=neighbor_plans,
            )
            for annotation in redone:
                annotation_by_number[annotation.slide_number] = annotation
            annotations = [annotation_by_number[number] for number in sorted(annotation_by_number)]

        emit(EventKind.PHASE_STARTED, phase="compile")
        metadata = DeckMetadata(
            deck_id=deck_id_for(pdf_bytes),
            deck=config.deck_citation,
            deck_url=config.deck_url,
            source_file=config.source_file,
            total_slides=total,
            processed_at=format_timestamp(config.clock()),
        )
        document = compile_final_document(metadata, analysis, reconciliation, annotations)
        _dump_debug(config, "final.json", document.model_dump(mode="json"))
        emit(EventKind.COMPLETED, document=document.model_dump(mode="json"))
        return document
    except Exception as exc:
        emit(EventKind.ERROR, message=str(exc), error_type=type(exc).__name__)
        raise
