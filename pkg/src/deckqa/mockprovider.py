"""Deterministic offline provider for tests and demo runs.

Behaves like a cooperative model: output is always schema-valid and is a
pure function of (seed, phase, request text parts). The behavioral rules are
part of the testing contract:

window_planner
    role is "agenda" when the slide text contains "agenda"/"outline"
    (case-insensitive), "title" when slide_number is 1 and the normalized
    text is shorter than 80 characters, otherwise "mechanism". The budget is
    (slide content hash mod 6), forced to 0 for title/agenda slides;
    eligibility follows the budget.

deck_synthesis
    conflicting candidates for one slide are resolved conservatively by
    taking the candidate with the minimum budget (ties: lowest window
    index). Sections are contiguous runs of at most six slides.

slide_annotator
    emits exactly the assigned budget of questions, realizing the supplied
    mix cyclically; mcq items get exactly 4 options; fidelity is always 4.

reconciliation
    keeps every slide except those whose slide hash mod 7 is 0 while
    holding a budget of at least 2, which are reduced by one.
"""

from __future__ import annotations

import hashlib
import json
import re
from typing import Any

from .ingest import normalize_slide_text
from .provider import Phase, ProviderRequest
from .schema import (
    DeckAnalysis,
    DeckSynthesisOutput,
    Difficulty,
    ModalityType,
    Question,
    QuestionType,
    ReconciliationResult,
    RoleInDeck,
    SectionPlan,
    SlideAction,
    SlideAnnotation,
    SlideEvaluation,
    SlidePlan,
    WindowPlannerOutput,
    question_id_for,
    slide_id_for,
)

_SLIDE_BLOCK_RE = re.compile(r"^Slide (\d+):\n?(.*)$", re.DOTALL)

_MOCK_MODALITIES = (ModalityType.TEXT, ModalityType.DIAGRAM, ModalityType.MIXED)
_QUESTION_TYPES = tuple(QuestionType)
_DIFFICULTIES = (Difficulty.LOW, Difficulty.MEDIUM, Difficulty.HIGH)

SECTION_SPAN = 6

_LEARNING_GOALS = [
    "Understand the main concepts presented in the deck",
    "Explain the mechanisms described across sections",
    "Recall key definitions and results",
]


def _stable_hash(*parts: Any) -> int:
    token = "\x1f".join(str(part) for part in parts)
    return int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "big")


def slide_content_hash(seed: int, phase: Phase, slide_number: int, text: str) -> int:
    """The per-slide hash driving mock budgets; exposed for oracle tests."""
    return _stable_hash(seed, phase.value, slide_number, normalize_slide_text(text))


def _first_line(text: str, limit: int = 60) -> str:
    for line in text.splitlines():
        stripped = line.strip()
        if stripped:
            return stripped[:limit]
    return ""


def _parse_slide_blocks(text_parts: tuple[str, ...]) -> list[tuple[int, str]]:
    blocks: list[tuple[int, str]] = []
    for part in text_parts:
        match = _SLIDE_BLOCK_RE.match(part)
        if match:
            blocks.append((int(match.group(1)), match.group(2)))
    return blocks


def _window_plan(seed: int, slide_number: int, text: str) -> SlidePlan:
    normalized = normalize_slide_text(text)
    lowered = normalized.lower()
    if "agenda" in lowered or "outline" in lowered:
        role = RoleInDeck.AGENDA
    elif slide_number == 1 and len(normalized) < 80:
        role = RoleInDeck.TITLE
    else:
        role = RoleInDeck.MECHANISM
    content_hash = slide_content_hash(seed, Phase.WINDOW_PLANNER, slide_number, text)
    budget = 0 if role in (RoleInDeck.TITLE, RoleInDeck.AGENDA) else content_hash % 6
    eligible = budget >= 1
    if role is RoleInDeck.TITLE:
        reason = "Title slide; no instructional content to test"
    elif role is RoleInDeck.AGENDA:
        reason = "Agenda slide; previews content without teaching it"
    elif eligible:
        reason = "Carries instructional content worth testing"
    else:
        reason = "Too thin to support a grounded question"
    mix = [_QUESTION_TYPES[(content_hash + offset) % len(_QUESTION_TYPES)] for offset in range(budget)]
    return SlidePlan(
        slide_number=slide_number,
        slide_title=_first_line(text) or f"Slide {slide_number}",
        local_summary=(
            f"Slide {slide_number} discusses: {normalized[:80]}" if normalized
            else f"Slide {slide_number} has no extractable text"
        ),
        modality_type=_MOCK_MODALITIES[content_hash % len(_MOCK_MODALITIES)],
        role_in_deck=role,
        eligible_for_questions=eligible,
        eligibility_reason=reason,
        question_budget=budget,
        question_mix=mix,
    )


def _synthesize(seed: int, payload: dict[str, Any]) -> DeckSynthesisOutput:
    total = int(payload["total_slides"])
    plans: list[SlidePlan] = []
    for entry in payload["slide_candidates"]:
        candidates = sorted(
            entry["candidates"],
            key=lambda candidate: (candidate["plan"]["question_budget"], candidate["window_index"]),
        )
        plans.append(SlidePlan.model_validate(candidates[0]["plan"]))
    plans.sort(key=lambda plan: plan.slide_number)

    sections: list[SectionPlan] = []
    start = 1
    while start <= total:
        end = min(start + SECTION_SPAN - 1, total)
        lead = next((plan for plan in plans if plan.slide_number == start), None)
        sections.append(
            SectionPlan(
                section_id=f"sec_{len(sections) + 1}",
                start_slide=start,
                end_slide=end,
                section_title=(lead.slide_title if lead else f"Slides {start}-{end}"),
                section_summary=f"Covers slides {start} through {end}",
            )
        )
        start = end + 1

    topic_source = plans[0].slide_title if plans else "Lecture deck"
    modalities = sorted({plan.modality_type.value for plan in plans})
    analysis = DeckAnalysis(
        deck_topic=f"{topic_source} (deck of {total} slides)",
        target_audience="undergraduate",
        learning_goals=list(_LEARNING_GOALS),
        sections=sections,
        coverage_targets=modalities,
        global_notes="Plan merged conservatively from overlapping window analyses",
    )
    return DeckSynthesisOutput(deck_analysis=analysis, slide_plans=plans)


def _concepts_from_text(text: str) -> list[str]:
    words: list[str] = []
    for token in re.findall(r"[A-Za-z][A-Za-z-]{3,}", text):
        lowered = token.lower()
        if lowered not in (word.lower() for word in words):
            words.append(token)
        if len(words) == 3:
            break
    return words or ["main idea"]


def _annotate(seed: int, payload: dict[str, Any]) -> SlideAnnotation:
    plan = SlidePlan.model_validate(payload["slide_plan"])
    slide_text = payload.get("slide_text", "")
    slide_number = plan.slide_number
    content_hash = slide_content_hash(seed, Phase.SLIDE_ANNOTATOR, slide_number, slide_text)
    budget = plan.question_budget
    mix = list(plan.question_mix)
    concepts = _concepts_from_text(slide_text)

    evidence_regions: list[str] = []
    if budget >= 1:
        region_count = 2 + content_hash % 5  # always within the allowed 2..6
        evidence_regions = [
            f"Region {index + 1}: text block mentioning {concepts[index % len(concepts)]}"
            for index in range(region_count)
        ]

    questions: list[Question] = []
    for index in range(budget):
        question_type = mix[index % len(mix)] if mix else QuestionType.SHORT_ANSWER
        concept = concepts[index % len(concepts)]
        if question_type is QuestionType.MCQ:
            options = [
                f"{concept} (as stated on the slide)",
                f"An unrelated property of {concept}",
                f"The inverse of {concept}",
                f"None of the above",
            ]
            answer = options[0]
        else:
            options = []
            answer = f"The slide states the role of {concept}"
        questions.append(
            Question(
                question_id=question_id_for(slide_number, index + 1),
                question_type=question_type,
                prompt=f"Q{index + 1}: What does slide {slide_number} state about {concept}?",
                options=options,
                answer=answer,
                evidence_span=f"Text on slide {slide_number} naming {concept}",
                difficulty=_DIFFICULTIES[(content_hash + index) % len(_DIFFICULTIES)],
                purpose="comprehension check",
                fidelity_score=4,
                fidelity_notes="Answerable from the visible slide content alone",
            )
        )

    if budget >= 1:
        evaluation = SlideEvaluation(
            coverage_score=3 + content_hash % 3,
            coverage_notes="Questions span the slide's main visible content",
            scaffolding_score=3 + (content_hash >> 4) % 3,
            scaffolding_notes="Progression moves from recall toward interpretation",
        )
    else:
        evaluation = SlideEvaluation(
            coverage_score=None,
            coverage_notes="",
            scaffolding_score=None,
            scaffolding_notes="",
        )

    return SlideAnnotation(
        slide_id=slide_id_for(slide_number),
        slide_number=slide_number,
        slide_title=plan.slide_title,
        modality_type=plan.modality_type,
        role_in_deck=plan.role_in_deck,
        local_summary=plan.local_summary,
        key_concepts=concepts if budget >= 1 else [],
        evidence_regions=evidence_regions,
        eligible_for_questions=plan.eligible_for_questions,
        eligibility_reason=plan.eligibility_reason,
        question_budget=budget,
        question_mix=mix,
        questions=questions,
        evaluation=evaluation,
    )


def _reconcile(seed: int, payload: dict[str, Any]) -> ReconciliationResult:
    actions: list[SlideAction] = []
    reduced: list[int] = []
    for entry in payload["slide_annotations"]:
        slide_number = int(entry["slide_number"])
        budget = int(entry["question_budget"])
        slide_hash = _stable_hash(seed, Phase.RECONCILIATION.value, slide_number)
        if slide_hash % 7 == 0 and budget >= 2:
            actions.append(
                SlideAction(
                    slide_number=slide_number,
                    action="reduce",
                    new_question_budget=budget - 1,
                    reason="Question set overlaps neighboring coverage; trim one item",
                )
            )
            reduced.append(slide_number)
        else:
            actions.append(
                SlideAction(
                    slide_number=slide_number,
                    action="keep",
                    new_question_budget=budget,
                    reason="Coverage and scaffolding adequate for this slide",
                )
            )
    return ReconciliationResult(
        revised_slide_actions=actions,
        deck_reconciliation_notes="Budgets reviewed jointly across the deck",
        uncovered_learning_goals=[],
        redundancy_warnings=[
            f"slide {slide_number}: similar coverage to a nearby slide" for slide_number in reduced
        ],
    )


def mock_generate(request: ProviderRequest, seed: int):
    """Build the schema-valid phase value for a request; pure and deterministic."""
    if request.phase is Phase.WINDOW_PLANNER:
        blocks = _parse_slide_blocks(request.text_parts)
        return WindowPlannerOutput(
            slides=[_window_plan(seed, number, body) for number, body in blocks]
        )
    payload = json.loads(request.text_parts[0])
    if request.phase is Phase.DECK_SYNTHESIS:
        return _synthesize(seed, payload)
    if request.phase is Phase.SLIDE_ANNOTATOR:
        return _annotate(seed, payload)
    return _reconcile(seed, payload)


class MockTransport:
    """Transport adapter: serializes mock_generate output as a JSON response."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def complete(self, request: ProviderRequest) -> str:
        value = mock_generate(request, self.seed)
        return json.dumps(value.model_dump(mode="json"), ensure_ascii=False)
