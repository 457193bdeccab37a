"""Domain types for the annotation document and the intermediate pipeline values.

Every type validates its own vocabulary and numeric constraints; cross-field
rules (question counts vs. budgets, null evaluation pairing, slide coverage)
live in model validators so that a document parsed from JSON is valid by
construction. Violations are accumulated and reported with the offending
field named, never raised one at a time.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

SCHEMA_VERSION = "1.0.0"


class ModalityType(str, Enum):
    """Dominant visual form of a slide. Closed vocabulary."""

    TEXT = "text"
    DIAGRAM = "diagram"
    TABLE = "table"
    CHART = "chart"
    LAYOUT_AWARE = "layout-aware"
    IMAGE_PLUS_TEXT = "image-plus-text"
    MIXED = "mixed"


class RoleInDeck(str, Enum):
    """Instructional role of a slide within the deck. Closed vocabulary."""

    TITLE = "title"
    AGENDA = "agenda"
    TRANSITION = "transition"
    DEFINITION = "definition"
    EXAMPLE = "example"
    MECHANISM = "mechanism"
    COMPARISON = "comparison"
    RESULT = "result"
    SUMMARY = "summary"
    ADMINISTRATIVE = "administrative"
    APPENDIX = "appendix"
    REVIEW = "review"
    REFERENCE = "reference"


class QuestionType(str, Enum):
    """Allowed question forms; also the vocabulary for question_mix entries."""

    FILL_BLANK = "fill_blank"
    MCQ = "mcq"
    OPEN_ENDED = "open_ended"
    SHORT_ANSWER = "short_answer"
    DIAGRAM_LABELING = "diagram_labeling"
    COMPARISON = "comparison"
    INTERPRETATION = "interpretation"
    EVIDENCE_LOCALIZATION = "evidence_localization"


class Difficulty(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


class ActionType(str, Enum):
    """Deck-level reconciliation actions. Closed vocabulary."""

    KEEP = "keep"
    REDUCE = "reduce"
    EXPAND = "expand"
    ZERO_OUT = "zero_out"
    REWRITE = "rewrite"


class StrictModel(BaseModel):
    """Immutable, closed-schema base for all wire types."""

    model_config = ConfigDict(frozen=True, extra="forbid")


def _parse_utc_instant(value: str) -> datetime:
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None or parsed.utcoffset() != timezone.utc.utcoffset(None):
        raise ValueError(f"processed_at: '{value}' is not a UTC instant")
    return parsed


class DeckMetadata(StrictModel):
    deck_id: str
    deck: str
    deck_url: Optional[str] = None
    source_file: str
    total_slides: int = Field(ge=1)
    processed_at: str

    @field_validator("processed_at")
    @classmethod
    def _processed_at_is_utc(cls, value: str) -> str:
        _parse_utc_instant(value)
        return value


class SectionPlan(StrictModel):
    section_id: str
    start_slide: int = Field(ge=1)
    end_slide: int = Field(ge=1)
    section_title: str
    section_summary: str

    @model_validator(mode="after")
    def _ordered_bounds(self) -> "SectionPlan":
        if self.start_slide > self.end_slide:
            raise ValueError(
                f"start_slide: {self.start_slide} must not exceed end_slide {self.end_slide}"
            )
        return self


class DeckAnalysis(StrictModel):
    deck_topic: str
    target_audience: str
    learning_goals: list[str] = Field(min_length=1)
    sections: list[SectionPlan]
    coverage_targets: list[str]
    global_notes: str

    @model_validator(mode="after")
    def _sections_contiguous(self) -> "DeckAnalysis":
        problems: list[str] = []
        if self.sections:
            if self.sections[0].start_slide != 1:
                problems.append("sections: first section must start at slide 1")
            for prev, cur in zip(self.sections, self.sections[1:]):
                if cur.start_slide != prev.end_slide + 1:
                    problems.append(
                        "sections: must be contiguous and ordered "
                        f"(section '{cur.section_id}' starts at {cur.start_slide}, "
                        f"previous ends at {prev.end_slide})"
                    )
        if problems:
            raise ValueError("; ".join(problems))
        return self


class SlidePlan(StrictModel):
    slide_number: int = Field(ge=1)
    slide_title: str
    local_summary: str
    modality_type: ModalityType
    role_in_deck: RoleInDeck
    eligible_for_questions: bool
    eligibility_reason: str
    question_budget: int = Field(ge=0, le=5)
    question_mix: list[QuestionType]

    @model_validator(mode="after")
    def _ineligible_means_zero(self) -> "SlidePlan":
        if not self.eligible_for_questions and self.question_budget != 0:
            raise ValueError(
                "question_budget: must be 0 when eligible_for_questions is false "
                f"(got {self.question_budget})"
            )
        return self


class Question(StrictModel):
    question_id: str
    question_type: QuestionType
    prompt: str
    options: list[str]
    answer: str
    evidence_span: str
    difficulty: Difficulty
    purpose: str
    fidelity_score: int = Field(ge=1, le=5)
    fidelity_notes: str

    @model_validator(mode="after")
    def _options_match_type(self) -> "Question":
        if self.question_type is QuestionType.MCQ:
            if len(self.options) != 4:
                raise ValueError(
                    f"options: question_type 'mcq' requires exactly 4 options (got {len(self.options)})"
                )
        elif self.options:
            raise ValueError(
                "options: must be an empty list unless question_type is 'mcq' "
                f"(got {len(self.options)} for '{self.question_type.value}')"
            )
        return self


class SlideEvaluation(StrictModel):
    coverage_score: Optional[int] = Field(default=None, ge=1, le=5)
    coverage_notes: str
    scaffolding_score: Optional[int] = Field(default=None, ge=1, le=5)
    scaffolding_notes: str


class SlideAnnotation(StrictModel):
    slide_id: str
    slide_number: int = Field(ge=1)
    slide_title: str
    modality_type: ModalityType
    role_in_deck: RoleInDeck
    local_summary: str
    key_concepts: list[str]
    evidence_regions: list[str]
    eligible_for_questions: bool
    eligibility_reason: str
    question_budget: int = Field(ge=0, le=5)
    question_mix: list[QuestionType]
    questions: list[Question]
    evaluation: SlideEvaluation

    @model_validator(mode="after")
    def _cross_field_rules(self) -> "SlideAnnotation":
        problems: list[str] = []
        if len(self.questions) != self.question_budget:
            problems.append(
                f"questions: count {len(self.questions)} must equal question_budget "
                f"{self.question_budget}"
            )
        if self.question_budget >= 1 and not 2 <= len(self.evidence_regions) <= 6:
            problems.append(
                f"evidence_regions: expected 2 to 6 entries when questions are assigned "
                f"(got {len(self.evidence_regions)})"
            )
        seen: set[str] = set()
        for question in self.questions:
            if question.question_id in seen:
                problems.append(f"questions: duplicate question_id '{question.question_id}'")
            seen.add(question.question_id)
        has_questions = bool(self.questions)
        scores = (self.evaluation.coverage_score, self.evaluation.scaffolding_score)
        if has_questions and any(score is None for score in scores):
            problems.append(
                "evaluation: coverage_score and scaffolding_score must be set when the "
                "slide has questions"
            )
        if not has_questions and any(score is not None for score in scores):
            problems.append(
                "evaluation: scores must be null when the slide intentionally has no questions"
            )
        if problems:
            raise ValueError("; ".join(problems))
        return self


class SlideAction(StrictModel):
    slide_number: int = Field(ge=1)
    action: ActionType
    new_question_budget: int = Field(ge=0, le=5)
    reason: str

    @model_validator(mode="after")
    def _zero_out_means_zero(self) -> "SlideAction":
        if self.action is ActionType.ZERO_OUT and self.new_question_budget != 0:
            raise ValueError(
                "new_question_budget: must be 0 for action 'zero_out' "
                f"(got {self.new_question_budget})"
            )
        return self


class ReconciliationResult(StrictModel):
    revised_slide_actions: list[SlideAction]
    deck_reconciliation_notes: str
    uncovered_learning_goals: list[str]
    redundancy_warnings: list[str]

    @model_validator(mode="after")
    def _one_action_per_slide(self) -> "ReconciliationResult":
        seen: set[int] = set()
        duplicates: list[int] = []
        for action in self.revised_slide_actions:
            if action.slide_number in seen:
                duplicates.append(action.slide_number)
            seen.add(action.slide_number)
        if duplicates:
            raise ValueError(
                "revised_slide_actions: duplicate slide_number entries "
                f"{sorted(set(duplicates))}"
            )
        return self


class FinalDocument(StrictModel):
    schema_version: str
    field_descriptions: dict[str, str]
    deck_metadata: DeckMetadata
    deck_analysis: DeckAnalysis
    reconciliation: ReconciliationResult
    slides: list[SlideAnnotation]

    @model_validator(mode="after")
    def _document_rules(self) -> "FinalDocument":
        problems: list[str] = []
        total = self.deck_metadata.total_slides
        numbers = [slide.slide_number for slide in self.slides]
        if numbers != sorted(numbers):
            problems.append("slides: must be sorted by slide_number")
        if sorted(numbers) != list(range(1, total + 1)):
            problems.append(
                f"slides: must cover 1..total_slides ({total}) exactly once "
                f"(got slide numbers {numbers})"
            )
        if self.deck_analysis.sections:
            last_end = self.deck_analysis.sections[-1].end_slide
            if last_end != total:
                problems.append(
                    f"sections: last section must end at total_slides {total} (ends at {last_end})"
                )
        action_numbers = sorted(
            action.slide_number for action in self.reconciliation.revised_slide_actions
        )
        if action_numbers != list(range(1, total + 1)):
            problems.append(
                "reconciliation: exactly one action per slide_number in "
                f"1..{total} required (got {action_numbers})"
            )
        budgets = {slide.slide_number: slide.question_budget for slide in self.slides}
        for action in self.reconciliation.revised_slide_actions:
            if action.action is ActionType.KEEP and action.slide_number in budgets:
                if action.new_question_budget != budgets[action.slide_number]:
                    problems.append(
                        f"reconciliation: 'keep' action for slide {action.slide_number} must "
                        f"carry the slide's budget {budgets[action.slide_number]} "
                        f"(got {action.new_question_budget})"
                    )
        if problems:
            raise ValueError("; ".join(problems))
        return self


# Wrapper shapes for the two generation phases whose payload is not a single
# document type. The other two phases return SlideAnnotation and
# ReconciliationResult directly.


class WindowPlannerOutput(StrictModel):
    slides: list[SlidePlan]


class DeckSynthesisOutput(StrictModel):
    deck_analysis: DeckAnalysis
    slide_plans: list[SlidePlan]


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


class DocumentParseError(ValueError):
    """Raised when JSON text cannot be parsed into a valid FinalDocument."""


def _format_violation(error: Mapping[str, Any]) -> str:
    location = ".".join(str(part) for part in error["loc"])
    message = error["msg"]
    prefix = "Value error, "
    if message.startswith(prefix):
        message = message[len(prefix):]
    return f"{location}: {message}" if location else message


def _violations_for(model_cls: type[BaseModel], value: Any) -> list[str]:
    if isinstance(value, BaseModel):
        value = value.model_dump(mode="python")
    try:
        model_cls.model_validate(value)
    except ValidationError as exc:
        return [_format_violation(err) for err in exc.errors()]
    return []


def validate_question(question: Question | Mapping[str, Any]) -> ValidationResult:
    """Check one question against the full rule set; violations are data, not faults."""
    violations = _violations_for(Question, question)
    return ValidationResult(ok=not violations, violations=tuple(violations))


def validate_final_document(document: FinalDocument | Mapping[str, Any]) -> ValidationResult:
    """Check an assembled document, including every nested invariant."""
    violations = _violations_for(FinalDocument, document)
    return ValidationResult(ok=not violations, violations=tuple(violations))


def serialize_document(document: FinalDocument) -> str:
    """Emit the document as UTF-8 JSON text with keys in canonical order."""
    payload = document.model_dump(mode="json")
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def parse_document(text: str) -> FinalDocument:
    """Parse and validate JSON text; raises DocumentParseError with positions."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentParseError(
            f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    try:
        return FinalDocument.model_validate(payload)
    except ValidationError as exc:
        details = "; ".join(_format_violation(err) for err in exc.errors())
        raise DocumentParseError(f"document failed validation: {details}") from exc


def deck_id_for(pdf_bytes: bytes) -> str:
    """Stable deck identifier: leading hex of a content hash of the PDF bytes."""
    return hashlib.sha256(pdf_bytes).hexdigest()[:12]


def slide_id_for(slide_number: int) -> str:
    return f"slide_{slide_number:04d}"


def question_id_for(slide_number: int, index: int) -> str:
    return f"s{slide_number}_q{index}"


FIELD_DESCRIPTIONS: dict[str, str] = {
    "schema_version": "Version of this JSON schema.",
    "field_descriptions": "Field descriptions mapping",
    "deck_metadata.deck_id": "Stable identifier for this deck.",
    "deck_metadata.deck": "Full academic citation for the deck.",
    "deck_metadata.deck_url": "Original source URL for the deck, if known.",
    "deck_metadata.source_file": "Local uploaded PDF filename.",
    "deck_metadata.total_slides": "Total number of PDF pages processed as slides.",
    "deck_metadata.processed_at": "UTC timestamp when this JSON was produced.",
    "deck_analysis.deck_topic": "Short description of the overall topic of the deck.",
    "deck_analysis.target_audience": (
        "Estimated audience level; for example undergraduate, graduate, or mixed."
    ),
    "deck_analysis.learning_goals": "List of deck-level learning goals inferred from the slides.",
    "deck_analysis.sections": "Contiguous, ordered section boundaries for the full deck.",
    "deck_analysis.coverage_targets": (
        "Deck-level content targets such as text, diagram, table, chart, layout-aware, "
        "or image-plus-text."
    ),
    "deck_analysis.global_notes": "Important global caveats, ambiguities, or observations.",
    "reconciliation.revised_slide_actions": "One keep/reduce/expand/zero_out/rewrite action per slide.",
    "reconciliation.deck_reconciliation_notes": (
        "Global notes about redundancy, balancing, and quality adjustments across the deck."
    ),
    "reconciliation.uncovered_learning_goals": (
        "Deck learning goals that remain weakly covered after reconciliation."
    ),
    "reconciliation.redundancy_warnings": (
        "Warnings about overlapping or repeated question sets across slides."
    ),
    "slides.slide_id": "Stable identifier for a slide within the deck.",
    "slides.slide_number": "1-based slide number corresponding to the PDF page order.",
    "slides.slide_title": (
        "Visible title on the slide if present; otherwise a concise generated title."
    ),
    "slides.modality_type": (
        "Dominant visual form of the slide; for example text, diagram, table, chart, "
        "layout-aware, image-plus-text, or mixed."
    ),
    "slides.role_in_deck": (
        "Instructional role of the slide within the deck; for example title, agenda, "
        "transition, definition, example, mechanism, result, summary, or appendix."
    ),
    "slides.local_summary": "One- or two-sentence summary of the slide's main instructional content.",
    "slides.key_concepts": "List of key concepts explicitly present on the slide.",
    "slides.evidence_regions": (
        "List of human-readable descriptions of important visible regions on the slide."
    ),
    "slides.eligible_for_questions": "Whether the slide should receive any comprehension questions.",
    "slides.eligibility_reason": (
        "Explanation for why the slide should or should not receive questions."
    ),
    "slides.question_budget": "Recommended number of questions for this slide in deck context.",
    "slides.question_mix": "Recommended mix of question types for this slide.",
    "slides.questions.question_id": "Stable identifier for a question within a slide.",
    "slides.questions.question_type": "Controlled label for the question form or reasoning type.",
    "slides.questions.prompt": "Question text shown to the learner.",
    "slides.questions.options": "List of answer options for a multiple-choice item; empty otherwise.",
    "slides.questions.answer": "Gold answer or bounded reference answer grounded in the slide.",
    "slides.questions.evidence_span": "Short description of where the answer is visible on the slide.",
    "slides.questions.difficulty": "Relative difficulty label such as low, medium, or high.",
    "slides.questions.purpose": (
        "Instructional purpose such as terminology, relation check, interpretation, or synthesis."
    ),
    "slides.questions.fidelity_score": (
        "1-5 judgment of whether the question is answerable from the slide alone."
    ),
    "slides.questions.fidelity_notes": "Short rationale for the fidelity score.",
    "slides.evaluation.coverage_score": (
        "1-5 score for how well the slide's question bundle covers the slide's important "
        "content; null when the slide intentionally has no questions."
    ),
    "slides.evaluation.coverage_notes": "Short rationale for the coverage score.",
    "slides.evaluation.scaffolding_score": (
        "1-5 score for how well the question bundle forms an instructional progression; "
        "null when the slide intentionally has no questions."
    ),
    "slides.evaluation.scaffolding_notes": "Short rationale for the scaffolding score.",
}
