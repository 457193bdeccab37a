"""Shared builders: synthetic PDFs and randomly generated valid documents."""

from __future__ import annotations

import io
import random

from reportlab.pdfgen import canvas as rl_canvas

from deckqa.schema import (
    FIELD_DESCRIPTIONS,
    SCHEMA_VERSION,
    ActionType,
    DeckAnalysis,
    DeckMetadata,
    Difficulty,
    FinalDocument,
    ModalityType,
    Question,
    QuestionType,
    ReconciliationResult,
    RoleInDeck,
    SectionPlan,
    SlideAction,
    SlideAnnotation,
    SlideEvaluation,
    question_id_for,
    slide_id_for,
)

LETTER = (612, 792)


def make_pdf(texts, pagesize=LETTER, compress=1) -> bytes:
    """Deterministic multi-page PDF with one text block per page."""
    buffer = io.BytesIO()
    canvas = rl_canvas.Canvas(buffer, pagesize=pagesize, invariant=1, pageCompression=compress)
    for text in texts:
        canvas.setFont("Helvetica", 18)
        y = pagesize[1] - 72
        for line in text.split("\n"):
            canvas.drawString(72, y, line)
            y -= 24
        canvas.showPage()
    canvas.save()
    return buffer.getvalue()


def make_encrypted_pdf() -> bytes:
    buffer = io.BytesIO()
    canvas = rl_canvas.Canvas(buffer, encrypt="secret", invariant=1)
    canvas.drawString(72, 720, "hidden")
    canvas.save()
    return buffer.getvalue()


ZERO_PAGE_PDF = b"""%PDF-1.4
1 0 obj
<< /Type /Catalog /Pages 2 0 R >>
endobj
2 0 obj
<< /Type /Pages /Kids [] /Count 0 >>
endobj
trailer
<< /Root 1 0 R /Size 3 >>
%%EOF"""


def golden_deck_texts() -> list[str]:
    """The pinned 20-slide deck: title, agenda, one duplicate pair, content."""
    texts = ["Deep Learning Basics"]
    texts.append("Agenda\nPerceptrons\nBackpropagation\nOptimizers\nRegularization")
    subjects = [
        "perceptron units and activation thresholds",
        "gradient descent over a loss surface",
        "backpropagation through composed layers",
        "learning-rate schedules and warmup",
        "momentum and adaptive optimizers",
        "weight decay as L2 regularization",
        "dropout as stochastic ensembling",
        "batch normalization statistics",
        "convolutional feature maps",
        "pooling and spatial reduction",
        "recurrent state propagation",
        "attention weights over tokens",
        "residual connections and depth",
        "softmax outputs and cross-entropy",
        "train/validation/test splits",
        "overfitting and early stopping",
        "hyperparameter search strategies",
    ]
    for index, subject in enumerate(subjects, start=3):
        texts.append(
            f"Topic {index}: {subject}\n"
            f"This slide explains {subject} with a worked diagram.\n"
            f"Key takeaway {index}: understand {subject}."
        )
    # Slide 12 repeats slide 5 exactly: the planted duplicate pair.
    texts[11] = texts[4]
    assert len(texts) == 19
    texts.append("Summary\nReview of the main mechanisms covered today.")
    return texts


def make_golden_pdf() -> bytes:
    return make_pdf(golden_deck_texts())


# -- random valid documents -----------------------------------------------------


def _random_question(rng: random.Random, slide_number: int, index: int) -> Question:
    question_type = rng.choice(list(QuestionType))
    options = (
        [f"option {letter}" for letter in "ABCD"] if question_type is QuestionType.MCQ else []
    )
    return Question(
        question_id=question_id_for(slide_number, index + 1),
        question_type=question_type,
        prompt=f"Prompt {slide_number}.{index}",
        options=options,
        answer="option A" if options else f"answer {index}",
        evidence_span=f"region {index}",
        difficulty=rng.choice(list(Difficulty)),
        purpose="check",
        fidelity_score=rng.randint(1, 5),
        fidelity_notes="grounded",
    )


def _random_slide(rng: random.Random, slide_number: int) -> SlideAnnotation:
    budget = rng.randint(0, 5)
    questions = [_random_question(rng, slide_number, index) for index in range(budget)]
    if budget >= 1:
        evidence = [f"region {index}" for index in range(rng.randint(2, 6))]
        evaluation = SlideEvaluation(
            coverage_score=rng.randint(1, 5),
            coverage_notes="ok",
            scaffolding_score=rng.randint(1, 5),
            scaffolding_notes="ok",
        )
    else:
        evidence = [] if rng.random() < 0.5 else [f"region {index}" for index in range(rng.randint(0, 6))]
        evaluation = SlideEvaluation(
            coverage_score=None, coverage_notes="", scaffolding_score=None, scaffolding_notes=""
        )
    eligible = budget >= 1 and rng.random() < 0.95
    return SlideAnnotation(
        slide_id=slide_id_for(slide_number),
        slide_number=slide_number,
        slide_title=f"Slide {slide_number}",
        modality_type=rng.choice(list(ModalityType)),
        role_in_deck=rng.choice(list(RoleInDeck)),
        local_summary=f"summary {slide_number}",
        key_concepts=[f"concept {index}" for index in range(rng.randint(0, 3))],
        evidence_regions=evidence,
        eligible_for_questions=eligible if budget >= 1 else False,
        eligibility_reason="generated",
        question_budget=budget,
        question_mix=[rng.choice(list(QuestionType)) for _ in range(rng.randint(0, budget or 1))],
        questions=questions,
        evaluation=evaluation,
    )


def build_random_document(rng: random.Random) -> FinalDocument:
    """A structurally valid random document (generator/validator agreement)."""
    total = rng.randint(1, 8)
    slides = [_random_slide(rng, number) for number in range(1, total + 1)]

    sections: list[SectionPlan] = []
    start = 1
    while start <= total:
        end = rng.randint(start, total)
        sections.append(
            SectionPlan(
                section_id=f"sec_{len(sections) + 1}",
                start_slide=start,
                end_slide=end,
                section_title=f"Section {len(sections) + 1}",
                section_summary="covers things",
            )
        )
        start = end + 1

    actions: list[SlideAction] = []
    for slide in slides:
        roll = rng.random()
        if roll < 0.6:
            action, new_budget = ActionType.KEEP, slide.question_budget
        elif roll < 0.7 and slide.question_budget == 0:
            action, new_budget = ActionType.ZERO_OUT, 0
        else:
            action = rng.choice([ActionType.REDUCE, ActionType.EXPAND, ActionType.REWRITE])
            new_budget = slide.question_budget  # post-apply documents carry the final budget
        actions.append(
            SlideAction(
                slide_number=slide.slide_number,
                action=action,
                new_question_budget=new_budget,
                reason="generated",
            )
        )

    return FinalDocument(
        schema_version=SCHEMA_VERSION,
        field_descriptions=dict(FIELD_DESCRIPTIONS),
        deck_metadata=DeckMetadata(
            deck_id=f"{rng.getrandbits(48):012x}",
            deck="Synthetic deck, generated for tests",
            deck_url=None if rng.random() < 0.5 else "https://example.org/deck.pdf",
            source_file="deck.pdf",
            total_slides=total,
            processed_at="2024-06-01T12:00:00Z",
        ),
        deck_analysis=DeckAnalysis(
            deck_topic="synthetic",
            target_audience="mixed",
            learning_goals=[f"goal {index}" for index in range(1, rng.randint(2, 4))],
            sections=sections,
            coverage_targets=["text"],
            global_notes="",
        ),
        reconciliation=ReconciliationResult(
            revised_slide_actions=actions,
            deck_reconciliation_notes="",
            uncovered_learning_goals=[],
            redundancy_warnings=[],
        ),
        slides=slides,
    )
