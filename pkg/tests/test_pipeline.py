from __future__ import annotations

import json
import threading
from datetime import datetime, timezone

import pytest

from deckqa.ingest import NotAPdfError, extract_deck
from deckqa.mockprovider import MockTransport
from deckqa.pipeline import (
    EventKind,
    PipelineConfig,
    apply_reconciliation,
    compile_final_document,
    CompilationError,
    parse_event_line,
    plan_from_annotation,
    run_annotation_phase,
    run_pipeline,
    run_synthesis_phase,
    run_window_phase,
)
from deckqa.provider import Phase, ProviderConfig
from deckqa.schema import (
    ActionType,
    Difficulty,
    ModalityType,
    Question,
    QuestionType,
    ReconciliationResult,
    RoleInDeck,
    SlideAction,
    SlideAnnotation,
    SlideEvaluation,
    SlidePlan,
    question_id_for,
    slide_id_for,
    validate_final_document,
)
from deckqa.windowing import WindowPlanResult, collate_candidates, plan_windows
from conftest import FIXED_INSTANT, fixed_clock
from helpers import make_pdf


def mock_config(seed: int = 7, **overrides) -> PipelineConfig:
    defaults = dict(
        window_size=6,
        overlap=2,
        render_scale=0.5,
        provider=ProviderConfig(mode="mock", seed=seed),
        clock=fixed_clock,
        source_file="test.pdf",
    )
    defaults.update(overrides)
    return PipelineConfig(**defaults)


def make_annotation(number: int, budget: int) -> SlideAnnotation:
    questions = [
        Question(
            question_id=question_id_for(number, index + 1),
            question_type=QuestionType.SHORT_ANSWER,
            prompt=f"q{index}",
            options=[],
            answer="a",
            evidence_span="e",
            difficulty=Difficulty.LOW,
            purpose="p",
            fidelity_score=4,
            fidelity_notes="n",
        )
        for index in range(budget)
    ]
    if budget:
        evaluation = SlideEvaluation(
            coverage_score=4, coverage_notes="c", scaffolding_score=4, scaffolding_notes="s"
        )
    else:
        evaluation = SlideEvaluation(
            coverage_score=None, coverage_notes="", scaffolding_score=None, scaffolding_notes=""
        )
    return SlideAnnotation(
        slide_id=slide_id_for(number),
        slide_number=number,
        slide_title=f"Slide {number}",
        modality_type=ModalityType.TEXT,
        role_in_deck=RoleInDeck.MECHANISM,
        local_summary="sum",
        key_concepts=["k"],
        evidence_regions=["a", "b"] if budget else [],
        eligible_for_questions=budget > 0,
        eligibility_reason="original reason",
        question_budget=budget,
        question_mix=[QuestionType.SHORT_ANSWER] * budget,
        questions=questions,
        evaluation=evaluation,
    )


def single_action_result(action: SlideAction) -> ReconciliationResult:
    return ReconciliationResult(
        revised_slide_actions=[action],
        deck_reconciliation_notes="",
        uncovered_learning_goals=[],
        redundancy_warnings=[],
    )


class TestApplyReconciliation:
    def test_keep_is_identity(self):
        annotations = [make_annotation(1, 2)]
        action = SlideAction(slide_number=1, action="keep", new_question_budget=2, reason="fine")
        updated, rerun = apply_reconciliation(annotations, single_action_result(action))
        assert updated == annotations
        assert rerun == set()

    def test_zero_out_empties_in_place(self):
        annotations = [make_annotation(4, 3)]
        action = SlideAction(
            slide_number=4, action="zero_out", new_question_budget=0, reason="redundant"
        )
        updated, rerun = apply_reconciliation(annotations, single_action_result(action))
        slide = updated[0]
        assert rerun == set()
        assert slide.question_budget == 0
        assert slide.questions == []
        assert slide.evaluation.coverage_score is None
        assert slide.evaluation.scaffolding_score is None
        assert "original reason" in slide.eligibility_reason
        assert "redundant" in slide.eligibility_reason

    def test_expand_schedules_rerun(self):
        annotations = [make_annotation(9, 2)]
        action = SlideAction(slide_number=9, action="expand", new_question_budget=4, reason="rich")
        updated, rerun = apply_reconciliation(annotations, single_action_result(action))
        assert rerun == {9}
        assert updated[0].question_budget == 4

    def test_reduce_to_zero_degrades_to_zero_out(self):
        annotations = [make_annotation(2, 1)]
        action = SlideAction(slide_number=2, action="reduce", new_question_budget=0, reason="thin")
        updated, rerun = apply_reconciliation(annotations, single_action_result(action))
        assert rerun == set()
        assert updated[0].question_budget == 0
        assert updated[0].questions == []
        assert updated[0].evaluation.coverage_score is None

    def test_rewrite_keeps_budget_but_reruns(self):
        annotations = [make_annotation(3, 2)]
        action = SlideAction(slide_number=3, action="rewrite", new_question_budget=2, reason="redo")
        updated, rerun = apply_reconciliation(annotations, single_action_result(action))
        assert rerun == {3}
        assert updated[0].question_budget == 2

    def test_out_of_range_budget_clamped(self):
        annotations = [make_annotation(5, 2)]
        action = SlideAction.model_construct(
            slide_number=5, action=ActionType.EXPAND, new_question_budget=7, reason="over"
        )
        updated, rerun = apply_reconciliation(annotations, single_action_result(action))
        assert updated[0].question_budget == 5
        assert rerun == {5}

    def test_unknown_slide_number_is_hard_error(self):
        annotations = [make_annotation(1, 1)]
        action = SlideAction(slide_number=9, action="keep", new_question_budget=1, reason="")
        with pytest.raises(ValueError, match="unknown slide"):
            apply_reconciliation(annotations, single_action_result(action))

    def test_missing_action_is_hard_error(self):
        annotations = [make_annotation(1, 1), make_annotation(2, 1)]
        action = SlideAction(slide_number=1, action="keep", new_question_budget=1, reason="")
        with pytest.raises(ValueError, match="no action for slide"):
            apply_reconciliation(annotations, single_action_result(action))


class TestPhases:
    def test_window_phase_counts(self, small_pdf):
        config = mock_config()
        deck = extract_deck(small_pdf, render_scale=0.5)
        windows = plan_windows(deck.total_slides, 6, 2)
        results = run_window_phase(deck, windows, config, MockTransport(7))
        assert len(results) == 1
        assert [p.slide_number for p in results[0].plans] == [1, 2, 3, 4]

    def test_window_phase_agenda_rule_applies(self, small_pdf):
        config = mock_config()
        deck = extract_deck(small_pdf, render_scale=0.5)
        windows = plan_windows(deck.total_slides, 6, 2)
        results = run_window_phase(deck, windows, config, MockTransport(7))
        agenda_plan = results[0].plans[1]
        assert agenda_plan.role_in_deck is RoleInDeck.AGENDA
        assert agenda_plan.question_budget == 0

    def test_synthesis_takes_min_budget_on_conflict(self):
        def plan(number: int, budget: int) -> SlidePlan:
            return SlidePlan(
                slide_number=number,
                slide_title=f"Slide {number}",
                local_summary=f"summary {number} b{budget}",
                modality_type=ModalityType.TEXT,
                role_in_deck=RoleInDeck.MECHANISM,
                eligible_for_questions=budget >= 1,
                eligibility_reason="r",
                question_budget=budget,
                question_mix=[QuestionType.SHORT_ANSWER] * budget,
            )

        windows = plan_windows(10, 6, 2)
        first = WindowPlanResult(
            window=windows[0],
            plans=tuple(plan(n, 4 if n == 5 else 1) for n in range(1, 7)),
        )
        second = WindowPlanResult(
            window=windows[1],
            plans=tuple(plan(n, 2 if n == 5 else 1) for n in range(5, 11)),
        )
        candidates = collate_candidates([first, second], 10)
        config = mock_config()
        analysis, plans = run_synthesis_phase(candidates, 10, config, MockTransport(7))
        merged = {p.slide_number: p for p in plans}
        assert merged[5].question_budget == 2
        assert merged[5].local_summary == "summary 5 b2"
        assert len(plans) == 10
        assert analysis.sections[-1].end_slide == 10

    def test_annotation_phase_budget_zero_is_local(self, small_pdf):
        config = mock_config()
        deck = extract_deck(small_pdf, render_scale=0.5)
        windows = plan_windows(deck.total_slides, 6, 2)
        results = run_window_phase(deck, windows, config, MockTransport(7))
        candidates = collate_candidates(results, deck.total_slides)
        analysis, plans = run_synthesis_phase(candidates, deck.total_slides, config, MockTransport(7))

        calls = []

        class Counting(MockTransport):
            def complete(self, request):
                calls.append(request.phase)
                return super().complete(request)

        annotations = run_annotation_phase(
            plans, analysis, deck, config, Counting(7)
        )
        by_number = {a.slide_number: a for a in annotations}
        for plan in plans:
            annotation = by_number[plan.slide_number]
            assert len(annotation.questions) == annotation.question_budget == plan.question_budget
            if plan.question_budget == 0:
                assert annotation.evaluation.coverage_score is None
        assert calls.count(Phase.SLIDE_ANNOTATOR) == sum(
            1 for p in plans if p.question_budget >= 1
        )


class TestCompile:
    def test_tampered_budget_fails_compilation(self):
        from deckqa.schema import DeckAnalysis, DeckMetadata, SectionPlan

        annotation = make_annotation(1, 2)
        bad = annotation.model_copy(update={"question_budget": 3})
        metadata = DeckMetadata(
            deck_id="abc123",
            deck="",
            deck_url=None,
            source_file="x.pdf",
            total_slides=1,
            processed_at="2000-01-01T00:00:00Z",
        )
        analysis = DeckAnalysis(
            deck_topic="t",
            target_audience="a",
            learning_goals=["g"],
            sections=[
                SectionPlan(
                    section_id="sec_1",
                    start_slide=1,
                    end_slide=1,
                    section_title="s",
                    section_summary="",
                )
            ],
            coverage_targets=[],
            global_notes="",
        )
        action = SlideAction(slide_number=1, action="rewrite", new_question_budget=3, reason="")
        with pytest.raises(CompilationError):
            compile_final_document(metadata, analysis, single_action_result(action), [bad])


class TestRunPipeline:
    def test_end_to_end_valid_document(self, small_pdf):
        events = []
        document = run_pipeline(small_pdf, mock_config(), event_sink=events.append)
        assert validate_final_document(document).ok
        assert document.deck_metadata.total_slides == 4
        assert document.deck_metadata.processed_at == "2000-01-01T00:00:00Z"
        assert document.deck_metadata.source_file == "test.pdf"
        kinds = [event.kind for event in events]
        assert kinds[0] == EventKind.PHASE_STARTED
        assert events[0].payload["phase"] == "preprocess"
        assert kinds[-1] == EventKind.COMPLETED
        assert kinds.count(EventKind.COMPLETED) == 1

    def test_phase_order_follows_flow(self, golden_pdf):
        events = []
        run_pipeline(golden_pdf, mock_config(window_size=8, overlap=2), event_sink=events.append)
        phases = [
            event.payload["phase"] for event in events if event.kind == EventKind.PHASE_STARTED
        ]
        assert phases == [
            "preprocess",
            "window_planning",
            "deck_synthesis",
            "heuristics",
            "annotation",
            "reconciliation",
            "re_annotation",
            "compile",
        ]
        kind_order = [event.kind for event in events]
        assert kind_order.index(EventKind.RECONCILIATION_DONE) < kind_order.index(
            EventKind.SLIDE_REANNOTATED
        )

    def test_title_only_deck_zeroed_with_null_scores(self):
        pdf = make_pdf(["Tiny Deck Title"])
        document = run_pipeline(pdf, mock_config())
        slide = document.slides[0]
        assert slide.role_in_deck is RoleInDeck.TITLE
        assert slide.question_budget == 0
        assert slide.questions == []
        assert slide.evaluation.coverage_score is None
        assert slide.evaluation.scaffolding_score is None

    def test_corrupt_pdf_emits_error_event_and_raises(self):
        events = []
        with pytest.raises(NotAPdfError):
            run_pipeline(b"not a pdf", mock_config(), event_sink=events.append)
        assert events[-1].kind == EventKind.ERROR
        assert "error_type" in events[-1].payload

    def test_no_slide_annotated_twice_unless_rerun(self, golden_pdf):
        lock = threading.Lock()
        annotate_calls: dict[int, int] = {}

        class Counting(MockTransport):
            def complete(self, request):
                if request.phase is Phase.SLIDE_ANNOTATOR:
                    payload = json.loads(request.text_parts[0])
                    number = payload["slide_number"]
                    with lock:
                        annotate_calls[number] = annotate_calls.get(number, 0) + 1
                return super().complete(request)

        events = []
        config = mock_config(window_size=8, overlap=2)
        document = run_pipeline(
            golden_pdf, config, transport=Counting(7), event_sink=events.append
        )
        rerun = {
            event.payload["slide_number"]
            for event in events
            if event.kind == EventKind.SLIDE_REANNOTATED
        }
        assert rerun, "the golden deck must exercise re-annotation"
        for number, count in annotate_calls.items():
            assert count == (2 if number in rerun else 1), f"slide {number} called {count}x"
        for event in events:
            if event.kind == EventKind.SLIDE_REANNOTATED:
                slide = next(
                    s for s in document.slides if s.slide_number == event.payload["slide_number"]
                )
                assert len(slide.questions) == slide.question_budget

    def test_rerun_budgets_match_actions(self, golden_pdf):
        document = run_pipeline(golden_pdf, mock_config(window_size=8, overlap=2))
        budgets = {s.slide_number: s.question_budget for s in document.slides}
        for action in document.reconciliation.revised_slide_actions:
            assert budgets[action.slide_number] == action.new_question_budget

    def test_debug_dump_layout(self, small_pdf, tmp_path):
        config = mock_config(debug_dir=tmp_path / "dumps")
        run_pipeline(small_pdf, config)
        names = sorted(p.name for p in (tmp_path / "dumps").iterdir())
        assert names == [
            "final.json",
            "phase1_windows.json",
            "phase2_deck.json",
            "phase2b_heuristics.json",
            "phase3_annotations.json",
            "phase4_reconciliation.json",
        ]
        final = json.loads((tmp_path / "dumps" / "final.json").read_text())
        assert validate_final_document(final).ok

    def test_event_lines_round_trip(self, small_pdf):
        events = []
        run_pipeline(small_pdf, mock_config(), event_sink=events.append)
        for event in events:
            parsed = parse_event_line(event.to_json_line())
            assert parsed.kind == event.kind
            assert parsed.payload == json.loads(json.dumps(event.payload))

    def test_event_line_parser_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_event_line('{"event": "teleported", "at": "2000-01-01T00:00:00Z"}')
        with pytest.raises(KeyError):
            parse_event_line('{"at": "2000-01-01T00:00:00Z"}')
        with pytest.raises(ValueError):
            parse_event_line('{"event": "completed", "at": "not a time"}')
        with pytest.raises(ValueError):
            parse_event_line("[1, 2, 3]")


class TestPlanFromAnnotation:
    def test_round_trips_annotation_fields(self):
        annotation = make_annotation(6, 3)
        plan = plan_from_annotation(annotation)
        assert plan.slide_number == 6
        assert plan.question_budget == 3
        assert plan.eligible_for_questions
        zeroed = annotation.model_copy(update={"question_budget": 0})
        assert not plan_from_annotation(zeroed).eligible_for_questions
