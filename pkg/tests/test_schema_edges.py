"""Edge validation: section contiguity, timestamps, plan eligibility."""

from __future__ import annotations

import pytest
from pydantic import ValidationError

from deckqa.schema import (
    DeckAnalysis,
    DeckMetadata,
    SectionPlan,
    SlideAnnotation,
    SlideEvaluation,
    SlidePlan,
    deck_id_for,
    question_id_for,
    slide_id_for,
)


def section(section_id: str, start: int, end: int) -> dict:
    return {
        "section_id": section_id,
        "start_slide": start,
        "end_slide": end,
        "section_title": "t",
        "section_summary": "s",
    }


def analysis_payload(sections: list[dict]) -> dict:
    return {
        "deck_topic": "topic",
        "target_audience": "mixed",
        "learning_goals": ["g1"],
        "sections": sections,
        "coverage_targets": [],
        "global_notes": "",
    }


class TestSections:
    def test_inverted_bounds_rejected(self):
        with pytest.raises(ValidationError, match="must not exceed end_slide"):
            SectionPlan.model_validate(section("s1", 5, 3))

    def test_gap_between_sections_rejected(self):
        with pytest.raises(ValidationError, match="contiguous"):
            DeckAnalysis.model_validate(
                analysis_payload([section("s1", 1, 3), section("s2", 5, 8)])
            )

    def test_overlapping_sections_rejected(self):
        with pytest.raises(ValidationError, match="contiguous"):
            DeckAnalysis.model_validate(
                analysis_payload([section("s1", 1, 4), section("s2", 4, 8)])
            )

    def test_first_section_must_start_at_one(self):
        with pytest.raises(ValidationError, match="start at slide 1"):
            DeckAnalysis.model_validate(analysis_payload([section("s1", 2, 5)]))

    def test_contiguous_sections_accepted(self):
        analysis = DeckAnalysis.model_validate(
            analysis_payload([section("s1", 1, 4), section("s2", 5, 9)])
        )
        assert [s.section_id for s in analysis.sections] == ["s1", "s2"]

    def test_empty_learning_goals_rejected(self):
        payload = analysis_payload([section("s1", 1, 2)])
        payload["learning_goals"] = []
        with pytest.raises(ValidationError):
            DeckAnalysis.model_validate(payload)


class TestTimestamps:
    def _metadata(self, stamp: str) -> dict:
        return {
            "deck_id": "d",
            "deck": "",
            "deck_url": None,
            "source_file": "f.pdf",
            "total_slides": 1,
            "processed_at": stamp,
        }

    @pytest.mark.parametrize(
        "stamp",
        ["2024-06-01T12:00:00Z", "2024-06-01T12:00:00+00:00", "2024-06-01 12:00:00+00:00"],
    )
    def test_utc_instants_accepted(self, stamp):
        assert DeckMetadata.model_validate(self._metadata(stamp)).processed_at == stamp

    @pytest.mark.parametrize(
        "stamp",
        ["2024-06-01T12:00:00", "2024-06-01T12:00:00+02:00", "yesterday", ""],
    )
    def test_non_utc_or_garbage_rejected(self, stamp):
        with pytest.raises(ValidationError):
            DeckMetadata.model_validate(self._metadata(stamp))

    def test_zero_slides_rejected(self):
        payload = self._metadata("2024-06-01T12:00:00Z")
        payload["total_slides"] = 0
        with pytest.raises(ValidationError):
            DeckMetadata.model_validate(payload)


class TestPlanEligibility:
    def test_ineligible_with_budget_rejected(self):
        with pytest.raises(ValidationError, match="must be 0 when eligible_for_questions"):
            SlidePlan.model_validate(
                {
                    "slide_number": 1,
                    "slide_title": "t",
                    "local_summary": "s",
                    "modality_type": "text",
                    "role_in_deck": "mechanism",
                    "eligible_for_questions": False,
                    "eligibility_reason": "r",
                    "question_budget": 2,
                    "question_mix": [],
                }
            )

    def test_eligible_with_zero_budget_allowed(self):
        plan = SlidePlan.model_validate(
            {
                "slide_number": 1,
                "slide_title": "t",
                "local_summary": "s",
                "modality_type": "text",
                "role_in_deck": "mechanism",
                "eligible_for_questions": True,
                "eligibility_reason": "r",
                "question_budget": 0,
                "question_mix": [],
            }
        )
        assert plan.question_budget == 0


class TestEvidenceRegionBounds:
    def _annotation(self, budget: int, regions: int) -> dict:
        return {
            "slide_id": slide_id_for(1),
            "slide_number": 1,
            "slide_title": "t",
            "modality_type": "text",
            "role_in_deck": "mechanism",
            "local_summary": "s",
            "key_concepts": [],
            "evidence_regions": [f"r{i}" for i in range(regions)],
            "eligible_for_questions": budget > 0,
            "eligibility_reason": "r",
            "question_budget": budget,
            "question_mix": ["short_answer"] * budget,
            "questions": [
                {
                    "question_id": question_id_for(1, i + 1),
                    "question_type": "short_answer",
                    "prompt": "p",
                    "options": [],
                    "answer": "a",
                    "evidence_span": "e",
                    "difficulty": "low",
                    "purpose": "x",
                    "fidelity_score": 3,
                    "fidelity_notes": "n",
                }
                for i in range(budget)
            ],
            "evaluation": (
                {
                    "coverage_score": 3,
                    "coverage_notes": "c",
                    "scaffolding_score": 3,
                    "scaffolding_notes": "s",
                }
                if budget
                else {
                    "coverage_score": None,
                    "coverage_notes": "",
                    "scaffolding_score": None,
                    "scaffolding_notes": "",
                }
            ),
        }

    @pytest.mark.parametrize("regions", [1, 7])
    def test_out_of_band_region_counts_rejected(self, regions):
        with pytest.raises(ValidationError, match="evidence_regions"):
            SlideAnnotation.model_validate(self._annotation(2, regions))

    @pytest.mark.parametrize("regions", [2, 6])
    def test_boundary_region_counts_accepted(self, regions):
        annotation = SlideAnnotation.model_validate(self._annotation(2, regions))
        assert len(annotation.evidence_regions) == regions

    def test_zero_budget_allows_empty_regions(self):
        annotation = SlideAnnotation.model_validate(self._annotation(0, 0))
        assert annotation.evidence_regions == []

    def test_duplicate_question_ids_rejected(self):
        payload = self._annotation(2, 3)
        payload["questions"][1]["question_id"] = payload["questions"][0]["question_id"]
        with pytest.raises(ValidationError, match="duplicate question_id"):
            SlideAnnotation.model_validate(payload)


class TestIdentifiers:
    def test_deck_id_is_stable_hash_prefix(self):
        assert deck_id_for(b"same bytes") == deck_id_for(b"same bytes")
        assert deck_id_for(b"same bytes") != deck_id_for(b"other bytes")
        assert len(deck_id_for(b"x")) == 12
        int(deck_id_for(b"x"), 16)  # hex digits only

    def test_slide_and_question_id_formats(self):
        assert slide_id_for(7) == "slide_0007"
        assert question_id_for(7, 2) == "s7_q2"
