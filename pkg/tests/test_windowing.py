from __future__ import annotations

import pytest

from deckqa.schema import ModalityType, QuestionType, RoleInDeck, SlidePlan
from deckqa.windowing import (
    InvalidWindowParameters,
    MissingSlideError,
    WindowPlanResult,
    WindowSpec,
    collate_candidates,
    plan_windows,
)


def check_window_plan(windows, total, size, overlap):
    """Independent oracle: coverage, ordering, stride, clamping, bounds."""
    assert windows, "at least one window required"
    covered = bytearray(total + 1)
    for window in windows:
        assert 1 <= window.start_slide <= window.end_slide <= total
        covered[window.start_slide:window.end_slide + 1] = b"\x01" * (
            window.end_slide - window.start_slide + 1
        )
    assert all(covered[1:]), "every slide must be covered"
    assert [w.index for w in windows] == list(range(len(windows)))
    starts = [w.start_slide for w in windows]
    assert starts == sorted(starts)
    if total <= size:
        assert len(windows) == 1
        assert (windows[0].start_slide, windows[0].end_slide) == (1, total)
        return
    stride = size - overlap
    for previous, current in zip(windows, windows[1:-1]):
        assert current.start_slide - previous.start_slide == stride
    last = windows[-1]
    assert last.end_slide == total
    assert last.start_slide == max(1, total - size + 1)
    for window in windows[:-1]:
        assert window.end_slide - window.start_slide + 1 == size


class TestPlanWindows:
    def test_single_window_when_total_fits(self):
        windows = plan_windows(4, 6, 2)
        assert [(w.start_slide, w.end_slide) for w in windows] == [(1, 4)]

    def test_two_windows_exact_fit(self):
        windows = plan_windows(10, 6, 2)
        assert [(w.start_slide, w.end_slide) for w in windows] == [(1, 6), (5, 10)]
        check_window_plan(windows, 10, 6, 2)

    def test_final_window_clamped(self):
        windows = plan_windows(12, 6, 2)
        assert [(w.start_slide, w.end_slide) for w in windows] == [(1, 6), (5, 10), (7, 12)]
        check_window_plan(windows, 12, 6, 2)

    @pytest.mark.parametrize("total,size,overlap", [(1, 2, 0), (7, 3, 2), (50, 8, 2), (9, 9, 8)])
    def test_oracle_spot_checks(self, total, size, overlap):
        check_window_plan(plan_windows(total, size, overlap), total, size, overlap)

    def test_overlap_not_smaller_than_size_rejected(self):
        with pytest.raises(InvalidWindowParameters):
            plan_windows(10, 4, 4)
        with pytest.raises(InvalidWindowParameters):
            plan_windows(10, 4, 7)

    def test_undersized_window_rejected(self):
        with pytest.raises(InvalidWindowParameters):
            plan_windows(10, 1, 0)

    def test_negative_overlap_rejected(self):
        with pytest.raises(InvalidWindowParameters):
            plan_windows(10, 4, -1)

    def test_zero_total_rejected(self):
        with pytest.raises(InvalidWindowParameters):
            plan_windows(0, 4, 1)


def _plan(number: int, budget: int = 1) -> SlidePlan:
    return SlidePlan(
        slide_number=number,
        slide_title=f"Slide {number}",
        local_summary="s",
        modality_type=ModalityType.TEXT,
        role_in_deck=RoleInDeck.MECHANISM,
        eligible_for_questions=budget >= 1,
        eligibility_reason="r",
        question_budget=budget,
        question_mix=[QuestionType.SHORT_ANSWER] * budget,
    )


def _result(window: WindowSpec, skip: set[int] = frozenset()) -> WindowPlanResult:
    plans = tuple(_plan(n) for n in window.slide_numbers() if n not in skip)
    return WindowPlanResult(window=window, plans=plans)


class TestCollateCandidates:
    def test_overlap_slides_carry_two_candidates(self):
        windows = plan_windows(10, 6, 2)
        results = [_result(w) for w in windows]
        collated = collate_candidates(results, 10)
        by_number = {entry.slide_number: entry for entry in collated}
        assert len(by_number[5].candidates) == 2
        assert len(by_number[3].candidates) == 1
        assert [entry.slide_number for entry in collated] == list(range(1, 11))

    def test_candidate_count_equals_covering_windows(self):
        windows = plan_windows(23, 7, 3)
        results = [_result(w) for w in windows]
        collated = collate_candidates(results, 23)
        for entry in collated:
            covering = sum(
                1 for w in windows if w.start_slide <= entry.slide_number <= w.end_slide
            )
            assert len(entry.candidates) == covering
            assert [index for index, _ in entry.candidates] == sorted(
                index for index, _ in entry.candidates
            )

    def test_single_window_single_candidates(self):
        windows = plan_windows(5, 8, 2)
        collated = collate_candidates([_result(windows[0])], 5)
        assert all(len(entry.candidates) == 1 for entry in collated)

    def test_result_missing_a_slide_raises(self):
        windows = plan_windows(10, 6, 2)
        results = [_result(windows[0], skip={6}), _result(windows[1])]
        with pytest.raises(MissingSlideError, match=r"slide\(s\) \[6\]"):
            collate_candidates(results, 10)


def test_exhaustive_sweep_small():
    # The acceptance suite runs the full 1..200 sweep; keep a quick mirror here.
    for total in range(1, 40):
        for size in range(2, 9):
            for overlap in range(0, size):
                check_window_plan(plan_windows(total, size, overlap), total, size, overlap)
