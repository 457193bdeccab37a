"""Overlapping slide windows and candidate collation for deck synthesis."""

from __future__ import annotations

from dataclasses import dataclass

from .schema import SlidePlan


class InvalidWindowParameters(ValueError):
    """window_size/overlap combination cannot produce a valid window plan."""


class MissingSlideError(ValueError):
    """A slide ended up with no plan candidate; upstream provider fault."""


@dataclass(frozen=True)
class WindowSpec:
    index: int
    start_slide: int
    end_slide: int

    def slide_numbers(self) -> range:
        return range(self.start_slide, self.end_slide + 1)


@dataclass(frozen=True)
class WindowPlanResult:
    window: WindowSpec
    plans: tuple[SlidePlan, ...]


@dataclass(frozen=True)
class SlideCandidates:
    slide_number: int
    candidates: tuple[tuple[int, SlidePlan], ...]


def plan_windows(total_slides: int, window_size: int, overlap: int) -> list[WindowSpec]:
    """Cover 1..total_slides with windows of window_size sliding by size-overlap.

    The final window is clamped to end at total_slides and start at
    max(1, total_slides - window_size + 1), so every window keeps full size
    when the deck is at least one window long; the cost is a larger-than-
    configured overlap on the last pair. A deck no longer than one window
    yields exactly one window.
    """
    if total_slides < 1:
        raise InvalidWindowParameters(f"total_slides must be >= 1 (got {total_slides})")
    if window_size < 2:
        raise InvalidWindowParameters(f"window_size must be >= 2 (got {window_size})")
    if not 0 <= overlap < window_size:
        raise InvalidWindowParameters(
            f"overlap must be in [0, window_size - 1] (got overlap={overlap}, "
            f"window_size={window_size})"
        )
    if total_slides <= window_size:
        return [WindowSpec(index=0, start_slide=1, end_slide=total_slides)]
    stride = window_size - overlap
    windows: list[WindowSpec] = []
    start = 1
    while True:
        end = start + window_size - 1
        if end >= total_slides:
            start = max(1, total_slides - window_size + 1)
            windows.append(WindowSpec(index=len(windows), start_slide=start, end_slide=total_slides))
            return windows
        windows.append(WindowSpec(index=len(windows), start_slide=start, end_slide=end))
        start += stride


def collate_candidates(
    results: list[WindowPlanResult], total_slides: int
) -> list[SlideCandidates]:
    """Group per-window plans by slide; overlap slides carry one candidate per window.

    Each result must cover its window exactly once per slide, and every slide
    in 1..total_slides must end up with at least one candidate; anything less
    signals an upstream provider fault and raises MissingSlideError.
    """
    by_slide: dict[int, list[tuple[int, SlidePlan]]] = {n: [] for n in range(1, total_slides + 1)}
    for result in results:
        expected = set(result.window.slide_numbers())
        provided = [plan.slide_number for plan in result.plans]
        if sorted(provided) != sorted(expected):
            missing = sorted(expected - set(provided))
            if missing:
                raise MissingSlideError(
                    f"window {result.window.index} plan is missing slide(s) {missing}"
                )
            raise MissingSlideError(
                f"window {result.window.index} plan covers unexpected slides "
                f"{sorted(set(provided) - expected)} or repeats entries"
            )
        for plan in result.plans:
            by_slide[plan.slide_number].append((result.window.index, plan))
    empty = [n for n, candidates in by_slide.items() if not candidates]
    if empty:
        raise MissingSlideError(f"no plan candidates for slide(s) {empty}")
    return [
        SlideCandidates(slide_number=n, candidates=tuple(sorted(by_slide[n], key=lambda c: c[0])))
        for n in sorted(by_slide)
    ]
