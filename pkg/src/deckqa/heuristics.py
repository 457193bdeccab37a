"""Post-synthesis static heuristics: zero out exact-duplicate and title slides.

Only these two rules are implemented; modality-based budget rules have no
stated parameters and are left to the model phases. extra_rules is the hook
point for future additions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .ingest import ExtractedDeck, normalize_slide_text
from .schema import RoleInDeck, SlidePlan

DUPLICATE_REASON = "zeroed by static heuristic: exact duplicate of slide {partner}"
TITLE_REASON = "zeroed by static heuristic: title slide"


@dataclass(frozen=True)
class HeuristicReport:
    zeroed_duplicates: tuple[tuple[int, int], ...]  # (slide, earlier duplicate partner)
    zeroed_titles: tuple[int, ...]
    untouched: int


def find_duplicate_slides(deck: ExtractedDeck) -> list[tuple[int, int]]:
    """Slides whose normalized text equals an earlier slide's, with the partner.

    Empty-text slides never match each other; the partner is always the first
    slide carrying that text.
    """
    first_seen: dict[str, int] = {}
    duplicates: list[tuple[int, int]] = []
    for slide in deck.slides:
        normalized = normalize_slide_text(slide.native_text)
        if not normalized:
            continue
        if normalized in first_seen:
            duplicates.append((slide.slide_number, first_seen[normalized]))
        else:
            first_seen[normalized] = slide.slide_number
    return duplicates


def apply_static_heuristics(
    plans: Sequence[SlidePlan],
    deck: ExtractedDeck,
    extra_rules: Sequence[Callable[[SlidePlan], str | None]] = (),
) -> tuple[list[SlidePlan], HeuristicReport]:
    """Zero the budget of duplicate and title slides, reporting every match.

    A slide matching several rules is reported once, first matching rule wins
    (duplicate before title, then extra_rules in order). Matched plans get
    budget 0, eligibility false, and the rule name as eligibility_reason;
    everything else is returned untouched.
    """
    numbers = sorted(plan.slide_number for plan in plans)
    if numbers != list(range(1, deck.total_slides + 1)):
        raise ValueError(
            f"plans must cover 1..{deck.total_slides} exactly once (got {numbers})"
        )
    duplicate_partner = {slide: partner for slide, partner in find_duplicate_slides(deck)}

    revised: list[SlidePlan] = []
    zeroed_duplicates: list[tuple[int, int]] = []
    zeroed_titles: list[int] = []
    extra_matches = 0
    for plan in sorted(plans, key=lambda p: p.slide_number):
        reason: str | None = None
        if plan.slide_number in duplicate_partner:
            partner = duplicate_partner[plan.slide_number]
            zeroed_duplicates.append((plan.slide_number, partner))
            reason = DUPLICATE_REASON.format(partner=partner)
        elif plan.role_in_deck is RoleInDeck.TITLE:
            zeroed_titles.append(plan.slide_number)
            reason = TITLE_REASON
        else:
            for rule in extra_rules:
                reason = rule(plan)
                if reason is not None:
                    extra_matches += 1
                    break
        if reason is None:
            revised.append(plan)
        else:
            revised.append(
                plan.model_copy(
                    update={
                        "question_budget": 0,
                        "eligible_for_questions": False,
                        "eligibility_reason": reason,
                    }
                )
            )
    report = HeuristicReport(
        zeroed_duplicates=tuple(zeroed_duplicates),
        zeroed_titles=tuple(zeroed_titles),
        untouched=len(revised) - len(zeroed_duplicates) - len(zeroed_titles) - extra_matches,
    )
    return revised, report
