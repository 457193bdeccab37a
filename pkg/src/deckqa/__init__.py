"""deckqa: deterministic question-generation pipeline for PDF slide decks."""

__version__ = "0.1.0"
