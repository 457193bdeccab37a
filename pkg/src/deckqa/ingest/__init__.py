"""PDF ingestion: text extraction, page rendering, contact sheets."""

from .contactsheet import ContactSheet, build_contact_sheet
from .extract import (
    DEFAULT_RENDER_SCALE,
    ExtractedDeck,
    ExtractedSlide,
    encode_png,
    extract_deck,
    normalize_slide_text,
)
from .pdfreader import EmptyPdfError, EncryptedPdfError, NotAPdfError, PdfError

__all__ = [
    "ContactSheet",
    "DEFAULT_RENDER_SCALE",
    "EmptyPdfError",
    "EncryptedPdfError",
    "ExtractedDeck",
    "ExtractedSlide",
    "NotAPdfError",
    "PdfError",
    "build_contact_sheet",
    "encode_png",
    "extract_deck",
    "normalize_slide_text",
]
