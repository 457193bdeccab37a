"""Deck extraction: PDF bytes to per-slide text and rendered images."""

from __future__ import annotations

import io
import re
import unicodedata
from dataclasses import dataclass

from PIL import Image

from .contentstream import assemble_text, interpret_page
from .pdfreader import EmptyPdfError, PdfDocument

DEFAULT_RENDER_SCALE = 2.0

_WS_RUN_RE = re.compile(r"\s+")


def normalize_slide_text(text: str) -> str:
    """NFC-normalize, collapse whitespace runs to single spaces, and strip.

    Defines "exact" for duplicate-slide detection: two slides are duplicates
    when their normalized native text is equal and non-empty.
    """
    return _WS_RUN_RE.sub(" ", unicodedata.normalize("NFC", text)).strip()


@dataclass(frozen=True)
class ExtractedSlide:
    slide_number: int
    native_text: str
    image: Image.Image


@dataclass(frozen=True)
class ExtractedDeck:
    source_file: str
    slides: tuple[ExtractedSlide, ...]
    render_scale: float

    @property
    def total_slides(self) -> int:
        return len(self.slides)


def extract_deck(
    pdf_bytes: bytes,
    render_scale: float = DEFAULT_RENDER_SCALE,
    source_file: str = "",
) -> ExtractedDeck:
    """Extract one slide per PDF page: native text plus a rendered image.

    Pages without a text layer yield an empty native_text; there is no OCR
    fallback. Raises NotAPdfError, EncryptedPdfError, or EmptyPdfError for
    the corresponding structural failures.
    """
    if render_scale <= 0:
        raise ValueError(f"render_scale must be positive (got {render_scale})")
    document = PdfDocument(pdf_bytes)
    pages = document.pages()
    if not pages:
        raise EmptyPdfError("document contains zero pages")
    from .raster import render_page

    slides: list[ExtractedSlide] = []
    for page in pages:
        content = interpret_page(document, page.resources, page.content)
        x0, y0, x1, y1 = page.media_box
        image = render_page(content, x1 - x0, y1 - y0, render_scale, page.rotate)
        slides.append(
            ExtractedSlide(
                slide_number=page.number,
                native_text=assemble_text(content),
                image=image,
            )
        )
    return ExtractedDeck(source_file=source_file, slides=tuple(slides), render_scale=render_scale)


def encode_png(image: Image.Image) -> bytes:
    """PNG-encode an image deterministically (no timestamps or metadata)."""
    buffer = io.BytesIO()
    image.save(buffer, format="PNG")
    return buffer.getvalue()
