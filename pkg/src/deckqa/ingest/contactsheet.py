"""Contact sheets: labeled thumbnail grids of consecutive slides."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from PIL import Image, ImageDraw, ImageFont

from ..windowing import WindowSpec
from .extract import ExtractedSlide

LABEL_STRIP_HEIGHT = 14
_LABEL_BG = (32, 32, 32)
_LABEL_FG = (255, 255, 255)


@dataclass(frozen=True)
class ContactSheet:
    image: Image.Image
    window: WindowSpec
    cell_map: tuple[tuple[int, int, int], ...]  # (slide_number, row, column)


def draw_cell_label(draw: ImageDraw.ImageDraw, x: int, y: int, width: int, text: str) -> None:
    """Label strip drawing, shared with tests so pixels can be compared."""
    draw.rectangle([x, y, x + width - 1, y + LABEL_STRIP_HEIGHT - 1], fill=_LABEL_BG)
    # Pillow's built-in bitmap font: same pixels on every platform.
    draw.text((x + 3, y + 2), text, fill=_LABEL_FG, font=ImageFont.load_default())


def build_contact_sheet(
    slides: Sequence[ExtractedSlide],
    columns: int,
    cell_width: int,
    window: WindowSpec | None = None,
) -> ContactSheet:
    """Stitch slides into a ceil(n/columns)-row grid of width columns*cell_width.

    Each cell holds the slide image scaled to cell_width (aspect preserved)
    with the slide number drawn beneath it. Cells fill in reading order by
    slide_number.
    """
    if not slides:
        raise ValueError("slides must be non-empty")
    if columns < 1:
        raise ValueError(f"columns must be positive (got {columns})")
    if cell_width < 1:
        raise ValueError(f"cell_width must be positive (got {cell_width})")

    ordered = sorted(slides, key=lambda slide: slide.slide_number)
    if window is None:
        window = WindowSpec(
            index=0,
            start_slide=ordered[0].slide_number,
            end_slide=ordered[-1].slide_number,
        )

    thumbnails: list[Image.Image] = []
    for slide in ordered:
        w, h = slide.image.size
        scaled_height = max(1, round(cell_width * h / w))
        thumbnails.append(slide.image.resize((cell_width, scaled_height), Image.LANCZOS))

    rows = math.ceil(len(ordered) / columns)
    image_height = max(thumb.size[1] for thumb in thumbnails)
    cell_height = image_height + LABEL_STRIP_HEIGHT
    sheet = Image.new("RGB", (columns * cell_width, rows * cell_height), (255, 255, 255))
    draw = ImageDraw.Draw(sheet)

    cell_map: list[tuple[int, int, int]] = []
    for position, (slide, thumb) in enumerate(zip(ordered, thumbnails)):
        row, col = divmod(position, columns)
        x = col * cell_width
        y = row * cell_height
        sheet.paste(thumb, (x, y))
        draw_cell_label(draw, x, y + image_height, cell_width, f"Slide {slide.slide_number}")
        cell_map.append((slide.slide_number, row, col))

    return ContactSheet(image=sheet, window=window, cell_map=tuple(cell_map))
