"""Page rasterization: interpreted content drawn onto an RGB canvas.

Renders text runs, rectangles, lines, and image placeholders with Pillow's
bundled fonts so output is deterministic across machines. This is a layout
sketch of the page, not a pixel-faithful viewer; its job is to give the
planner model legible thumbnails and satisfy the dimension contract
(page units x render_scale, rounded to nearest pixel).
"""

from __future__ import annotations

from functools import lru_cache

from PIL import Image, ImageDraw, ImageFont

from .contentstream import PageContent

_WHITE = (255, 255, 255)
_IMAGE_PLACEHOLDER = (210, 210, 214)


@lru_cache(maxsize=64)
def _font_for(pixel_size: int) -> ImageFont.ImageFont | ImageFont.FreeTypeFont:
    try:
        return ImageFont.load_default(size=max(6, pixel_size))
    except TypeError:  # older Pillow: bitmap font only
        return ImageFont.load_default()


def render_page(
    content: PageContent,
    page_width: float,
    page_height: float,
    scale: float,
    rotate: int = 0,
) -> Image.Image:
    width = max(1, round(page_width * scale))
    height = max(1, round(page_height * scale))
    image = Image.new("RGB", (width, height), _WHITE)
    draw = ImageDraw.Draw(image)

    def to_pixel(x: float, y: float) -> tuple[float, float]:
        return (x * scale, height - y * scale)

    for placement in content.images:
        x0, y0 = to_pixel(placement.x0, placement.y1)
        x1, y1 = to_pixel(placement.x1, placement.y0)
        if x1 > x0 and y1 > y0:
            draw.rectangle([x0, y0, x1, y1], fill=_IMAGE_PLACEHOLDER, outline=(160, 160, 160))

    for rect in content.rects:
        x0, y0 = to_pixel(rect.x0, rect.y1)
        x1, y1 = to_pixel(rect.x1, rect.y0)
        if x1 < x0 or y1 < y0:
            continue
        draw.rectangle([x0, y0, x1, y1], fill=rect.fill, outline=rect.stroke)

    for line in content.lines:
        draw.line([to_pixel(line.x0, line.y0), to_pixel(line.x1, line.y1)], fill=line.color, width=1)

    for run in content.runs:
        if not run.text.strip():
            continue
        pixel_size = max(6, round(run.size * scale))
        font = _font_for(pixel_size)
        x, baseline = to_pixel(run.x, run.y)
        ascent = pixel_size * 0.8
        draw.text((x, baseline - ascent), run.text, fill=(0, 0, 0), font=font)

    if rotate in (90, 180, 270):
        image = image.rotate(-rotate, expand=True)
    return image
