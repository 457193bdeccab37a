"""Content-stream interpretation: positioned text runs and simple shapes.

Tracks the graphics and text state machines far enough to recover where text
is drawn, at what effective size, and which rectangles/lines/images occupy
the page. Glyph metrics are approximated (no embedded font programs are
parsed), which is adequate for text recovery and thumbnail rendering but not
for pixel-exact layout.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Optional

from .pdfreader import PdfDocument, PdfName, PdfStream, _Tokenizer, _NUMBER_RE

Matrix = tuple[float, float, float, float, float, float]

IDENTITY: Matrix = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def mat_mul(m: Matrix, n: Matrix) -> Matrix:
    a1, b1, c1, d1, e1, f1 = m
    a2, b2, c2, d2, e2, f2 = n
    return (
        a1 * a2 + b1 * c2,
        a1 * b2 + b1 * d2,
        c1 * a2 + d1 * c2,
        c1 * b2 + d1 * d2,
        e1 * a2 + f1 * c2 + e2,
        e1 * b2 + f1 * d2 + f2,
    )


def mat_apply(m: Matrix, x: float, y: float) -> tuple[float, float]:
    a, b, c, d, e, f = m
    return (a * x + c * y + e, b * x + d * y + f)


def translation(tx: float, ty: float) -> Matrix:
    return (1.0, 0.0, 0.0, 1.0, tx, ty)


@dataclass(frozen=True)
class TextRun:
    x: float
    y: float
    size: float
    text: str


@dataclass(frozen=True)
class RectShape:
    x0: float
    y0: float
    x1: float
    y1: float
    fill: Optional[tuple[int, int, int]]
    stroke: Optional[tuple[int, int, int]]


@dataclass(frozen=True)
class LineShape:
    x0: float
    y0: float
    x1: float
    y1: float
    color: tuple[int, int, int]


@dataclass(frozen=True)
class ImagePlacement:
    x0: float
    y0: float
    x1: float
    y1: float


@dataclass
class PageContent:
    runs: list[TextRun] = field(default_factory=list)
    rects: list[RectShape] = field(default_factory=list)
    lines: list[LineShape] = field(default_factory=list)
    images: list[ImagePlacement] = field(default_factory=list)


_OPERATOR_RE = re.compile(rb"[A-Za-z'\"][A-Za-z0-9*']*")

# Average glyph advance as a fraction of the font size; Helvetica-ish.
_APPROX_ADVANCE = 0.5


def _to_rgb(components: list[float]) -> tuple[int, int, int]:
    def clamp(value: float) -> int:
        return max(0, min(255, round(value * 255)))

    if len(components) >= 4:  # CMYK
        c, m, y, k = components[-4:]
        return (clamp((1 - c) * (1 - k)), clamp((1 - m) * (1 - k)), clamp((1 - y) * (1 - k)))
    if len(components) >= 3:
        r, g, b = components[-3:]
        return (clamp(r), clamp(g), clamp(b))
    if components:
        gray = components[-1]
        return (clamp(gray), clamp(gray), clamp(gray))
    return (0, 0, 0)


class _FontInfo:
    """Decoding info for one page font resource."""

    def __init__(self, document: PdfDocument, font_dict: dict[str, Any]):
        self.codec = "cp1252"
        self.differences: dict[int, str] = {}
        self.to_unicode: dict[int, str] = {}
        encoding = document.resolve(font_dict.get("Encoding"))
        if isinstance(encoding, (PdfName, str)):
            if str(encoding) == "MacRomanEncoding":
                self.codec = "mac_roman"
        elif isinstance(encoding, dict):
            base = str(document.resolve(encoding.get("BaseEncoding", "")) or "")
            if base == "MacRomanEncoding":
                self.codec = "mac_roman"
            differences = document.resolve(encoding.get("Differences"))
            if isinstance(differences, list):
                code = 0
                for item in differences:
                    item = document.resolve(item)
                    if isinstance(item, (int, float)):
                        code = int(item)
                    elif isinstance(item, PdfName):
                        self.differences[code] = _glyph_to_char(str(item))
                        code += 1
        to_unicode = document.resolve(font_dict.get("ToUnicode"))
        if isinstance(to_unicode, PdfStream):
            try:
                self.to_unicode = _parse_to_unicode(to_unicode.data(document))
            except Exception:
                self.to_unicode = {}

    def decode(self, raw: bytes) -> str:
        if self.to_unicode:
            out: list[str] = []
            # Heuristic: 2-byte codes when the map keys exceed one byte.
            wide = any(code > 0xFF for code in self.to_unicode)
            if wide and len(raw) % 2 == 0:
                for index in range(0, len(raw), 2):
                    code = int.from_bytes(raw[index:index + 2], "big")
                    out.append(self.to_unicode.get(code, ""))
                return "".join(out)
            for byte in raw:
                out.append(self.to_unicode.get(byte, chr(byte)))
            return "".join(out)
        if self.differences:
            out = []
            for byte in raw:
                if byte in self.differences:
                    out.append(self.differences[byte])
                else:
                    out.append(bytes([byte]).decode(self.codec, errors="replace"))
            return "".join(out)
        return raw.decode(self.codec, errors="replace")


_GLYPH_NAMES = {
    "space": " ", "period": ".", "comma": ",", "hyphen": "-", "colon": ":",
    "semicolon": ";", "quotesingle": "'", "quotedbl": '"', "endash": "–",
    "emdash": "—", "bullet": "•", "fi": "fi", "fl": "fl",
}


def _glyph_to_char(name: str) -> str:
    if len(name) == 1:
        return name
    if name in _GLYPH_NAMES:
        return _GLYPH_NAMES[name]
    if name.startswith("uni") and len(name) >= 7:
        try:
            return chr(int(name[3:7], 16))
        except ValueError:
            return ""
    return ""


_BFCHAR_RE = re.compile(rb"beginbfchar(.*?)endbfchar", re.DOTALL)
_BFRANGE_RE = re.compile(rb"beginbfrange(.*?)endbfrange", re.DOTALL)
_HEX_PAIR_RE = re.compile(rb"<([0-9A-Fa-f]+)>\s*<([0-9A-Fa-f]+)>")
_HEX_TRIPLE_RE = re.compile(rb"<([0-9A-Fa-f]+)>\s*<([0-9A-Fa-f]+)>\s*<([0-9A-Fa-f]+)>")


def _utf16_hex_to_text(hex_digits: bytes) -> str:
    raw = bytes.fromhex(hex_digits.decode("ascii"))
    if len(raw) % 2:
        raw += b"\x00"
    return raw.decode("utf-16-be", errors="ignore")


def _parse_to_unicode(data: bytes) -> dict[int, str]:
    mapping: dict[int, str] = {}
    for block in _BFCHAR_RE.findall(data):
        for src, dst in _HEX_PAIR_RE.findall(block):
            mapping[int(src, 16)] = _utf16_hex_to_text(dst)
    for block in _BFRANGE_RE.findall(data):
        for low, high, start in _HEX_TRIPLE_RE.findall(block):
            base = int(start, 16)
            for offset in range(int(high, 16) - int(low, 16) + 1):
                mapping[int(low, 16) + offset] = chr(base + offset)
    return mapping


class _Interpreter:
    def __init__(self, document: PdfDocument, resources: dict[str, Any]):
        self.document = document
        self.resources = resources
        self.content = PageContent()
        self.ctm: Matrix = IDENTITY
        self.stack: list[tuple[Matrix, tuple[int, int, int], tuple[int, int, int]]] = []
        self.fill_rgb: tuple[int, int, int] = (0, 0, 0)
        self.stroke_rgb: tuple[int, int, int] = (0, 0, 0)
        self.fonts: dict[str, _FontInfo] = {}
        # Text state
        self.text_matrix: Matrix = IDENTITY
        self.line_matrix: Matrix = IDENTITY
        self.font: Optional[_FontInfo] = None
        self.font_size = 0.0
        self.leading = 0.0
        self.char_spacing = 0.0
        self.word_spacing = 0.0
        # Path under construction: list of subpaths of points.
        self.path: list[list[tuple[float, float]]] = []
        self.pending_rects: list[tuple[float, float, float, float]] = []

    # -- fonts ---------------------------------------------------------------

    def _font_info(self, name: str) -> Optional[_FontInfo]:
        if name not in self.fonts:
            font_map = self.document.resolve(self.resources.get("Font")) or {}
            font_dict = self.document.resolve(font_map.get(name)) if isinstance(font_map, dict) else None
            self.fonts[name] = (
                _FontInfo(self.document, font_dict) if isinstance(font_dict, dict) else _FontInfo(self.document, {})
            )
        return self.fonts[name]

    # -- text ------------------------------------------------------------------

    def _effective_size(self) -> float:
        merged = mat_mul(self.text_matrix, self.ctm)
        scale = math.hypot(merged[2], merged[3])
        return self.font_size * scale

    def _show_text(self, raw: bytes) -> None:
        text = (self.font or _FontInfo(self.document, {})).decode(raw)
        if text:
            merged = mat_mul(self.text_matrix, self.ctm)
            x, y = merged[4], merged[5]
            self.content.runs.append(TextRun(x=x, y=y, size=self._effective_size(), text=text))
        advance = (
            len(text) * self.font_size * _APPROX_ADVANCE
            + len(text) * self.char_spacing
            + text.count(" ") * self.word_spacing
        )
        self.text_matrix = mat_mul(translation(advance, 0.0), self.text_matrix)

    def _next_line(self, tx: float, ty: float) -> None:
        self.line_matrix = mat_mul(translation(tx, ty), self.line_matrix)
        self.text_matrix = self.line_matrix

    # -- paths -------------------------------------------------------------------

    def _flush_path(self, fill: bool, stroke: bool) -> None:
        fill_color = self.fill_rgb if fill else None
        stroke_color = self.stroke_rgb if stroke else None
        for x, y, w, h in self.pending_rects:
            corners = [
                mat_apply(self.ctm, x, y),
                mat_apply(self.ctm, x + w, y),
                mat_apply(self.ctm, x + w, y + h),
                mat_apply(self.ctm, x, y + h),
            ]
            xs = [p[0] for p in corners]
            ys = [p[1] for p in corners]
            if fill or stroke:
                self.content.rects.append(
                    RectShape(min(xs), min(ys), max(xs), max(ys), fill_color, stroke_color)
                )
        if stroke:
            for subpath in self.path:
                for (x0, y0), (x1, y1) in zip(subpath, subpath[1:]):
                    p0 = mat_apply(self.ctm, x0, y0)
                    p1 = mat_apply(self.ctm, x1, y1)
                    self.content.lines.append(LineShape(p0[0], p0[1], p1[0], p1[1], self.stroke_rgb))
        elif fill and self.path:
            # Filled polygons are approximated by their bounding boxes.
            for subpath in self.path:
                if len(subpath) >= 3:
                    xs = [mat_apply(self.ctm, x, y)[0] for x, y in subpath]
                    ys = [mat_apply(self.ctm, x, y)[1] for x, y in subpath]
                    self.content.rects.append(
                        RectShape(min(xs), min(ys), max(xs), max(ys), fill_color, None)
                    )
        self.path = []
        self.pending_rects = []

    # -- XObjects -------------------------------------------------------------

    def _do_xobject(self, name: str, depth: int) -> None:
        xobjects = self.document.resolve(self.resources.get("XObject")) or {}
        if not isinstance(xobjects, dict):
            return
        xobject = self.document.resolve(xobjects.get(name))
        if not isinstance(xobject, PdfStream):
            return
        subtype = str(self.document.resolve(xobject.dictionary.get("Subtype", "")))
        if subtype == "Image":
            corners = [mat_apply(self.ctm, px, py) for px, py in ((0, 0), (1, 0), (1, 1), (0, 1))]
            xs = [p[0] for p in corners]
            ys = [p[1] for p in corners]
            self.content.images.append(ImagePlacement(min(xs), min(ys), max(xs), max(ys)))
            return
        if subtype == "Form" and depth < 8:
            saved = (self.ctm, self.resources, self.fonts)
            matrix = self.document.resolve(xobject.dictionary.get("Matrix"))
            if isinstance(matrix, list) and len(matrix) == 6:
                self.ctm = mat_mul(tuple(float(v) for v in matrix), self.ctm)  # type: ignore[arg-type]
            inner_resources = self.document.resolve(xobject.dictionary.get("Resources"))
            if isinstance(inner_resources, dict):
                self.resources = inner_resources
                self.fonts = {}
            try:
                self.run(xobject.data(self.document), depth + 1)
            finally:
                self.ctm, self.resources, self.fonts = saved

    # -- main loop ---------------------------------------------------------------

    def run(self, content: bytes, depth: int = 0) -> PageContent:
        operands: list[Any] = []
        cursor = _Tokenizer(content, 0)
        data, length = content, len(content)
        while True:
            cursor.skip_whitespace()
            if cursor.pos >= length:
                break
            byte = data[cursor.pos]
            if byte in b"/<([+-.0123456789":
                try:
                    operands.append(cursor.read_object())
                except Exception:
                    cursor.pos += 1
                continue
            match = _OPERATOR_RE.match(data, cursor.pos)
            if not match:
                cursor.pos += 1
                continue
            operator = match.group(0).decode("latin-1")
            cursor.pos = match.end()
            if operator == "BI":
                end = data.find(b"EI", cursor.pos)
                cursor.pos = length if end == -1 else end + 2
                operands = []
                continue
            self._execute(operator, operands, depth)
            operands = []
        return self.content

    def _execute(self, operator: str, operands: list[Any], depth: int) -> None:
        nums = [float(op) for op in operands if isinstance(op, (int, float))]
        if operator == "q":
            self.stack.append((self.ctm, self.fill_rgb, self.stroke_rgb))
        elif operator == "Q":
            if self.stack:
                self.ctm, self.fill_rgb, self.stroke_rgb = self.stack.pop()
        elif operator == "cm" and len(nums) >= 6:
            self.ctm = mat_mul(tuple(nums[:6]), self.ctm)  # type: ignore[arg-type]
        elif operator == "BT":
            self.text_matrix = IDENTITY
            self.line_matrix = IDENTITY
        elif operator == "ET":
            pass
        elif operator == "Tf" and operands:
            names = [op for op in operands if isinstance(op, PdfName)]
            if names:
                self.font = self._font_info(str(names[0]))
            if nums:
                self.font_size = nums[-1]
        elif operator == "TL" and nums:
            self.leading = nums[-1]
        elif operator == "Tc" and nums:
            self.char_spacing = nums[-1]
        elif operator == "Tw" and nums:
            self.word_spacing = nums[-1]
        elif operator == "Td" and len(nums) >= 2:
            self._next_line(nums[0], nums[1])
        elif operator == "TD" and len(nums) >= 2:
            self.leading = -nums[1]
            self._next_line(nums[0], nums[1])
        elif operator == "Tm" and len(nums) >= 6:
            self.text_matrix = tuple(nums[:6])  # type: ignore[assignment]
            self.line_matrix = self.text_matrix
        elif operator == "T*":
            self._next_line(0.0, -self.leading)
        elif operator == "Tj" and operands:
            raw = operands[-1]
            if isinstance(raw, bytes):
                self._show_text(raw)
        elif operator == "'" and operands:
            self._next_line(0.0, -self.leading)
            raw = operands[-1]
            if isinstance(raw, bytes):
                self._show_text(raw)
        elif operator == '"' and operands:
            if len(nums) >= 2:
                self.word_spacing = nums[0]
                self.char_spacing = nums[1]
            self._next_line(0.0, -self.leading)
            raw = operands[-1]
            if isinstance(raw, bytes):
                self._show_text(raw)
        elif operator == "TJ" and operands and isinstance(operands[-1], list):
            for item in operands[-1]:
                if isinstance(item, bytes):
                    self._show_text(item)
                elif isinstance(item, (int, float)) and item <= -150:
                    # Large negative kerning conventionally separates words.
                    self.content.runs.append(
                        TextRun(*mat_apply(mat_mul(self.text_matrix, self.ctm), 0, 0),
                                size=self._effective_size(), text=" ")
                    )
        elif operator in ("rg", "g", "k", "sc", "scn") and nums:
            self.fill_rgb = _to_rgb(nums)
        elif operator in ("RG", "G", "K", "SC", "SCN") and nums:
            self.stroke_rgb = _to_rgb(nums)
        elif operator == "re" and len(nums) >= 4:
            self.pending_rects.append((nums[0], nums[1], nums[2], nums[3]))
        elif operator == "m" and len(nums) >= 2:
            self.path.append([(nums[0], nums[1])])
        elif operator == "l" and len(nums) >= 2:
            if self.path:
                self.path[-1].append((nums[0], nums[1]))
        elif operator == "c" and len(nums) >= 6:
            if self.path:
                self.path[-1].append((nums[4], nums[5]))
        elif operator == "v" and len(nums) >= 4:
            if self.path:
                self.path[-1].append((nums[2], nums[3]))
        elif operator == "y" and len(nums) >= 4:
            if self.path:
                self.path[-1].append((nums[2], nums[3]))
        elif operator == "h":
            if self.path and len(self.path[-1]) > 1:
                self.path[-1].append(self.path[-1][0])
        elif operator in ("f", "F", "f*"):
            self._flush_path(fill=True, stroke=False)
        elif operator in ("B", "B*", "b", "b*"):
            if operator in ("b", "b*") and self.path and len(self.path[-1]) > 1:
                self.path[-1].append(self.path[-1][0])
            self._flush_path(fill=True, stroke=True)
        elif operator in ("S", "s"):
            if operator == "s" and self.path and len(self.path[-1]) > 1:
                self.path[-1].append(self.path[-1][0])
            self._flush_path(fill=False, stroke=True)
        elif operator == "n":
            self.path = []
            self.pending_rects = []
        elif operator == "Do" and operands and isinstance(operands[-1], PdfName):
            self._do_xobject(str(operands[-1]), depth)


def interpret_page(document: PdfDocument, resources: dict[str, Any], content: bytes) -> PageContent:
    """Run the interpreter over one page's (concatenated) content stream."""
    return _Interpreter(document, resources).run(content)


def assemble_text(content: PageContent) -> str:
    """Recover reading-ordered plain text from positioned runs.

    Runs are grouped into lines by vertical proximity, ordered top-to-bottom
    then left-to-right; gaps wider than a quarter of the font size become
    spaces. Exact inter-run spacing is approximate by design.
    """
    runs = [run for run in content.runs if run.text.strip() or run.text == " "]
    if not runs:
        return ""
    ordered = sorted(runs, key=lambda run: (-round(run.y, 1), round(run.x, 1)))
    lines: list[list[TextRun]] = []
    for run in ordered:
        tolerance = max(2.0, 0.4 * max(run.size, 1.0))
        if lines and abs(lines[-1][0].y - run.y) <= tolerance:
            lines[-1].append(run)
        else:
            lines.append([run])
    parts: list[str] = []
    for line in lines:
        line.sort(key=lambda run: run.x)
        buffer = ""
        previous: Optional[TextRun] = None
        for run in line:
            if previous is not None:
                estimated_end = previous.x + len(previous.text) * previous.size * _APPROX_ADVANCE
                if run.x - estimated_end > 0.25 * max(previous.size, 1.0):
                    buffer += " "
            buffer += run.text
            previous = run
        parts.append(buffer)
    return "\n".join(part for part in parts if part.strip())
