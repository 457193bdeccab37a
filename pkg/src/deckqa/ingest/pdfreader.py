"""Minimal PDF document reader: object model, cross-reference tables, page tree.

Covers the structural subset needed to enumerate pages, read their media
boxes and resources, and decode their content streams: classic xref tables,
xref streams, object streams, Flate/ASCII85/ASCIIHex filters with PNG
predictors. Encrypted documents are detected and refused, never decrypted.
"""

from __future__ import annotations

import base64
import re
import zlib
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional


class PdfError(ValueError):
    """Base class for structural PDF failures."""


class NotAPdfError(PdfError):
    """The byte sequence is not a parseable PDF document."""


class EncryptedPdfError(PdfError):
    """The document declares encryption; decryption is unsupported."""


class EmptyPdfError(PdfError):
    """The document contains zero pages."""


class PdfName(str):
    """A PDF name object, stored without the leading slash."""

    __slots__ = ()


@dataclass(frozen=True)
class PdfRef:
    num: int
    gen: int


@dataclass
class PdfStream:
    dictionary: dict[str, Any]
    raw: bytes
    _decoded: Optional[bytes] = field(default=None, repr=False)

    def data(self, document: "PdfDocument") -> bytes:
        if self._decoded is None:
            self._decoded = _decode_stream(self.dictionary, self.raw, document)
        return self._decoded


_WHITESPACE = b"\x00\t\n\x0c\r "
_DELIMITERS = b"()<>[]{}/%"
_NUMBER_RE = re.compile(rb"[+-]?(?:\d+\.?\d*|\.\d+)")
_OBJ_HEADER_RE = re.compile(rb"(\d+)\s+(\d+)\s+obj\b")


class _Tokenizer:
    """Cursor over raw PDF bytes producing primitive objects."""

    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def skip_whitespace(self) -> None:
        data, n = self.data, len(self.data)
        while self.pos < n:
            byte = data[self.pos]
            if byte in _WHITESPACE:
                self.pos += 1
            elif byte == 0x25:  # '%' comment runs to end of line
                eol = data.find(b"\n", self.pos)
                if eol == -1:
                    eol = data.find(b"\r", self.pos)
                self.pos = n if eol == -1 else eol + 1
            else:
                return

    def peek_bytes(self, count: int) -> bytes:
        return self.data[self.pos:self.pos + count]

    def expect_keyword(self, keyword: bytes) -> bool:
        self.skip_whitespace()
        if self.data.startswith(keyword, self.pos):
            self.pos += len(keyword)
            return True
        return False

    def read_object(self) -> Any:
        self.skip_whitespace()
        if self.pos >= len(self.data):
            raise NotAPdfError("unexpected end of data while reading object")
        byte = self.data[self.pos]
        if byte == 0x3C:  # '<'
            if self.data.startswith(b"<<", self.pos):
                return self._read_dict_or_stream()
            return self._read_hex_string()
        if byte == 0x28:  # '('
            return self._read_literal_string()
        if byte == 0x2F:  # '/'
            return self._read_name()
        if byte == 0x5B:  # '['
            return self._read_array()
        if self.data.startswith(b"true", self.pos):
            self.pos += 4
            return True
        if self.data.startswith(b"false", self.pos):
            self.pos += 5
            return False
        if self.data.startswith(b"null", self.pos):
            self.pos += 4
            return None
        match = _NUMBER_RE.match(self.data, self.pos)
        if match:
            return self._read_number_or_ref(match)
        raise NotAPdfError(f"unparseable token at byte offset {self.pos}")

    def _read_number_or_ref(self, match: re.Match[bytes]) -> Any:
        text = match.group(0)
        self.pos = match.end()
        if b"." in text:
            return float(text)
        value = int(text)
        # Look ahead for "gen R" to form an indirect reference.
        save = self.pos
        self.skip_whitespace()
        gen_match = _NUMBER_RE.match(self.data, self.pos)
        if gen_match and b"." not in gen_match.group(0):
            probe = _Tokenizer(self.data, gen_match.end())
            probe.skip_whitespace()
            after_r = probe.pos + 1
            is_ref = probe.data.startswith(b"R", probe.pos) and (
                after_r >= len(probe.data)
                or probe.data[after_r] in _WHITESPACE
                or probe.data[after_r] in _DELIMITERS
            )
            if is_ref:
                self.pos = after_r
                return PdfRef(value, int(gen_match.group(0)))
        self.pos = save
        return value

    def _read_name(self) -> PdfName:
        self.pos += 1
        out = bytearray()
        data, n = self.data, len(self.data)
        while self.pos < n:
            byte = data[self.pos]
            if byte in _WHITESPACE or byte in _DELIMITERS:
                break
            if byte == 0x23 and self.pos + 2 < n:  # '#xx'
                try:
                    out.append(int(data[self.pos + 1:self.pos + 3], 16))
                    self.pos += 3
                    continue
                except ValueError:
                    pass
            out.append(byte)
            self.pos += 1
        return PdfName(out.decode("latin-1"))

    def _read_array(self) -> list[Any]:
        self.pos += 1
        items: list[Any] = []
        while True:
            self.skip_whitespace()
            if self.pos >= len(self.data):
                raise NotAPdfError("unterminated array")
            if self.data[self.pos] == 0x5D:  # ']'
                self.pos += 1
                return items
            items.append(self.read_object())

    def _read_literal_string(self) -> bytes:
        self.pos += 1
        out = bytearray()
        depth = 1
        data, n = self.data, len(self.data)
        while self.pos < n:
            byte = data[self.pos]
            if byte == 0x5C:  # backslash escape
                self.pos += 1
                if self.pos >= n:
                    break
                esc = data[self.pos]
                mapping = {0x6E: 0x0A, 0x72: 0x0D, 0x74: 0x09, 0x62: 0x08, 0x66: 0x0C}
                if esc in mapping:
                    out.append(mapping[esc])
                    self.pos += 1
                elif esc in (0x28, 0x29, 0x5C):
                    out.append(esc)
                    self.pos += 1
                elif 0x30 <= esc <= 0x37:  # octal, up to 3 digits
                    digits = bytearray()
                    while self.pos < n and len(digits) < 3 and 0x30 <= data[self.pos] <= 0x37:
                        digits.append(data[self.pos])
                        self.pos += 1
                    out.append(int(digits, 8) & 0xFF)
                elif esc in (0x0A, 0x0D):  # line continuation
                    self.pos += 1
                    if esc == 0x0D and self.pos < n and data[self.pos] == 0x0A:
                        self.pos += 1
                else:
                    out.append(esc)
                    self.pos += 1
            elif byte == 0x28:
                depth += 1
                out.append(byte)
                self.pos += 1
            elif byte == 0x29:
                depth -= 1
                if depth == 0:
                    self.pos += 1
                    return bytes(out)
                out.append(byte)
                self.pos += 1
            else:
                out.append(byte)
                self.pos += 1
        raise NotAPdfError("unterminated literal string")

    def _read_hex_string(self) -> bytes:
        self.pos += 1
        end = self.data.find(b">", self.pos)
        if end == -1:
            raise NotAPdfError("unterminated hex string")
        digits = re.sub(rb"\s", b"", self.data[self.pos:end])
        self.pos = end + 1
        if len(digits) % 2:
            digits += b"0"
        return bytes.fromhex(digits.decode("ascii"))

    def _read_dict_or_stream(self) -> Any:
        self.pos += 2
        result: dict[str, Any] = {}
        while True:
            self.skip_whitespace()
            if self.data.startswith(b">>", self.pos):
                self.pos += 2
                break
            key = self.read_object()
            if not isinstance(key, PdfName):
                raise NotAPdfError(f"dictionary key is not a name at offset {self.pos}")
            result[str(key)] = self.read_object()
        save = self.pos
        self.skip_whitespace()
        if self.data.startswith(b"stream", self.pos):
            self.pos += len(b"stream")
            if self.data.startswith(b"\r\n", self.pos):
                self.pos += 2
            elif self.data.startswith(b"\n", self.pos):
                self.pos += 1
            return self._read_stream_body(result)
        self.pos = save
        return result

    def _read_stream_body(self, dictionary: dict[str, Any]) -> PdfStream:
        start = self.pos
        length = dictionary.get("Length")
        raw: Optional[bytes] = None
        if isinstance(length, int):
            candidate_end = start + length
            probe = _Tokenizer(self.data, candidate_end)
            if probe.expect_keyword(b"endstream"):
                raw = self.data[start:candidate_end]
                self.pos = probe.pos
        if raw is None:
            # Length absent or an unresolved reference: scan for the terminator.
            end = self.data.find(b"endstream", start)
            if end == -1:
                raise NotAPdfError("unterminated stream object")
            raw = self.data[start:end]
            # Strip only the single framing EOL; more could be stream data.
            if raw.endswith(b"\r\n"):
                raw = raw[:-2]
            elif raw.endswith((b"\n", b"\r")):
                raw = raw[:-1]
            self.pos = end + len(b"endstream")
        return PdfStream(dictionary, raw)


def _png_unpredict(data: bytes, columns: int, colors: int, bits: int) -> bytes:
    bpp = max(1, (colors * bits + 7) // 8)
    row_len = (columns * colors * bits + 7) // 8
    out = bytearray()
    prev = bytearray(row_len)
    pos = 0
    while pos + 1 + row_len <= len(data) + row_len:
        if pos >= len(data):
            break
        tag = data[pos]
        row = bytearray(data[pos + 1:pos + 1 + row_len])
        pos += 1 + row_len
        if tag == 1:  # Sub
            for i in range(bpp, len(row)):
                row[i] = (row[i] + row[i - bpp]) & 0xFF
        elif tag == 2:  # Up
            for i in range(len(row)):
                row[i] = (row[i] + prev[i]) & 0xFF
        elif tag == 3:  # Average
            for i in range(len(row)):
                left = row[i - bpp] if i >= bpp else 0
                row[i] = (row[i] + ((left + prev[i]) >> 1)) & 0xFF
        elif tag == 4:  # Paeth
            for i in range(len(row)):
                left = row[i - bpp] if i >= bpp else 0
                up = prev[i]
                up_left = prev[i - bpp] if i >= bpp else 0
                p = left + up - up_left
                pa, pb, pc = abs(p - left), abs(p - up), abs(p - up_left)
                if pa <= pb and pa <= pc:
                    ref = left
                elif pb <= pc:
                    ref = up
                else:
                    ref = up_left
                row[i] = (row[i] + ref) & 0xFF
        out.extend(row)
        prev = row
    return bytes(out)


class UnsupportedFilterError(PdfError):
    """A stream uses a compression filter this reader does not implement."""


def _apply_filter(name: str, data: bytes, parms: dict[str, Any], document: "PdfDocument") -> bytes:
    if name in ("FlateDecode", "Fl"):
        try:
            data = zlib.decompress(data)
        except zlib.error:
            decompressor = zlib.decompressobj()
            data = decompressor.decompress(data)
        predictor = document.resolve(parms.get("Predictor", 1))
        if isinstance(predictor, int) and predictor >= 10:
            columns = int(document.resolve(parms.get("Columns", 1)))
            colors = int(document.resolve(parms.get("Colors", 1)))
            bits = int(document.resolve(parms.get("BitsPerComponent", 8)))
            data = _png_unpredict(data, columns, colors, bits)
        return data
    if name in ("ASCII85Decode", "A85"):
        body = bytes(data).strip()
        if body.startswith(b"<~"):
            body = body[2:]
        if body.endswith(b"~>"):
            body = body[:-2]
        return base64.a85decode(body, adobe=False, ignorechars=b" \t\n\r\x0b\x0c")
    if name in ("ASCIIHexDecode", "AHx"):
        digits = re.sub(rb"[\s>]", b"", data)
        if len(digits) % 2:
            digits += b"0"
        return bytes.fromhex(digits.decode("ascii"))
    raise UnsupportedFilterError(f"unsupported stream filter '{name}'")


def _decode_stream(dictionary: dict[str, Any], raw: bytes, document: "PdfDocument") -> bytes:
    filters = document.resolve(dictionary.get("Filter"))
    if filters is None:
        return raw
    if not isinstance(filters, list):
        filters = [filters]
    parms_entry = document.resolve(dictionary.get("DecodeParms") or dictionary.get("DP"))
    if not isinstance(parms_entry, list):
        parms_entry = [parms_entry] * len(filters)
    data = raw
    for filter_name, parms in zip(filters, parms_entry):
        parms = document.resolve(parms) or {}
        data = _apply_filter(str(filter_name), data, parms, document)
    return data


@dataclass
class PdfPage:
    number: int  # 1-based
    media_box: tuple[float, float, float, float]
    rotate: int
    resources: dict[str, Any]
    content: bytes


class PdfDocument:
    """Parsed PDF ready for page enumeration and object resolution."""

    def __init__(self, data: bytes):
        if not data or b"%PDF-" not in data[:1024]:
            raise NotAPdfError("missing %PDF- header")
        self.data = data
        self._cache: dict[int, Any] = {}
        self._offsets: dict[int, int] = {}
        self._compressed: dict[int, tuple[int, int]] = {}
        self.trailer: dict[str, Any] = {}
        try:
            self._load_xref()
        except (PdfError, RecursionError):
            self._offsets.clear()
            self._compressed.clear()
            self.trailer = {}
        if not self._offsets or "Root" not in self.trailer:
            self._brute_force_scan()
        if "Encrypt" in self.trailer:
            raise EncryptedPdfError("document declares /Encrypt; decryption unsupported")
        if "Root" not in self.trailer:
            raise NotAPdfError("no document catalog found")

    # -- cross-reference loading -------------------------------------------

    def _load_xref(self) -> None:
        tail = self.data[-2048:]
        marker = tail.rfind(b"startxref")
        if marker == -1:
            raise NotAPdfError("missing startxref")
        cursor = _Tokenizer(tail, marker + len(b"startxref"))
        cursor.skip_whitespace()
        match = _NUMBER_RE.match(tail, cursor.pos)
        if not match:
            raise NotAPdfError("startxref offset missing")
        offset = int(match.group(0))
        seen: set[int] = set()
        while offset and offset not in seen:
            seen.add(offset)
            offset = self._load_xref_section(offset)

    def _load_xref_section(self, offset: int) -> int:
        if offset < 0 or offset >= len(self.data):
            raise NotAPdfError(f"xref offset {offset} out of range")
        cursor = _Tokenizer(self.data, offset)
        cursor.skip_whitespace()
        if cursor.data.startswith(b"xref", cursor.pos):
            cursor.pos += 4
            return self._load_xref_table(cursor)
        return self._load_xref_stream(cursor)

    def _load_xref_table(self, cursor: _Tokenizer) -> int:
        while True:
            cursor.skip_whitespace()
            if cursor.data.startswith(b"trailer", cursor.pos):
                cursor.pos += len(b"trailer")
                trailer = cursor.read_object()
                if not isinstance(trailer, dict):
                    raise NotAPdfError("trailer is not a dictionary")
                for key, value in trailer.items():
                    self.trailer.setdefault(key, value)
                prev = trailer.get("Prev")
                return int(prev) if isinstance(prev, (int, float)) else 0
            match = _NUMBER_RE.match(cursor.data, cursor.pos)
            if not match:
                raise NotAPdfError("malformed xref subsection header")
            first = int(match.group(0))
            cursor.pos = match.end()
            cursor.skip_whitespace()
            match = _NUMBER_RE.match(cursor.data, cursor.pos)
            if not match:
                raise NotAPdfError("malformed xref subsection count")
            count = int(match.group(0))
            cursor.pos = match.end()
            cursor.skip_whitespace()
            for index in range(count):
                row = cursor.data[cursor.pos:cursor.pos + 20]
                if len(row) < 18:
                    raise NotAPdfError("truncated xref row")
                entry_offset = int(row[0:10])
                kind = row[17:18]
                if kind == b"n":
                    self._offsets.setdefault(first + index, entry_offset)
                cursor.pos += 20 if row[18:20] in (b"\r\n", b" \n", b" \r") else 19

    def _load_xref_stream(self, cursor: _Tokenizer) -> int:
        match = _OBJ_HEADER_RE.match(cursor.data, cursor.pos)
        if not match:
            raise NotAPdfError("expected xref stream object")
        cursor.pos = match.end()
        obj = cursor.read_object()
        if not isinstance(obj, PdfStream):
            raise NotAPdfError("xref stream object has no stream body")
        info = obj.dictionary
        data = obj.data(self)
        widths = [int(w) for w in self.resolve(info.get("W", []))]
        if len(widths) < 3:
            raise NotAPdfError("xref stream missing /W")
        size = int(self.resolve(info.get("Size", 0)))
        index = self.resolve(info.get("Index")) or [0, size]
        row_len = sum(widths)
        pos = 0

        def read_field(width: int, default: int) -> int:
            nonlocal pos
            if width == 0:
                return default
            value = int.from_bytes(data[pos:pos + width], "big")
            pos += width
            return value

        for start, count in zip(index[::2], index[1::2]):
            for obj_num in range(int(start), int(start) + int(count)):
                if pos + row_len > len(data):
                    break
                kind = read_field(widths[0], 1)
                second = read_field(widths[1], 0)
                third = read_field(widths[2], 0)
                if kind == 1:
                    self._offsets.setdefault(obj_num, second)
                elif kind == 2:
                    self._compressed.setdefault(obj_num, (second, third))
        for key, value in info.items():
            if key not in ("W", "Index", "Filter", "DecodeParms", "Length", "Type"):
                self.trailer.setdefault(key, value)
        prev = info.get("Prev")
        return int(prev) if isinstance(prev, (int, float)) else 0

    def _brute_force_scan(self) -> None:
        for match in _OBJ_HEADER_RE.finditer(self.data):
            self._offsets.setdefault(int(match.group(1)), match.start())
        if not self._offsets:
            raise NotAPdfError("no indirect objects found")
        trailer_pos = self.data.rfind(b"trailer")
        if trailer_pos != -1:
            try:
                cursor = _Tokenizer(self.data, trailer_pos + len(b"trailer"))
                trailer = cursor.read_object()
                if isinstance(trailer, dict):
                    for key, value in trailer.items():
                        self.trailer.setdefault(key, value)
            except PdfError:
                pass
        if "Root" not in self.trailer:
            for num in sorted(self._offsets):
                try:
                    candidate = self.get_object(num)
                except PdfError:
                    continue
                if isinstance(candidate, dict) and str(candidate.get("Type")) == "Catalog":
                    self.trailer["Root"] = PdfRef(num, 0)
                    break

    # -- object access ------------------------------------------------------

    def get_object(self, num: int) -> Any:
        if num in self._cache:
            return self._cache[num]
        if num in self._offsets:
            value = self._parse_object_at(self._offsets[num], num)
        elif num in self._compressed:
            value = self._parse_compressed_object(num)
        else:
            value = None
        self._cache[num] = value
        return value

    def _parse_object_at(self, offset: int, expected: int) -> Any:
        if offset < 0 or offset >= len(self.data):
            return None
        cursor = _Tokenizer(self.data, offset)
        cursor.skip_whitespace()
        match = _OBJ_HEADER_RE.match(cursor.data, cursor.pos)
        if not match or int(match.group(1)) != expected:
            # Offset may be stale; fall back to a targeted scan.
            pattern = re.compile(rb"(?<![0-9])" + str(expected).encode() + rb"\s+\d+\s+obj\b")
            found = pattern.search(self.data)
            if not found:
                return None
            cursor = _Tokenizer(self.data, found.end())
        else:
            cursor.pos = match.end()
        value = cursor.read_object()
        if isinstance(value, PdfStream):
            length = value.dictionary.get("Length")
            if isinstance(length, PdfRef):
                resolved = self.resolve(length)
                if isinstance(resolved, int) and resolved <= len(value.raw):
                    value.raw = value.raw[:resolved]
        return value

    def _parse_compressed_object(self, num: int) -> Any:
        container_num, index = self._compressed[num]
        container = self.get_object(container_num)
        if not isinstance(container, PdfStream):
            return None
        data = container.data(self)
        count = int(self.resolve(container.dictionary.get("N", 0)))
        first = int(self.resolve(container.dictionary.get("First", 0)))
        header = _Tokenizer(data, 0)
        pairs: list[tuple[int, int]] = []
        for _ in range(count):
            header.skip_whitespace()
            obj_match = _NUMBER_RE.match(data, header.pos)
            if not obj_match:
                break
            header.pos = obj_match.end()
            header.skip_whitespace()
            off_match = _NUMBER_RE.match(data, header.pos)
            if not off_match:
                break
            header.pos = off_match.end()
            pairs.append((int(obj_match.group(0)), int(off_match.group(0))))
        if index >= len(pairs):
            for obj_num, offset in pairs:
                if obj_num == num:
                    return _Tokenizer(data, first + offset).read_object()
            return None
        obj_num, offset = pairs[index]
        return _Tokenizer(data, first + offset).read_object()

    def resolve(self, value: Any) -> Any:
        seen = 0
        while isinstance(value, PdfRef):
            value = self.get_object(value.num)
            seen += 1
            if seen > 32:
                raise NotAPdfError("reference chain too deep")
        return value

    # -- page tree ------------------------------------------------------------

    def pages(self) -> list[PdfPage]:
        catalog = self.resolve(self.trailer.get("Root"))
        if not isinstance(catalog, dict):
            raise NotAPdfError("document catalog is not a dictionary")
        root = self.resolve(catalog.get("Pages"))
        if not isinstance(root, dict):
            raise NotAPdfError("catalog has no page tree")
        pages: list[PdfPage] = []
        default_box = (0.0, 0.0, 612.0, 792.0)
        for node, inherited in self._walk_page_tree(root, {}):
            box = inherited.get("MediaBox", default_box)
            rotate = int(inherited.get("Rotate", 0) or 0) % 360
            resources = inherited.get("Resources") or {}
            content = self._page_content(node)
            pages.append(
                PdfPage(
                    number=len(pages) + 1,
                    media_box=box,
                    rotate=rotate,
                    resources=resources if isinstance(resources, dict) else {},
                    content=content,
                )
            )
        return pages

    def _walk_page_tree(
        self, node: dict[str, Any], inherited: dict[str, Any], depth: int = 0
    ) -> Iterator[tuple[dict[str, Any], dict[str, Any]]]:
        if depth > 64:
            raise NotAPdfError("page tree too deep")
        merged = dict(inherited)
        for key in ("MediaBox", "Resources", "Rotate"):
            if key in node:
                value = self.resolve(node[key])
                if key == "MediaBox":
                    value = self._as_box(value)
                merged[key] = value
        node_type = str(node.get("Type", ""))
        kids = self.resolve(node.get("Kids"))
        if node_type == "Page" or (node_type != "Pages" and not isinstance(kids, list)):
            yield node, merged
            return
        for kid_ref in kids or []:
            kid = self.resolve(kid_ref)
            if isinstance(kid, dict):
                yield from self._walk_page_tree(kid, merged, depth + 1)

    def _as_box(self, value: Any) -> tuple[float, float, float, float]:
        box = [float(self.resolve(item)) for item in (value or [])][:4]
        if len(box) != 4:
            return (0.0, 0.0, 612.0, 792.0)
        x0, y0, x1, y1 = box
        return (min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))

    def _page_content(self, node: dict[str, Any]) -> bytes:
        contents = self.resolve(node.get("Contents"))
        streams: list[bytes] = []
        entries = contents if isinstance(contents, list) else [contents]
        for entry in entries:
            entry = self.resolve(entry)
            if isinstance(entry, PdfStream):
                try:
                    streams.append(entry.data(self))
                except UnsupportedFilterError:
                    continue
        return b"\n".join(streams)
