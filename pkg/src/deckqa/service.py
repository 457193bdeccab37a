"""HTTP front door: PDF upload/URL intake, NDJSON progress stream, static UI."""

from __future__ import annotations

import json
import queue
import threading
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, PlainTextResponse, Response, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .pipeline import PipelineConfig, run_pipeline, utc_now
from .provider import ProviderConfig, make_transport

MAX_UPLOAD_BYTES = 50 * 1024 * 1024
STATIC_DIR = Path(__file__).parent / "static"

UrlFetcher = Callable[[str, int], bytes]


class FetchError(ValueError):
    """URL could not be fetched or did not yield a PDF."""


class OversizeError(ValueError):
    """Payload exceeds the upload size cap."""


def _looks_like_pdf(data: bytes) -> bool:
    return b"%PDF-" in data[:1024]


def fetch_pdf(url: str, max_bytes: int, timeout: float = 30.0) -> bytes:
    """Download a PDF with content-type/magic sniffing and the upload size cap."""
    import requests

    try:
        response = requests.get(url, stream=True, timeout=timeout)
    except requests.RequestException as exc:
        raise FetchError(f"failed to fetch URL: {exc}") from exc
    if response.status_code != 200:
        raise FetchError(f"URL returned HTTP {response.status_code}")
    chunks: list[bytes] = []
    received = 0
    for chunk in response.iter_content(chunk_size=65536):
        received += len(chunk)
        if received > max_bytes:
            raise OversizeError(f"fetched content exceeds the {max_bytes} byte cap")
        chunks.append(chunk)
    data = b"".join(chunks)
    content_type = response.headers.get("content-type", "").split(";")[0].strip().lower()
    if content_type != "application/pdf" and not _looks_like_pdf(data):
        raise FetchError(f"URL did not yield a PDF (content-type '{content_type}')")
    return data


def _parse_int(raw: object, name: str) -> int:
    try:
        return int(str(raw))
    except (TypeError, ValueError):
        raise ValueError(f"{name} must be an integer (got {raw!r})")


async def _read_analyze_request(
    request: Request, max_upload_bytes: int, url_fetcher: UrlFetcher
) -> tuple[bytes, str, dict[str, object]]:
    """Returns (pdf_bytes, source_file, overrides); raises ValueError family."""
    content_type = request.headers.get("content-type", "").lower()
    declared = request.headers.get("content-length")
    if declared and declared.isdigit() and int(declared) > max_upload_bytes + 4096:
        raise OversizeError(f"request body exceeds the {max_upload_bytes} byte cap")

    fields: dict[str, object] = {}
    upload_bytes: Optional[bytes] = None
    source_file = "upload.pdf"
    if content_type.startswith("multipart/form-data"):
        form = await request.form()
        for key in ("url", "window_size", "overlap", "mode", "seed", "deck_citation", "deck_url"):
            if key in form and form[key] not in ("", None):
                fields[key] = form[key]
        if "file" in form:
            upload = form["file"]
            if hasattr(upload, "read"):
                upload_bytes = await upload.read()
                source_file = getattr(upload, "filename", None) or source_file
            else:  # plain string field named "file" is not an upload
                raise ValueError("'file' must be an uploaded PDF")
    elif content_type.startswith("application/json") or not content_type:
        body = await request.body()
        if body:
            try:
                parsed = json.loads(body)
            except json.JSONDecodeError as exc:
                raise ValueError(f"request body is not valid JSON: {exc.msg}")
            if not isinstance(parsed, dict):
                raise ValueError("JSON body must be an object")
            fields.update(parsed)
    else:
        raise ValueError(f"unsupported content type '{content_type}'")

    url = fields.pop("url", None)
    if (upload_bytes is None) == (url is None):
        raise ValueError("provide exactly one source: an uploaded 'file' or a 'url'")
    if upload_bytes is not None:
        if len(upload_bytes) > max_upload_bytes:
            raise OversizeError(f"upload exceeds the {max_upload_bytes} byte cap")
        pdf_bytes = upload_bytes
    else:
        pdf_bytes = url_fetcher(str(url), max_upload_bytes)
        source_file = str(url).rsplit("/", 1)[-1] or "fetched.pdf"
    if not _looks_like_pdf(pdf_bytes):
        raise ValueError("payload is not a PDF (missing %PDF- header)")
    return pdf_bytes, source_file, fields


def _config_from_overrides(
    overrides: dict[str, object],
    source_file: str,
    clock: Callable[[], datetime],
) -> PipelineConfig:
    window_size = _parse_int(overrides.get("window_size", 8), "window_size")
    overlap = _parse_int(overrides.get("overlap", 2), "overlap")
    seed = _parse_int(overrides.get("seed", 0), "seed")
    mode = str(overrides.get("mode", "mock"))
    if mode not in ("mock", "live"):
        raise ValueError(f"mode must be 'mock' or 'live' (got '{mode}')")
    deck_url = overrides.get("deck_url")
    return PipelineConfig(
        window_size=window_size,
        overlap=overlap,
        provider=ProviderConfig(mode=mode, seed=seed),
        clock=clock,
        source_file=source_file,
        deck_citation=str(overrides.get("deck_citation", "")),
        deck_url=str(deck_url) if deck_url is not None else None,
    )


def create_app(
    clock: Callable[[], datetime] = utc_now,
    url_fetcher: UrlFetcher = fetch_pdf,
    max_upload_bytes: int = MAX_UPLOAD_BYTES,
) -> FastAPI:
    app = FastAPI(title="deckqa", docs_url=None, redoc_url=None)

    @app.get("/healthz")
    def healthz() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.post("/api/analyze")
    async def analyze(request: Request) -> Response:
        try:
            pdf_bytes, source_file, overrides = await _read_analyze_request(
                request, max_upload_bytes, url_fetcher
            )
            config = _config_from_overrides(overrides, source_file, clock)
            transport = make_transport(config.provider)
        except OversizeError as exc:
            return PlainTextResponse(str(exc), status_code=413)
        except (ValueError, FetchError) as exc:
            return PlainTextResponse(str(exc), status_code=400)

        def event_stream():
            events: queue.Queue = queue.Queue()

            def work() -> None:
                try:
                    run_pipeline(pdf_bytes, config, transport, events.put)
                except Exception:
                    pass  # terminal error event already emitted by run_pipeline
                finally:
                    events.put(None)

            threading.Thread(target=work, daemon=True).start()
            while True:
                event = events.get()
                if event is None:
                    break
                yield event.to_json_line() + "\n"

        return StreamingResponse(event_stream(), media_type="application/x-ndjson")

    if STATIC_DIR.is_dir():
        app.mount("/static", StaticFiles(directory=STATIC_DIR), name="static")

        @app.get("/")
        def index() -> FileResponse:
            return FileResponse(STATIC_DIR / "index.html", media_type="text/html")

    return app
