"""fetch_pdf behavior against a local loopback server: status mapping,
content sniffing, and the size cap."""

from __future__ import annotations

import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from deckqa.service import FetchError, OversizeError, fetch_pdf
from helpers import make_pdf


class _Handler(BaseHTTPRequestHandler):
    routes: dict[str, tuple[int, str, bytes]] = {}

    def do_GET(self):
        status, content_type, body = self.routes.get(self.path, (404, "text/plain", b"missing"))
        self.send_response(status)
        self.send_header("content-type", content_type)
        self.send_header("content-length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture(scope="module")
def server_url(request):
    pdf = make_pdf(["Fetched"])
    _Handler.routes = {
        "/deck.pdf": (200, "application/pdf", pdf),
        "/page.html": (200, "text/html", b"<html>not a pdf</html>"),
        "/magic.bin": (200, "application/octet-stream", pdf),
        "/huge.pdf": (200, "application/pdf", b"%PDF-1.4" + b"\x00" * 300_000),
    }
    server = HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def test_fetches_pdf_by_content_type(server_url):
    data = fetch_pdf(f"{server_url}/deck.pdf", max_bytes=1_000_000)
    assert data.startswith(b"%PDF-")


def test_fetches_pdf_by_magic_bytes(server_url):
    data = fetch_pdf(f"{server_url}/magic.bin", max_bytes=1_000_000)
    assert data.startswith(b"%PDF-")


def test_404_raises_fetch_error(server_url):
    with pytest.raises(FetchError, match="404"):
        fetch_pdf(f"{server_url}/absent.pdf", max_bytes=1_000_000)


def test_html_payload_rejected(server_url):
    with pytest.raises(FetchError, match="did not yield a PDF"):
        fetch_pdf(f"{server_url}/page.html", max_bytes=1_000_000)


def test_size_cap_enforced(server_url):
    with pytest.raises(OversizeError):
        fetch_pdf(f"{server_url}/huge.pdf", max_bytes=100_000)


def test_connection_refused_raises_fetch_error():
    with pytest.raises(FetchError, match="failed to fetch"):
        fetch_pdf("http://127.0.0.1:1/none.pdf", max_bytes=1000, timeout=2)
