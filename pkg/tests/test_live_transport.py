"""HttpChatTransport request layout and failure mapping, with requests faked.

No network: post calls are intercepted to capture the outgoing body and to
script responses.
"""

from __future__ import annotations

from types import SimpleNamespace

import pytest

from deckqa.provider import (
    HttpChatTransport,
    Phase,
    ProviderConfig,
    TransportError,
    make_request,
    make_transport,
)
from deckqa.mockprovider import MockTransport

PNG_STUB = b"\x89PNG\r\n\x1a\nfakebytes"


@pytest.fixture()
def capture(monkeypatch):
    calls: list[dict] = []

    def fake_post(url, json=None, headers=None, timeout=None):
        calls.append({"url": url, "body": json, "headers": headers, "timeout": timeout})
        content = '{"ok": true}'
        return SimpleNamespace(
            status_code=200,
            text=content,
            json=lambda: {"choices": [{"message": {"content": content}}]},
        )

    import requests

    monkeypatch.setattr(requests, "post", fake_post)
    return calls


def test_annotation_sends_image_before_text(capture, monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "k3y")
    config = ProviderConfig(mode="live", endpoint="https://llm.example/v1/chat")
    transport = HttpChatTransport(config)
    request = make_request(
        Phase.SLIDE_ANNOTATOR, text_parts=("ctx", "Slide 1:\nbody"), image_parts=(PNG_STUB,)
    )
    transport.complete(request)
    body = capture[0]["body"]
    parts = body["messages"][1]["content"]
    assert [part["type"] for part in parts] == ["image_url", "text", "text"]
    assert parts[0]["image_url"]["url"].startswith("data:image/png;base64,")
    assert capture[0]["headers"]["Authorization"] == "Bearer k3y"
    assert body["messages"][0]["role"] == "system"


def test_window_sends_text_before_image(capture):
    config = ProviderConfig(mode="live", endpoint="https://llm.example/v1/chat")
    transport = HttpChatTransport(config)
    request = make_request(
        Phase.WINDOW_PLANNER, text_parts=("Slide 1:\na", "Slide 2:\nb"), image_parts=(PNG_STUB,)
    )
    transport.complete(request)
    parts = capture[0]["body"]["messages"][1]["content"]
    assert [part["type"] for part in parts] == ["text", "text", "image_url"]


def test_model_and_temperature_forwarded(capture):
    config = ProviderConfig(
        mode="live", endpoint="https://llm.example/v1/chat", model_name="m-9", temperature=0.4
    )
    HttpChatTransport(config).complete(make_request(Phase.RECONCILIATION, text_parts=("{}",)))
    body = capture[0]["body"]
    assert body["model"] == "m-9"
    assert body["temperature"] == 0.4


def test_missing_endpoint_is_transport_error(monkeypatch):
    monkeypatch.delenv("LLM_API_BASE", raising=False)
    config = ProviderConfig(mode="live")
    with pytest.raises(TransportError, match="endpoint"):
        HttpChatTransport(config).complete(make_request(Phase.RECONCILIATION, text_parts=("{}",)))


def test_http_error_retries_then_raises(monkeypatch):
    attempts = []

    def failing_post(url, **kwargs):
        attempts.append(url)
        return SimpleNamespace(status_code=500, text="boom", json=lambda: {})

    import requests

    monkeypatch.setattr(requests, "post", failing_post)
    monkeypatch.setattr("deckqa.provider.time.sleep", lambda _: None)
    config = ProviderConfig(mode="live", endpoint="https://llm.example/v1/chat")
    transport = HttpChatTransport(config, transport_retries=2)
    with pytest.raises(TransportError, match="after 3 attempts"):
        transport.complete(make_request(Phase.RECONCILIATION, text_parts=("{}",)))
    assert len(attempts) == 3


def test_make_transport_selects_by_mode():
    assert isinstance(make_transport(ProviderConfig(mode="mock", seed=1)), MockTransport)
    assert isinstance(
        make_transport(ProviderConfig(mode="live", endpoint="https://x")), HttpChatTransport
    )
