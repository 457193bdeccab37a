"""Generative-model abstraction: structured requests, validation, repair.

A Transport turns a ProviderRequest into raw text; generate_structured
parses and validates that text against the phase's schema and, on failure,
resends the request with the violation list appended as an extra text part,
up to max_repair_retries times. Any chat-style HTTP endpoint can back live
mode; mock mode needs no network.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Callable, Optional, Protocol

from pydantic import BaseModel, ValidationError

from . import prompts
from .schema import (
    DeckSynthesisOutput,
    ReconciliationResult,
    SlideAnnotation,
    WindowPlannerOutput,
    _format_violation,
)


class Phase(str, Enum):
    WINDOW_PLANNER = "window_planner"
    DECK_SYNTHESIS = "deck_synthesis"
    SLIDE_ANNOTATOR = "slide_annotator"
    RECONCILIATION = "reconciliation"


PHASE_PROMPTS: dict[Phase, str] = {
    Phase.WINDOW_PLANNER: prompts.WINDOW_PLANNER_PROMPT,
    Phase.DECK_SYNTHESIS: prompts.DECK_SYNTHESIS_PROMPT,
    Phase.SLIDE_ANNOTATOR: prompts.SLIDE_ANNOTATOR_PROMPT,
    Phase.RECONCILIATION: prompts.RECONCILIATION_PROMPT,
}

PHASE_SCHEMAS: dict[Phase, type[BaseModel]] = {
    Phase.WINDOW_PLANNER: WindowPlannerOutput,
    Phase.DECK_SYNTHESIS: DeckSynthesisOutput,
    Phase.SLIDE_ANNOTATOR: SlideAnnotation,
    Phase.RECONCILIATION: ReconciliationResult,
}

PHASE_SCHEMA_TAGS: dict[Phase, str] = {
    Phase.WINDOW_PLANNER: "window_plans",
    Phase.DECK_SYNTHESIS: "deck_plan",
    Phase.SLIDE_ANNOTATOR: "slide_annotation",
    Phase.RECONCILIATION: "reconciliation",
}


@dataclass(frozen=True)
class ProviderRequest:
    phase: Phase
    system_prompt: str
    text_parts: tuple[str, ...] = ()
    image_parts: tuple[bytes, ...] = ()
    expected_schema: str = ""

    def __post_init__(self) -> None:
        if self.system_prompt != PHASE_PROMPTS[self.phase]:
            raise ValueError(
                f"system_prompt does not match the canonical prompt for phase "
                f"'{self.phase.value}'"
            )
        if not self.expected_schema:
            object.__setattr__(self, "expected_schema", PHASE_SCHEMA_TAGS[self.phase])

    def with_repair_feedback(self, violations: tuple[str, ...]) -> "ProviderRequest":
        feedback = (
            "The previous response failed validation:\n"
            + "\n".join(f"- {violation}" for violation in violations)
            + "\nReturn corrected JSON only. Do not include explanatory prose."
        )
        return replace(self, text_parts=self.text_parts + (feedback,))


def make_request(
    phase: Phase,
    text_parts: tuple[str, ...] = (),
    image_parts: tuple[bytes, ...] = (),
) -> ProviderRequest:
    return ProviderRequest(
        phase=phase,
        system_prompt=PHASE_PROMPTS[phase],
        text_parts=text_parts,
        image_parts=image_parts,
    )


@dataclass(frozen=True)
class ProviderConfig:
    mode: str = "mock"  # "mock" | "live"
    model_name: str = "generic-chat"
    max_repair_retries: int = 2
    timeout: float = 120.0
    temperature: float = 0.0
    seed: int = 0
    endpoint: Optional[str] = None

    def __post_init__(self) -> None:
        if self.mode not in ("mock", "live"):
            raise ValueError(f"mode must be 'mock' or 'live' (got '{self.mode}')")
        if self.max_repair_retries < 0:
            raise ValueError("max_repair_retries must be >= 0")


@dataclass(frozen=True)
class RepairTranscript:
    attempts: tuple[tuple[str, tuple[str, ...]], ...]
    final_status: str  # "ok" | "exhausted"


class ProviderUnavailable(RuntimeError):
    """Transport failure (connection, timeout, HTTP error) after retries."""


class SchemaExhausted(RuntimeError):
    """No schema-valid output within the repair budget."""

    def __init__(self, message: str, transcript: RepairTranscript):
        super().__init__(message)
        self.transcript = transcript


class TransportError(RuntimeError):
    """Raised by transports; mapped to ProviderUnavailable by the repair loop."""


class Transport(Protocol):
    def complete(self, request: ProviderRequest) -> str: ...


_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL | re.IGNORECASE)


def extract_json_payload(text: str) -> str:
    """Best-effort recovery of the JSON body from a chat response."""
    stripped = text.strip()
    if stripped.startswith(("{", "[")):
        return stripped
    fenced = _FENCE_RE.search(text)
    if fenced:
        return fenced.group(1).strip()
    for opener, closer in (("{", "}"), ("[", "]")):
        start = text.find(opener)
        end = text.rfind(closer)
        if start != -1 and end > start:
            return text[start:end + 1]
    return stripped


def _parse_phase_payload(raw: str, phase: Phase) -> tuple[Optional[BaseModel], list[str]]:
    try:
        payload = json.loads(extract_json_payload(raw))
    except json.JSONDecodeError as exc:
        return None, [f"response is not valid JSON (line {exc.lineno} column {exc.colno}: {exc.msg})"]
    try:
        return PHASE_SCHEMAS[phase].model_validate(payload), []
    except ValidationError as exc:
        return None, [_format_violation(err) for err in exc.errors()]


def generate_structured(
    request: ProviderRequest,
    config: ProviderConfig,
    transport: Transport,
    extra_check: Optional[Callable[[Any], list[str]]] = None,
) -> tuple[Any, RepairTranscript]:
    """Run one phase call with parse-validate-retry repair.

    Returns a value satisfying the phase schema plus the attempt transcript.
    Raises ProviderUnavailable on transport failure and SchemaExhausted when
    the retry budget runs out (transcript attached).
    """
    attempts: list[tuple[str, tuple[str, ...]]] = []
    current = request
    for _ in range(config.max_repair_retries + 1):
        try:
            raw = transport.complete(current)
        except TransportError as exc:
            raise ProviderUnavailable(str(exc)) from exc
        value, violations = _parse_phase_payload(raw, current.phase)
        if value is not None and extra_check is not None:
            violations = violations + list(extra_check(value))
        attempts.append((raw, tuple(violations)))
        if value is not None and not violations:
            return value, RepairTranscript(attempts=tuple(attempts), final_status="ok")
        current = current.with_repair_feedback(tuple(violations))
    transcript = RepairTranscript(attempts=tuple(attempts), final_status="exhausted")
    raise SchemaExhausted(
        f"phase '{request.phase.value}' produced no schema-valid output in "
        f"{config.max_repair_retries + 1} attempt(s); last violations: "
        f"{'; '.join(attempts[-1][1]) or 'none recorded'}",
        transcript,
    )


class HttpChatTransport:
    """Live mode: OpenAI-compatible chat-completions endpoint over HTTPS.

    The API key comes from the LLM_API_KEY environment variable and the
    endpoint from config.endpoint or LLM_API_BASE. Images are sent as
    base64 data URLs. Part order follows the pipeline's layout: the slide
    image precedes its text for single-slide annotation; the contact sheet
    follows the per-slide text blocks everywhere else.
    """

    def __init__(self, config: ProviderConfig, transport_retries: int = 2):
        self.config = config
        self.transport_retries = transport_retries

    def _message_parts(self, request: ProviderRequest) -> list[dict[str, Any]]:
        import base64

        texts = [{"type": "text", "text": part} for part in request.text_parts]
        images = [
            {
                "type": "image_url",
                "image_url": {
                    "url": "data:image/png;base64," + base64.b64encode(part).decode("ascii")
                },
            }
            for part in request.image_parts
        ]
        if request.phase is Phase.SLIDE_ANNOTATOR:
            return images + texts
        return texts + images

    def complete(self, request: ProviderRequest) -> str:
        import requests

        endpoint = self.config.endpoint or os.environ.get("LLM_API_BASE")
        if not endpoint:
            raise TransportError("live mode requires config.endpoint or LLM_API_BASE")
        api_key = os.environ.get("LLM_API_KEY", "")
        body = {
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": self._message_parts(request)},
            ],
        }
        last_error: Exception | None = None
        for attempt in range(self.transport_retries + 1):
            try:
                response = requests.post(
                    endpoint,
                    json=body,
                    headers={"Authorization": f"Bearer {api_key}"},
                    timeout=self.config.timeout,
                )
                if response.status_code >= 500:
                    raise TransportError(f"endpoint returned {response.status_code}")
                if response.status_code != 200:
                    raise TransportError(
                        f"endpoint returned {response.status_code}: {response.text[:200]}"
                    )
                payload = response.json()
                return payload["choices"][0]["message"]["content"]
            except TransportError as exc:
                last_error = exc
            except Exception as exc:  # connection errors, timeouts, bad payload shape
                last_error = exc
            if attempt < self.transport_retries:
                time.sleep(min(2.0 ** attempt, 8.0))
        raise TransportError(f"transport failed after {self.transport_retries + 1} attempts: {last_error}")


def make_transport(config: ProviderConfig) -> Transport:
    if config.mode == "live":
        return HttpChatTransport(config)
    from .mockprovider import MockTransport

    return MockTransport(config.seed)
