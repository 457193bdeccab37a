"""Larger-deck smoke and concurrent service requests."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor

from fastapi.testclient import TestClient

from deckqa.pipeline import PipelineConfig, run_pipeline
from deckqa.provider import ProviderConfig
from deckqa.schema import validate_final_document
from deckqa.service import create_app
from conftest import fixed_clock
from helpers import make_pdf


def test_fifty_slide_deck_smoke():
    texts = ["Large Deck"]
    texts += [f"Topic {n}\nmechanism notes for item {n}, with detail." for n in range(2, 51)]
    config = PipelineConfig(
        window_size=8,
        overlap=2,
        render_scale=0.4,
        provider=ProviderConfig(mode="mock", seed=3),
        clock=fixed_clock,
        source_file="large.pdf",
    )
    document = run_pipeline(make_pdf(texts), config)
    assert document.deck_metadata.total_slides == 50
    assert validate_final_document(document).ok
    assert len(document.reconciliation.revised_slide_actions) == 50


def test_concurrent_requests_stream_independently(small_pdf):
    app = create_app(clock=fixed_clock)
    client = TestClient(app)

    def analyze(seed: int):
        response = client.post(
            "/api/analyze",
            files={"file": (f"deck{seed}.pdf", small_pdf, "application/pdf")},
            data={"seed": str(seed)},
        )
        assert response.status_code == 200
        lines = [line for line in response.text.splitlines() if line]
        terminal = json.loads(lines[-1])
        assert terminal["event"] == "completed"
        return terminal["document"]

    with ThreadPoolExecutor(max_workers=3) as pool:
        documents = list(pool.map(analyze, [1, 2, 3]))

    for document in documents:
        assert validate_final_document(document).ok
    # seeds differ, so the generated annotations must differ between runs
    budgets = [tuple(s["question_budget"] for s in doc["slides"]) for doc in documents]
    assert len(set(budgets)) > 1

    # identical seeds served concurrently yield identical documents
    with ThreadPoolExecutor(max_workers=2) as pool:
        twins = list(pool.map(analyze, [7, 7]))
    assert twins[0] == twins[1]
