"""Endpoint contract suite.

By default this runs against an in-process stub wired to the offline mock.
Point COMMTWIN_PROVIDER_URL at any live service (for example the model
adapter) to run the identical checks over the network:

    COMMTWIN_PROVIDER_URL=http://127.0.0.1:8191 pytest tests/test_provider_conformance.py
"""

import os

import pytest

from commtwin.conformance import assert_conformance, run_conformance

from stubserver import StubServer

ENV_URL = "COMMTWIN_PROVIDER_URL"
ENV_MODEL = "COMMTWIN_PROVIDER_MODEL"


def _external_url() -> str | None:
    return os.environ.get(ENV_URL)


def test_conformance_suite():
    url = _external_url()
    if url:
        assert_conformance(url, os.environ.get(ENV_MODEL, "default"))
        return
    with StubServer(seed=0) as server:
        assert_conformance(server.url, "stub")


def test_conformance_reports_each_check():
    url = _external_url()
    if url:
        results = run_conformance(url, os.environ.get(ENV_MODEL, "default"))
    else:
        with StubServer(seed=0) as server:
            results = run_conformance(server.url, "stub")
    names = [r.name for r in results]
    assert names == ["generate-count", "generate-single", "embed-shape",
                     "emotions-range", "toxicity-range",
                     "perplexity-nonnegative", "scoring-order",
                     "scoring-deterministic"]
    failed = [r for r in results if not r.passed]
    assert not failed, failed


def test_conformance_flags_a_dead_endpoint():
    results = run_conformance("http://127.0.0.1:1", timeout=0.5)
    assert all(not r.passed for r in results)
