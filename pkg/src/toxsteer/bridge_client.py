"""Thin client helpers for the optional model-bridge sidecar."""

from __future__ import annotations

import requests

from .errors import TransportError


def comet_scorer(base_url: str, timeout: float = 30.0):
    """Returns comet_fn(source, candidate, reference) -> float backed by the
    bridge's POST /comet endpoint."""
    base_url = base_url.rstrip("/")
    http = requests.Session()

    def comet_fn(source: str, candidate: str, reference: str) -> float:
        url = f"{base_url}/comet"
        try:
            resp = http.post(url, json={"source": source, "candidate": candidate,
                                        "reference": reference}, timeout=timeout)
        except requests.RequestException as exc:
            raise TransportError(f"semantic metric unreachable: {exc}", endpoint=url) from exc
        if resp.status_code != 200:
            raise TransportError(f"semantic metric returned HTTP {resp.status_code}",
                                 endpoint=url)
        try:
            return float(resp.json()["score"])
        except (ValueError, KeyError, TypeError) as exc:
            raise TransportError(f"malformed comet response: {exc}", endpoint=url) from exc

    return comet_fn
