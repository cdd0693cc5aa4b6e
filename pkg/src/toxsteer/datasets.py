"""JSON Lines dataset I/O.

Reference format: one object per sentence,
``{"id": str, "sentence": str, "interpretations": [str, ...],
"sentence_toxicity": optional float}``.

Generated runs use the same outer shape but each interpretation is an object
``{"text", "toxicity", "target_used", "lambda_used"}``, and the file may open
with a ``{"_meta": {...}}`` provenance line. Loaders normalize both styles to
records whose interpretations are dicts with at least a "text" key.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import InputError


def _normalize_interpretation(item) -> dict:
    if isinstance(item, str):
        return {"text": item, "toxicity": None}
    if isinstance(item, dict) and "text" in item:
        out = dict(item)
        out.setdefault("toxicity", None)
        return out
    raise ValueError(f"interpretation must be a string or an object with 'text', got {item!r}")


def load_jsonl(path) -> tuple[dict, dict | None]:
    """Load a dataset file. Returns (records by id, meta or None)."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"dataset file not found: {path}")
    records: dict[str, dict] = {}
    meta = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if "_meta" in obj:
                meta = obj["_meta"]
                continue
            try:
                sid = obj["id"]
                sentence = obj["sentence"]
                interps = [_normalize_interpretation(x) for x in obj.get("interpretations", [])]
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: malformed record: {exc}") from exc
            if sid in records:
                raise InputError(f"{path}:{lineno}: duplicate sentence id {sid!r}")
            record = dict(obj)  # keep extra fields (target_base, provenance, ...)
            record.update({
                "id": sid,
                "sentence": sentence,
                "interpretations": interps,
                "sentence_toxicity": obj.get("sentence_toxicity"),
            })
            records[sid] = record
    if not records:
        raise InputError(f"{path}: no records found")
    return records, meta


def dump_jsonl(records: list[dict], path, meta: dict | None = None) -> None:
    """Write records as JSON Lines, meta line first; deterministic bytes."""
    path = Path(path)
    lines = []
    if meta is not None:
        lines.append(json.dumps({"_meta": meta}, sort_keys=True))
    for rec in records:
        lines.append(json.dumps(rec, sort_keys=True))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
