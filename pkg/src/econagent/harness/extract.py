"""Result extraction: fish the effect JSON out of whatever a run emitted."""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import NoResultFoundError

_KEYS = ("coefficient", "standard_error", "p-value")


def _numeric(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def extract_result(artifact: str | Path) -> tuple[float, float, float]:
    """Return (coefficient, standard_error, p_value) from text or a file.

    Every syntactically valid JSON object in the input is considered; the
    last one carrying all three keys with numeric values wins, so trailing
    corrections override earlier attempts.  The p-value key uses the exact
    spelling "p-value".
    """
    if isinstance(artifact, Path):
        text = artifact.read_text(encoding="utf-8")
    else:
        text = artifact
        if "\n" not in text and "{" not in text:
            candidate = Path(text)
            if candidate.is_file():
                text = candidate.read_text(encoding="utf-8")

    decoder = json.JSONDecoder()
    found = None
    start = text.find("{")
    while start != -1:
        try:
            obj, _ = decoder.raw_decode(text, start)
        except json.JSONDecodeError:
            obj = None
        if isinstance(obj, dict) and all(_numeric(obj.get(k)) for k in _KEYS):
            found = obj
        start = text.find("{", start + 1)
    if found is None:
        raise NoResultFoundError(
            "no JSON object with numeric coefficient, standard_error and "
            "p-value keys found"
        )
    return (
        float(found["coefficient"]),
        float(found["standard_error"]),
        float(found["p-value"]),
    )
