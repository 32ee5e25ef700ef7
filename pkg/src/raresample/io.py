"""JSON model files.

Layout::

    {"name": str, "alphabet": [str, ...], "states": [str, ...],
     "transitions": [{"from": str, "to": str, "symbol": str, "p": float}, ...],
     "metadata": {...}}            # optional

Omitted (from, symbol, to) triples have probability zero. Floats are
written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ModelFormatError
from .hmm import Hmm, require_valid


def hmm_from_dict(doc: dict, *, repair_rows: bool = False, check: bool = True) -> Hmm:
    """Build a generator from a parsed model document.

    Parameters
    ----------
    repair_rows : bool
        Rescale each state's outgoing probabilities to sum to one. Off by
        default so that modelling mistakes surface as errors.
    check : bool
        Run ``require_valid`` on the result.
    """
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    for key in ("alphabet", "states", "transitions"):
        if key not in doc:
            raise ModelFormatError(f"missing required field {key!r}")
        if not isinstance(doc[key], list):
            raise ModelFormatError(f"field {key!r} must be a list")
    alphabet = [str(a) for a in doc["alphabet"]]
    states = [str(s) for s in doc["states"]]
    a_idx = {a: k for k, a in enumerate(alphabet)}
    s_idx = {s: k for k, s in enumerate(states)}
    t = np.zeros((len(alphabet), len(states), len(states)))
    seen = set()
    for n, edge in enumerate(doc["transitions"]):
        where = f"transitions[{n}]"
        if not isinstance(edge, dict):
            raise ModelFormatError(f"{where}: expected an object")
        for key in ("from", "to", "symbol", "p"):
            if key not in edge:
                raise ModelFormatError(f"{where}: missing field {key!r}")
        src, dst, sym = str(edge["from"]), str(edge["to"]), str(edge["symbol"])
        if src not in s_idx:
            raise ModelFormatError(f"{where}.from: unknown state {src!r}")
        if dst not in s_idx:
            raise ModelFormatError(f"{where}.to: unknown state {dst!r}")
        if sym not in a_idx:
            raise ModelFormatError(f"{where}.symbol: unknown symbol {sym!r}")
        p = edge["p"]
        if isinstance(p, bool) or not isinstance(p, (int, float)):
            raise ModelFormatError(f"{where}.p: expected a number, got {p!r}")
        key = (src, dst, sym)
        if key in seen:
            raise ModelFormatError(f"{where}: duplicate transition {src!r} -> {dst!r} on {sym!r}")
        seen.add(key)
        t[a_idx[sym], s_idx[src], s_idx[dst]] = float(p)
    if repair_rows:
        rows = t.sum(axis=(0, 2))
        nz = rows > 0.0
        t[:, nz, :] /= rows[nz][None, :, None]
    hmm = Hmm(states, alphabet, t, name=str(doc.get("name", "")))
    return require_valid(hmm) if check else hmm


def hmm_to_dict(hmm: Hmm, metadata: dict | None = None) -> dict:
    transitions = []
    for i, src in enumerate(hmm.states):
        for x, sym in enumerate(hmm.alphabet):
            for j, dst in enumerate(hmm.states):
                p = float(hmm.t[x, i, j])
                if p > 0.0:
                    transitions.append({"from": src, "to": dst, "symbol": sym, "p": p})
    doc = {
        "name": hmm.name,
        "alphabet": list(hmm.alphabet),
        "states": list(hmm.states),
        "transitions": transitions,
    }
    if metadata:
        doc["metadata"] = metadata
    return doc


def dumps_hmm(hmm: Hmm, metadata: dict | None = None) -> str:
    return json.dumps(hmm_to_dict(hmm, metadata), indent=2, ensure_ascii=False) + "\n"


def loads_hmm(text: str, *, repair_rows: bool = False) -> Hmm:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return hmm_from_dict(doc, repair_rows=repair_rows)


def load_hmm(path, *, repair_rows: bool = False) -> Hmm:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFormatError(f"{path}: {exc.strerror}") from None
    try:
        return loads_hmm(text, repair_rows=repair_rows)
    except ModelFormatError as exc:
        raise ModelFormatError(f"{path}: {exc}") from None


def read_metadata(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8")).get("metadata", {})


def save_hmm(hmm: Hmm, path, metadata: dict | None = None) -> None:
    Path(path).write_text(dumps_hmm(hmm, metadata), encoding="utf-8")


def file_digest(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def format_symbols(symbols) -> str:
    """Single-character alphabets are written as one unbroken string."""
    symbols = list(symbols)
    if all(len(s) == 1 for s in symbols):
        return "".join(symbols) + "\n"
    return " ".join(symbols) + "\n"


def parse_symbols(text: str, hmm: Hmm) -> list[str]:
    text = text.strip()
    if all(len(a) == 1 for a in hmm.alphabet) and " " not in text:
        return list(text)
    return text.split()
