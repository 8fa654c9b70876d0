"""Reading and writing instances in the text and JSON formats.

Text format (``#`` starts a comment line)::

    n m
    b_1 ... b_n
    <edge 1 vertices>
    ...
    <edge m vertices>

JSON format: ``{"n": ..., "demands": [...], "edges": [[...], ...]}``.
Vertex numbers are 1-based in both.
"""

from __future__ import annotations

import json
from pathlib import Path

from .hypergraph import Hypergraph

INSTANCE_SUFFIXES = (".txt", ".json")


class InstanceParseError(ValueError):
    pass


def parse_text(text: str) -> Hypergraph:
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        if len(lines) < 2:
            raise InstanceParseError("need a header line and a demand line")
        if len(lines[0]) != 2:
            raise InstanceParseError("header must be 'n m'")
        n, m = (int(tok) for tok in lines[0])
        demands = [int(tok) for tok in lines[1]]
        if len(demands) != n:
            raise InstanceParseError(f"expected {n} demands, got {len(demands)}")
        body = lines[2:]
        if len(body) != m:
            raise InstanceParseError(f"expected {m} edge lines, got {len(body)}")
        edges = [[int(tok) - 1 for tok in ln] for ln in body]
    except ValueError as exc:
        if isinstance(exc, InstanceParseError):
            raise
        raise InstanceParseError(f"non-integer token: {exc}") from exc
    return Hypergraph(n, edges, demands)


def parse_json(text: str) -> Hypergraph:
    try:
        data = json.loads(text)
        n = int(data["n"])
        demands = [int(b) for b in data["demands"]]
        edges = [[int(v) - 1 for v in e] for e in data["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceParseError(f"bad JSON instance: {exc}") from exc
    if len(demands) != n:
        raise InstanceParseError(f"expected {n} demands, got {len(demands)}")
    return Hypergraph(n, edges, demands)


def to_text(h: Hypergraph) -> str:
    out = [f"{h.n} {h.m}", " ".join(str(b) for b in h.demands)]
    out += [" ".join(str(v + 1) for v in e) for e in h.edges]
    return "\n".join(out) + "\n"


def to_json(h: Hypergraph) -> str:
    data = {"n": h.n, "demands": list(h.demands), "edges": [[v + 1 for v in e] for e in h.edges]}
    return json.dumps(data, separators=(",", ":")) + "\n"


def read_instance(path: str | Path) -> Hypergraph:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        return parse_json(text)
    return parse_text(text)


def write_instance(h: Hypergraph, path: str | Path) -> list[Path]:
    """Write ``h`` next to ``path`` in both formats; returns the files written."""
    base = Path(path).with_suffix("")
    txt, js = base.with_suffix(".txt"), base.with_suffix(".json")
    txt.write_text(to_text(h))
    js.write_text(to_json(h))
    return [txt, js]


def list_corpus(directory: str | Path) -> list[Path]:
    """Instance files in ``directory``, one per stem (text preferred over JSON)."""
    by_stem: dict[str, Path] = {}
    for p in sorted(Path(directory).iterdir()):
        if p.suffix not in INSTANCE_SUFFIXES or p.name == "manifest.json" or p.name.endswith(".point.json"):
            continue
        if p.stem not in by_stem or p.suffix == ".txt":
            by_stem[p.stem] = p
    return [by_stem[s] for s in sorted(by_stem)]
