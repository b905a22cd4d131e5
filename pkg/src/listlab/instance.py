"""JSON instance files.

An instance file holds a graph (by its parts, plus explicit edges when the
graph is not complete multipartite over those parts), one color list per
vertex, and free-form metadata describing where it came from. Files are
written with sorted keys so that re-serializing a loaded file reproduces it
byte for byte.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidArgument
from .graph import Graph, PartStructure, complete_multipartite, multipartite_parts

SCHEMA_VERSION = 1


@dataclass
class InstanceFile:
    parts: list[list[int]]
    lists: list[list[int]] | None = None  # indexed by vertex id
    edges: list[list[int]] | None = None  # None: complete multipartite over ``parts``
    metadata: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        self.parts = [[int(v) for v in p] for p in self.parts]
        n = sum(len(p) for p in self.parts)
        if sorted(v for p in self.parts for v in p) != list(range(n)):
            raise InvalidArgument("vertex ids must be exactly 0..n-1, each in one part")
        if self.lists is not None:
            if len(self.lists) != n:
                raise InvalidArgument(f"expected {n} lists, got {len(self.lists)}")
            self.lists = [sorted({int(c) for c in lst}) for lst in self.lists]
            if any(c < 0 for lst in self.lists for c in lst):
                raise InvalidArgument("colors must be nonnegative integers")
        if self.edges is not None:
            self.edges = sorted(sorted((int(a), int(b))) for a, b in self.edges)
        self.structure().check_against(self.graph(), complete=self.edges is None)

    @property
    def n(self) -> int:
        return sum(len(p) for p in self.parts)

    def structure(self) -> PartStructure:
        return PartStructure(tuple(tuple(p) for p in self.parts))

    def graph(self) -> Graph:
        if self.edges is None:
            parts = self.parts
            edges = [(a, b) for i, p in enumerate(parts) for q in parts[i + 1:] for a in p for b in q]
            return Graph.from_edges(self.n, edges)
        return Graph.from_edges(self.n, self.edges)

    def list_map(self) -> dict[int, frozenset[int]]:
        if self.lists is None:
            raise InvalidArgument("instance carries no lists")
        return {v: frozenset(lst) for v, lst in enumerate(self.lists)}

    @classmethod
    def from_graph(
        cls,
        g: Graph,
        lists: Mapping[int, Iterable[int]] | None = None,
        *,
        parts: PartStructure | None = None,
        metadata: dict | None = None,
    ) -> InstanceFile:
        """Wrap a graph; edges are stored only when ``g`` is not complete multipartite."""
        detected = multipartite_parts(g)
        structure = parts or detected or PartStructure(tuple((v,) for v in g.vertices))
        complete = detected is not None and (
            parts is None or {frozenset(p) for p in parts.parts} == {frozenset(p) for p in detected.parts}
        )
        return cls(
            [list(p) for p in structure.parts],
            None if lists is None else [sorted(lists[v]) for v in g.vertices],
            None if complete else [list(e) for e in sorted(g.edges)],
            dict(metadata or {}),
        )

    @classmethod
    def multipartite(cls, sizes: list[int], lists=None, metadata: dict | None = None) -> InstanceFile:
        g, parts = complete_multipartite(sizes)
        return cls.from_graph(g, lists, parts=parts, metadata=metadata)

    def to_dict(self) -> dict:
        out = {
            "schema_version": self.schema_version,
            "parts": self.parts,
            "lists": self.lists,
            "metadata": self.metadata,
        }
        if self.edges is not None:
            out["edges"] = self.edges
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> InstanceFile:
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise InvalidArgument(f"unsupported schema_version {version!r}")
        if "parts" not in d:
            raise InvalidArgument("instance file needs a 'parts' field")
        return cls(d["parts"], d.get("lists"), d.get("edges"), dict(d.get("metadata") or {}), version)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> InstanceFile:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidArgument(f"not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise InvalidArgument("instance file must be a JSON object")
        return cls.from_dict(data)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> InstanceFile:
        return cls.from_json(Path(path).read_text())
