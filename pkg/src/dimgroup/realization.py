"""Realization sequences and their file representation.

A realization is a finite chain of nonnegative integer transition matrices
(stage n maps level n to level n+1), each with a designed eigenvalue p, plus
optional per-level marker vectors locating the distinguished rank-one
subgroup, and claimed property flags.  Flags in a file are claims only;
verification always recomputes them from the matrices.

File format: JSON with a version tag; integer entries are serialized as
decimal strings because stage eigenvalues grow multiplicatively and may
overflow fixed-width consumers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .errors import BadCutPoints, DimensionMismatch, SchemaError
from .exact import Matrix

FILE_VERSION = "1"


@dataclass(frozen=True)
class RealizationSeq:
    """Chained transition matrices with designed eigenvalues and markers."""

    matrices: tuple[Matrix, ...]
    stage_values: tuple[int, ...]
    markers: tuple[tuple[int, ...], ...] | None = None
    properties: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.matrices:
            raise DimensionMismatch("realization needs at least one stage")
        if len(self.stage_values) != len(self.matrices):
            raise DimensionMismatch("one designed eigenvalue per stage")
        for a, b in zip(self.matrices, self.matrices[1:]):
            if a.rows != b.cols:
                raise DimensionMismatch("stage dimensions do not chain")
        if self.markers is not None:
            if len(self.markers) != len(self.matrices) + 1:
                raise DimensionMismatch("one marker per level")
            for lvl, (m, h) in enumerate(zip(self.matrices, self.markers)):
                if len(h) != m.cols:
                    raise DimensionMismatch(f"marker length wrong at level {lvl + 1}")
            if len(self.markers[-1]) != self.matrices[-1].rows:
                raise DimensionMismatch("marker length wrong at last level")

    def __len__(self):
        return len(self.matrices)

    def level_sizes(self) -> tuple[int, ...]:
        return tuple([self.matrices[0].cols] + [m.rows for m in self.matrices])

    def marker_chain_ok(self) -> bool:
        """Each matrix must send its level marker to p times the next one."""
        if self.markers is None:
            return True
        for m, p, h, h_next in zip(self.matrices, self.stage_values,
                                   self.markers, self.markers[1:]):
            if m.mul_vector(h) != tuple(p * x for x in h_next):
                return False
        return True

    # -- telescoping ---------------------------------------------------------

    def telescope(self, cuts: Sequence[int]) -> "RealizationSeq":
        """Compose consecutive stages into groups.

        ``cuts`` are strictly increasing stage indices (0-based); group i is
        [cuts[i], cuts[i+1]) and the last group runs to the end.  Stages
        before cuts[0] are dropped.
        """
        n = len(self.matrices)
        cuts = list(cuts)
        if (not cuts or any(c2 <= c1 for c1, c2 in zip(cuts, cuts[1:]))
                or cuts[0] < 0 or cuts[-1] >= n):
            raise BadCutPoints(f"bad cut points {cuts} for {n} stages")
        bounds = cuts + [n]
        mats = []
        values = []
        for lo, hi in zip(bounds, bounds[1:]):
            prod = self.matrices[lo]
            val = self.stage_values[lo]
            for i in range(lo + 1, hi):
                prod = self.matrices[i] * prod      # later stage on the left
                val *= self.stage_values[i]
            mats.append(prod)
            values.append(val)
        markers = None
        if self.markers is not None:
            markers = tuple(self.markers[i] for i in bounds)
        return RealizationSeq(tuple(mats), tuple(values), markers,
                              dict(self.properties),
                              {**self.provenance, "telescoped": cuts})

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        out = {
            "version": FILE_VERSION,
            "kind": "realization",
            "properties": {k: bool(v) for k, v in self.properties.items()},
            "stages": [
                {"matrix": [[str(x) for x in m.row(i)] for i in range(m.rows)],
                 "p": str(p)}
                for m, p in zip(self.matrices, self.stage_values)
            ],
            "markers": (None if self.markers is None
                        else [[str(x) for x in h] for h in self.markers]),
            "provenance": self.provenance,
        }
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "RealizationSeq":
        if not isinstance(obj, dict):
            raise SchemaError("realization file must be a JSON object")
        if obj.get("version") != FILE_VERSION:
            raise SchemaError(f"unsupported file version {obj.get('version')!r}")
        try:
            stages = obj["stages"]
            mats = tuple(Matrix.from_rows([[int(x) for x in row]
                                           for row in st["matrix"]])
                         for st in stages)
            values = tuple(int(st["p"]) for st in stages)
            markers = obj.get("markers")
            if markers is not None:
                markers = tuple(tuple(int(x) for x in h) for h in markers)
            props = {k: bool(v) for k, v in obj.get("properties", {}).items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed realization file: {exc}") from None
        return cls(mats, values, markers, props, obj.get("provenance", {}))

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "RealizationSeq":
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"not valid JSON: {exc}") from None
        return cls.from_json(obj)
