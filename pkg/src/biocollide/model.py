"""Quantized voice-feature space: feature catalogs and the population size.

A catalog is an ordered list of features, each quantized into ``levels`` bins.
All the collision math needs from it is ``ln m = sum(ln levels_i)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .numerics import ExtReal

__all__ = [
    "CatalogError",
    "FeatureCatalog",
    "FeatureSpec",
    "PopulationModel",
    "builtin_catalog",
    "heterogeneous_log_m",
    "load_catalog",
    "load_catalog_file",
    "serialize_catalog",
    "uniform_catalog",
]

HEADER = ("id", "name", "levels")


class CatalogError(ValueError):
    """Invalid catalog contents; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class FeatureSpec:
    id: str
    name: str
    levels: int

    def __post_init__(self) -> None:
        if not self.id or not self.id.strip():
            raise CatalogError("feature id must be non-empty")
        if isinstance(self.levels, bool) or not isinstance(self.levels, int):
            raise CatalogError(f"feature {self.id!r}: levels must be an integer")
        if self.levels < 2:
            raise CatalogError(
                f"feature {self.id!r}: levels must be >= 2 (got {self.levels}); "
                "a single-level feature carries no identity information"
            )


@dataclass(frozen=True)
class FeatureCatalog:
    features: tuple[FeatureSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "features", tuple(self.features))
        if not self.features:
            raise CatalogError("catalog must contain at least one feature")
        seen: set[str] = set()
        for f in self.features:
            if f.id in seen:
                raise CatalogError(f"duplicate feature id {f.id!r}")
            seen.add(f.id)

    @property
    def k(self) -> int:
        return len(self.features)

    @property
    def log_m(self) -> float:
        return heterogeneous_log_m(self)

    @property
    def m(self) -> ExtReal:
        return ExtReal.from_int(math.prod(f.levels for f in self.features))

    @property
    def uniform_levels(self) -> int | None:
        """The shared level count, or None for a heterogeneous catalog."""
        levels = {f.levels for f in self.features}
        return levels.pop() if len(levels) == 1 else None

    def with_levels(self, levels: int) -> FeatureCatalog:
        return FeatureCatalog(tuple(FeatureSpec(f.id, f.name, levels) for f in self.features))

    def __len__(self) -> int:
        return len(self.features)


@dataclass(frozen=True)
class PopulationModel:
    n: int

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"population size must be an integer >= 1, got {self.n!r}")


def heterogeneous_log_m(catalog: FeatureCatalog) -> float:
    """``ln m`` for per-feature level counts: ``sum(ln q_i)``."""
    return math.fsum(math.log(f.levels) for f in catalog.features)


def uniform_catalog(k: int, q: int) -> FeatureCatalog:
    """``k`` synthetic features with ``q`` levels each, so ``m = q**k``."""
    if k < 1:
        raise CatalogError(f"feature count must be >= 1, got {k}")
    if q < 2:
        raise CatalogError(f"levels must be >= 2, got {q}")
    width = len(str(k))
    return FeatureCatalog(
        tuple(FeatureSpec(f"x{i:0{width}d}", f"feature {i}", q) for i in range(1, k + 1))
    )


def load_catalog(source: str, *, levels: int | None = None) -> FeatureCatalog:
    """Parse catalog text (``id,name,levels`` CSV with ``#`` comments).

    ``levels``, when given, overrides every row's bin count.
    """
    rows: list[tuple[int, list[str]]] = []
    for lineno, line in enumerate(source.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            fields = next(csv.reader([line]))
        except csv.Error as exc:
            raise CatalogError(f"malformed row: {exc}", lineno) from None
        rows.append((lineno, [f.strip() for f in fields]))
    if not rows:
        raise CatalogError("catalog is empty (no header, no features)")

    lineno, header = rows[0]
    if tuple(h.lower() for h in header) != HEADER:
        raise CatalogError(f"expected header 'id,name,levels', got {','.join(header)!r}", lineno)

    features = []
    seen: dict[str, int] = {}
    for lineno, fields in rows[1:]:
        if len(fields) != 3:
            raise CatalogError(f"expected 3 fields (id,name,levels), got {len(fields)}", lineno)
        fid, name, raw = fields
        if not fid:
            raise CatalogError("empty feature id", lineno)
        if fid in seen:
            raise CatalogError(f"duplicate feature id {fid!r} (first seen on line {seen[fid]})", lineno)
        seen[fid] = lineno
        try:
            q = int(raw)
        except ValueError:
            raise CatalogError(f"levels for {fid!r} is not an integer: {raw!r}", lineno) from None
        if levels is not None:
            q = levels
        try:
            features.append(FeatureSpec(fid, name, q))
        except CatalogError as exc:
            raise CatalogError(str(exc), lineno) from None
    if not features:
        raise CatalogError("catalog has a header but no features")
    return FeatureCatalog(tuple(features))


def load_catalog_file(path: str | Path, *, levels: int | None = None) -> FeatureCatalog:
    return load_catalog(Path(path).read_text(encoding="utf-8"), levels=levels)


def serialize_catalog(catalog: FeatureCatalog) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for f in catalog.features:
        writer.writerow((f.id, f.name, f.levels))
    return buf.getvalue()


def builtin_catalog(levels: int | None = None) -> FeatureCatalog:
    """The 44-feature catalog shipped with the package (10 levels by default)."""
    text = resources.files("biocollide").joinpath("catalogs/voice_features.csv").read_text(encoding="utf-8")
    return load_catalog(text, levels=levels)
