"""Metadata describing one emitted output file, as recorded in the run manifest."""

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import xxhash

OUTPUT_KINDS = ("csv", "plot-data", "figure")


def file_digest(path: Path) -> str:
    """xxhash64 hex digest of a file's bytes."""
    hasher = xxhash.xxh64()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


@dataclass(slots=True, frozen=True)
class OutputMeta:
    """
    Immutable description of one output file.

    ``filename`` is relative to the directory holding the manifest.
    ``row_count`` is the number of data rows (CSV, plot-data) or 0 for figures.
    """

    filename: str
    kind: str
    file_size: int
    digest: str
    row_count: int = 0

    def __post_init__(self) -> None:
        if self.kind not in OUTPUT_KINDS:
            raise ValueError(f"Unknown output kind {self.kind!r}")

    @classmethod
    def from_file(cls, path: Path, kind: str, row_count: int = 0) -> "OutputMeta":
        return cls(
            filename=path.name,
            kind=kind,
            file_size=path.stat().st_size,
            digest=file_digest(path),
            row_count=row_count,
        )

    def matches(self, path: Path) -> bool:
        """True if ``path`` still has this size and digest."""
        if path.stat().st_size != self.file_size:
            return False
        return file_digest(path) == self.digest

    def to_dict(self) -> dict[str, Any]:
        return {
            "filename": self.filename,
            "kind": self.kind,
            "file_size": self.file_size,
            "digest": self.digest,
            "row_count": self.row_count,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "OutputMeta":
        return cls(
            filename=data["filename"],
            kind=data["kind"],
            file_size=data["file_size"],
            digest=data["digest"],
            row_count=data["row_count"],
        )
