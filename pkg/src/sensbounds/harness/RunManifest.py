"""
The run manifest: what one CLI invocation computed and wrote.

``run-manifest.json`` sits next to the outputs it lists. It is written with
an atomic temp-write + fsync + rename, so a reader sees either the previous
run's manifest or the complete new one.

API Overview
────────────
Lifecycle:
    load(output_dir)          → RunManifest   Load from disk (or empty)
    save(output_dir)                          Atomic persist

Serialization:
    to_dict()                 → dict
    from_dict(data)           → RunManifest

Mutation (in-memory only; call save() to commit):
    add_output(meta)                          Register an emitted file
    record(path, kind, rows)  → OutputMeta    Digest a file and register it

Checks:
    digests                   → dict          filename → xxhash64
    verify(output_dir)        → list[str]     Files whose bytes changed
"""

import json
import logging
import os
from pathlib import Path
from typing import Any

from .OutputMeta import OutputMeta

logger = logging.getLogger(__name__)


class RunManifest:
    """
    In-memory view of one run's outputs, persisted atomically.

    Example:
        manifest = RunManifest(command="run", config=config.to_mapping())
        manifest.record(csv_path, "csv", row_count=len(result.rows))
        manifest.save(config.output_dir)
    """

    FORMAT_VERSION = 1
    FILENAME = "run-manifest.json"
    TEMP_FILENAME = "run-manifest.json.tmp"

    def __init__(
        self,
        command: str = "",
        config: dict[str, Any] | None = None,
        outputs: list[OutputMeta] | None = None,
        passed: bool | None = None,
    ) -> None:
        self.command = command
        self.config = dict(config or {})
        self.passed = passed
        self._outputs: dict[str, OutputMeta] = {}
        for meta in outputs or []:
            self.add_output(meta)

    # ------------------------------------------------------------------ #
    # Lifecycle
    # ------------------------------------------------------------------ #

    @classmethod
    def load(cls, output_dir: Path) -> "RunManifest":
        """Load the manifest in ``output_dir``; empty if none was written yet."""
        path = output_dir / cls.FILENAME
        if not path.exists():
            return cls()

        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)

        return cls.from_dict(data)

    def save(self, output_dir: Path) -> Path:
        """Atomically persist (temp-write -> fsync -> rename -> dir fsync)."""
        output_dir.mkdir(parents=True, exist_ok=True)
        temp_path = output_dir / self.TEMP_FILENAME
        final_path = output_dir / self.FILENAME

        with open(temp_path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.flush()
            os.fsync(f.fileno())

        temp_path.rename(final_path)

        dir_fd = os.open(output_dir, os.O_RDONLY)
        try:
            os.fsync(dir_fd)
        finally:
            os.close(dir_fd)

        logger.info("Wrote %s (%d outputs)", final_path, len(self._outputs))
        return final_path

    # ------------------------------------------------------------------ #
    # Serialization
    # ------------------------------------------------------------------ #

    def to_dict(self) -> dict[str, Any]:
        return {
            "format_version": self.FORMAT_VERSION,
            "command": self.command,
            "config": self.config,
            "passed": self.passed,
            "outputs": [m.to_dict() for m in self.outputs],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunManifest":
        version = data.get("format_version")
        if version != cls.FORMAT_VERSION:
            raise ValueError(
                f"Unsupported run manifest format_version: {version} "
                f"(expected {cls.FORMAT_VERSION})"
            )

        return cls(
            command=data["command"],
            config=data["config"],
            outputs=[OutputMeta.from_dict(d) for d in data["outputs"]],
            passed=data.get("passed"),
        )

    # ------------------------------------------------------------------ #
    # Mutation
    # ------------------------------------------------------------------ #

    def add_output(self, meta: OutputMeta) -> None:
        if meta.filename in self._outputs:
            raise ValueError(f"Output {meta.filename} already in run manifest")
        self._outputs[meta.filename] = meta

    def record(self, path: Path, kind: str, row_count: int = 0) -> OutputMeta:
        meta = OutputMeta.from_file(path, kind, row_count)
        self.add_output(meta)
        return meta

    # ------------------------------------------------------------------ #
    # Checks
    # ------------------------------------------------------------------ #

    @property
    def outputs(self) -> list[OutputMeta]:
        """All recorded outputs, ordered by filename."""
        return [self._outputs[name] for name in sorted(self._outputs)]

    @property
    def digests(self) -> dict[str, str]:
        return {m.filename: m.digest for m in self.outputs}

    def verify(self, output_dir: Path) -> list[str]:
        """Filenames that are missing or whose bytes no longer match."""
        changed = []
        for meta in self.outputs:
            path = output_dir / meta.filename
            if not path.exists() or not meta.matches(path):
                changed.append(meta.filename)
        return changed
