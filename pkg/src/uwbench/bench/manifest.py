"""Corpus manifests: one JSON object per line describing a raw image, an
optional reference image, and free-form tags. Entries tagged "challenging"
carry no reference by construction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["ManifestEntry", "CorpusManifest", "load_manifest", "write_manifest"]


@dataclass(frozen=True)
class ManifestEntry:
    raw_path: str
    reference_path: str | None = None
    tags: tuple[str, ...] = ()

    @property
    def image_id(self) -> str:
        return Path(self.raw_path).stem


@dataclass
class CorpusManifest:
    entries: list[ManifestEntry] = field(default_factory=list)

    def __post_init__(self):
        raws = [e.raw_path for e in self.entries]
        if len(set(raws)) != len(raws):
            raise ValueError("manifest raw paths must be distinct")
        for entry in self.entries:
            if "challenging" in entry.tags and entry.reference_path is not None:
                raise ValueError(
                    f"challenging entry {entry.raw_path} must not carry a reference"
                )


def load_manifest(path: str | Path) -> CorpusManifest:
    entries = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: bad JSON: {exc}") from exc
            if "raw_path" not in obj:
                raise ValueError(f"{path}:{line_no}: missing raw_path")
            entries.append(
                ManifestEntry(
                    raw_path=obj["raw_path"],
                    reference_path=obj.get("reference_path"),
                    tags=tuple(obj.get("tags", ())),
                )
            )
    return CorpusManifest(entries=entries)


def write_manifest(manifest: CorpusManifest, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for e in manifest.entries:
            obj: dict = {"raw_path": e.raw_path}
            if e.reference_path is not None:
                obj["reference_path"] = e.reference_path
            if e.tags:
                obj["tags"] = list(e.tags)
            f.write(json.dumps(obj) + "\n")
