"""Dataset manifests: record model, validation, split selection, prompt building.

A manifest is UTF-8 JSONL, one artwork per line:

    {"id": "...", "image": "relative/path.jpg", "split": "train",
     "visual_sentences": ["..."], "contextual_sentences": ["..."]}

``contextual_sentences`` is optional and never consulted by any pipeline
operation; it is carried through for datasets that annotate it.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .errors import (
    DuplicateId,
    EmptyCaptionSet,
    MalformedLine,
    MissingField,
    UnknownField,
)

log = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")
CAPTION_MODES = ("joined", "per_sentence")

_REQUIRED_FIELDS = ("id", "image", "split", "visual_sentences")
_KNOWN_FIELDS = frozenset(_REQUIRED_FIELDS) | {"contextual_sentences"}


@dataclass
class ArtworkRecord:
    """One real artwork image with its caption sentences and split label."""

    id: str
    image_path: str
    visual_sentences: list[str]
    contextual_sentences: list[str] = field(default_factory=list)
    split: str = "train"


@dataclass
class Dataset:
    records: list[ArtworkRecord]
    name: str = ""
    caption_mode: str = "joined"

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ArtworkRecord]:
        return iter(self.records)

    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    def by_id(self) -> dict[str, ArtworkRecord]:
        return {r.id: r for r in self.records}

    def split_counts(self) -> dict[str, int]:
        counts = {s: 0 for s in SPLITS}
        for r in self.records:
            counts[r.split] += 1
        return counts


@dataclass
class Prompt:
    text: str
    source_id: str
    joiner: str


def _string_list(value: object) -> list[str] | None:
    if not isinstance(value, list) or not all(isinstance(s, str) for s in value):
        return None
    return list(value)


def _parse_record(obj: dict, line_no: int, strict: bool) -> ArtworkRecord:
    for name in _REQUIRED_FIELDS:
        if name not in obj:
            raise MissingField(name, line_no)
    for name in obj:
        if name not in _KNOWN_FIELDS:
            if strict:
                raise UnknownField(name, line_no)
            log.warning("line %d: ignoring unknown field %r", line_no, name)

    record_id = obj["id"]
    image = obj["image"]
    split = obj["split"]
    visual = _string_list(obj["visual_sentences"])
    contextual = _string_list(obj.get("contextual_sentences", []))

    if not isinstance(record_id, str) or not record_id:
        raise MalformedLine(line_no, "id must be a non-empty string")
    if not isinstance(image, str) or not image:
        raise MalformedLine(line_no, "image must be a non-empty relative path")
    if Path(image).is_absolute():
        raise MalformedLine(line_no, f"image path must be relative, got {image!r}")
    if split not in SPLITS:
        raise MalformedLine(line_no, f"split must be one of {SPLITS}, got {split!r}")
    if visual is None or not visual:
        raise MalformedLine(line_no, "visual_sentences must be a non-empty list of strings")
    if contextual is None:
        raise MalformedLine(line_no, "contextual_sentences must be a list of strings")

    return ArtworkRecord(
        id=record_id,
        image_path=image,
        visual_sentences=visual,
        contextual_sentences=contextual,
        split=split,
    )


def load_manifest(path: str | Path, strict: bool = True) -> Dataset:
    """Parse a JSONL manifest, preserving line order.

    Raises MalformedLine / MissingField / DuplicateId on the first invalid
    line; UnknownField additionally in strict mode.
    """
    path = Path(path)
    records: list[ArtworkRecord] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise MalformedLine(line_no, "record must be a JSON object")
            record = _parse_record(obj, line_no, strict)
            if record.id in seen:
                raise DuplicateId(record.id)
            seen.add(record.id)
            records.append(record)
    return Dataset(records=records, name=path.stem)


def record_to_obj(record: ArtworkRecord) -> dict:
    return {
        "id": record.id,
        "image": record.image_path,
        "split": record.split,
        "visual_sentences": list(record.visual_sentences),
        "contextual_sentences": list(record.contextual_sentences),
    }


def save_manifest(dataset: Dataset, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in dataset.records:
            fh.write(json.dumps(record_to_obj(record), ensure_ascii=False) + "\n")


def select_split(dataset: Dataset, split: str) -> Dataset:
    """Records whose split matches, in manifest order. Empty result is fine."""
    if split not in SPLITS:
        raise ValueError(f"split must be one of {SPLITS}, got {split!r}")
    return Dataset(
        records=[r for r in dataset.records if r.split == split],
        name=dataset.name,
        caption_mode=dataset.caption_mode,
    )


def build_prompt(record: ArtworkRecord, joiner: str = " ") -> Prompt:
    """Join the visual sentences into a single description.

    Sentence-boundary whitespace collapses into exactly one joiner; contextual
    sentences are never included.
    """
    sentences = [s.strip() for s in record.visual_sentences]
    sentences = [s for s in sentences if s]
    if not sentences:
        raise EmptyCaptionSet(record.id)
    return Prompt(text=joiner.join(sentences), source_id=record.id, joiner=joiner)
