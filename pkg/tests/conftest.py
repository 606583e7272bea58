import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for `oracles`

from artaug.corpus import ArtworkRecord, Dataset


def make_record(i: int, split: str = "train", sentences=None) -> ArtworkRecord:
    return ArtworkRecord(
        id=f"art{i:03d}",
        image_path=f"images/art{i:03d}.jpg",
        visual_sentences=sentences or [f"A painting number {i}.", f"It shows scene {i}."],
        contextual_sentences=[f"Painted in 18{i:02d}."],
        split=split,
    )


def make_dataset(n: int = 10, split: str = "train") -> Dataset:
    return Dataset(records=[make_record(i, split) for i in range(n)], name="fixture")


def write_manifest(path: Path, dataset: Dataset) -> Path:
    rows = []
    for r in dataset.records:
        rows.append(
            json.dumps(
                {
                    "id": r.id,
                    "image": r.image_path,
                    "split": r.split,
                    "visual_sentences": r.visual_sentences,
                    "contextual_sentences": r.contextual_sentences,
                }
            )
        )
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def ten_record_manifest(tmp_path) -> Path:
    return write_manifest(tmp_path / "manifest.jsonl", make_dataset(10))
