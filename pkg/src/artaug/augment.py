"""Variation planning and execution.

Given a manifest of N artworks, plan N x M generation requests (one prompt
per artwork, a distinct deterministic seed per variation) and run them
through a generator backend into an output directory plus a synthetic
manifest. Execution is resumable: outputs that already exist with a matching
checksum are skipped, failures are recorded and skipped so partial synthetic
datasets stay usable.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Dataset, build_prompt
from .errors import DuplicateId, EmptyDataset, MalformedLine, MissingField
from .seeds import MASK64, stable_u64

log = logging.getLogger(__name__)

DEFAULT_STRENGTH = 0.75
DEFAULT_GUIDANCE_SCALE = 7.5
DEFAULT_OUTPUT_SIZE = (512, 512)

CHECKSUM_FILE = "checksums.json"
FAILURE_FILE = "failures.jsonl"

_SYNTH_REQUIRED = (
    "parent_id",
    "variation_index",
    "seed",
    "image",
    "prompt",
    "strength",
    "guidance_scale",
)


@dataclass
class GenerationRequest:
    """One backend call: prompt + init image + sampling parameters."""

    parent_id: str
    variation_index: int
    prompt_text: str
    init_image_path: str
    seed: int
    strength: float = DEFAULT_STRENGTH
    guidance_scale: float = DEFAULT_GUIDANCE_SCALE
    output_size: tuple[int, int] = DEFAULT_OUTPUT_SIZE


@dataclass
class VariationRecord:
    """One generated variation, as stored in the synthetic manifest."""

    parent_id: str
    variation_index: int
    seed: int
    image_path: str
    prompt_text: str
    strength: float = DEFAULT_STRENGTH
    guidance_scale: float = DEFAULT_GUIDANCE_SCALE


@dataclass
class SyntheticDataset:
    variations: list[VariationRecord]
    parent_manifest: str = ""
    M: int = 1

    def __len__(self) -> int:
        return len(self.variations)

    def by_parent(self) -> dict[str, list[VariationRecord]]:
        grouped: dict[str, list[VariationRecord]] = {}
        for var in self.variations:
            grouped.setdefault(var.parent_id, []).append(var)
        for variations in grouped.values():
            variations.sort(key=lambda v: v.variation_index)
        return grouped


@dataclass
class GenerationFailure:
    parent_id: str
    variation_index: int
    cause: str


@dataclass
class ExecutionReport:
    """What execute_plan did: the resulting dataset plus the skip/fail ledger."""

    dataset: SyntheticDataset
    failures: list[GenerationFailure] = field(default_factory=list)
    generated: int = 0
    skipped: int = 0


def variation_key(parent_id: str, variation_index: int) -> str:
    """Canonical id of one variation, also its output file stem."""
    return f"{parent_id}_{variation_index}"


def derive_seed(parent_id: str, variation_index: int, base_seed: int) -> int:
    """Deterministic per-variation seed.

    The raw seed for index j is the BLAKE2b-64 stream hash of
    ("variation-seed", parent_id, j, base_seed) (see seeds.stable_u64 for the
    exact byte encoding). If a raw seed collides with an earlier index of the
    same parent it is incremented modulo 2^64 until distinct, so any two
    variations of one parent always differ. Keying by parent id rather than
    global position means inserting records never shifts other images' seeds.
    """
    return derive_seeds(parent_id, variation_index + 1, base_seed)[-1]


def derive_seeds(parent_id: str, count: int, base_seed: int) -> list[int]:
    """Seeds for variations 0..count-1 of one parent, collision-bumped."""
    seeds: list[int] = []
    taken: set[int] = set()
    for index in range(count):
        seed = stable_u64("variation-seed", parent_id, index, base_seed)
        while seed in taken:
            seed = (seed + 1) & MASK64
        taken.add(seed)
        seeds.append(seed)
    return seeds


def _check_filename_safe(parent_id: str) -> None:
    if "/" in parent_id or "\\" in parent_id or parent_id in (".", ".."):
        raise ValueError(f"id {parent_id!r} is not usable as an output file name")


def plan_variations(
    dataset: Dataset,
    variations_per_image: int,
    base_seed: int,
    *,
    strength: float = DEFAULT_STRENGTH,
    guidance_scale: float = DEFAULT_GUIDANCE_SCALE,
    output_size: tuple[int, int] = DEFAULT_OUTPUT_SIZE,
    joiner: str = " ",
) -> list[GenerationRequest]:
    """One request per (record, variation index), in manifest order.

    The prompt is the record's joined visual description; in per_sentence
    caption mode the variations cycle deterministically through the record's
    sentences instead.
    """
    if not dataset.records:
        raise EmptyDataset("cannot plan variations for an empty dataset")
    if variations_per_image < 1:
        raise ValueError("variations_per_image must be >= 1")
    if not 0.0 <= strength <= 1.0:
        raise ValueError("strength must be in [0, 1]")
    if guidance_scale <= 0.0:
        raise ValueError("guidance_scale must be > 0")

    requests: list[GenerationRequest] = []
    for record in dataset.records:
        _check_filename_safe(record.id)
        seeds = derive_seeds(record.id, variations_per_image, base_seed)
        prompt = build_prompt(record, joiner=joiner)
        sentences = [s.strip() for s in record.visual_sentences if s.strip()]
        for index in range(variations_per_image):
            if dataset.caption_mode == "per_sentence":
                text = sentences[index % len(sentences)]
            else:
                text = prompt.text
            requests.append(
                GenerationRequest(
                    parent_id=record.id,
                    variation_index=index,
                    prompt_text=text,
                    init_image_path=record.image_path,
                    seed=seeds[index],
                    strength=strength,
                    guidance_scale=guidance_scale,
                    output_size=output_size,
                )
            )
    return requests


def _load_checksums(out_dir: Path) -> dict[str, str]:
    path = out_dir / CHECKSUM_FILE
    if not path.exists():
        return {}
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        return {}
    return {k: v for k, v in data.items() if isinstance(v, str)}


def execute_plan(
    plan: list[GenerationRequest],
    backend,
    out_dir: str | Path,
    *,
    jobs: int = 1,
    parent_manifest: str = "",
    manifest_name: str = "synthetic_manifest.jsonl",
) -> ExecutionReport:
    """Run every request, writing `{parent_id}_{variation_index}.png` files.

    Requests whose output already exists with a checksum matching the sidecar
    checksum file are skipped without a backend call. Backend exceptions are
    recorded per request and do not abort the run. The synthetic manifest and
    checksum sidecar are rewritten in plan order, so the output tree is
    deterministic regardless of worker scheduling.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    names = [variation_key(r.parent_id, r.variation_index) + ".png" for r in plan]
    if len(set(names)) != len(names):
        raise ValueError("generation plan has colliding output file names")

    checksums = _load_checksums(out_dir)
    pending: list[tuple[int, GenerationRequest]] = []
    skipped = 0
    for i, request in enumerate(plan):
        path = out_dir / names[i]
        recorded = checksums.get(names[i])
        if recorded and path.exists():
            actual = hashlib.sha256(path.read_bytes()).hexdigest()
            if actual == recorded:
                skipped += 1
                continue
        pending.append((i, request))

    results: dict[int, str | None] = {}

    def run_one(item: tuple[int, GenerationRequest]) -> tuple[int, Exception | None]:
        idx, request = item
        try:
            image = backend.generate(request)
            (out_dir / names[idx]).write_bytes(image)
            results[idx] = hashlib.sha256(image).hexdigest()
            return idx, None
        except Exception as exc:  # noqa: BLE001 - failures are per-request data
            results[idx] = None
            return idx, exc

    failures: list[GenerationFailure] = []
    if jobs > 1 and len(pending) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_one, pending))
    else:
        outcomes = [run_one(item) for item in pending]
    for idx, exc in outcomes:
        if exc is not None:
            request = plan[idx]
            log.warning(
                "generation failed for %s/%d: %s",
                request.parent_id,
                request.variation_index,
                exc,
            )
            failures.append(
                GenerationFailure(
                    parent_id=request.parent_id,
                    variation_index=request.variation_index,
                    cause=str(exc) or exc.__class__.__name__,
                )
            )

    records: list[VariationRecord] = []
    for i, request in enumerate(plan):
        digest = results.get(i, checksums.get(names[i]))
        if digest is None:
            continue
        checksums[names[i]] = digest
        records.append(
            VariationRecord(
                parent_id=request.parent_id,
                variation_index=request.variation_index,
                seed=request.seed,
                image_path=names[i],
                prompt_text=request.prompt_text,
                strength=request.strength,
                guidance_scale=request.guidance_scale,
            )
        )

    (out_dir / CHECKSUM_FILE).write_text(
        json.dumps(checksums, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    variations_per_image = max((r.variation_index for r in plan), default=0) + 1
    dataset = SyntheticDataset(
        variations=records,
        parent_manifest=parent_manifest,
        M=variations_per_image,
    )
    save_synthetic_manifest(dataset, out_dir / manifest_name)
    if failures:
        with (out_dir / FAILURE_FILE).open("w", encoding="utf-8") as fh:
            for failure in failures:
                fh.write(
                    json.dumps(
                        {
                            "parent_id": failure.parent_id,
                            "variation_index": failure.variation_index,
                            "cause": failure.cause,
                        }
                    )
                    + "\n"
                )
    return ExecutionReport(
        dataset=dataset,
        failures=failures,
        generated=len(pending) - len(failures),
        skipped=skipped,
    )


def save_synthetic_manifest(dataset: SyntheticDataset, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for var in dataset.variations:
            fh.write(
                json.dumps(
                    {
                        "parent_id": var.parent_id,
                        "variation_index": var.variation_index,
                        "seed": var.seed,
                        "image": var.image_path,
                        "prompt": var.prompt_text,
                        "strength": var.strength,
                        "guidance_scale": var.guidance_scale,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_synthetic_manifest(
    path: str | Path, parent_manifest: str = ""
) -> SyntheticDataset:
    path = Path(path)
    records: list[VariationRecord] = []
    seen: set[tuple[str, int]] = set()
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
            for name in _SYNTH_REQUIRED:
                if name not in obj:
                    raise MissingField(name, line_no)
            key = (obj["parent_id"], obj["variation_index"])
            if key in seen:
                raise DuplicateId(variation_key(*key))
            seen.add(key)
            records.append(
                VariationRecord(
                    parent_id=obj["parent_id"],
                    variation_index=int(obj["variation_index"]),
                    seed=int(obj["seed"]),
                    image_path=obj["image"],
                    prompt_text=obj["prompt"],
                    strength=float(obj["strength"]),
                    guidance_scale=float(obj["guidance_scale"]),
                )
            )
    variations_per_image = max((r.variation_index for r in records), default=0) + 1
    return SyntheticDataset(
        variations=records,
        parent_manifest=parent_manifest or str(path),
        M=variations_per_image,
    )
