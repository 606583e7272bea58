"""Mixed real/synthetic minibatch sampling.

Each epoch visits every training record exactly once (optionally shuffled).
Independently per position, a Bernoulli(alpha) draw keeps the real sample;
otherwise one of the record's variations is chosen uniformly. Records without
variations always stay real. Mixing applies to the train split only;
validation and test data are always consumed real.

Randomness comes from named streams keyed by (epoch_seed, position), so
changing the batch size never reshuffles history and two samplers with the
same inputs produce identical epochs item by item.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

from .augment import SyntheticDataset, VariationRecord
from .corpus import Dataset, select_split
from .errors import OrphanVariation
from .seeds import stream


@dataclass
class SamplerConfig:
    alpha: float = 0.5
    batch_size: int = 8
    epoch_seed: int = 0
    shuffle: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class MixedItem:
    image_ref: str
    caption_set: list[str]
    origin: str  # "real" | "synthetic"
    parent_id: str
    variation_index: int | None = None


@dataclass
class MixedBatch:
    items: list[MixedItem]

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[MixedItem]:
        return iter(self.items)


class MixedSampler:
    """Deterministic epoch generator over a dataset and its variations."""

    def __init__(self, dataset: Dataset, synthetic: SyntheticDataset | None = None):
        known = set(dataset.ids())
        variations: dict[str, list[VariationRecord]] = {}
        if synthetic is not None:
            for var in synthetic.variations:
                if var.parent_id not in known:
                    raise OrphanVariation(var.parent_id)
            variations = synthetic.by_parent()
        self._train = select_split(dataset, "train").records
        self._variations = variations

    def epoch(self, config: SamplerConfig) -> Iterator[MixedBatch]:
        order = list(self._train)
        if config.shuffle:
            stream("epoch-shuffle", config.epoch_seed).shuffle(order)
        batch: list[MixedItem] = []
        for position, record in enumerate(order):
            rng = stream("epoch-position", config.epoch_seed, position)
            variations = self._variations.get(record.id, [])
            if rng.random() < config.alpha or not variations:
                item = MixedItem(
                    image_ref=record.image_path,
                    caption_set=list(record.visual_sentences),
                    origin="real",
                    parent_id=record.id,
                )
            else:
                var = variations[rng.randrange(len(variations))]
                item = MixedItem(
                    image_ref=var.image_path,
                    caption_set=list(record.visual_sentences),
                    origin="synthetic",
                    parent_id=record.id,
                    variation_index=var.variation_index,
                )
            batch.append(item)
            if len(batch) == config.batch_size:
                yield MixedBatch(items=batch)
                batch = []
        if batch:
            yield MixedBatch(items=batch)


def mixed_epoch(
    dataset: Dataset,
    synthetic: SyntheticDataset | None,
    config: SamplerConfig,
) -> list[MixedBatch]:
    """One epoch of mixed batches; see MixedSampler for the contract."""
    return list(MixedSampler(dataset, synthetic).epoch(config))


def variation_histogram(
    batches: Iterable[MixedBatch],
) -> dict[str, dict[int, int]]:
    """Occurrences of each (parent, variation index) among synthetic items."""
    counts: dict[str, Counter] = {}
    for batch in batches:
        for item in batch:
            if item.origin == "synthetic":
                counts.setdefault(item.parent_id, Counter())[item.variation_index] += 1
    return {parent: dict(counter) for parent, counter in counts.items()}
