import pytest
from scipy import stats

from artaug.augment import SyntheticDataset, VariationRecord
from artaug.errors import OrphanVariation
from artaug.sampler import (
    MixedSampler,
    SamplerConfig,
    mixed_epoch,
    variation_histogram,
)

from conftest import make_dataset


def make_synthetic(dataset, m=4):
    variations = []
    for record in dataset.records:
        for j in range(m):
            variations.append(
                VariationRecord(
                    parent_id=record.id,
                    variation_index=j,
                    seed=j,
                    image_path=f"{record.id}_{j}.png",
                    prompt_text="p",
                )
            )
    return SyntheticDataset(variations=variations, M=m)


def flatten(batches):
    return [item for batch in batches for item in batch]


def test_alpha_one_all_real():
    dataset = make_dataset(50)
    synthetic = make_synthetic(dataset)
    batches = mixed_epoch(dataset, synthetic, SamplerConfig(alpha=1.0, epoch_seed=3))
    items = flatten(batches)
    assert len(items) == 50
    assert all(item.origin == "real" for item in items)


def test_alpha_zero_all_synthetic():
    dataset = make_dataset(50)
    synthetic = make_synthetic(dataset)
    batches = mixed_epoch(dataset, synthetic, SamplerConfig(alpha=0.0, epoch_seed=3))
    assert all(item.origin == "synthetic" for item in flatten(batches))


def test_no_variations_falls_back_to_real():
    dataset = make_dataset(10)
    batches = mixed_epoch(dataset, None, SamplerConfig(alpha=0.0, epoch_seed=1))
    assert all(item.origin == "real" for item in flatten(batches))


def test_alpha_half_statistics_10k_positions():
    dataset = make_dataset(500)
    synthetic = make_synthetic(dataset, m=2)
    sampler = MixedSampler(dataset, synthetic)
    real = 0
    total = 0
    for epoch in range(20):
        config = SamplerConfig(alpha=0.5, batch_size=32, epoch_seed=1000 + epoch)
        for batch in sampler.epoch(config):
            for item in batch:
                total += 1
                real += item.origin == "real"
    assert total == 10_000
    assert 0.48 <= real / total <= 0.52


def test_epoch_visits_every_train_record_once():
    dataset = make_dataset(40)
    for record in dataset.records[30:]:
        record.split = "val"
    synthetic = make_synthetic(dataset, m=1)
    batches = mixed_epoch(dataset, synthetic, SamplerConfig(alpha=0.5, epoch_seed=5))
    parents = [item.parent_id for item in flatten(batches)]
    train_ids = [r.id for r in dataset.records if r.split == "train"]
    assert sorted(parents) == sorted(train_ids)
    assert len(parents) == 30


def test_determinism_item_by_item():
    dataset = make_dataset(30)
    synthetic = make_synthetic(dataset, m=3)
    config = SamplerConfig(alpha=0.4, batch_size=7, epoch_seed=11)
    a = flatten(mixed_epoch(dataset, synthetic, config))
    b = flatten(mixed_epoch(dataset, synthetic, config))
    assert a == b


def test_batch_size_change_keeps_item_sequence():
    dataset = make_dataset(30)
    synthetic = make_synthetic(dataset, m=3)
    small = flatten(mixed_epoch(dataset, synthetic, SamplerConfig(alpha=0.4, batch_size=4, epoch_seed=11)))
    large = flatten(mixed_epoch(dataset, synthetic, SamplerConfig(alpha=0.4, batch_size=13, epoch_seed=11)))
    assert small == large


def test_caption_sets_inherited_byte_identical():
    dataset = make_dataset(25)
    synthetic = make_synthetic(dataset, m=2)
    by_id = dataset.by_id()
    batches = mixed_epoch(dataset, synthetic, SamplerConfig(alpha=0.0, epoch_seed=2))
    for item in flatten(batches):
        assert item.caption_set == by_id[item.parent_id].visual_sentences
        if item.origin == "synthetic":
            assert item.variation_index in (0, 1)


def test_last_batch_may_be_short():
    dataset = make_dataset(10)
    batches = mixed_epoch(dataset, None, SamplerConfig(alpha=1.0, batch_size=4, epoch_seed=0))
    assert [len(b) for b in batches] == [4, 4, 2]


def test_orphan_variation_rejected():
    dataset = make_dataset(3)
    synthetic = SyntheticDataset(
        variations=[
            VariationRecord(
                parent_id="ghost", variation_index=0, seed=0, image_path="g.png", prompt_text="p"
            )
        ],
        M=1,
    )
    with pytest.raises(OrphanVariation):
        MixedSampler(dataset, synthetic)


def test_histogram_alpha_one_empty():
    dataset = make_dataset(10)
    synthetic = make_synthetic(dataset)
    batches = mixed_epoch(dataset, synthetic, SamplerConfig(alpha=1.0, epoch_seed=0))
    assert variation_histogram(batches) == {}


def test_histogram_single_epoch_m1():
    dataset = make_dataset(10)
    synthetic = make_synthetic(dataset, m=1)
    batches = mixed_epoch(dataset, synthetic, SamplerConfig(alpha=0.0, epoch_seed=0))
    histogram = variation_histogram(batches)
    assert all(histogram[r.id] == {0: 1} for r in dataset.records)


def test_histogram_two_variations_balanced():
    dataset = make_dataset(1)
    synthetic = make_synthetic(dataset, m=2)
    sampler = MixedSampler(dataset, synthetic)
    batches = []
    for epoch in range(1000):
        batches.extend(sampler.epoch(SamplerConfig(alpha=0.0, epoch_seed=epoch)))
    counts = variation_histogram(batches)[dataset.records[0].id]
    assert 400 <= counts[0] <= 600
    assert counts[0] + counts[1] == 1000


def test_uniformity_chi_squared():
    dataset = make_dataset(1)
    synthetic = make_synthetic(dataset, m=5)
    sampler = MixedSampler(dataset, synthetic)
    batches = []
    for epoch in range(10_000):
        batches.extend(sampler.epoch(SamplerConfig(alpha=0.0, epoch_seed=epoch)))
    counts = variation_histogram(batches)[dataset.records[0].id]
    observed = [counts.get(j, 0) for j in range(5)]
    assert sum(observed) == 10_000
    result = stats.chisquare(observed)
    assert result.pvalue > 0.001


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(alpha=1.5)
    with pytest.raises(ValueError):
        SamplerConfig(batch_size=0)
