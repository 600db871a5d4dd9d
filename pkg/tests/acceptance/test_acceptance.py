"""
Acceptance checks.
End-to-end golden values, the rasterizer oracle, overfitting, and the desk-scale benchmark.
"""
import json
import logging
import time
from pathlib import Path

import numpy as np
import pytest

from trademark_phonetics.evaluation import evaluate_baseline, evaluate_cnn, pair_distances, summarize_distances
from trademark_phonetics.featurizer import FeaturizationPool
from trademark_phonetics.neuralnet import CnnConfig, train
from trademark_phonetics.pairing import PairSample, PairTensor
from trademark_phonetics.phoneme_codec import GramPath
from trademark_phonetics.raster import line_thickness, rasterize
from trademark_phonetics.synthetic import default_dissimilar_count, generate_synthetic

logger = logging.getLogger(__name__)


def toy_samples(n, size, seed):
    """Channel 1 repeats channel 0's horizontal line for similar pairs, turns it vertical otherwise."""
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(n):
        channels = np.zeros((2, size, size), dtype=np.float32)
        row = int(rng.integers(1, size - 1))
        channels[0, row, :] = 1.0
        label = i % 2
        if label == 1:
            channels[1, row, :] = 1.0
        else:
            channels[1, :, row] = 1.0
        samples.append(PairSample(PairTensor(channels, label), label, f"toy-{i}"))
    return samples


def oracle_mask(path, thickness):
    """Pixel lit iff its centre is within thickness/2 of some segment, by float distance."""
    ys, xs = np.mgrid[0:128, 0:128].astype(np.float64)
    lit = np.zeros((128, 128), dtype=bool)
    half = thickness / 2.0 + 1e-9
    for (ax, ay), (bx, by) in zip(path.points, path.points[1:]):
        dx, dy = bx - ax, by - ay
        length2 = dx * dx + dy * dy
        t = 0.0 if length2 == 0 else np.clip(((xs - ax) * dx + (ys - ay) * dy) / length2, 0.0, 1.0)
        lit |= np.hypot(xs - (ax + t * dx), ys - (ay + t * dy)) <= half
    return lit


@pytest.mark.acceptance
@pytest.mark.smoke
class TestGoldenPipeline:
    """Worked examples through the whole featurizer."""

    def test_golden_rows_are_fast(self, featurizer):
        """All worked examples map correctly within a second."""
        rows = {
            ("아디다스", "hangul"): (16, 33, 69, 19, 69, 33, 79, 25, 46, 111),
            ("구글", "hangul"): (16, 66, 46, 66, 25, 46, 101, 111),
            ("페이스북", "hangul"): (16, 51, 25, 19, 79, 25, 46, 53, 46, 66, 111),
            ("Adidas", "en"): (16, 29, 69, 19, 69, 29, 79, 111),
            ("Google", "en"): (16, 66, 46, 66, 29, 101, 111),
        }
        started = time.perf_counter()
        for (text, script), mapping in rows.items():
            assert featurizer.featurize(text, script).mapping == mapping
        assert time.perf_counter() - started < 1.0

    def test_adidas_coordinates(self, featurizer):
        """Upper-case input gives the worked 2-gram path."""
        result = featurizer.featurize("ADIDAS", "en")
        assert result.path.points == (
            (16, 29), (29, 69), (69, 19), (19, 69), (69, 29), (29, 79), (79, 111),
        )


@pytest.mark.acceptance
class TestRasterOracle:
    """Whole-path rasterization against a naive distance field."""

    def test_random_paths(self, raster_cfg):
        """Lit pixels match a float distance field on 100 random paths."""
        rng = np.random.default_rng(2024)
        for _ in range(100):
            n = int(rng.integers(2, 10))
            path = GramPath(tuple((int(x), int(y)) for x, y in rng.integers(0, 128, size=(n, 2))))
            feature = rasterize(path, raster_cfg)
            expected = oracle_mask(path, line_thickness(path, raster_cfg))
            np.testing.assert_array_equal(feature.nonzero_mask(), expected)


@pytest.mark.acceptance
@pytest.mark.slow
class TestOverfit:
    """A balanced toy set is learned completely."""

    def test_toy_set(self):
        """A tiny network fits a separable toy set within 500 steps."""
        config = CnnConfig(
            input_size=16,
            conv1_filters=4,
            conv2_filters=4,
            fc1_units=16,
            dropout_rate=0.0,
            learning_rate=5e-3,
            batch_size=8,
            epochs=125,
            max_steps=500,
            rng_seed=3,
        )
        _, report = train(toy_samples(32, 16, seed=4), config)
        assert report.steps <= 500
        assert report.final.train_accuracy >= 0.99
        assert report.final.train_loss < report.epochs[0].train_loss


@pytest.mark.acceptance
class TestDistributionShift:
    """Similar pairs sit closer to zero than dissimilar ones."""

    def test_synthetic_margin(self, featurizer):
        """Similar pairs average at least 0.05 closer than dissimilar ones."""
        records = generate_synthetic(60, default_dissimilar_count(60), seed=9,
                                     dictionary=featurizer.dictionary, lexicon=featurizer.lexicon)
        distances, labels = pair_distances(records, FeaturizationPool(featurizer))
        summary = summarize_distances(distances, labels)
        assert summary.mean_similar < summary.mean_dissimilar
        assert summary.margin >= 0.05


@pytest.mark.acceptance
@pytest.mark.slow
class TestBenchmark:
    """Desk-scale CNN versus cosine baseline, enabled with PF_RUN_BENCHMARK=1."""

    def test_cnn_beats_baseline(self, benchmark_enabled, featurizer):
        """The default 32/64/1024 network clears 0.85 and beats the cosine baseline by 0.05."""
        if not benchmark_enabled:
            pytest.skip("Set PF_RUN_BENCHMARK=1 to run the desk-scale benchmark")

        started = time.perf_counter()
        records = generate_synthetic(1000, 2700, seed=0,
                                     dictionary=featurizer.dictionary, lexicon=featurizer.lexicon)
        pool = FeaturizationPool(featurizer)
        config = CnnConfig(rng_seed=0)
        params, _ = train(pool.build_samples(records), config)

        cnn = evaluate_cnn(params, records, seed=config.rng_seed, pool=pool)
        baseline = evaluate_baseline(records, seed=config.rng_seed, pool=pool)
        distances, labels = pair_distances(records, pool)
        summary = summarize_distances(distances, labels)
        elapsed = time.perf_counter() - started

        results = {
            "config": config.to_dict(),
            "cnn": cnn.to_dict(),
            "baseline": baseline.to_dict(),
            "distances": summary.to_dict(),
            "seconds": round(elapsed, 1),
        }
        Path("reports", "benchmark.json").write_text(json.dumps(results, indent=2), encoding="utf-8")
        logger.info(
            f"Benchmark: CNN {cnn.accuracy:.3f}, cosine {baseline.accuracy:.3f}, "
            f"margin {summary.margin:.3f}, {elapsed:.0f}s"
        )

        assert cnn.accuracy >= 0.85
        assert cnn.accuracy - baseline.accuracy >= 0.05
        assert summary.margin >= 0.05
        assert elapsed <= 30 * 60
