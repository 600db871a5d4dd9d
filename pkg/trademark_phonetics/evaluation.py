"""
Scoring: the cosine-distance baseline, CNN evaluation on the held-out split,
and per-class distance histograms.
"""
import csv
import logging
from dataclasses import dataclass
from typing import IO, Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from trademark_phonetics.dataset import VALIDATION_FRACTION, PairRecord, stratified_split
from trademark_phonetics.errors import DimensionMismatch, InsufficientData, ZeroVector
from trademark_phonetics.featurizer import FeaturizationPool, Featurizer
from trademark_phonetics.neuralnet import CnnParams, predict_batch, stack_samples
from trademark_phonetics.phoneme_codec import SymbolDictionary
from trademark_phonetics.raster import PhoneticFeature, RasterConfig
from trademark_phonetics.transcription import Lexicon

logger = logging.getLogger(__name__)

SPLIT_VALIDATION = "validation"
SPLIT_ALL = "all"
SPLITS = (SPLIT_VALIDATION, SPLIT_ALL)
HISTOGRAM_HEADER = ("bin_lo", "bin_hi", "count_similar", "count_dissimilar")


@dataclass
class EvalReport:
    """Binary accuracy with its confusion counts (positive = similar)."""
    accuracy: float
    tp: int
    fp: int
    tn: int
    fn: int
    n_samples: int
    threshold: Optional[float] = None
    method: str = ""

    def to_dict(self) -> Dict[str, Any]:
        report = {
            "method": self.method,
            "accuracy": self.accuracy,
            "n_samples": self.n_samples,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
        }
        if self.threshold is not None:
            report["threshold"] = self.threshold
        return report


def evaluate_predictions(
    predicted: Sequence[int],
    labels: Sequence[int],
    threshold: Optional[float] = None,
    method: str = ""
) -> EvalReport:
    """
    Confusion counts and accuracy for binary predictions.

    Args:
        predicted: predicted labels (1 = similar)
        labels: true labels
        threshold: distance threshold, baseline only
        method: name carried into the report
    """
    predicted = np.asarray(predicted).astype(bool)
    labels = np.asarray(labels).astype(bool)
    if predicted.shape != labels.shape:
        raise DimensionMismatch(f"{predicted.size} predictions for {labels.size} labels")
    if labels.size == 0:
        raise InsufficientData("Nothing to evaluate")

    tp = int(np.sum(predicted & labels))
    tn = int(np.sum(~predicted & ~labels))
    fp = int(np.sum(predicted & ~labels))
    fn = int(np.sum(~predicted & labels))
    n = int(labels.size)
    return EvalReport((tp + tn) / n, tp, fp, tn, fn, n, threshold, method)


def cosine_distance(a: PhoneticFeature, b: PhoneticFeature) -> float:
    """
    1 - cos(angle) between the flattened grids, clamped to [0, 2].

    Raises:
        DimensionMismatch: grids differ in shape
        ZeroVector: either grid is all zero
    """
    if a.shape != b.shape:
        raise DimensionMismatch(f"Cannot compare features of shape {a.shape} and {b.shape}")
    x = np.asarray(a.grid, dtype=np.float64).ravel()
    y = np.asarray(b.grid, dtype=np.float64).ravel()
    norm_x = float(np.dot(x, x))
    norm_y = float(np.dot(y, y))
    if norm_x == 0 or norm_y == 0:
        raise ZeroVector(f"All-zero feature ({a.source or b.source or 'unnamed'})")
    similarity = float(np.dot(x, y)) / np.sqrt(norm_x * norm_y)
    return float(min(max(1.0 - similarity, 0.0), 2.0))


def fit_threshold(train: Iterable[Tuple[float, int]]) -> float:
    """
    Distance threshold that maximizes training accuracy.

    A pair is classified similar iff distance < threshold. Candidates are the
    smallest distance, the midpoints between consecutive distinct distances,
    and a value just above the largest; ties go to the smaller threshold.

    Raises:
        InsufficientData: a class is missing
    """
    pairs = list(train)
    distances = np.array([d for d, _ in pairs], dtype=np.float64)
    labels = np.array([label for _, label in pairs], dtype=np.int64)
    similar = np.sort(distances[labels == 1])
    dissimilar = np.sort(distances[labels == 0])
    if similar.size == 0 or dissimilar.size == 0:
        raise InsufficientData("Threshold fitting needs both classes")

    values = np.unique(distances)
    candidates = np.concatenate([
        values[:1],
        (values[:-1] + values[1:]) / 2,
        [np.nextafter(values[-1], np.inf)],
    ])
    # similar below the threshold plus dissimilar at or above it
    correct = (
        np.searchsorted(similar, candidates, side="left")
        + dissimilar.size - np.searchsorted(dissimilar, candidates, side="left")
    )
    best = int(np.argmax(correct))
    logger.debug(f"Threshold {candidates[best]:.6f} classifies {correct[best]}/{len(pairs)} training pairs")
    return float(candidates[best])


def _pool(
    pool: Optional[FeaturizationPool],
    dictionary: Optional[SymbolDictionary],
    raster_cfg: Optional[RasterConfig],
    lexicon: Optional[Lexicon]
) -> FeaturizationPool:
    return pool if pool is not None else FeaturizationPool(Featurizer(dictionary, lexicon, raster_cfg))


def pair_distances(records: Sequence[PairRecord], pool: FeaturizationPool) -> Tuple[np.ndarray, np.ndarray]:
    """Cosine distance and label of every record, in record order."""
    features = pool.featurize_records(records)
    distances = np.array([cosine_distance(a, b) for a, b in features], dtype=np.float64)
    labels = np.array([record.label for record in records], dtype=np.int64)
    return distances, labels


def split_indices(
    labels: np.ndarray,
    split: str,
    seed: int,
    validation_fraction: float = VALIDATION_FRACTION
) -> Tuple[np.ndarray, np.ndarray]:
    """(fit indices, scored indices) for `validation` or `all`."""
    if split == SPLIT_ALL:
        everything = np.arange(len(labels))
        return everything, everything
    if split != SPLIT_VALIDATION:
        raise ValueError(f"Unknown split {split!r}; expected one of {', '.join(SPLITS)}")
    return stratified_split(labels, seed, validation_fraction)


def evaluate_baseline(
    records: Sequence[PairRecord],
    dictionary: Optional[SymbolDictionary] = None,
    raster_cfg: Optional[RasterConfig] = None,
    lexicon: Optional[Lexicon] = None,
    seed: int = 0,
    threshold: Optional[float] = None,
    split: str = SPLIT_VALIDATION,
    pool: Optional[FeaturizationPool] = None
) -> EvalReport:
    """
    Fitted-threshold cosine baseline.

    The threshold is fit on the training split unless given; accuracy is
    reported on the validation split (or on everything for split="all").
    """
    distances, labels = pair_distances(records, _pool(pool, dictionary, raster_cfg, lexicon))
    fit_idx, scored_idx = split_indices(labels, split, seed)
    if threshold is None:
        threshold = fit_threshold(zip(distances[fit_idx], labels[fit_idx]))
    predicted = distances[scored_idx] < threshold
    report = evaluate_predictions(predicted, labels[scored_idx], threshold, method="cosine")
    logger.info(f"Cosine baseline: accuracy {report.accuracy:.4f} on {report.n_samples} pairs (threshold {threshold:.4f})")
    return report


def evaluate_cnn(
    params: CnnParams,
    records: Sequence[PairRecord],
    dictionary: Optional[SymbolDictionary] = None,
    raster_cfg: Optional[RasterConfig] = None,
    lexicon: Optional[Lexicon] = None,
    seed: int = 0,
    split: str = SPLIT_VALIDATION,
    pool: Optional[FeaturizationPool] = None,
    batch_size: int = 64
) -> EvalReport:
    """CNN accuracy on the held-out split drawn with the training seed."""
    samples = _pool(pool, dictionary, raster_cfg, lexicon).build_samples(records)
    inputs, labels = stack_samples(samples)
    _, scored_idx = split_indices(labels, split, seed)
    predicted = predict_batch(params, inputs[scored_idx], batch_size).argmax(axis=1)
    report = evaluate_predictions(predicted, labels[scored_idx], method="cnn")
    logger.info(f"CNN: accuracy {report.accuracy:.4f} on {report.n_samples} pairs")
    return report


@dataclass
class HistogramSpec:
    """Uniform bins over [0, 1] with per-class counts."""
    edges: np.ndarray
    counts_similar: np.ndarray
    counts_dissimilar: np.ndarray

    @property
    def bins(self) -> int:
        return len(self.edges) - 1

    def rows(self) -> Iterable[Tuple[float, float, int, int]]:
        for i in range(self.bins):
            yield (
                float(self.edges[i]), float(self.edges[i + 1]),
                int(self.counts_similar[i]), int(self.counts_dissimilar[i]),
            )

    def write_csv(self, stream: IO[str]):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(HISTOGRAM_HEADER)
        for lo, hi, similar, dissimilar in self.rows():
            writer.writerow([f"{lo:.6f}", f"{hi:.6f}", similar, dissimilar])


def histogram_from_distances(distances: np.ndarray, labels: np.ndarray, bins: int) -> HistogramSpec:
    if bins < 2:
        raise ValueError(f"Need at least 2 bins, got {bins}")
    edges = np.linspace(0.0, 1.0, bins + 1)
    distances = np.clip(distances, 0.0, 1.0)
    similar, _ = np.histogram(distances[labels == 1], bins=edges)
    dissimilar, _ = np.histogram(distances[labels == 0], bins=edges)
    return HistogramSpec(edges, similar, dissimilar)


def distance_histogram(
    records: Sequence[PairRecord],
    dictionary: Optional[SymbolDictionary] = None,
    raster_cfg: Optional[RasterConfig] = None,
    bins: int = 20,
    lexicon: Optional[Lexicon] = None,
    pool: Optional[FeaturizationPool] = None
) -> HistogramSpec:
    """Per-class histogram of cosine distances over every record."""
    if bins < 2:
        raise ValueError(f"Need at least 2 bins, got {bins}")
    distances, labels = pair_distances(records, _pool(pool, dictionary, raster_cfg, lexicon))
    return histogram_from_distances(distances, labels, bins)


@dataclass
class DistanceSummary:
    n_similar: int
    n_dissimilar: int
    mean_similar: float
    mean_dissimilar: float

    @property
    def margin(self) -> float:
        return self.mean_dissimilar - self.mean_similar

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_similar": self.n_similar,
            "n_dissimilar": self.n_dissimilar,
            "mean_similar": self.mean_similar,
            "mean_dissimilar": self.mean_dissimilar,
            "margin": self.margin,
        }


def summarize_distances(distances: np.ndarray, labels: np.ndarray) -> DistanceSummary:
    """Per-class mean distance; the similar class should sit closer to 0."""
    distances = np.asarray(distances, dtype=np.float64)
    labels = np.asarray(labels)
    similar = distances[labels == 1]
    dissimilar = distances[labels == 0]
    if similar.size == 0 or dissimilar.size == 0:
        raise InsufficientData("Distance summary needs both classes")
    return DistanceSummary(int(similar.size), int(dissimilar.size), float(similar.mean()), float(dissimilar.mean()))
