"""
Labelled trademark pairs: JSONL ingestion and the stratified train/validation split.

One JSON object per line:
    {"id": "...", "a": "...", "b": "...", "script_a": "hangul|en|ipa|roman",
     "script_b": "...", "label": 0|1}
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, IO, Iterable, List, Sequence, Tuple, Union

import numpy as np

from trademark_phonetics.errors import DatasetFormatError, IoError
from trademark_phonetics.transcription import ScriptTag

logger = logging.getLogger(__name__)

DEFAULT_SCRIPT = ScriptTag.LATIN_ENGLISH
VALIDATION_FRACTION = 0.1


@dataclass(frozen=True)
class PairRecord:
    """Two trademark texts with their scripts and a similarity label (1 = similar)."""
    id: str
    text_a: str
    text_b: str
    script_a: ScriptTag
    script_b: ScriptTag
    label: int

    def __post_init__(self):
        if not self.text_a.strip() or not self.text_b.strip():
            raise ValueError(f"Record {self.id!r} has an empty text")
        if isinstance(self.label, bool) or not isinstance(self.label, int) or self.label not in (0, 1):
            raise ValueError(f"Record {self.id!r} label must be 0 or 1, got {self.label!r}")

    @classmethod
    def from_json(cls, obj: Any, line_number: int) -> "PairRecord":
        """Build a record from one decoded JSONL object; id defaults to L<line>."""
        if not isinstance(obj, dict):
            raise DatasetFormatError(line_number, "expected a JSON object")
        for key in ("a", "b", "label"):
            if key not in obj:
                raise DatasetFormatError(line_number, f"missing required field {key!r}")
        for key in ("a", "b"):
            if not isinstance(obj[key], str):
                raise DatasetFormatError(line_number, f"field {key!r} must be a string")
        try:
            return cls(
                id=str(obj.get("id", f"L{line_number}")),
                text_a=obj["a"],
                text_b=obj["b"],
                script_a=ScriptTag.parse(obj.get("script_a", DEFAULT_SCRIPT)),
                script_b=ScriptTag.parse(obj.get("script_b", DEFAULT_SCRIPT)),
                label=obj["label"],
            )
        except (ValueError, AttributeError) as e:
            raise DatasetFormatError(line_number, str(e)) from e

    def to_json(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "a": self.text_a,
            "b": self.text_b,
            "script_a": self.script_a.short_name,
            "script_b": self.script_b.short_name,
            "label": self.label,
        }


def parse_jsonl(lines: Iterable[str]) -> List[PairRecord]:
    """Parse JSONL text lines; blank lines are skipped but still counted."""
    records = []
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise DatasetFormatError(line_number, f"invalid JSON: {e.msg}") from e
        records.append(PairRecord.from_json(obj, line_number))
    return records


def read_jsonl(path: Union[str, Path]) -> List[PairRecord]:
    try:
        with open(path, encoding="utf-8") as handle:
            records = parse_jsonl(handle)
    except OSError as e:
        raise IoError(f"Cannot read dataset {path}: {e}") from e
    similar = sum(record.label for record in records)
    logger.info(f"Loaded {len(records)} pairs from {path} ({similar} similar, {len(records) - similar} dissimilar)")
    return records


def dump_jsonl(records: Iterable[PairRecord], stream: IO[str]):
    for record in records:
        stream.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")


def write_jsonl(records: Sequence[PairRecord], path: Union[str, Path]):
    try:
        with open(path, "w", encoding="utf-8") as handle:
            dump_jsonl(records, handle)
    except OSError as e:
        raise IoError(f"Cannot write dataset {path}: {e}") from e
    logger.info(f"Wrote {len(records)} pairs to {path}")


def stratified_split(
    labels: Sequence[int],
    seed: int,
    validation_fraction: float = VALIDATION_FRACTION
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Seeded per-class split into train and validation indices.

    Each class contributes max(1, round(fraction * n_c)) validation items,
    but a class never goes entirely to validation.

    Returns:
        (train indices, validation indices), each in seeded shuffled order
    """
    if not 0 < validation_fraction < 1:
        raise ValueError(f"Validation fraction must lie in (0, 1), got {validation_fraction}")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train_parts, validation_parts = [], []
    for label in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == label))
        n_validation = min(max(1, int(round(validation_fraction * len(members)))), len(members) - 1)
        validation_parts.append(members[:n_validation])
        train_parts.append(members[n_validation:])
    train = rng.permutation(np.concatenate(train_parts)) if train_parts else np.array([], dtype=np.int64)
    validation = rng.permutation(np.concatenate(validation_parts)) if validation_parts else np.array([], dtype=np.int64)
    return train, validation
