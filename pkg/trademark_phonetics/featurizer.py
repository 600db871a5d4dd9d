"""
End-to-end featurization: text -> transcription -> symbols -> 2-gram path -> feature,
plus a thread pool that featurizes whole datasets.
"""
import time
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from trademark_phonetics import config
from trademark_phonetics.dataset import PairRecord
from trademark_phonetics.errors import EmptyPhoneticText, UnknownSymbol
from trademark_phonetics.pairing import PairSample, PairTensor, compose_pair
from trademark_phonetics.phoneme_codec import (
    GramPath,
    SymbolDictionary,
    SymbolSequence,
    default_dictionary,
    encode,
    gram_coordinates,
    segment_2grams,
    tokenize,
)
from trademark_phonetics.raster import PhoneticFeature, RasterConfig, rasterize
from trademark_phonetics.transcription import Lexicon, ScriptTag, TranscriptionResult, transcribe

logger = logging.getLogger(__name__)

TextKey = Tuple[str, ScriptTag]


@dataclass(frozen=True)
class FeaturizedText:
    """Every intermediate of one text's trip through the pipeline."""
    transcription: TranscriptionResult
    sequence: SymbolSequence
    mapping: Tuple[int, ...]
    path: GramPath
    feature: PhoneticFeature

    def to_dict(self) -> Dict:
        return {
            "text": self.transcription.source_text,
            "script": self.transcription.script.short_name,
            "phonetic": self.transcription.phonetic_text,
            "oov_spans": [list(span) for span in self.transcription.oov_spans],
            "symbols": list(self.sequence.symbols),
            "mapping": list(self.mapping),
            "coordinates": [list(point) for point in self.path.points],
            "thickness": self.feature.thickness,
            "path_length": self.feature.path_length,
        }


class Featurizer:
    """Pipeline bound to one dictionary, lexicon and raster configuration. Safe to share between threads."""

    def __init__(
        self,
        dictionary: Optional[SymbolDictionary] = None,
        lexicon: Optional[Lexicon] = None,
        raster_cfg: Optional[RasterConfig] = None
    ):
        self.dictionary = dictionary if dictionary is not None else default_dictionary()
        self.lexicon = lexicon
        self.raster_cfg = raster_cfg if raster_cfg is not None else RasterConfig()

    def sequence(self, text: str, script: Union[str, ScriptTag]) -> SymbolSequence:
        """Framed symbol sequence of `text`."""
        return tokenize(transcribe(text, script, self.lexicon).phonetic_text, self.dictionary)

    def featurize(self, text: str, script: Union[str, ScriptTag]) -> FeaturizedText:
        """
        Run the full pipeline on one text.

        Raises:
            UnknownSymbol: the transcription holds a character outside the dictionary
            EmptyPhoneticText: the text has no pronounceable content
        """
        if not text.strip():
            raise EmptyPhoneticText("Cannot featurize an empty text")
        transcription = transcribe(text, script, self.lexicon)
        sequence = tokenize(transcription.phonetic_text, self.dictionary)
        mapping = tuple(encode(sequence, self.dictionary))
        path = gram_coordinates(segment_2grams(sequence), self.dictionary)
        feature = rasterize(path, self.raster_cfg, source=text)
        return FeaturizedText(transcription, sequence, mapping, path, feature)

    def feature(self, text: str, script: Union[str, ScriptTag]) -> PhoneticFeature:
        return self.featurize(text, script).feature


class FeaturizationPool:
    """Featurize dataset records concurrently; results keep record order."""

    def __init__(self, featurizer: Featurizer, max_workers: Optional[int] = None):
        """
        Args:
            featurizer: shared pipeline
            max_workers: thread count, PF_WORKERS when omitted
        """
        self.featurizer = featurizer
        self.max_workers = max_workers or config.worker_count()

    def _first_record(self, records: Sequence[PairRecord], key: TextKey) -> PairRecord:
        return next(
            record for record in records
            if key in ((record.text_a, record.script_a), (record.text_b, record.script_b))
        )

    def featurize_texts(self, keys: Sequence[TextKey]) -> Dict[TextKey, PhoneticFeature]:
        """Featurize distinct (text, script) keys; the first failure is raised."""
        features: Dict[TextKey, PhoneticFeature] = {}
        start_time = time.time()

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = {
                executor.submit(self.featurizer.feature, text, script): (text, script)
                for text, script in keys
            }
            for future in as_completed(futures):
                features[futures[future]] = future.result()

        duration = max(time.time() - start_time, 1e-9)
        logger.info(
            f"Featurized {len(keys)} distinct texts in {duration:.2f}s "
            f"({len(keys) / duration:.1f} texts/s, {self.max_workers} workers)"
        )
        return features

    def featurize_records(self, records: Sequence[PairRecord]) -> List[Tuple[PhoneticFeature, PhoneticFeature]]:
        """
        Feature pairs for every record, in record order.

        Texts shared between records are featurized once.

        Raises:
            UnknownSymbol: tagged with the id of the first record holding the text
        """
        keys = list(dict.fromkeys(
            key for record in records
            for key in ((record.text_a, record.script_a), (record.text_b, record.script_b))
        ))
        try:
            features = self.featurize_texts(keys)
        except UnknownSymbol as e:
            failing = self._failing_key(keys, e)
            record_id = self._first_record(records, failing).id if failing else None
            logger.error(f"Featurization failed for record {record_id!r}: {e}")
            raise e.with_record(record_id) from e
        except EmptyPhoneticText as e:
            failing = self._failing_key(keys, e)
            record_id = self._first_record(records, failing).id if failing else None
            raise EmptyPhoneticText(f"record {record_id!r}: {e}") from e

        return [
            (features[(record.text_a, record.script_a)], features[(record.text_b, record.script_b)])
            for record in records
        ]

    def _failing_key(self, keys: Sequence[TextKey], error: Exception) -> Optional[TextKey]:
        # Re-run sequentially in key order so the reported record is deterministic
        for key in keys:
            try:
                self.featurizer.feature(*key)
            except type(error):
                return key
        return None

    def build_samples(self, records: Sequence[PairRecord]) -> List[PairSample]:
        """Two-channel training samples with provenance."""
        pairs = self.featurize_records(records)
        return [
            PairSample(PairTensor(compose_pair(a, b).channels, record.label), record.label, record.id)
            for record, (a, b) in zip(records, pairs)
        ]
