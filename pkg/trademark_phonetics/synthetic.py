"""
Seeded synthetic trademark pairs.

Similar pairs take a name and apply one or two phonetically close edits at
symbol level; dissimilar pairs join two unrelated names that are far apart
in edit distance. Base names come from seeded Faker locales.
"""
import logging
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from faker import Faker
from rapidfuzz.distance import Levenshtein

from trademark_phonetics.dataset import PairRecord
from trademark_phonetics.errors import EmptyPhoneticText, UnknownSymbol
from trademark_phonetics.featurizer import Featurizer
from trademark_phonetics.phoneme_codec import (
    MARKER_END,
    MARKER_START,
    SymbolDictionary,
    symbols_to_text,
    tokenize,
)
from trademark_phonetics.transcription import Lexicon, ScriptTag

logger = logging.getLogger(__name__)

# 12,553 similar to 34,020 dissimilar examined pairs
DEFAULT_DISSIMILAR_RATIO = 34020 / 12553
MIN_DISSIMILAR_DISTANCE = 0.5
MAX_EDITS = 2
MIN_NAME_SYMBOLS = 3
ATTEMPTS_PER_PAIR = 200

Symbols = Tuple[str, ...]


class EditKind(Enum):
    SUBSTITUTE = "substitute"
    VOWEL_DROP = "vowel-drop"
    VOWEL_DOUBLE = "vowel-double"
    START_ECHO = "start-echo"
    END_ECHO = "end-echo"


def default_dissimilar_count(n_similar: int) -> int:
    return int(round(n_similar * DEFAULT_DISSIMILAR_RATIO))


def normalized_edit_distance(a: Sequence[str], b: Sequence[str]) -> float:
    """Symbol-level Levenshtein distance over the longer length."""
    return Levenshtein.normalized_distance(list(a), list(b))


def restricted_edit_distance(
    a: Sequence[str],
    b: Sequence[str],
    can_substitute: Callable[[str, str], bool]
) -> int:
    """Levenshtein distance where a substitution is only allowed when `can_substitute` agrees."""
    previous = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        current = [i]
        for j, y in enumerate(b, start=1):
            if x == y:
                substitution = previous[j - 1]
            elif can_substitute(x, y):
                substitution = previous[j - 1] + 1
            else:
                substitution = previous[j - 1] + 2
            current.append(min(previous[j] + 1, current[j - 1] + 1, substitution))
        previous = current
    return previous[-1]


def same_group(dictionary: SymbolDictionary) -> Callable[[str, str], bool]:
    def check(x: str, y: str) -> bool:
        group = dictionary.group_of(x)
        return group is not None and group is dictionary.group_of(y)
    return check


class NameSource:
    """English and Korean personal names from seeded Faker instances."""

    def __init__(self, seed: int):
        self._english = Faker("en_US")
        self._korean = Faker("ko_KR")
        self._english.seed_instance(seed)
        self._korean.seed_instance(seed)

    def draw(self, rng: np.random.Generator) -> Tuple[str, ScriptTag]:
        choice = int(rng.integers(3))
        if choice == 0:
            return self._english.last_name(), ScriptTag.LATIN_ENGLISH
        if choice == 1:
            return self._english.first_name(), ScriptTag.LATIN_ENGLISH
        return self._korean.name().replace(" ", ""), ScriptTag.HANGUL


class SyntheticPairGenerator:
    """Builds labelled pairs from a name source and the dictionary's symbol groups."""

    def __init__(self, featurizer: Featurizer, seed: int):
        self.featurizer = featurizer
        self.dictionary = featurizer.dictionary
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.names = NameSource(seed)
        self._substitutes = {
            group.name: tuple(s for s in group.members if s not in (MARKER_START, MARKER_END))
            for group in self.dictionary.groups
        }

    def canonical_symbols(self, text: str, script: ScriptTag) -> Symbols:
        """Inner symbols of `text` with aliases resolved."""
        sequence = self.featurizer.sequence(text, script)
        return tuple(self.dictionary.resolve(symbol) for symbol in sequence.inner)

    def _draw_name(self) -> Tuple[str, ScriptTag, Symbols]:
        while True:
            text, script = self.names.draw(self.rng)
            try:
                symbols = self.canonical_symbols(text, script)
            except (UnknownSymbol, EmptyPhoneticText):
                logger.debug(f"Skipping unusable name {text!r}")
                continue
            if len(symbols) >= MIN_NAME_SYMBOLS:
                return text, script, symbols

    def _applicable_edits(self, symbols: List[str]) -> List[Tuple[EditKind, int]]:
        edits = []
        for position, symbol in enumerate(symbols):
            group = self.dictionary.group_of(symbol)
            if group is not None and len(self._substitutes[group.name]) > 1:
                edits.append((EditKind.SUBSTITUTE, position))
            if self.dictionary.is_vowel(symbol):
                edits.append((EditKind.VOWEL_DOUBLE, position))
                if len(symbols) > MIN_NAME_SYMBOLS:
                    edits.append((EditKind.VOWEL_DROP, position))
        edits.append((EditKind.START_ECHO, 0))
        edits.append((EditKind.END_ECHO, len(symbols) - 1))
        return edits

    def _apply(self, symbols: List[str], kind: EditKind, position: int):
        symbol = symbols[position]
        if kind is EditKind.SUBSTITUTE:
            group = self.dictionary.group_of(symbol)
            choices = [s for s in self._substitutes[group.name] if s != symbol]
            symbols[position] = choices[int(self.rng.integers(len(choices)))]
        elif kind is EditKind.VOWEL_DROP:
            del symbols[position]
        elif kind is EditKind.VOWEL_DOUBLE:
            symbols.insert(position, symbol)
        elif kind is EditKind.START_ECHO:
            symbols.insert(0, symbols[0])
        else:
            symbols.append(symbols[-1])

    def perturb(self, symbols: Symbols) -> Optional[Symbols]:
        """
        Apply one or two phonetically close edits.

        Returns:
            The edited symbols, or None when the result would not survive
            re-tokenization unchanged or equals the input
        """
        edited = list(symbols)
        for _ in range(int(self.rng.integers(1, MAX_EDITS + 1))):
            edits = self._applicable_edits(edited)
            kind, position = edits[int(self.rng.integers(len(edits)))]
            self._apply(edited, kind, position)

        result = tuple(edited)
        if result == symbols:
            return None
        try:
            retokenized = tokenize(symbols_to_text(result), self.dictionary)
        except (UnknownSymbol, EmptyPhoneticText):
            return None
        if tuple(self.dictionary.resolve(s) for s in retokenized.inner) != result:
            return None
        return result

    def similar_pair(self, index: int) -> PairRecord:
        for _ in range(ATTEMPTS_PER_PAIR):
            text, script, symbols = self._draw_name()
            perturbed = self.perturb(symbols)
            if perturbed is None:
                continue
            return PairRecord(
                id=f"syn-s{index:05d}",
                text_a=text,
                text_b=symbols_to_text(perturbed),
                script_a=script,
                script_b=ScriptTag.RAW_IPA,
                label=1,
            )
        raise RuntimeError(f"No usable perturbation after {ATTEMPTS_PER_PAIR} attempts")

    def dissimilar_pair(self, index: int) -> PairRecord:
        for _ in range(ATTEMPTS_PER_PAIR):
            text_a, script_a, symbols_a = self._draw_name()
            text_b, script_b, symbols_b = self._draw_name()
            if normalized_edit_distance(symbols_a, symbols_b) < MIN_DISSIMILAR_DISTANCE:
                continue
            return PairRecord(
                id=f"syn-d{index:05d}",
                text_a=text_a,
                text_b=text_b,
                script_a=script_a,
                script_b=script_b,
                label=0,
            )
        raise RuntimeError(f"No distant name pair after {ATTEMPTS_PER_PAIR} attempts")


def generate_synthetic(
    n_similar: int,
    n_dissimilar: int,
    seed: int,
    dictionary: Optional[SymbolDictionary] = None,
    lexicon: Optional[Lexicon] = None
) -> List[PairRecord]:
    """
    Seeded list of labelled pairs in shuffled order.

    Args:
        n_similar: number of label-1 pairs
        n_dissimilar: number of label-0 pairs
        seed: drives name drawing, edits and the final shuffle
        dictionary: symbol dictionary whose groups define close edits
        lexicon: pronunciation lexicon for English names

    Returns:
        n_similar + n_dissimilar PairRecords
    """
    if n_similar <= 0 or n_dissimilar <= 0:
        raise ValueError(f"Pair counts must be positive, got {n_similar} and {n_dissimilar}")

    generator = SyntheticPairGenerator(Featurizer(dictionary, lexicon), seed)
    records = [generator.similar_pair(i) for i in range(n_similar)]
    records.extend(generator.dissimilar_pair(i) for i in range(n_dissimilar))
    order = generator.rng.permutation(len(records))
    logger.info(f"Generated {n_similar} similar and {n_dissimilar} dissimilar pairs (seed {seed})")
    return [records[i] for i in order]
