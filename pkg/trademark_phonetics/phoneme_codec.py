"""
Phonetic symbol dictionary, tokenizer and 2-gram coordinate paths.

A word becomes a symbol sequence framed by "-" and "_", consecutive
symbol pairs become 2-grams, and each 2-gram maps to one (x, y) point
through the dictionary values.
"""
import logging
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from types import MappingProxyType
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from trademark_phonetics import config
from trademark_phonetics.errors import EmptyPhoneticText, IoError, UnknownSymbol

logger = logging.getLogger(__name__)

MARKER_START = "-"
MARKER_END = "_"
GRAM_ORDER = 2
VALUE_RANGE = 128
MIN_ENTRIES = 45
ALIAS_ARROW = "→"

Point = Tuple[int, int]


@dataclass(frozen=True)
class SymbolGroup:
    """Phonetically similar symbols sharing a narrow value interval."""
    name: str
    members: Tuple[str, ...]

    @property
    def is_vowel_group(self) -> bool:
        return self.name.endswith("vowels")


class SymbolDictionary:
    """Symbol → value map with aliases and group metadata. Immutable after construction."""

    def __init__(
        self,
        entries: Sequence[Tuple[str, int]],
        aliases: Optional[Mapping[str, str]] = None,
        groups: Sequence[SymbolGroup] = ()
    ):
        values: Dict[str, int] = {}
        for symbol, value in entries:
            if symbol in values:
                raise ValueError(f"Duplicate dictionary symbol {symbol!r}")
            if not 0 <= value < VALUE_RANGE:
                raise ValueError(f"Value {value} for {symbol!r} outside [0, {VALUE_RANGE - 1}]")
            values[symbol] = value

        for marker in (MARKER_START, MARKER_END):
            if marker not in values:
                raise ValueError(f"Dictionary lacks boundary marker {marker!r}")
        if len(values) < MIN_ENTRIES:
            raise ValueError(f"Dictionary has {len(values)} entries, need at least {MIN_ENTRIES}")

        aliases = dict(aliases or {})
        for source, target in aliases.items():
            if target not in values:
                raise ValueError(f"Alias {source!r} points at missing symbol {target!r}")
            if source in values:
                raise ValueError(f"Alias {source!r} shadows a listed symbol")

        self.entries: Tuple[Tuple[str, int], ...] = tuple(entries)
        self.groups: Tuple[SymbolGroup, ...] = tuple(groups)
        self._values = MappingProxyType(values)
        self._aliases = MappingProxyType(aliases)
        self._group_of = MappingProxyType(
            {member: group for group in self.groups for member in group.members}
        )
        # markers are framing only, never read from input
        matchable = [s for s in values if s not in (MARKER_START, MARKER_END)]
        matchable.extend(aliases)
        self._matchable = frozenset(matchable)
        self._max_symbol_length = max(len(s) for s in matchable)

    @property
    def aliases(self) -> Mapping[str, str]:
        return self._aliases

    @property
    def symbols(self) -> Tuple[str, ...]:
        return tuple(symbol for symbol, _ in self.entries)

    @property
    def inventory(self) -> Mapping[str, int]:
        """Listed symbol → value, markers included."""
        return self._values

    def __len__(self) -> int:
        return len(self._values)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._values or symbol in self._aliases

    def resolve(self, symbol: str, position: int = 0) -> str:
        """Listed symbol for `symbol`, following an alias if needed."""
        if symbol in self._values:
            return symbol
        if symbol in self._aliases:
            return self._aliases[symbol]
        raise UnknownSymbol(position, symbol[:1] or "?")

    def lookup(self, symbol: str, position: int = 0) -> int:
        return self._values[self.resolve(symbol, position)]

    def group_of(self, symbol: str) -> Optional[SymbolGroup]:
        return self._group_of.get(self.resolve(symbol))

    def is_vowel(self, symbol: str) -> bool:
        group = self.group_of(symbol)
        return group is not None and group.is_vowel_group

    def match_at(self, text: str, position: int) -> Optional[str]:
        """Longest symbol or alias starting at `position`, if any."""
        longest = min(self._max_symbol_length, len(text) - position)
        for length in range(longest, 0, -1):
            candidate = text[position:position + length]
            if candidate in self._matchable:
                return candidate
        return None


def parse_dictionary(lines: Sequence[str], source: str = "<memory>") -> SymbolDictionary:
    """
    Parse dictionary file lines.

    Args:
        lines: `symbol<TAB>value`, `alias<TAB>a→b` and `#group <name>` lines
        source: name used in error messages

    Returns:
        SymbolDictionary
    """
    entries: List[Tuple[str, int]] = []
    aliases: Dict[str, str] = {}
    groups: List[Tuple[str, List[str]]] = []

    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if line.startswith("#group"):
            name = line[len("#group"):].strip()
            if not name:
                raise ValueError(f"{source}:{line_number}: group header without a name")
            groups.append((name, []))
            continue
        if line.startswith("#"):
            continue

        fields = line.split("\t")
        if len(fields) != 2:
            raise ValueError(f"{source}:{line_number}: expected two tab-separated fields")
        key, value = fields[0], fields[1].strip()

        if key == "alias":
            source_symbol, arrow, target = value.partition(ALIAS_ARROW)
            if not arrow or not source_symbol or not target:
                raise ValueError(f"{source}:{line_number}: malformed alias {value!r}")
            aliases[source_symbol] = target
            continue

        try:
            number = int(value)
        except ValueError:
            raise ValueError(f"{source}:{line_number}: value {value!r} is not an integer") from None
        entries.append((key, number))
        if groups:
            groups[-1][1].append(key)

    return SymbolDictionary(
        entries,
        aliases,
        [SymbolGroup(name, tuple(members)) for name, members in groups if members],
    )


@lru_cache(maxsize=None)
def _read_dictionary(path: str) -> SymbolDictionary:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise IoError(f"Cannot read dictionary {path}: {e}") from e
    dictionary = parse_dictionary(lines, source=path)
    logger.debug(f"Loaded {len(dictionary)} symbols, {len(dictionary.aliases)} aliases from {path}")
    return dictionary


def load_dictionary(path: Optional[Union[str, Path]] = None) -> SymbolDictionary:
    """Dictionary from an explicit path, PF_DICT, or the bundled file."""
    return _read_dictionary(str(config.dictionary_path(str(path) if path else None)))


def default_dictionary() -> SymbolDictionary:
    """The bundled dictionary, ignoring any override."""
    return _read_dictionary(str(config.DEFAULT_DICTIONARY_PATH))


@dataclass(frozen=True)
class SymbolSequence:
    """Symbols of one word, framed by the start and end markers."""
    symbols: Tuple[str, ...]
    order: int = GRAM_ORDER

    def __post_init__(self):
        if len(self.symbols) < 2:
            raise ValueError("A symbol sequence needs at least the two markers")
        if self.symbols[0] != MARKER_START or self.symbols[-1] != MARKER_END:
            raise ValueError(f"Sequence must start with {MARKER_START!r} and end with {MARKER_END!r}")

    @classmethod
    def framed(cls, inner: Sequence[str]) -> "SymbolSequence":
        return cls((MARKER_START, *inner, MARKER_END))

    @property
    def inner(self) -> Tuple[str, ...]:
        return self.symbols[1:-1]

    @property
    def word_length(self) -> int:
        return len(self.symbols) - 2

    def reversed(self) -> "SymbolSequence":
        """Symbol-reversed word with the markers re-applied."""
        return SymbolSequence.framed(self.inner[::-1])

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __getitem__(self, index):
        return self.symbols[index]

    def __str__(self) -> str:
        return "".join(self.symbols)


@dataclass(frozen=True)
class Gram2:
    first: str
    second: str
    index: int


@dataclass(frozen=True)
class GramPath:
    """One (x, y) point per 2-gram, in pronunciation order."""
    points: Tuple[Point, ...]

    def __post_init__(self):
        for x, y in self.points:
            if not (0 <= x < VALUE_RANGE and 0 <= y < VALUE_RANGE):
                raise ValueError(f"Point ({x}, {y}) outside the {VALUE_RANGE}x{VALUE_RANGE} grid")

    def reversed(self) -> "GramPath":
        return GramPath(self.points[::-1])

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points)


def _is_separator(char: str) -> bool:
    return char.isspace() or unicodedata.category(char)[0] in ("Z", "P")


def tokenize(phonetic_text: str, dictionary: SymbolDictionary) -> SymbolSequence:
    """
    Greedy longest-match segmentation of phonetic text.

    Whitespace and punctuation are skipped, so markers are never read from input.

    Raises:
        UnknownSymbol: a character starts no symbol or alias
        EmptyPhoneticText: nothing but separators
    """
    symbols = []
    position = 0
    while position < len(phonetic_text):
        match = dictionary.match_at(phonetic_text, position)
        if match is not None:
            symbols.append(match)
            position += len(match)
            continue
        char = phonetic_text[position]
        if _is_separator(char):
            position += 1
            continue
        raise UnknownSymbol(position, char)

    if not symbols:
        raise EmptyPhoneticText(f"No phonetic symbols in {phonetic_text!r}")
    return SymbolSequence.framed(symbols)


def encode(seq: SymbolSequence, dictionary: SymbolDictionary) -> List[int]:
    """Dictionary value of every symbol, markers included."""
    return [dictionary.lookup(symbol, index) for index, symbol in enumerate(seq)]


def segment_ngrams(seq: SymbolSequence, n: int = GRAM_ORDER) -> List[Tuple[str, ...]]:
    """Overlapping n-long windows over the framed sequence."""
    if n < 1:
        raise ValueError(f"n-gram order must be positive, got {n}")
    symbols = seq.symbols
    return [tuple(symbols[i:i + n]) for i in range(len(symbols) - n + 1)]


def segment_2grams(seq: SymbolSequence) -> List[Gram2]:
    return [Gram2(first, second, index) for index, (first, second) in enumerate(segment_ngrams(seq, 2))]


def gram_coordinates(grams: Sequence[Gram2], dictionary: SymbolDictionary) -> GramPath:
    """x = value of the first symbol, y = value of the second."""
    if not grams:
        raise ValueError("gram_coordinates needs at least one 2-gram")
    return GramPath(tuple(
        (dictionary.lookup(gram.first, gram.index), dictionary.lookup(gram.second, gram.index + 1))
        for gram in grams
    ))


def symbols_to_text(symbols: Sequence[str]) -> str:
    """Join symbols back into phonetic text, leaving the markers out."""
    return "".join(s for s in symbols if s not in (MARKER_START, MARKER_END))
