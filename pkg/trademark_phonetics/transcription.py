"""
Trademark text to phonetic text.
Korean Hangul is romanized jamo by jamo; English goes through a pronunciation
lexicon with letter-to-sound rules as the fallback.
"""
import re
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from types import MappingProxyType
from typing import Dict, List, Optional, Tuple, Union

from trademark_phonetics import config
from trademark_phonetics.errors import IoError

logger = logging.getLogger(__name__)

Span = Tuple[int, int]


class ScriptTag(Enum):
    """Which converter applies to a piece of text."""
    HANGUL = "hangul"
    LATIN_ENGLISH = "latin-english"
    RAW_IPA = "raw-ipa"
    RAW_ROMAN = "raw-roman"

    @classmethod
    def parse(cls, value: Union[str, "ScriptTag"]) -> "ScriptTag":
        """Accept the long names and the short dataset/CLI names."""
        if isinstance(value, ScriptTag):
            return value
        key = value.strip().lower()
        if key not in _SCRIPT_ALIASES:
            raise ValueError(
                f"Unknown script {value!r}; expected one of {', '.join(sorted(_SCRIPT_ALIASES))}"
            )
        return _SCRIPT_ALIASES[key]

    @property
    def short_name(self) -> str:
        return _SHORT_NAMES[self]

    @property
    def is_raw(self) -> bool:
        return self in (ScriptTag.RAW_IPA, ScriptTag.RAW_ROMAN)


_SCRIPT_ALIASES = {
    "hangul": ScriptTag.HANGUL,
    "ko": ScriptTag.HANGUL,
    "en": ScriptTag.LATIN_ENGLISH,
    "english": ScriptTag.LATIN_ENGLISH,
    "latin-english": ScriptTag.LATIN_ENGLISH,
    "ipa": ScriptTag.RAW_IPA,
    "raw-ipa": ScriptTag.RAW_IPA,
    "roman": ScriptTag.RAW_ROMAN,
    "raw-roman": ScriptTag.RAW_ROMAN,
}

_SHORT_NAMES = {
    ScriptTag.HANGUL: "hangul",
    ScriptTag.LATIN_ENGLISH: "en",
    ScriptTag.RAW_IPA: "ipa",
    ScriptTag.RAW_ROMAN: "roman",
}


@dataclass(frozen=True)
class TranscriptionResult:
    """Phonetic text plus the character ranges that needed fallback handling."""
    phonetic_text: str
    source_text: str
    script: ScriptTag
    oov_spans: Tuple[Span, ...] = ()


# Hangul syllable block arithmetic
HANGUL_BEGIN = 0xAC00
HANGUL_END = 0xD7A3
INITIAL_STRIDE = 588
MEDIAL_STRIDE = 28

INITIALS = [
    "g", "kk", "n", "d", "tt", "r", "m", "b", "pp", "s",
    "ss", "", "j", "jj", "ch", "k", "t", "p", "h",
]
MEDIALS = [
    "a", "ae", "ya", "yae", "eo", "e", "yeo", "ye", "o", "wa", "wae",
    "oe", "yo", "u", "wo", "we", "wi", "yu", "eu", "ui", "i",
]
# Context-free: final ㄱ stays "g" (북 → bug), final ㄹ is "l" (글 → geul).
FINALS = [
    "", "g", "kk", "gs", "n", "nj", "nh", "d", "l", "lg", "lm", "lb", "ls", "lt",
    "lp", "lh", "m", "b", "bs", "s", "ss", "ng", "j", "ch", "k", "t", "p", "h",
]

_COMPAT_CONSONANTS = "ㄱㄲㄳㄴㄵㄶㄷㄸㄹㄺㄻㄼㄽㄾㄿㅀㅁㅂㅃㅄㅅㅆㅇㅈㅉㅊㅋㅌㅍㅎ"
_COMPAT_VOWELS = "ㅏㅐㅑㅒㅓㅔㅕㅖㅗㅘㅙㅚㅛㅜㅝㅞㅟㅠㅡㅢㅣ"
_INITIAL_JAMO = "ㄱㄲㄴㄷㄸㄹㅁㅂㅃㅅㅆㅇㅈㅉㅊㅋㅌㅍㅎ"
_FINAL_JAMO = " ㄱㄲㄳㄴㄵㄶㄷㄹㄺㄻㄼㄽㄾㄿㅀㅁㅂㅄㅅㅆㅇㅈㅊㅋㅌㅍㅎ"


def _compat_jamo_table() -> Dict[str, str]:
    table = {}
    for jamo in _COMPAT_CONSONANTS:
        initial = INITIALS[_INITIAL_JAMO.index(jamo)] if jamo in _INITIAL_JAMO else ""
        # standalone ㅇ and the clusters only have a final reading
        table[jamo] = initial or FINALS[_FINAL_JAMO.index(jamo)]
    for index, jamo in enumerate(_COMPAT_VOWELS):
        table[jamo] = MEDIALS[index]
    return table


COMPAT_JAMO = MappingProxyType(_compat_jamo_table())


def _add_span(spans: List[Span], start: int, end: int):
    """Record [start, end), merging with the previous span when adjacent."""
    if spans and spans[-1][1] == start:
        spans[-1] = (spans[-1][0], end)
    else:
        spans.append((start, end))


def romanize_hangul(text: str) -> TranscriptionResult:
    """
    Romanize Hangul syllables jamo by jamo.

    ASCII characters pass through lowercased. Any other codepoint is passed
    through as well and recorded in oov_spans.
    """
    pieces = []
    spans: List[Span] = []
    for position, char in enumerate(text):
        code = ord(char)
        if HANGUL_BEGIN <= code <= HANGUL_END:
            initial, rest = divmod(code - HANGUL_BEGIN, INITIAL_STRIDE)
            medial, final = divmod(rest, MEDIAL_STRIDE)
            pieces.append(INITIALS[initial] + MEDIALS[medial] + FINALS[final])
        elif char in COMPAT_JAMO:
            pieces.append(COMPAT_JAMO[char])
        elif code < 128:
            pieces.append(char.lower())
        else:
            pieces.append(char.lower())
            _add_span(spans, position, position + 1)

    if spans:
        logger.debug(f"Hangul passthrough for {text!r}: {spans}")
    return TranscriptionResult("".join(pieces), text, ScriptTag.HANGUL, tuple(spans))


class Lexicon:
    """Immutable headword → IPA mapping, case-insensitive on lookup."""

    def __init__(self, entries: Dict[str, str]):
        self._entries = MappingProxyType({k.lower(): v for k, v in entries.items()})

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Lexicon":
        """
        Load a `headword<TAB>ipa` file.

        Args:
            path: UTF-8 text file; lines starting with # are comments

        Returns:
            Lexicon instance
        """
        entries = {}
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise IoError(f"Cannot read lexicon {path}: {e}") from e

        for line_number, line in enumerate(lines, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                logger.warning(f"Skipping malformed lexicon line {line_number} in {path}")
                continue
            entries[parts[0].strip()] = parts[1].strip()

        logger.debug(f"Loaded {len(entries)} lexicon entries from {path}")
        return cls(entries)

    def lookup(self, word: str) -> Optional[str]:
        return self._entries.get(word.lower())

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._entries

    def __len__(self) -> int:
        return len(self._entries)


@lru_cache(maxsize=None)
def load_lexicon(path: Optional[str] = None) -> Lexicon:
    """Lexicon from an explicit path, PF_LEXICON, or the bundled file (cached)."""
    return Lexicon.load(config.lexicon_path(path))


WORD_RE = re.compile(r"[A-Za-z']+")

VOWEL_LETTERS = frozenset("aeiou")

LETTER_NAMES = {
    "a": "eɪ", "b": "bi", "c": "si", "d": "di", "e": "i", "f": "ɛf", "g": "dʒi",
    "h": "eɪtʃ", "i": "aɪ", "j": "dʒeɪ", "k": "keɪ", "l": "ɛl", "m": "ɛm", "n": "ɛn",
    "o": "o", "p": "pi", "q": "kju", "r": "ɑɹ", "s": "ɛs", "t": "ti", "u": "ju",
    "v": "vi", "w": "dʌbəlju", "x": "ɛks", "y": "waɪ", "z": "zi",
}

# Ordered: the first matching grapheme at the cursor wins, so longer clusters come first.
CLUSTER_RULES = (
    ("tch", "tʃ"), ("igh", "aɪ"), ("sch", "sk"),
    ("ch", "tʃ"), ("sh", "ʃ"), ("th", "θ"), ("ph", "f"), ("wh", "w"),
    ("ng", "ŋ"), ("ck", "k"), ("qu", "kw"),
    ("ee", "i"), ("ea", "i"), ("ie", "i"), ("oo", "u"), ("ue", "u"), ("ew", "ju"),
    ("ou", "aʊ"), ("ow", "aʊ"), ("ai", "eɪ"), ("ay", "eɪ"), ("ei", "eɪ"), ("ey", "eɪ"),
    ("oa", "o"), ("oi", "ɔɪ"), ("oy", "ɔɪ"), ("au", "ɔ"), ("aw", "ɔ"),
)

WORD_INITIAL_RULES = (("kn", "n"), ("wr", "ɹ"), ("ps", "s"), ("x", "z"), ("y", "j"))

LETTER_RULES = {
    "a": "æ", "b": "b", "d": "d", "e": "ɛ", "f": "f", "h": "h", "i": "ɪ", "j": "dʒ",
    "k": "k", "l": "l", "m": "m", "n": "n", "o": "ɑ", "p": "p", "q": "k", "r": "ɹ",
    "s": "s", "t": "t", "u": "ʌ", "v": "v", "w": "w", "x": "ks", "y": "i", "z": "z",
}

SOFTENING_LETTERS = frozenset("eiy")


def _normalize_spelling(word: str) -> str:
    """Collapse doubled consonants and drop a final silent e."""
    collapsed = []
    for letter in word:
        if collapsed and letter == collapsed[-1] and letter not in VOWEL_LETTERS:
            continue
        collapsed.append(letter)
    spelling = "".join(collapsed)
    if len(spelling) > 3 and spelling.endswith("e") and spelling[-2] not in VOWEL_LETTERS:
        spelling = spelling[:-1]
    return spelling


def letters_to_sound(word: str) -> str:
    """
    Deterministic letter-to-sound conversion for words missing from the lexicon.

    Args:
        word: lowercase ASCII letters

    Returns:
        IPA string using dictionary symbols or their aliases
    """
    if len(word) == 1:
        return LETTER_NAMES.get(word, word)

    spelling = _normalize_spelling(word)
    out = []
    cursor = 0
    for grapheme, ipa in WORD_INITIAL_RULES:
        if spelling.startswith(grapheme):
            out.append(ipa)
            cursor = len(grapheme)
            break

    while cursor < len(spelling):
        for grapheme, ipa in CLUSTER_RULES:
            if spelling.startswith(grapheme, cursor):
                out.append(ipa)
                cursor += len(grapheme)
                break
        else:
            letter = spelling[cursor]
            following = spelling[cursor + 1:cursor + 2]
            if letter == "c":
                out.append("s" if following in SOFTENING_LETTERS else "k")
            elif letter == "g":
                out.append("dʒ" if following in SOFTENING_LETTERS else "ɡ")
            else:
                out.append(LETTER_RULES.get(letter, letter))
            cursor += 1

    return "".join(out)


def english_to_ipa(text: str, lexicon: Optional[Lexicon] = None) -> TranscriptionResult:
    """
    Convert English text to IPA word by word.

    Words found in the lexicon use the stored pronunciation; other words go
    through letters_to_sound and their spans are recorded. Characters between
    words pass through unchanged.
    """
    lexicon = lexicon if lexicon is not None else load_lexicon()
    pieces = []
    spans: List[Span] = []
    cursor = 0

    for match in WORD_RE.finditer(text):
        pieces.append(text[cursor:match.start()])
        cursor = match.end()
        word = match.group()
        key = word.lower().replace("'", "")
        if not key:
            pieces.append(word)
            continue

        ipa = lexicon.lookup(key)
        if ipa is None:
            ipa = letters_to_sound(key)
            spans.append((match.start(), match.end()))
        pieces.append(ipa)

    pieces.append(text[cursor:])
    if spans:
        logger.debug(f"Letter-to-sound fallback for {text!r}: {spans}")
    return TranscriptionResult("".join(pieces), text, ScriptTag.LATIN_ENGLISH, tuple(spans))


def transcribe(
    text: str,
    script: Union[str, ScriptTag],
    lexicon: Optional[Lexicon] = None
) -> TranscriptionResult:
    """Dispatch to the converter for the script; raw scripts pass through."""
    script = ScriptTag.parse(script)
    if script is ScriptTag.HANGUL:
        return romanize_hangul(text)
    if script is ScriptTag.LATIN_ENGLISH:
        return english_to_ipa(text, lexicon)
    if script is ScriptTag.RAW_ROMAN:
        return TranscriptionResult(text.lower(), text, script)
    return TranscriptionResult(text, text, script)
