"""
Transcription tests.
Hangul romanization, English-to-IPA conversion, script tags, and the lexicon file.
"""
import pytest

from trademark_phonetics.errors import IoError
from trademark_phonetics.transcription import (
    Lexicon,
    ScriptTag,
    english_to_ipa,
    letters_to_sound,
    romanize_hangul,
    transcribe,
)


@pytest.mark.transcription
@pytest.mark.smoke
class TestHangulRomanization:
    """Per-jamo, context-free romanization."""

    @pytest.mark.parametrize("hangul, roman", [
        ("아디다스", "adidaseu"),
        ("구글", "gugeul"),
        ("페이스북", "peiseubug"),
    ])
    def test_golden_words(self, hangul, roman):
        """Known marks romanize byte-exact."""
        result = romanize_hangul(hangul)
        assert result.phonetic_text == roman
        assert result.oov_spans == ()
        assert result.script is ScriptTag.HANGUL

    def test_empty_input(self):
        """Empty text gives empty phonetic text."""
        result = romanize_hangul("")
        assert result.phonetic_text == ""
        assert result.oov_spans == ()

    def test_ascii_passthrough_is_idempotent(self):
        """Lowercase ASCII comes back unchanged with no spans."""
        result = romanize_hangul("adidas 2024")
        assert result.phonetic_text == "adidas 2024"
        assert result.oov_spans == ()

    def test_uppercase_ascii_lowercased(self):
        """ASCII letters are lowercased."""
        assert romanize_hangul("NIKE").phonetic_text == "nike"

    def test_concatenation_is_context_free(self):
        """Romanizing a + ' ' + b equals romanizing each part."""
        a, b = "페이스북", "구글"
        joined = romanize_hangul(f"{a} {b}").phonetic_text
        assert joined == romanize_hangul(a).phonetic_text + " " + romanize_hangul(b).phonetic_text

    def test_unknown_codepoints_recorded(self):
        """Non-Hangul, non-ASCII characters pass through and are recorded; adjacent ones merge."""
        result = romanize_hangul("구글★☆x¿")
        assert result.phonetic_text == "gugeul★☆x¿"
        assert result.oov_spans == ((2, 4), (5, 6))

    def test_compatibility_jamo(self):
        """Standalone jamo use the same letter tables."""
        assert romanize_hangul("ㄱㅏ").phonetic_text == "ga"

    def test_total_on_arbitrary_unicode(self):
        """Never raises, whatever the input."""
        text = "".join(chr(c) for c in range(0x20, 0x3200, 37))
        result = romanize_hangul(text)
        for start, end in result.oov_spans:
            assert 0 <= start < end <= len(text)


@pytest.mark.transcription
class TestEnglishToIpa:
    """Lexicon-first conversion with letter-to-sound fallback."""

    @pytest.mark.parametrize("word, ipa", [
        ("Adidas", "ədɪdəs"),
        ("Google", "ɡʊɡəl"),
        ("facebook", "fɛsbʊk"),
        ("XCEED", "ɪksid"),
    ])
    def test_pinned_lexicon_entries(self, word, ipa, lexicon):
        """Pinned words use the stored pronunciation, case-insensitively."""
        result = english_to_ipa(word, lexicon)
        assert result.phonetic_text == ipa
        assert result.oov_spans == ()

    def test_fallback_records_span(self, lexicon):
        """A word missing from the lexicon goes through the rules and is recorded."""
        result = english_to_ipa("zzq", lexicon)
        assert result.phonetic_text == letters_to_sound("zzq")
        assert result.oov_spans == ((0, 3),)

    def test_fallback_is_deterministic(self, lexicon, fake_names):
        """Equal inputs yield identical outputs."""
        for name in fake_names:
            assert english_to_ipa(name, lexicon) == english_to_ipa(name, lexicon)

    def test_single_letter_uses_letter_name(self, lexicon):
        """The X of X-SEED is spelled out; the hyphen passes through."""
        result = english_to_ipa("X-SEED", lexicon)
        assert result.phonetic_text == "ɛks-sid"
        assert result.oov_spans == ((0, 1),)

    def test_fallback_output_is_tokenizable(self, lexicon, dictionary, fake_names):
        """Rule output only uses dictionary symbols or aliases."""
        from trademark_phonetics.phoneme_codec import tokenize
        for name in fake_names:
            tokenize(english_to_ipa(name, lexicon).phonetic_text, dictionary)

    @pytest.mark.parametrize("word, expected", [
        ("zzq", "zk"),
        ("ship", "ʃɪp"),
        ("city", "sɪti"),
        ("knot", "nɑt"),
    ])
    def test_letter_rules(self, word, expected):
        """Ordered rewrites for unseen spellings."""
        assert letters_to_sound(word) == expected


@pytest.mark.transcription
class TestScriptDispatch:
    """Script tags and the transcribe dispatcher."""

    @pytest.mark.parametrize("name, tag", [
        ("hangul", ScriptTag.HANGUL),
        ("ko", ScriptTag.HANGUL),
        ("en", ScriptTag.LATIN_ENGLISH),
        ("latin-english", ScriptTag.LATIN_ENGLISH),
        ("IPA", ScriptTag.RAW_IPA),
        ("roman", ScriptTag.RAW_ROMAN),
    ])
    def test_parse(self, name, tag):
        """Long and short script names are accepted."""
        assert ScriptTag.parse(name) is tag

    def test_parse_unknown(self):
        """Unknown script names are refused."""
        with pytest.raises(ValueError):
            ScriptTag.parse("klingon")

    def test_raw_scripts_bypass(self):
        """Raw IPA is verbatim, raw roman is lowercased."""
        assert transcribe("ədɪdəs", ScriptTag.RAW_IPA).phonetic_text == "ədɪdəs"
        assert transcribe("AdiDas", "roman").phonetic_text == "adidas"

    def test_dispatch_hangul(self):
        """Hangul goes through the romanizer."""
        assert transcribe("구글", "hangul").phonetic_text == "gugeul"


@pytest.mark.transcription
class TestLexiconFile:
    """Lexicon loading."""

    def test_load_skips_comments_and_malformed(self, tmp_path):
        """Comments, blank and malformed lines are skipped; headwords are case-folded."""
        path = tmp_path / "lexicon.tsv"
        path.write_text("# comment\nfoo\tfu\nbroken line\n\nBar\tbɑɹ\n", encoding="utf-8")
        lexicon = Lexicon.load(path)
        assert len(lexicon) == 2
        assert lexicon.lookup("FOO") == "fu"
        assert "bar" in lexicon

    def test_missing_file(self, tmp_path):
        """A missing lexicon is an I/O error."""
        with pytest.raises(IoError):
            Lexicon.load(tmp_path / "missing.tsv")
