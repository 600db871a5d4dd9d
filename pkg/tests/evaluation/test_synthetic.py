"""
Synthetic pair tests.
Edit distances, seeded generation and the similar/dissimilar guarantees.
"""
import numpy as np
import pytest

from trademark_phonetics.featurizer import Featurizer
from trademark_phonetics.phoneme_codec import MARKER_END, MARKER_START
from trademark_phonetics.synthetic import (
    DEFAULT_DISSIMILAR_RATIO,
    MAX_EDITS,
    SyntheticPairGenerator,
    default_dissimilar_count,
    generate_synthetic,
    normalized_edit_distance,
    restricted_edit_distance,
    same_group,
)
from trademark_phonetics.transcription import ScriptTag


def close_variants(symbols, dictionary):
    """
    Every sequence one phonetically close edit away.

    Close edits: swap a symbol for another member of its group, drop a
    vowel, or repeat a symbol next to itself.
    """
    variants = set()
    for i, symbol in enumerate(symbols):
        group = dictionary.group_of(symbol)
        if group is not None:
            for other in group.members:
                if other != symbol and other not in (MARKER_START, MARKER_END):
                    variants.add(symbols[:i] + (other,) + symbols[i + 1:])
        if dictionary.is_vowel(symbol):
            variants.add(symbols[:i] + symbols[i + 1:])
        variants.add(symbols[:i] + (symbol,) + symbols[i:])
    return variants


def within_close_edits(a, b, dictionary, max_edits=MAX_EDITS):
    frontier = {a}
    for _ in range(max_edits):
        frontier = set().union(*(close_variants(s, dictionary) for s in frontier))
        if b in frontier:
            return True
    return False


@pytest.fixture(scope="module")
def synthetic_records(dictionary, lexicon):
    return generate_synthetic(10, 27, seed=5, dictionary=dictionary, lexicon=lexicon)


@pytest.fixture
def generator(dictionary, lexicon):
    return SyntheticPairGenerator(Featurizer(dictionary, lexicon), seed=11)


@pytest.mark.evaluation
class TestEditDistances:
    """Symbol-level distances."""

    def test_same_group_substitution_is_cheap(self, dictionary):
        """Intra-group swaps cost 1; cross-group swaps cost a delete plus an insert."""
        close = same_group(dictionary)
        assert restricted_edit_distance(("p", "a"), ("b", "a"), close) == 1
        assert restricted_edit_distance(("p", "a"), ("k", "a"), close) == 2
        assert restricted_edit_distance(("a",), ("a", "a"), close) == 1
        assert restricted_edit_distance((), ("s", "i", "d"), close) == 3

    def test_group_check_follows_aliases(self, dictionary):
        """Aliases take the group of the symbol they stand for."""
        close = same_group(dictionary)
        assert close("ɪ", "e")
        assert not close("ɪ", "k")

    def test_normalized_distance(self):
        """Distance is divided by the longer length."""
        assert normalized_edit_distance(("a", "b"), ("a", "b", "c")) == pytest.approx(1 / 3)
        assert normalized_edit_distance(("dʒ", "a"), ("dʒ", "a")) == 0.0
        assert normalized_edit_distance(("s",), ("k",)) == 1.0

    def test_default_ratio(self):
        """The dissimilar count keeps the examined-pair class ratio."""
        assert default_dissimilar_count(12553) == 34020
        assert DEFAULT_DISSIMILAR_RATIO == pytest.approx(2.71, abs=0.01)

    def test_cross_group_swap_is_not_close(self, dictionary):
        """A stop swapped for a nasal is within two plain edits but not one close edit."""
        a, b = ("a", "d", "a"), ("a", "m", "a")
        assert restricted_edit_distance(a, b, same_group(dictionary)) == 2
        assert not within_close_edits(a, b, dictionary)
        assert within_close_edits(a, ("a", "t", "a"), dictionary)
        assert within_close_edits(a, ("a", "d", "d", "a"), dictionary)
        assert within_close_edits(a, ("d", "a"), dictionary)


@pytest.mark.evaluation
class TestPerturb:
    """Phonetically close edits."""

    def test_edits_stay_close(self, generator, dictionary):
        """Every edit is reachable with at most two close edits."""
        symbols = ("ə", "d", "i", "d", "ə", "s")
        for _ in range(50):
            edited = generator.perturb(symbols)
            if edited is None:
                continue
            assert edited != symbols
            assert within_close_edits(symbols, edited, dictionary)

    def test_markers_never_inserted(self, generator):
        """Start and end markers never appear inside an edited name."""
        symbols = ("g", "u", "g", "ə", "l")
        for _ in range(50):
            edited = generator.perturb(symbols)
            if edited is not None:
                assert MARKER_START not in edited and MARKER_END not in edited


@pytest.mark.evaluation
@pytest.mark.smoke
class TestGenerateSynthetic:
    """Seeded dataset generation."""

    def test_counts_and_ids(self, synthetic_records):
        """Requested counts arrive with unique, labelled ids."""
        assert len(synthetic_records) == 37
        assert sum(record.label for record in synthetic_records) == 10
        ids = [record.id for record in synthetic_records]
        assert len(set(ids)) == 37
        assert all(i.startswith("syn-s") or i.startswith("syn-d") for i in ids)

    def test_seeded(self, synthetic_records, dictionary, lexicon):
        """Same seed, same records; another seed, other records."""
        again = generate_synthetic(10, 27, seed=5, dictionary=dictionary, lexicon=lexicon)
        assert again == synthetic_records
        other = generate_synthetic(10, 27, seed=6, dictionary=dictionary, lexicon=lexicon)
        assert other != synthetic_records

    def test_similar_pairs_use_only_close_edits(self, synthetic_records, generator, dictionary):
        """Similar pairs differ by one or two edits, every swap staying inside a group."""
        for record in synthetic_records:
            if record.label != 1:
                continue
            assert record.script_b is ScriptTag.RAW_IPA
            a = generator.canonical_symbols(record.text_a, record.script_a)
            b = generator.canonical_symbols(record.text_b, record.script_b)
            assert a != b
            assert within_close_edits(a, b, dictionary), (record.id, a, b)

    def test_dissimilar_pairs_are_far(self, synthetic_records, generator):
        """Dissimilar pairs are at least half their length apart."""
        for record in synthetic_records:
            if record.label != 0:
                continue
            a = generator.canonical_symbols(record.text_a, record.script_a)
            b = generator.canonical_symbols(record.text_b, record.script_b)
            assert normalized_edit_distance(a, b) >= 0.5

    def test_records_featurize(self, synthetic_records, featurizer):
        """Generated text goes through the featurizer."""
        for record in synthetic_records[:10]:
            grid = featurizer.feature(record.text_a, record.script_a).grid
            assert grid.shape == (128, 128)
            assert np.count_nonzero(grid) > 0

    def test_counts_must_be_positive(self, dictionary, lexicon):
        """Zero pairs is a usage error."""
        with pytest.raises(ValueError):
            generate_synthetic(0, 5, seed=1, dictionary=dictionary, lexicon=lexicon)
