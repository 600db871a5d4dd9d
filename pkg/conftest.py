"""
Pytest configuration and fixtures for the phonetic feature tests.
Provides shared dictionaries, raster settings, tiny network configs, and seeded names.
"""
import os
import pytest
from typing import List
from dotenv import load_dotenv

from trademark_phonetics import config
from trademark_phonetics.featurizer import Featurizer
from trademark_phonetics.neuralnet import CnnConfig
from trademark_phonetics.phoneme_codec import SymbolDictionary, default_dictionary
from trademark_phonetics.raster import RasterConfig
from trademark_phonetics.transcription import Lexicon, load_lexicon

# Load environment variables
load_dotenv()


@pytest.fixture(scope="session")
def dictionary() -> SymbolDictionary:
    """Bundled symbol dictionary."""
    return default_dictionary()


@pytest.fixture(scope="session")
def lexicon() -> Lexicon:
    """Bundled pronunciation lexicon."""
    return load_lexicon(str(config.DEFAULT_LEXICON_PATH))


@pytest.fixture(scope="session")
def raster_cfg() -> RasterConfig:
    """Default intensity schedule: Z = 255, gamma = 0.9, cumulative product."""
    return RasterConfig()


@pytest.fixture(scope="session")
def featurizer(dictionary, lexicon, raster_cfg) -> Featurizer:
    return Featurizer(dictionary, lexicon, raster_cfg)


@pytest.fixture(scope="function")
def tiny_cnn_config() -> CnnConfig:
    """8x8 input, 2 + 2 filters, fc1 = 8: small enough for finite differences."""
    return CnnConfig(
        input_size=8,
        conv1_filters=2,
        conv2_filters=2,
        fc1_units=8,
        batch_size=4,
        epochs=1,
        rng_seed=7,
    )


@pytest.fixture(scope="session")
def benchmark_enabled() -> bool:
    return config.benchmark_enabled()


@pytest.fixture(scope="function")
def fake_names() -> List[str]:
    """Seeded English surnames for property tests."""
    from faker import Faker
    fake = Faker("en_US")
    fake.seed_instance(1234)
    return [fake.last_name() for _ in range(25)]


@pytest.fixture(scope="function", autouse=True)
def setup_test_environment():
    """Setup test environment before each test."""
    # Create reports directory if it doesn't exist
    os.makedirs("reports", exist_ok=True)
    yield
