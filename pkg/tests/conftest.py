import numpy as np
import pytest

from sexism_detector.corpus.loader import FIXTURE_CORPUS_PATH, load_dataset, normalize_corpus
from sexism_detector.corpus.models import Corpus
from sexism_detector.corpus.normalizer import TextNormalizer
from sexism_detector.corpus.slang import load_slang_map
from sexism_detector.corpus.splitter import deduplicate, stratified_split
from sexism_detector.embeddings.table import EmbeddingTable, clear_cache, write_embedding_file
from sexism_detector.schema.statement_schema import Statement

# 16 short statements, 8 per class, used by the overfit and ladder tests
TOY_STATEMENTS = [
    ("women are too emotional to lead", 1),
    ("she only got promoted because she is a woman", 1),
    ("girls can not handle engineering work", 1),
    ("a woman should stay home with the kids", 1),
    ("female managers are always bossy", 1),
    ("women do not belong in the boardroom", 1),
    ("she is too pretty to be a programmer", 1),
    ("ladies are bad at negotiating salaries", 1),
    ("the meeting starts at nine tomorrow", 0),
    ("please send the report before friday", 0),
    ("our team shipped the release on time", 0),
    ("the coffee machine on floor two is broken", 0),
    ("lunch is provided for the training session", 0),
    ("the quarterly numbers look strong", 0),
    ("remember to book the conference room", 0),
    ("the new hire starts on monday", 0),
]


def make_corpus(rows):
    """Corpus from (text, label) pairs, tokens split on whitespace."""
    return Corpus(
        statements=tuple(
            Statement(raw_text=text, tokens=tuple(text.split()), label=label) for text, label in rows
        )
    )


@pytest.fixture
def toy_corpus():
    return make_corpus(TOY_STATEMENTS)


@pytest.fixture
def toy_token_lists():
    return [tuple(text.split()) for text, _ in TOY_STATEMENTS]


@pytest.fixture
def toy_labels():
    return [label for _, label in TOY_STATEMENTS]


@pytest.fixture(scope="session")
def normalizer():
    return TextNormalizer(load_slang_map())


@pytest.fixture(scope="session")
def fixture_split():
    """The bundled 200-statement corpus, normalized, deduplicated and split."""
    corpus = load_dataset(FIXTURE_CORPUS_PATH)
    corpus, _ = normalize_corpus(corpus, TextNormalizer(load_slang_map()))
    corpus, _ = deduplicate(corpus)
    return stratified_split(corpus, 0.8, 42)


@pytest.fixture
def toy_embedding_file(tmp_path):
    """GloVe-format file (dim 4) covering most toy-corpus tokens."""
    rng = np.random.default_rng(7)
    tokens = sorted({t for text, _ in TOY_STATEMENTS for t in text.split()})
    kept = tokens[: len(tokens) - 5]
    table = EmbeddingTable(dim=4, entries={t: rng.uniform(-1, 1, 4) for t in kept})
    path = tmp_path / "toy_vectors.txt"
    write_embedding_file(table, path)
    clear_cache()
    yield path
    clear_cache()
