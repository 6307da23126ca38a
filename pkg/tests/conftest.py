"""Shared fixtures: the bundled lexicon and a small trained pipeline."""

import pytest

from hotword_ranker import (
    TrainConfig,
    build_bank,
    build_vocab,
    demo_lexicon_path,
    load_lexicon,
    make_corpus,
    make_distractors,
    make_hotword_pool,
    train,
)


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon(demo_lexicon_path())


@pytest.fixture(scope="session")
def vocab(lexicon):
    return build_vocab(lexicon)


@pytest.fixture(scope="session")
def tiny_pipeline(lexicon, vocab):
    """A 50-record corpus, 40-entry bank, and a briefly trained model.

    Small enough to train in a few seconds; shared by retrieval, metrics
    and estimator tests that need a non-random scorer.
    """
    pool = make_hotword_pool(lexicon, n=20, seed=5)
    records = make_corpus(pool, 50, lexicon, seed=5)
    distractors = make_distractors(lexicon, pool, n=20, seed=5, vocab=vocab)
    bank = build_bank(pool + distractors, lexicon, vocab)
    config = TrainConfig(
        epochs=3, mining_rounds=2, canvas_rows=12, canvas_cols=48,
        seed=5, mining_sample=20, eval_sample=10,
    )
    model, report = train(records, bank, vocab, lexicon, config)
    return {
        "pool": pool,
        "records": records,
        "bank": bank,
        "model": model,
        "report": report,
        "config": config,
    }


CRITERION_LINES: list[str] = []
"""Pass/fail lines recorded by the acceptance tests, echoed after the run."""


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
