"""scikit-learn style front door for the whole pipeline.

The estimator owns the lexicon, vocabulary, bank and scorer, so the
phonetic ranker composes with the usual fit/transform tooling:

    ranker = PhoneticHotwordRanker(hotwords=words, epochs=6)
    ranker.fit(corpus_records)
    ranker.predict(["我爱悲京"])     # top-n surfaces per text
    ranker.transform(texts)          # (n_texts, n_hotwords) score matrix
"""

from __future__ import annotations

from typing import Iterable, List, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .bank import build_bank
from .frontend import Lexicon, demo_lexicon_path, load_lexicon, normalize_text
from .mining import TrainConfig, train
from .retriever import retrieve_topn, score_bank
from .simulate import CorpusRecord, simulate_asr_errors
from .vocab import build_vocab


class PhoneticHotwordRanker(BaseEstimator):
    """Rank a hotword list by pronunciation similarity to transcripts.

    Parameters follow the scikit-learn convention: everything passed to
    ``__init__`` is stored verbatim and all state learned by ``fit`` ends
    in trailing-underscore attributes.
    """

    def __init__(
        self,
        hotwords: Optional[Sequence[str]] = None,
        lexicon_path: Optional[str] = None,
        n: int = 10,
        canvas_rows: int = 24,
        canvas_cols: int = 128,
        channels: Sequence[int] = (16, 32, 64, 128, 128),
        embedding_dim: int = 32,
        epochs: int = 50,
        lr: float = 1e-4,
        batch_size: int = 32,
        mining_rounds: int = 3,
        negatives_per_positive: int = 3,
        mining_sample: Optional[int] = None,
        eval_sample: Optional[int] = None,
        seed: int = 0,
        threads: int = 1,
    ):
        self.hotwords = hotwords
        self.lexicon_path = lexicon_path
        self.n = n
        self.canvas_rows = canvas_rows
        self.canvas_cols = canvas_cols
        self.channels = channels
        self.embedding_dim = embedding_dim
        self.epochs = epochs
        self.lr = lr
        self.batch_size = batch_size
        self.mining_rounds = mining_rounds
        self.negatives_per_positive = negatives_per_positive
        self.mining_sample = mining_sample
        self.eval_sample = eval_sample
        self.seed = seed
        self.threads = threads

    # ------------------------------------------------------------------

    def _load_lexicon(self) -> Lexicon:
        return load_lexicon(self.lexicon_path or demo_lexicon_path())

    @staticmethod
    def _as_records(X: Iterable) -> List[CorpusRecord]:
        records = []
        for item in X:
            if isinstance(item, CorpusRecord):
                records.append(item)
            elif isinstance(item, dict):
                records.append(CorpusRecord(
                    item["reference"], list(item.get("hotwords", [])),
                    item.get("hypothesis", ""), float(item.get("mer", -1.0)),
                ))
            else:
                raise TypeError(f"expected CorpusRecord or dict, got {type(item).__name__}")
        return records

    def fit(self, X: Iterable, y=None) -> "PhoneticHotwordRanker":
        """Train on corpus records (dicts or CorpusRecord instances).

        Records without a hypothesis get one simulated inside the training
        error band. The bank is built from the ``hotwords`` parameter when
        given, else from the union of the records' ground-truth hotwords.
        """
        records = self._as_records(X)
        if not records:
            raise ValueError("fit requires at least one corpus record")
        lexicon = self._load_lexicon()
        vocab = build_vocab(lexicon)
        config = TrainConfig(
            epochs=self.epochs, lr=self.lr, batch_size=self.batch_size,
            mining_rounds=self.mining_rounds,
            negatives_per_positive=self.negatives_per_positive,
            seed=self.seed, canvas_rows=self.canvas_rows, canvas_cols=self.canvas_cols,
            channels=tuple(self.channels), embedding_dim=self.embedding_dim,
            mining_sample=self.mining_sample, eval_sample=self.eval_sample,
            threads=self.threads,
        )
        rng = np.random.default_rng(self.seed)
        filled = []
        for rec in records:
            if not rec.hypothesis:
                hyp, realized = simulate_asr_errors(
                    rec.reference, lexicon, config.mer_band, seed=int(rng.integers(2**31))
                )
                rec = CorpusRecord(rec.reference, rec.hotwords, hyp, realized)
            filled.append(rec)
        words = list(self.hotwords) if self.hotwords else sorted(
            {normalize_text(h) for r in filled for h in r.hotwords}
        )
        bank = build_bank(words, lexicon, vocab, max_phonemes=self.canvas_rows)
        model, report = train(filled, bank, vocab, lexicon, config)
        self.lexicon_, self.vocab_, self.bank_ = lexicon, vocab, bank
        self.model_, self.report_ = model, report
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("this PhoneticHotwordRanker instance is not fitted yet")

    def transform(self, X: Iterable[str]) -> np.ndarray:
        """Score matrix of shape (n_texts, n_hotwords)."""
        self._check_fitted()
        from .frontend import to_phonemes
        from .errors import EmptyPhonemeSequence

        out = np.zeros((0, len(self.bank_)))
        rows = []
        for text in X:
            try:
                ids = self.vocab_.encode(to_phonemes(normalize_text(text), self.lexicon_))
            except EmptyPhonemeSequence:
                rows.append(np.zeros(len(self.bank_)))
                continue
            rows.append(score_bank(self.model_, self.bank_, ids, threads=self.threads))
        return np.vstack(rows) if rows else out

    def predict(self, X: Iterable[str]) -> List[List[str]]:
        """Top-n hotword surfaces for each text."""
        self._check_fitted()
        results = []
        for text in X:
            ret = retrieve_topn(
                self.model_, self.bank_, self.vocab_, self.lexicon_, text,
                self.n, threads=self.threads,
            )
            results.append(ret.surfaces(self.bank_))
        return results
