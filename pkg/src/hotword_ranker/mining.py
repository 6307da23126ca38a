"""Training-data construction and the three-round hard-negative schedule.

Round 1 trains on initial pairs: each ground-truth hotword against its
noisy hypothesis (positive) plus randomly drawn non-matching hotwords
(negatives). Later rounds append the retriever's own confusions as
negatives, and the final round adds pronunciation-perturbed hotword
variants paired with clean references as extra positives.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bank import HotwordBank
from .errors import EmptyPhonemeSequence
from .frontend import Lexicon, normalize_text, split_pinyin, to_phonemes
from .metrics import EvalRecord, evaluate_sweep
from .retriever import retrieve_topn
from .scorer import (
    OptimizerState, ScorerModel, adamw_step, init_model, loss_and_grads, score_id_pairs,
)
from .simulate import CorpusRecord
from .vocab import PhonemeVocab

log = logging.getLogger(__name__)

STAGE_INITIAL = "initial"
STAGE_MINED = "mined_negative"
STAGE_AUGMENTED = "augmented_positive"


@dataclass(frozen=True)
class TrainingPair:
    hotword_surface: str
    text: str
    label: int               # 1 = match
    stage: str
    hotword_id: int = -1     # -1 for augmented variants not present in the bank


@dataclass
class TrainConfig:
    epochs: int = 50
    lr: float = 1e-4
    batch_size: int = 32
    mining_rounds: int = 3
    negatives_per_positive: int = 3
    weight_decay: float = 0.01
    seed: int = 0
    holdout_frac: float = 0.1
    mer_band: Tuple[float, float] = (0.02, 0.20)
    canvas_rows: int = 24
    canvas_cols: int = 128
    channels: Tuple[int, ...] = (16, 32, 64, 128, 128)
    embedding_dim: int = 32
    augment_per_hotword: int = 2
    mining_sample: Optional[int] = None   # records mined per round (None = all)
    eval_sample: Optional[int] = None     # held-out records used for retrieval eval
    eval_topns: Tuple[int, ...] = (1, 3, 10, 50)
    threads: int = 1

    def epoch_schedule(self) -> List[int]:
        """Split the epoch budget across rounds, front-loading round 1
        (e.g. 50 epochs over 3 rounds -> 20/15/15)."""
        rounds = max(1, self.mining_rounds)
        if rounds == 1:
            return [self.epochs]
        later = max(1, round(0.3 * self.epochs))
        first = self.epochs - later * (rounds - 1)
        if first < 1:
            base, rem = divmod(self.epochs, rounds)
            return [base + 1] * rem + [base] * (rounds - rem)
        return [first] + [later] * (rounds - 1)


def build_initial_pairs(
    corpus: Sequence[CorpusRecord],
    bank: HotwordBank,
    mer_band: Tuple[float, float] = (0.02, 0.20),
    negatives_per_positive: int = 3,
    seed: int = 0,
) -> List[TrainingPair]:
    """One positive per (record, hotword) inside the error band, plus k
    random non-matching bank hotwords as negatives on the same text."""
    rng = np.random.default_rng(seed)
    lo, hi = mer_band
    pairs: List[TrainingPair] = []
    n_bank = len(bank)
    for rec in corpus:
        if not rec.hypothesis:
            continue
        if rec.mer >= 0 and not (lo <= rec.mer <= hi):
            log.warning("record %r outside the error band (%.3f); skipped", rec.reference, rec.mer)
            continue
        gt_ids = {
            bank.surface_index[normalize_text(h)]
            for h in rec.hotwords
            if normalize_text(h) in bank.surface_index
        }
        for h in rec.hotwords:
            surface = normalize_text(h)
            hid = bank.surface_index.get(surface)
            if hid is None:
                continue
            pairs.append(TrainingPair(surface, rec.hypothesis, 1, STAGE_INITIAL, hid))
            drawn = 0
            guard = 0
            while drawn < negatives_per_positive and guard < 50 * negatives_per_positive:
                guard += 1
                cand = int(rng.integers(n_bank))
                if cand in gt_ids:
                    continue
                entry = bank.entries[cand]
                pairs.append(TrainingPair(entry.surface, rec.hypothesis, 0, STAGE_INITIAL, cand))
                drawn += 1
    perm = rng.permutation(len(pairs))
    return [pairs[i] for i in perm]


def mine_negatives(
    model: ScorerModel,
    bank: HotwordBank,
    vocab: PhonemeVocab,
    lexicon: Lexicon,
    corpus: Sequence[CorpusRecord],
    threads: int = 1,
) -> List[TrainingPair]:
    """The retriever's own top confusions become negatives: the top-1 result
    when it is wrong, otherwise the highest-ranked incorrect result."""
    pairs: List[TrainingPair] = []
    for rec in corpus:
        if not rec.hypothesis or not rec.hotwords:
            continue
        gt_ids = {
            bank.surface_index[normalize_text(h)]
            for h in rec.hotwords
            if normalize_text(h) in bank.surface_index
        }
        if not gt_ids:
            continue
        result = retrieve_topn(model, bank, vocab, lexicon, rec.hypothesis, 2, threads=threads)
        if result.no_phonemes or not result.ranked:
            continue
        incorrect = [p.hotword_id for p in result.ranked if p.hotword_id not in gt_ids]
        for chosen in incorrect[: len(gt_ids)]:
            entry = bank.entries[chosen]
            pairs.append(TrainingPair(entry.surface, rec.hypothesis, 0, STAGE_MINED, chosen))
    return pairs


def _confusable_initial_chars(char: str, lexicon: Lexicon) -> List[str]:
    syl = lexicon.zh_map.get(char)
    if syl is None:
        return []
    initial, final = split_pinyin(syl)
    out: List[str] = []
    for repl, _w in lexicon.confusions.get(initial, []):
        out.extend(lexicon.chars_for_syllable(repl + final))
    return out


def augment_positives(
    corpus: Sequence[CorpusRecord],
    lexicon: Lexicon,
    seed: int = 0,
    per_hotword: int = 2,
) -> List[TrainingPair]:
    """Perturbed hotword variants (homophone or confusable-initial character
    swaps) paired as positives with the clean reference text."""
    rng = np.random.default_rng(seed)
    pairs: List[TrainingPair] = []
    for rec in corpus:
        for h in rec.hotwords:
            surface = normalize_text(h)
            if len(surface) < 2:
                continue
            variants = set()
            guard = 0
            while len(variants) < per_hotword and guard < 20 * per_hotword:
                guard += 1
                pos = int(rng.integers(len(surface)))
                char = surface[pos]
                candidates = lexicon.homophones(char)
                if rng.random() < 0.5:
                    confusable = _confusable_initial_chars(char, lexicon)
                    if confusable:
                        candidates = confusable
                if not candidates:
                    continue
                repl = candidates[rng.integers(len(candidates))]
                variant = surface[:pos] + repl + surface[pos + 1:]
                if variant != surface:
                    variants.add(variant)
            for variant in sorted(variants):
                pairs.append(TrainingPair(variant, rec.reference, 1, STAGE_AUGMENTED))
    return pairs


# ---------------------------------------------------------------------------
# training driver


class _Encoder:
    """Memoized text -> phoneme-id encoding."""

    def __init__(self, vocab: PhonemeVocab, lexicon: Lexicon):
        self.vocab = vocab
        self.lexicon = lexicon
        self._cache: Dict[str, Optional[List[int]]] = {}

    def __call__(self, text: str) -> Optional[List[int]]:
        if text not in self._cache:
            try:
                seq = to_phonemes(normalize_text(text), self.lexicon)
                self._cache[text] = self.vocab.encode(seq)
            except EmptyPhonemeSequence:
                self._cache[text] = None
        return self._cache[text]


def _auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Rank-based AUC (Mann-Whitney U with tie correction)."""
    pos = labels == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        return 0.0
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def _holdout_scores(model, pairs, encoder, threads):
    id_pairs = []
    labels = []
    for p in pairs:
        hw = encoder(p.hotword_surface)
        tx = encoder(p.text)
        if hw is None or tx is None:
            continue
        id_pairs.append((hw, tx))
        labels.append(p.label)
    if not id_pairs:
        return np.empty(0), np.empty(0, dtype=int)
    return score_id_pairs(model, id_pairs, threads=threads), np.asarray(labels)


@dataclass
class TrainingReport:
    rounds: List[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"config": self.config, "rounds": self.rounds},
                          ensure_ascii=False, indent=2)

    @property
    def final(self) -> dict:
        return self.rounds[-1] if self.rounds else {}


def train(
    corpus: Sequence[CorpusRecord],
    bank: HotwordBank,
    vocab: PhonemeVocab,
    lexicon: Lexicon,
    config: TrainConfig = TrainConfig(),
    model: Optional[ScorerModel] = None,
) -> Tuple[ScorerModel, TrainingReport]:
    """Run the full multi-round schedule and return the model plus a report."""
    rng = np.random.default_rng(config.seed)
    encoder = _Encoder(vocab, lexicon)

    order = rng.permutation(len(corpus))
    n_holdout = max(1, int(round(config.holdout_frac * len(corpus)))) if len(corpus) > 1 else 0
    holdout = [corpus[i] for i in order[:n_holdout]]
    train_split = [corpus[i] for i in order[n_holdout:]]

    if model is None:
        model = init_model(
            len(vocab),
            seed=config.seed,
            canvas_rows=config.canvas_rows,
            canvas_cols=config.canvas_cols,
            channels=config.channels,
            embedding_dim=config.embedding_dim,
            vocab_hash=vocab.content_hash(),
        )
    opt = OptimizerState(lr=config.lr, weight_decay=config.weight_decay)

    pairs = build_initial_pairs(
        train_split, bank, config.mer_band, config.negatives_per_positive, seed=config.seed
    )
    holdout_pairs = build_initial_pairs(
        holdout, bank, config.mer_band, config.negatives_per_positive, seed=config.seed + 1
    )
    eval_records = [
        EvalRecord(r.reference, r.hypothesis, r.hotwords) for r in holdout if r.hypothesis
    ]
    if config.eval_sample is not None and len(eval_records) > config.eval_sample:
        idx = rng.permutation(len(eval_records))[: config.eval_sample]
        eval_records = [eval_records[i] for i in sorted(idx)]

    report = TrainingReport(config={
        "epochs": config.epochs, "lr": config.lr, "batch_size": config.batch_size,
        "mining_rounds": config.mining_rounds, "seed": config.seed,
        "canvas": [config.canvas_rows, config.canvas_cols],
        "channels": list(config.channels), "embedding_dim": config.embedding_dim,
    })

    schedule = config.epoch_schedule()
    stage_counts = {STAGE_INITIAL: len(pairs), STAGE_MINED: 0, STAGE_AUGMENTED: 0}
    for round_idx, round_epochs in enumerate(schedule):
        t0 = time.time()
        if round_idx > 0:
            mine_from = train_split
            if config.mining_sample is not None and len(mine_from) > config.mining_sample:
                idx = rng.permutation(len(mine_from))[: config.mining_sample]
                mine_from = [mine_from[i] for i in sorted(idx)]
            mined = mine_negatives(model, bank, vocab, lexicon, mine_from, threads=config.threads)
            pairs = pairs + mined
            stage_counts[STAGE_MINED] += len(mined)
            if round_idx == len(schedule) - 1:
                augmented = augment_positives(
                    mine_from, lexicon, seed=config.seed + round_idx,
                    per_hotword=config.augment_per_hotword,
                )
                pairs = pairs + augmented
                stage_counts[STAGE_AUGMENTED] += len(augmented)

        epoch_losses: List[float] = []
        for _epoch in range(round_epochs):
            perm = rng.permutation(len(pairs))
            losses = []
            for lo in range(0, len(perm), config.batch_size):
                batch = []
                for k in perm[lo:lo + config.batch_size]:
                    p = pairs[k]
                    hw = encoder(p.hotword_surface)
                    tx = encoder(p.text)
                    if hw is None or tx is None:
                        continue
                    batch.append((hw, tx, p.label))
                if not batch:
                    continue
                loss, grads = loss_and_grads(model, batch)
                adamw_step(model, opt, grads)
                losses.append(loss)
            epoch_losses.append(float(np.mean(losses)) if losses else 0.0)

        scores, labels = _holdout_scores(model, holdout_pairs, encoder, config.threads)
        accuracy = float(np.mean((scores > 0.5) == (labels == 1))) if len(scores) else 0.0
        auc = _auc(scores, labels) if len(scores) else 0.0
        sweep = evaluate_sweep(
            model, bank, vocab, lexicon, eval_records,
            n_list=config.eval_topns, threads=config.threads,
        ) if eval_records else None
        report.rounds.append({
            "round": round_idx + 1,
            "epochs": round_epochs,
            "epoch_losses": epoch_losses,
            "pairs": len(pairs),
            "stage_counts": dict(stage_counts),
            "holdout_accuracy": accuracy,
            "holdout_auc": auc,
            "holdout_prrr": {str(n): v for n, v in (sweep.prrr_at if sweep else {}).items()},
            "seconds": round(time.time() - t0, 3),
        })
        log.info(
            "round %d: loss %.4f -> %.4f, holdout acc %.3f auc %.3f",
            round_idx + 1, epoch_losses[0] if epoch_losses else float("nan"),
            epoch_losses[-1] if epoch_losses else float("nan"), accuracy, auc,
        )
    return model, report
