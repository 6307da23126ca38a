"""Evaluation metrics and harnesses.

The error rate treats each Chinese character and each English word as one
token, so code-switched references are scored sensibly. Retrieval quality
is measured as the fraction of utterances whose ground-truth hotwords all
appear in the top-N (sentence level), plus substring-based recall/precision
of hotwords in the hypothesis text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bank import HotwordBank
from .errors import InsufficientDistractors, LengthMismatch
from .frontend import Lexicon, normalize_text, tokenize_mixed
from .retriever import RetrievalResult, retrieve_topn
from .scorer import ScorerModel
from .vocab import PhonemeVocab


@dataclass
class EvalRecord:
    reference: str
    hypothesis: str
    hotwords: List[str]


@dataclass
class MetricsReport:
    mer: float
    prrr_at: Dict[int, float]
    prr: float
    ppr: float
    pf1: float
    counts: Dict[str, int] = field(default_factory=dict)


def edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Levenshtein distance with unit costs over token surfaces."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i in range(1, len(a) + 1):
        cur = [i] + [0] * len(b)
        for j in range(1, len(b) + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[-1]


def mixed_tokens(text: str) -> List[str]:
    return [t.surface for t in tokenize_mixed(normalize_text(text))]


def mer(reference: str, hypothesis: str) -> float:
    """Mixed error rate: char/word-unit edit distance over reference length.

    Not capped at 1.0 (a much longer hypothesis can exceed it)."""
    ref = mixed_tokens(reference)
    hyp = mixed_tokens(hypothesis)
    return edit_distance(ref, hyp) / max(1, len(ref))


def prrr(
    records: Sequence[EvalRecord], retrievals: Sequence[RetrievalResult],
    bank: HotwordBank, n: int,
) -> float:
    """Fraction of records whose every ground-truth hotword is in the top-n."""
    if len(records) != len(retrievals):
        raise LengthMismatch(f"{len(records)} records vs {len(retrievals)} retrievals")
    hits = total = 0
    for rec, ret in zip(records, retrievals):
        if not rec.hotwords:
            continue
        total += 1
        top = {bank.entries[p.hotword_id].surface for p in ret.ranked[:n]}
        if all(normalize_text(h) in top for h in rec.hotwords):
            hits += 1
    return hits / total if total else 0.0


def post_metrics(
    records: Sequence[EvalRecord], bank: HotwordBank
) -> Tuple[float, float, float]:
    """Substring-based hotword recall/precision over hypotheses.

    Recall counts ground-truth hotwords present in the hypothesis; precision
    divides ground-truth bank hits by all bank hotwords found in the
    hypothesis. Zero denominators yield 0.
    """
    recalled = gt_total = 0
    precise = found_total = 0
    for rec in records:
        hyp = normalize_text(rec.hypothesis)
        gt = {normalize_text(h) for h in rec.hotwords}
        for h in gt:
            gt_total += 1
            if h in hyp:
                recalled += 1
        for surface in bank.surfaces():
            if surface in hyp:
                found_total += 1
                if surface in gt:
                    precise += 1
    prr = recalled / gt_total if gt_total else 0.0
    ppr = precise / found_total if found_total else 0.0
    pf1 = 2 * prr * ppr / (prr + ppr) if (prr + ppr) > 0 else 0.0
    return prr, ppr, pf1


def evaluate_sweep(
    model: ScorerModel,
    bank: HotwordBank,
    vocab: PhonemeVocab,
    lexicon: Lexicon,
    records: Sequence[EvalRecord],
    n_list: Sequence[int] = (1, 3, 10, 50),
    threads: int = 1,
    retrievals: Optional[List[RetrievalResult]] = None,
) -> MetricsReport:
    """Retrieval once per record at max(n_list), then recall per cutoff."""
    n_max = max(n_list)
    if retrievals is None:
        retrievals = [
            retrieve_topn(model, bank, vocab, lexicon, r.hypothesis, n_max, threads=threads)
            for r in records
        ]
    prrr_at = {n: prrr(records, retrievals, bank, n) for n in n_list}
    prr, ppr, pf1 = post_metrics(records, bank)
    mean_mer = float(np.mean([mer(r.reference, r.hypothesis) for r in records])) if records else 0.0
    counts = {"records": len(records), "bank_size": len(bank)}
    return MetricsReport(mean_mer, prrr_at, prr, ppr, pf1, counts)


def sweep_tsv(report: MetricsReport) -> str:
    lines = ["n\tprrr\tprr\tppr\tpf1\tmer"]
    for n in sorted(report.prrr_at):
        lines.append(
            f"{n}\t{report.prrr_at[n]:.6f}\t{report.prr:.6f}"
            f"\t{report.ppr:.6f}\t{report.pf1:.6f}\t{report.mer:.6f}"
        )
    return "\n".join(lines) + "\n"


def scaling_curve(
    model: ScorerModel,
    core_bank: HotwordBank,
    distractor_pool: Sequence[str],
    sizes: Sequence[int],
    records: Sequence[EvalRecord],
    vocab: PhonemeVocab,
    lexicon: Lexicon,
    seeds: Sequence[int] = (0,),
    n: int = 50,
    threads: int = 1,
) -> List[Tuple[int, float]]:
    """Recall-at-n as the bank grows with irrelevant distractors.

    Every (hotword, record) score is computed once over the union of all
    sampled banks; per-size rankings are then slices of that score table.
    Returns the per-size mean over seeds.
    """
    from .bank import build_bank

    gt = {normalize_text(h) for r in records for h in r.hotwords}
    pool = [w for w in distractor_pool if normalize_text(w) not in gt]
    core_surfaces = core_bank.surfaces()
    need = max(sizes) - len(core_surfaces)
    if need > len(pool):
        raise InsufficientDistractors(
            f"need {need} distractors beyond the {len(core_surfaces)}-entry core, have {len(pool)}"
        )

    samples: Dict[Tuple[int, int], List[str]] = {}
    union: List[str] = list(core_surfaces)
    union_set = set(core_surfaces)
    for seed in seeds:
        rng = np.random.default_rng(seed)
        shuffled = list(pool)
        rng.shuffle(shuffled)
        for size in sizes:
            extra = shuffled[: max(0, size - len(core_surfaces))]
            samples[(seed, size)] = extra
            for w in extra:
                if w not in union_set:
                    union_set.add(w)
                    union.append(w)

    union_bank = build_bank(union, lexicon, vocab)
    retrievals = [
        retrieve_topn(model, union_bank, vocab, lexicon, r.hypothesis, len(union_bank), threads=threads)
        for r in records
    ]
    # full score table: record x union entry
    score_table = np.zeros((len(records), len(union_bank)))
    for i, ret in enumerate(retrievals):
        for p in ret.ranked:
            score_table[i, p.hotword_id] = p.score

    out: List[Tuple[int, float]] = []
    for size in sizes:
        vals = []
        for seed in seeds:
            members = core_surfaces + samples[(seed, size)]
            ids = np.asarray([union_bank.surface_index[normalize_text(w)] for w in members])
            hits = total = 0
            for i, rec in enumerate(records):
                if not rec.hotwords:
                    continue
                total += 1
                sub = score_table[i, ids]
                order = np.lexsort((ids, -sub))
                top = {union_bank.entries[ids[k]].surface for k in order[:n]}
                if all(normalize_text(h) in top for h in rec.hotwords):
                    hits += 1
            vals.append(hits / total if total else 0.0)
        out.append((size, float(np.mean(vals))))
    return out


def curve_tsv(curve: Sequence[Tuple[int, float]]) -> str:
    lines = ["bank_size\trecall"]
    for size, val in curve:
        lines.append(f"{size}\t{val:.6f}")
    return "\n".join(lines) + "\n"


def load_eval_records(path) -> List[EvalRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            records.append(
                EvalRecord(obj["reference"], obj.get("hypothesis", ""), list(obj.get("hotwords", [])))
            )
    return records
