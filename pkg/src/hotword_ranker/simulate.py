"""Synthetic recognition-error simulation and desk-scale corpus generation.

Character-level edits mimic common recognition mistakes: substitutions are
homophone-biased (same syllable, different character), with occasional
random substitutions, deletions and insertions. A rejection loop keeps the
realized error rate of each hypothesis inside a target band.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import TargetUnreachable
from .frontend import Lexicon, Token, TokenKind, normalize_text, split_pinyin, to_phonemes, tokenize_mixed
from .metrics import mer

log = logging.getLogger(__name__)

HOMOPHONE_SUB_PROB = 0.7   # substitution draws a homophone this often
SUB_PROB, DEL_PROB, INS_PROB = 0.8, 0.1, 0.1
MAX_ATTEMPTS = 200


@dataclass
class CorpusRecord:
    reference: str
    hotwords: List[str]
    hypothesis: str = ""
    mer: float = -1.0


def _join_tokens(tokens: Sequence[Token]) -> str:
    out: List[str] = []
    prev_kind = None
    for tok in tokens:
        if out and prev_kind in (TokenKind.LATIN_WORD, TokenKind.DIGIT) and tok.kind in (
            TokenKind.LATIN_WORD, TokenKind.DIGIT
        ):
            out.append(" ")
        out.append(tok.surface)
        prev_kind = tok.kind
    return "".join(out)


def _char_pool(lexicon: Lexicon) -> List[str]:
    return list(lexicon.zh_map)


def _substitute(tok: Token, lexicon: Lexicon, pool: List[str], rng: np.random.Generator) -> Token:
    if tok.kind is TokenKind.HAN_CHAR:
        homos = lexicon.homophones(tok.surface)
        if homos and rng.random() < HOMOPHONE_SUB_PROB:
            return Token(homos[rng.integers(len(homos))], TokenKind.HAN_CHAR)
        for _ in range(8):
            ch = pool[rng.integers(len(pool))]
            if ch != tok.surface:
                return Token(ch, TokenKind.HAN_CHAR)
        return tok
    if tok.kind is TokenKind.LATIN_WORD and tok.surface:
        chars = list(tok.surface)
        i = rng.integers(len(chars))
        chars[i] = chr(ord("a") + rng.integers(26))
        return Token("".join(chars), TokenKind.LATIN_WORD)
    return tok


def simulate_asr_errors(
    reference: str,
    lexicon: Lexicon,
    target_mer_range: Tuple[float, float],
    seed: int,
) -> Tuple[str, float]:
    """Apply character-level edits until the realized error rate lands in
    the target band; deterministic for a given seed."""
    lo, hi = target_mer_range
    if not (0 <= lo < hi <= 1):
        raise ValueError(f"invalid target band [{lo}, {hi}]")
    norm_ref = normalize_text(reference)
    tokens = tokenize_mixed(norm_ref)
    if not tokens:
        raise TargetUnreachable(f"reference {reference!r} has no tokens")
    rng = np.random.default_rng(seed)
    pool = _char_pool(lexicon)
    n = len(tokens)
    escalation = 0
    for _ in range(MAX_ATTEMPTS):
        rate = rng.uniform(lo, hi)
        n_edits = max(1, round(rate * n) + escalation)
        n_edits = min(n_edits, n)
        positions = sorted(rng.choice(n, size=n_edits, replace=False), reverse=True)
        edited = list(tokens)
        for pos in positions:
            roll = rng.random()
            if roll < SUB_PROB:
                edited[pos] = _substitute(edited[pos], lexicon, pool, rng)
            elif roll < SUB_PROB + DEL_PROB:
                del edited[pos]
            else:
                ins = Token(pool[rng.integers(len(pool))], TokenKind.HAN_CHAR)
                edited.insert(pos, ins)
        hypothesis = _join_tokens(edited)
        realized = mer(norm_ref, hypothesis)
        if lo <= realized <= hi:
            return hypothesis, realized
        escalation += 1 if realized < lo else -1
    raise TargetUnreachable(
        f"could not realize an error rate in [{lo}, {hi}] for {reference!r}"
    )


# ---------------------------------------------------------------------------
# corpus generation


def make_hotword_pool(
    lexicon: Lexicon,
    n: int,
    seed: int,
    min_len: int = 2,
    max_len: int = 4,
    char_pool_size: int = 400,
) -> List[str]:
    """Unique hotwords drawn from a restricted character pool, so distinct
    hotwords frequently share characters (as real entity lists do)."""
    rng = np.random.default_rng(seed)
    chars = _char_pool(lexicon)[:char_pool_size]
    out: List[str] = []
    seen: Set[str] = set()
    attempts = 0
    while len(out) < n and attempts < 50 * n:
        attempts += 1
        length = int(rng.integers(min_len, max_len + 1))
        word = "".join(chars[rng.integers(len(chars))] for _ in range(length))
        if word not in seen:
            seen.add(word)
            out.append(word)
    if len(out) < n:
        raise ValueError(f"could only generate {len(out)} of {n} unique hotwords")
    return out


def make_distractors(
    lexicon: Lexicon,
    gt_hotwords: Sequence[str],
    n: int,
    seed: int,
    vocab=None,
    char_pool_size: int = 400,
) -> List[str]:
    """Distractors: half fresh words, half single-character mutations of the
    ground-truth list (sharing characters makes them genuinely confusable).
    Mutations that would be homophones of their source are rejected, as are
    exact ground-truth surfaces."""
    rng = np.random.default_rng(seed)
    chars = _char_pool(lexicon)[:char_pool_size]
    gt_set = {normalize_text(w) for w in gt_hotwords}
    gt_phonemes: Set[tuple] = set()
    if vocab is not None:
        for w in gt_set:
            try:
                gt_phonemes.add(tuple(vocab.encode(to_phonemes(w, lexicon))))
            except Exception:
                pass
    out: List[str] = []
    seen = set(gt_set)
    attempts = 0
    while len(out) < n and attempts < 100 * n:
        attempts += 1
        if rng.random() < 0.5 or not gt_hotwords:
            length = int(rng.integers(2, 5))
            word = "".join(chars[rng.integers(len(chars))] for _ in range(length))
        else:
            src = normalize_text(gt_hotwords[rng.integers(len(gt_hotwords))])
            pos = int(rng.integers(len(src)))
            old = src[pos]
            repl = chars[rng.integers(len(chars))]
            if lexicon.zh_map.get(repl) == lexicon.zh_map.get(old):
                continue
            word = src[:pos] + repl + src[pos + 1:]
        if word in seen:
            continue
        if vocab is not None:
            try:
                ids = tuple(vocab.encode(to_phonemes(word, lexicon)))
            except Exception:
                continue
            if ids in gt_phonemes:
                continue
        seen.add(word)
        out.append(word)
    if len(out) < n:
        raise ValueError(f"could only generate {len(out)} of {n} distractors")
    return out


def make_corpus(
    hotwords: Sequence[str],
    n_records: int,
    lexicon: Lexicon,
    seed: int,
    mer_band: Tuple[float, float] = (0.02, 0.20),
    two_hotword_frac: float = 0.1,
    filler_range: Tuple[int, int] = (2, 6),
    char_pool_size: int = 400,
) -> List[CorpusRecord]:
    """Carrier sentences templated around hotwords, with simulated noisy
    hypotheses in the target error band."""
    rng = np.random.default_rng(seed)
    chars = _char_pool(lexicon)[:char_pool_size]
    lo_f, hi_f = filler_range

    def filler() -> str:
        k = int(rng.integers(lo_f, hi_f + 1))
        return "".join(chars[rng.integers(len(chars))] for _ in range(k))

    records: List[CorpusRecord] = []
    order = rng.permutation(len(hotwords))
    i = 0
    while len(records) < n_records:
        hws = [normalize_text(hotwords[order[i % len(hotwords)]])]
        i += 1
        if rng.random() < two_hotword_frac:
            other = normalize_text(hotwords[order[i % len(hotwords)]])
            i += 1
            if other not in hws:
                hws.append(other)
        parts = [filler()]
        for hw in hws:
            parts.append(hw)
            parts.append(filler())
        reference = "".join(parts)
        try:
            hypothesis, realized = simulate_asr_errors(
                reference, lexicon, mer_band, seed=int(rng.integers(2**31))
            )
        except TargetUnreachable:
            continue
        records.append(CorpusRecord(reference, hws, hypothesis, realized))
    return records


# ---------------------------------------------------------------------------
# JSONL round-trip


def save_corpus(records: Sequence[CorpusRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {"reference": rec.reference, "hotwords": rec.hotwords}
            if rec.hypothesis:
                obj["hypothesis"] = rec.hypothesis
            if rec.mer >= 0:
                obj["mer"] = round(rec.mer, 6)
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def load_corpus(path) -> List[CorpusRecord]:
    records: List[CorpusRecord] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            records.append(
                CorpusRecord(
                    obj["reference"],
                    list(obj.get("hotwords", [])),
                    obj.get("hypothesis", ""),
                    float(obj.get("mer", -1.0)),
                )
            )
    return records
