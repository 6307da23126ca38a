"""Rank every bank entry against a transcript and keep the top-N.

Scoring is exhaustive over the bank (no pre-filter); ties break by
ascending hotword id so results are stable under shuffling and
parallelism. An edit-distance baseline over surface characters is
provided for comparison experiments, plus the two prompt templates used
to feed retrieved hotwords to downstream recognizers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .bank import HotwordBank
from .errors import EmptyPhonemeSequence
from .frontend import Lexicon, normalize_text, to_phonemes, tokenize_mixed
from .scorer import ScoredPair, ScorerModel, score_id_pairs
from .vocab import PhonemeVocab

WHISPER_TEMPLATE = "今天演讲的主题是这个呃，{hotwords}。好，那我就继续讲。"
INSTRUCT_TEMPLATE = (
    "Audio1 <|BOS|><|AUDIO|><|EOS|>请对上述音频进行中文语音识别，"
    "重点关注热词列表[{hotwords}]，没有发现热词请直接输出完整的音频语音识别结果。"
    "请严格按照以下格式输出：{{“音频内容”: 语音识别结果}}"
)


@dataclass
class RetrievalResult:
    query_text: str
    ranked: List[ScoredPair]
    topn: int
    no_phonemes: bool = False

    def surfaces(self, bank: HotwordBank) -> List[str]:
        return [bank.entries[p.hotword_id].surface for p in self.ranked]


def _rank(scores: np.ndarray, n: int) -> List[ScoredPair]:
    order = np.lexsort((np.arange(len(scores)), -scores))
    return [ScoredPair(int(i), float(scores[i])) for i in order[:n]]


def retrieve_topn(
    model: ScorerModel,
    bank: HotwordBank,
    vocab: PhonemeVocab,
    lexicon: Lexicon,
    asr_text: str,
    n: int,
    threads: int = 1,
) -> RetrievalResult:
    """Score all entries with the CNN and return the top-N."""
    if n < 1:
        raise ValueError("n must be >= 1")
    text = normalize_text(asr_text)
    try:
        text_ids = vocab.encode(to_phonemes(text, lexicon))
    except EmptyPhonemeSequence:
        return RetrievalResult(asr_text, [], n, no_phonemes=True)
    scores = score_bank(model, bank, text_ids, threads=threads)
    return RetrievalResult(asr_text, _rank(scores, n), n)


def score_bank(
    model: ScorerModel, bank: HotwordBank, text_ids: Sequence[int], threads: int = 1
) -> np.ndarray:
    """Score every entry against one encoded transcript."""
    pairs = [(e.phoneme_ids, text_ids) for e in bank.entries]
    return score_id_pairs(model, pairs, threads=threads)


def _window_edit_distance(needle: List[str], haystack: List[str]) -> int:
    """Minimal edit distance between `needle` and any substring of `haystack`."""
    m = len(needle)
    prev = [0] * (len(haystack) + 1)  # free leading skips in the haystack
    for i in range(1, m + 1):
        cur = [i] + [0] * len(haystack)
        for j in range(1, len(haystack) + 1):
            cost = 0 if needle[i - 1] == haystack[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return min(prev)


def retrieve_baseline_edit(
    bank: HotwordBank, asr_text: str, n: int
) -> RetrievalResult:
    """Text-space baseline: 1 - windowed edit distance / hotword length."""
    if n < 1:
        raise ValueError("n must be >= 1")
    text = normalize_text(asr_text)
    text_units = [t.surface for t in tokenize_mixed(text)]
    if not text_units:
        return RetrievalResult(asr_text, [], n, no_phonemes=True)
    scores = np.empty(len(bank), dtype=np.float64)
    for e in bank.entries:
        units = [t.surface for t in tokenize_mixed(e.surface)]
        dist = _window_edit_distance(units, text_units)
        scores[e.id] = max(0.0, min(1.0, 1.0 - dist / max(1, len(units))))
    return RetrievalResult(asr_text, _rank(scores, n), n)


def format_prompt(result: RetrievalResult, bank: HotwordBank, style: str) -> str:
    """Interpolate retrieved surfaces into a downstream prompt template."""
    surfaces = result.surfaces(bank)
    if style == "whisper":
        return WHISPER_TEMPLATE.format(hotwords="、".join(surfaces))
    if style == "instruct":
        return INSTRUCT_TEMPLATE.format(hotwords=", ".join(surfaces))
    raise ValueError(f"unknown prompt style {style!r}")
