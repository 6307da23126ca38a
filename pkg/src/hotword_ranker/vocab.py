"""Phoneme vocabulary: stable symbol <-> id mapping with a reserved PAD id."""

from __future__ import annotations

import hashlib
import string
from dataclasses import dataclass
from typing import Dict, List

from .errors import UnknownPhoneme
from .frontend import Lexicon, PhonemeSequence, split_pinyin

PAD_SYMBOL = "<pad>"
PAD_ID = 0


@dataclass(frozen=True)
class PhonemeVocab:
    symbols: List[str]          # symbols[0] == PAD_SYMBOL
    index: Dict[str, int]

    def __len__(self) -> int:
        return len(self.symbols)

    def id_of(self, symbol: str) -> int:
        try:
            return self.index[symbol]
        except KeyError:
            raise UnknownPhoneme(f"phoneme {symbol!r} not in vocabulary") from None

    def encode(self, seq: PhonemeSequence) -> List[int]:
        return [self.id_of(p.symbol) for p in seq.phonemes]

    def content_hash(self) -> bytes:
        return hashlib.sha256("\x00".join(self.symbols).encode("utf-8")).digest()


def build_vocab(lexicon: Lexicon) -> PhonemeVocab:
    """Collect every reachable symbol: pinyin initials/finals from zh entries,
    English phones, and the 26 letter-fallback pseudo-phonemes (always present
    so out-of-lexicon Latin words stay encodable)."""
    symbols = set(string.ascii_lowercase)
    for syl in set(lexicon.zh_map.values()):
        initial, final = split_pinyin(syl)
        if initial:
            symbols.add(initial)
        symbols.add(final)
    for phones in lexicon.en_map.values():
        symbols.update(phones)
    for src, targets in lexicon.confusions.items():
        symbols.add(src)
        symbols.update(sym for sym, _ in targets)
    ordered = [PAD_SYMBOL] + sorted(symbols)
    return PhonemeVocab(ordered, {s: i for i, s in enumerate(ordered)})
