"""Text normalization and grapheme-to-phoneme conversion.

Mixed Chinese/English text is normalized, tokenized (one token per Han
character, one per Latin word), and converted to a phoneme sequence via a
lexicon: Han characters map to tone-stripped pinyin syllables split into
initial/final, Latin words map to phone lists with a per-letter fallback
for out-of-vocabulary words.
"""

from __future__ import annotations

import importlib.resources
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Tuple

from .errors import EmptyPhonemeSequence, IllegalSyllable

# Standard 23 pinyin initials (zh/ch/sh/y/w included), longest first so a
# greedy prefix match prefers two-letter initials.
PINYIN_INITIALS = [
    "zh", "ch", "sh",
    "b", "p", "m", "f", "d", "t", "n", "l", "g", "k", "h",
    "j", "q", "x", "r", "z", "c", "s", "y", "w",
]

PINYIN_FINALS = {
    "a", "o", "e", "i", "u", "v", "ai", "ei", "ui", "ao", "ou", "iu",
    "ie", "ue", "ve", "er", "an", "en", "in", "un", "vn", "ang", "eng",
    "ing", "ong", "ia", "iao", "ian", "iang", "iong", "ua", "uo", "uai",
    "uan", "uang", "ueng", "van",
}

_CJK_RANGES = (
    (0x4E00, 0x9FFF),    # CJK Unified Ideographs
    (0x3400, 0x4DBF),    # Extension A
    (0xF900, 0xFAFF),    # Compatibility Ideographs
)

_LATIN_RUN = re.compile(r"[a-z']+")


class TokenKind(Enum):
    HAN_CHAR = "han"
    LATIN_WORD = "latin"
    DIGIT = "digit"
    OTHER = "other"


@dataclass(frozen=True)
class Token:
    surface: str
    kind: TokenKind


@dataclass(frozen=True)
class Phoneme:
    symbol: str
    lang: str  # "zh" or "en"


@dataclass
class PhonemeSequence:
    phonemes: List[Phoneme]
    source_token_spans: List[int]  # per-phoneme index of the source token

    def __len__(self) -> int:
        return len(self.phonemes)

    def symbols(self) -> List[str]:
        return [p.symbol for p in self.phonemes]


def is_han(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def normalize_text(raw: str) -> str:
    """Fold full-width forms, lowercase Latin, collapse separators."""
    folded = []
    for ch in raw:
        # NFKC folds full-width Latin/digits/punctuation to half-width.
        ch = unicodedata.normalize("NFKC", ch)
        folded.append(ch)
    text = "".join(folded).lower()
    out = []
    prev_sep = True
    for ch in text:
        if is_han(ch) or ch.isalnum() or ch == "'":
            out.append(ch)
            prev_sep = False
        else:
            if not prev_sep:
                out.append(" ")
            prev_sep = True
    return "".join(out).rstrip()


def tokenize_mixed(text: str) -> List[Token]:
    """One token per Han character, one per maximal Latin run or digit run."""
    tokens: List[Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if is_han(ch):
            tokens.append(Token(ch, TokenKind.HAN_CHAR))
            i += 1
        elif ch.isalpha() or ch == "'":
            j = i
            while j < n and (text[j].isalpha() or text[j] == "'") and not is_han(text[j]):
                j += 1
            tokens.append(Token(text[i:j], TokenKind.LATIN_WORD))
            i = j
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token(text[i:j], TokenKind.DIGIT))
            i = j
        elif ch == " ":
            i += 1
        else:
            tokens.append(Token(ch, TokenKind.OTHER))
            i += 1
    return tokens


def split_pinyin(syllable: str) -> Tuple[str, str]:
    """Split a tone-stripped syllable into (initial, final).

    The initial is the longest prefix from the 23-initial inventory;
    zero-initial syllables return an empty initial.
    """
    for ini in PINYIN_INITIALS:
        if syllable.startswith(ini):
            final = syllable[len(ini):]
            if final in PINYIN_FINALS:
                return ini, final
            break
    if syllable in PINYIN_FINALS:
        return "", syllable
    raise IllegalSyllable(f"not a pinyin syllable: {syllable!r}")


@dataclass
class Lexicon:
    """Immutable after load; all lookups are pure."""

    zh_map: Dict[str, str] = field(default_factory=dict)       # char -> syllable
    en_map: Dict[str, List[str]] = field(default_factory=dict)  # word -> phones
    confusions: Dict[str, List[Tuple[str, float]]] = field(default_factory=dict)
    _homophones: Dict[str, List[str]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._homophones = {}
        for ch, syl in self.zh_map.items():
            self._homophones.setdefault(syl, []).append(ch)

    def homophones(self, char: str) -> List[str]:
        """Other characters sharing this character's syllable."""
        syl = self.zh_map.get(char)
        if syl is None:
            return []
        return [c for c in self._homophones.get(syl, []) if c != char]

    def chars_for_syllable(self, syllable: str) -> List[str]:
        return list(self._homophones.get(syllable, []))

    def syllables(self) -> List[str]:
        return sorted(self._homophones)


def load_lexicon(path) -> Lexicon:
    """Parse the TSV lexicon format (zh/en/conf lines, # comments)."""
    zh_map: Dict[str, str] = {}
    en_map: Dict[str, List[str]] = {}
    confusions: Dict[str, List[Tuple[str, float]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            kind, key, value = parts
            if kind == "zh":
                split_pinyin(value)  # validate eagerly
                zh_map.setdefault(key, value)  # first entry wins
            elif kind == "en":
                en_map.setdefault(key.lower(), value.split())
            elif kind == "conf":
                weighted = []
                for item in value.split(","):
                    sym, w = item.split(":")
                    weighted.append((sym, float(w)))
                total = sum(w for _, w in weighted)
                if total <= 0:
                    raise ValueError(f"{path}:{lineno}: non-positive confusion weights")
                confusions[key] = [(s, w / total) for s, w in weighted]
            else:
                raise ValueError(f"{path}:{lineno}: unknown record kind {kind!r}")
    return Lexicon(zh_map=zh_map, en_map=en_map, confusions=confusions)


def demo_lexicon_path() -> str:
    """Path of the bundled demo lexicon."""
    ref = importlib.resources.files("hotword_ranker.data") / "demo_lexicon.tsv"
    return str(ref)


def to_phonemes(text: str, lexicon: Lexicon) -> PhonemeSequence:
    """Convert normalized text to phonemes; Digit/Other tokens are skipped."""
    phonemes: List[Phoneme] = []
    spans: List[int] = []
    for tok_idx, tok in enumerate(tokenize_mixed(text)):
        if tok.kind is TokenKind.HAN_CHAR:
            syl = lexicon.zh_map.get(tok.surface)
            if syl is None:
                continue
            initial, final = split_pinyin(syl)
            if initial:
                phonemes.append(Phoneme(initial, "zh"))
                spans.append(tok_idx)
            phonemes.append(Phoneme(final, "zh"))
            spans.append(tok_idx)
        elif tok.kind is TokenKind.LATIN_WORD:
            phones = lexicon.en_map.get(tok.surface)
            if phones is None:
                # per-letter fallback keeps the pipeline total
                phones = [c for c in tok.surface if c.isalpha()]
            for ph in phones:
                phonemes.append(Phoneme(ph, "en"))
                spans.append(tok_idx)
    if not phonemes:
        raise EmptyPhonemeSequence(f"no convertible tokens in {text!r}")
    return PhonemeSequence(phonemes, spans)
