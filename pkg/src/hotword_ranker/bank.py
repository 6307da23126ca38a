"""The hotword feature bank: indexed phoneme-id sequences for every hotword,
with a deterministic binary serialization."""

from __future__ import annotations

import logging
import struct
import zlib
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .errors import CorruptBank, EmptyBank, EmptyPhonemeSequence, VocabMismatch
from .frontend import Lexicon, normalize_text, to_phonemes
from .vocab import PhonemeVocab

log = logging.getLogger(__name__)

MAGIC = b"HWRK"
FORMAT_VERSION = 1

# Maximum phonemes per hotword; equals the canvas row count.
DEFAULT_MAX_PHONEMES = 24


@dataclass(frozen=True)
class HotwordEntry:
    id: int
    surface: str
    phoneme_ids: List[int]


@dataclass
class HotwordBank:
    vocab_hash: bytes
    entries: List[HotwordEntry]
    surface_index: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.surface_index:
            self.surface_index = {e.surface: e.id for e in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def surfaces(self) -> List[str]:
        return [e.surface for e in self.entries]


def build_bank(
    hotwords: Sequence[str],
    lexicon: Lexicon,
    vocab: PhonemeVocab,
    max_phonemes: int = DEFAULT_MAX_PHONEMES,
) -> HotwordBank:
    """Normalize, convert, truncate and dedupe; ids are dense in input order."""
    entries: List[HotwordEntry] = []
    seen: Dict[str, int] = {}
    for word in hotwords:
        surface = normalize_text(word)
        if not surface or surface in seen:
            continue
        try:
            seq = to_phonemes(surface, lexicon)
        except EmptyPhonemeSequence:
            log.warning("hotword %r has no convertible tokens; skipped", word)
            continue
        ids = vocab.encode(seq)
        if len(ids) > max_phonemes:
            log.warning("hotword %r truncated to %d phonemes", word, max_phonemes)
            ids = ids[:max_phonemes]
        seen[surface] = len(entries)
        entries.append(HotwordEntry(len(entries), surface, ids))
    if not entries:
        raise EmptyBank("no hotword survived phoneme conversion")
    return HotwordBank(vocab.content_hash(), entries)


def save_bank(bank: HotwordBank) -> bytes:
    parts = [MAGIC, struct.pack("<H", FORMAT_VERSION), bank.vocab_hash,
             struct.pack("<I", len(bank.entries))]
    for e in bank.entries:
        raw = e.surface.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
        parts.append(struct.pack("<H", len(e.phoneme_ids)))
        parts.append(struct.pack(f"<{len(e.phoneme_ids)}H", *e.phoneme_ids))
    payload = b"".join(parts)
    return payload + struct.pack("<I", zlib.crc32(payload))


def load_bank(data: bytes, vocab: Optional[PhonemeVocab] = None) -> HotwordBank:
    """Inverse of save_bank; rejects corrupt streams and, when a vocab is
    supplied, banks built against a different vocabulary."""
    if len(data) < len(MAGIC) + 2 + 32 + 4 + 4:
        raise CorruptBank("truncated bank stream")
    if data[:4] != MAGIC:
        raise CorruptBank("bad magic")
    payload, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(payload) != crc:
        raise CorruptBank("checksum mismatch")
    off = 4
    (version,) = struct.unpack_from("<H", payload, off)
    off += 2
    if version != FORMAT_VERSION:
        raise CorruptBank(f"unsupported bank version {version}")
    vocab_hash = payload[off:off + 32]
    off += 32
    if vocab is not None and vocab.content_hash() != vocab_hash:
        raise VocabMismatch("bank was built against a different phoneme vocabulary")
    (count,) = struct.unpack_from("<I", payload, off)
    off += 4
    entries: List[HotwordEntry] = []
    try:
        for i in range(count):
            (slen,) = struct.unpack_from("<I", payload, off)
            off += 4
            surface = payload[off:off + slen].decode("utf-8")
            off += slen
            (n,) = struct.unpack_from("<H", payload, off)
            off += 2
            ids = list(struct.unpack_from(f"<{n}H", payload, off))
            off += 2 * n
            entries.append(HotwordEntry(i, surface, ids))
    except (struct.error, UnicodeDecodeError) as exc:
        raise CorruptBank(f"malformed entry table: {exc}") from exc
    if off != len(payload):
        raise CorruptBank("trailing bytes after entry table")
    return HotwordBank(vocab_hash, entries)
