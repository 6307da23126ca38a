"""Hotword bank construction and binary serialization."""

import time

import pytest

from hotword_ranker import build_bank, build_vocab, load_bank, make_hotword_pool, save_bank
from hotword_ranker.errors import CorruptBank, EmptyBank, VocabMismatch
from hotword_ranker.frontend import Lexicon


def test_two_entries_dense_ids(lexicon, vocab):
    bank = build_bank(["北京", "上海"], lexicon, vocab)
    assert len(bank) == 2
    assert [e.id for e in bank.entries] == [0, 1]
    assert bank.surfaces() == ["北京", "上海"]


def test_duplicates_keep_first(lexicon, vocab):
    bank = build_bank(["北京", "北京"], lexicon, vocab)
    assert len(bank) == 1


def test_normalization_dedupes(lexicon, vocab):
    bank = build_bank(["ABC", "abc "], lexicon, vocab)
    assert len(bank) == 1
    assert bank.surfaces() == ["abc"]


def test_empty_input_raises(lexicon, vocab):
    with pytest.raises(EmptyBank):
        build_bank([], lexicon, vocab)


def test_large_bank_builds_quickly(lexicon, vocab):
    words = make_hotword_pool(lexicon, n=3800, seed=11)
    start = time.perf_counter()
    bank = build_bank(words, lexicon, vocab)
    elapsed = time.perf_counter() - start
    assert len(bank) == 3800
    assert elapsed < 1.0


def test_long_hotword_truncated(lexicon, vocab):
    bank = build_bank(["北京" * 20], lexicon, vocab, max_phonemes=8)
    assert len(bank.entries[0].phoneme_ids) == 8


def test_round_trip(lexicon, vocab):
    bank = build_bank(["北京", "上海"], lexicon, vocab)
    loaded = load_bank(save_bank(bank), vocab)
    assert loaded.surfaces() == bank.surfaces()
    assert [list(e.phoneme_ids) for e in loaded.entries] == [
        list(e.phoneme_ids) for e in bank.entries
    ]


def test_save_is_deterministic(lexicon, vocab):
    bank = build_bank(["北京", "上海"], lexicon, vocab)
    assert save_bank(bank) == save_bank(bank)


def test_truncated_stream(lexicon, vocab):
    data = save_bank(build_bank(["北京", "上海"], lexicon, vocab))
    with pytest.raises(CorruptBank):
        load_bank(data[: len(data) // 2], vocab)


def test_flipped_byte(lexicon, vocab):
    data = bytearray(save_bank(build_bank(["北京", "上海"], lexicon, vocab)))
    data[-1] ^= 0xFF
    with pytest.raises(CorruptBank):
        load_bank(bytes(data), vocab)


def test_bad_magic(lexicon, vocab):
    data = save_bank(build_bank(["北京"], lexicon, vocab))
    with pytest.raises(CorruptBank):
        load_bank(b"XXXX" + data[4:], vocab)


def test_vocab_mismatch(lexicon, vocab):
    data = save_bank(build_bank(["北京"], lexicon, vocab))
    other = build_vocab(Lexicon({}, {}, {}))
    with pytest.raises(VocabMismatch):
        load_bank(data, other)
