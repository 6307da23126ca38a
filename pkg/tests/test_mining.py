"""Error simulation, training-pair construction, and the epoch schedule."""

import numpy as np
import pytest

from hotword_ranker import build_bank, mer
from hotword_ranker.errors import TargetUnreachable
from hotword_ranker.mining import (
    STAGE_AUGMENTED,
    STAGE_INITIAL,
    STAGE_MINED,
    TrainConfig,
    augment_positives,
    build_initial_pairs,
    mine_negatives,
)
from hotword_ranker.scorer import init_model
from hotword_ranker.simulate import CorpusRecord, make_corpus, make_distractors, make_hotword_pool, simulate_asr_errors


class TestSimulateErrors:
    def test_full_range_returns_quickly(self, lexicon):
        hyp, realized = simulate_asr_errors("北京欢迎你", lexicon, (0.0, 1.0), seed=0)
        assert 0.0 <= realized <= 1.0
        assert mer("北京欢迎你", hyp) == pytest.approx(realized)

    def test_five_tokens_narrow_band_forces_single_edit(self, lexicon):
        hyp, realized = simulate_asr_errors("北京欢迎你", lexicon, (0.02, 0.20), seed=1)
        assert realized == pytest.approx(0.2)
        assert mer("北京欢迎你", hyp) == pytest.approx(0.2)

    def test_seed_determinism(self, lexicon):
        a = simulate_asr_errors("北京欢迎你来上海", lexicon, (0.02, 0.20), seed=7)
        b = simulate_asr_errors("北京欢迎你来上海", lexicon, (0.02, 0.20), seed=7)
        assert a == b

    def test_different_seeds_usually_differ(self, lexicon):
        hyps = {
            simulate_asr_errors("北京欢迎你来上海", lexicon, (0.0, 1.0), seed=s)[0]
            for s in range(8)
        }
        assert len(hyps) > 1

    def test_empty_reference_raises(self, lexicon):
        with pytest.raises(TargetUnreachable):
            simulate_asr_errors("", lexicon, (0.02, 0.20), seed=0)

    def test_invalid_band_raises(self, lexicon):
        with pytest.raises(ValueError):
            simulate_asr_errors("北京", lexicon, (0.3, 0.1), seed=0)


class TestCorpusGeneration:
    def test_records_have_in_band_hypotheses(self, lexicon):
        pool = make_hotword_pool(lexicon, n=10, seed=3)
        records = make_corpus(pool, 20, lexicon, seed=3)
        assert len(records) == 20
        for rec in records:
            assert rec.hotwords
            assert all(h in rec.reference for h in rec.hotwords)
            assert 0.02 <= rec.mer <= 0.20

    def test_pool_is_unique(self, lexicon):
        pool = make_hotword_pool(lexicon, n=50, seed=3)
        assert len(set(pool)) == 50

    def test_distractors_avoid_ground_truth(self, lexicon, vocab):
        pool = make_hotword_pool(lexicon, n=20, seed=3)
        distractors = make_distractors(lexicon, pool, n=20, seed=3, vocab=vocab)
        assert len(distractors) == 20
        assert not set(distractors) & set(pool)


class TestInitialPairs:
    def test_one_positive_k_negatives(self, lexicon, vocab):
        bank = build_bank(["北京", "上海", "欢迎", "安好"], lexicon, vocab)
        rec = CorpusRecord("我爱北京", ["北京"], "我爱南京", mer=0.1)
        pairs = build_initial_pairs([rec], bank, negatives_per_positive=3)
        assert len(pairs) == 4
        assert sum(p.label for p in pairs) == 1
        assert all(p.stage == STAGE_INITIAL for p in pairs)
        positive = next(p for p in pairs if p.label == 1)
        assert positive.hotword_surface == "北京"
        for p in pairs:
            if p.label == 0:
                assert p.hotword_surface != "北京"

    def test_out_of_band_record_excluded(self, lexicon, vocab):
        bank = build_bank(["北京", "上海"], lexicon, vocab)
        rec = CorpusRecord("我爱北京", ["北京"], "我恨南京", mer=0.25)
        assert build_initial_pairs([rec], bank) == []

    def test_empty_corpus(self, lexicon, vocab):
        bank = build_bank(["北京"], lexicon, vocab)
        assert build_initial_pairs([], bank) == []


class TestMineNegatives:
    def test_negatives_come_from_wrong_top_ranks(self, lexicon, vocab, tiny_pipeline):
        model = tiny_pipeline["model"]
        bank = tiny_pipeline["bank"]
        records = tiny_pipeline["records"][:10]
        pairs = mine_negatives(model, bank, vocab, lexicon, records)
        assert pairs
        for p in pairs:
            assert p.label == 0
            assert p.stage == STAGE_MINED
            rec = next(r for r in records if r.hypothesis == p.text)
            assert p.hotword_surface not in rec.hotwords

    def test_bank_of_only_ground_truth_yields_nothing(self, lexicon, vocab):
        bank = build_bank(["北京"], lexicon, vocab)
        model = init_model(len(vocab), seed=0, canvas_rows=12, canvas_cols=48)
        rec = CorpusRecord("我爱北京", ["北京"], "我爱南京", mer=0.1)
        assert mine_negatives(model, bank, vocab, lexicon, [rec]) == []


class TestAugmentPositives:
    def test_variant_pairs_with_clean_reference(self, lexicon):
        rec = CorpusRecord("我爱北京", ["北京"], "我爱南京", mer=0.1)
        pairs = augment_positives([rec], lexicon, seed=0, per_hotword=2)
        assert pairs
        for p in pairs:
            assert p.label == 1
            assert p.stage == STAGE_AUGMENTED
            assert p.text == "我爱北京"
            assert p.hotword_surface != "北京"
            assert len(p.hotword_surface) == 2

    def test_single_char_hotword_skipped(self, lexicon):
        rec = CorpusRecord("我在京", ["京"], "我在经", mer=0.2)
        assert augment_positives([rec], lexicon, seed=0) == []

    def test_count_bounded(self, lexicon):
        pool = make_hotword_pool(lexicon, n=10, seed=2)
        records = [
            CorpusRecord(f"前面{w}后面", [w], "", mer=0.1) for w in pool
        ]
        pairs = augment_positives(records, lexicon, seed=0, per_hotword=2)
        assert len(pairs) <= 20


class TestEpochSchedule:
    def test_default_split(self):
        config = TrainConfig(epochs=50, mining_rounds=3)
        schedule = config.epoch_schedule()
        assert schedule == [20, 15, 15]
        assert sum(schedule) == 50

    def test_nine_epochs_three_rounds(self):
        assert TrainConfig(epochs=9, mining_rounds=3).epoch_schedule() == [3, 3, 3]

    def test_single_round_gets_everything(self):
        assert TrainConfig(epochs=7, mining_rounds=1).epoch_schedule() == [7]

    def test_schedule_always_sums_to_epochs(self):
        for epochs in range(1, 20):
            for rounds in range(1, 5):
                schedule = TrainConfig(epochs=epochs, mining_rounds=rounds).epoch_schedule()
                assert sum(schedule) == epochs
                assert len(schedule) == rounds
                assert all(e >= 0 for e in schedule)
