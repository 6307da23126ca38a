"""Top-N retrieval, the edit-distance baseline, and prompt formatting."""

import numpy as np
import pytest

from hotword_ranker import build_bank, format_prompt, retrieve_baseline_edit, retrieve_topn
from hotword_ranker.retriever import RetrievalResult, _rank
from hotword_ranker.scorer import ScoredPair


class TestRank:
    def test_ordering(self):
        ranked = _rank(np.array([0.9, 0.1]), n=1)
        assert [p.hotword_id for p in ranked] == [0]

    def test_n_beyond_bank_returns_all_sorted(self):
        ranked = _rank(np.array([0.2, 0.9, 0.5]), n=10)
        assert [p.hotword_id for p in ranked] == [1, 2, 0]

    def test_ties_break_by_id(self):
        ranked = _rank(np.array([0.5, 0.5, 0.5]), n=3)
        assert [p.hotword_id for p in ranked] == [0, 1, 2]


class TestRetrieveTopn:
    def test_topn_lists_nest(self, tiny_pipeline, lexicon, vocab):
        model, bank = tiny_pipeline["model"], tiny_pipeline["bank"]
        text = tiny_pipeline["records"][0].hypothesis
        by_n = {
            n: retrieve_topn(model, bank, vocab, lexicon, text, n).surfaces(bank)
            for n in (1, 3, 10)
        }
        assert by_n[3][:1] == by_n[1]
        assert by_n[10][:3] == by_n[3]

    def test_thread_count_invariance(self, tiny_pipeline, lexicon, vocab):
        model, bank = tiny_pipeline["model"], tiny_pipeline["bank"]
        text = tiny_pipeline["records"][1].hypothesis
        one = retrieve_topn(model, bank, vocab, lexicon, text, 10, threads=1)
        eight = retrieve_topn(model, bank, vocab, lexicon, text, 10, threads=8)
        assert [(p.hotword_id, p.score) for p in one.ranked] == [
            (p.hotword_id, p.score) for p in eight.ranked
        ]

    def test_unconvertible_text_flagged(self, tiny_pipeline, lexicon, vocab):
        result = retrieve_topn(
            tiny_pipeline["model"], tiny_pipeline["bank"], vocab, lexicon, "2024", 5
        )
        assert result.no_phonemes
        assert result.ranked == []

    def test_invalid_n(self, tiny_pipeline, lexicon, vocab):
        with pytest.raises(ValueError):
            retrieve_topn(
                tiny_pipeline["model"], tiny_pipeline["bank"], vocab, lexicon, "北京", 0
            )


class TestBaseline:
    def test_exact_window(self, lexicon, vocab):
        bank = build_bank(["北京"], lexicon, vocab)
        result = retrieve_baseline_edit(bank, "我爱北京", 1)
        assert result.ranked[0].score == pytest.approx(1.0)

    def test_one_substitution_over_length_two(self, lexicon, vocab):
        bank = build_bank(["北京"], lexicon, vocab)
        result = retrieve_baseline_edit(bank, "我爱南京", 1)
        assert result.ranked[0].score == pytest.approx(0.5)

    def test_scores_clamped_to_unit_interval(self, lexicon, vocab):
        bank = build_bank(["北京欢迎你"], lexicon, vocab)
        result = retrieve_baseline_edit(bank, "安", 1)
        assert 0.0 <= result.ranked[0].score <= 1.0


class TestFormatPrompt:
    @staticmethod
    def rigged_result(bank):
        ranked = [ScoredPair(e.id, 1.0) for e in bank.entries]
        return RetrievalResult("", ranked, len(ranked))

    def test_speech_style_exact(self, lexicon, vocab):
        bank = build_bank(["实体1", "实体2", "实体3"], lexicon, vocab)
        prompt = format_prompt(self.rigged_result(bank), bank, "whisper")
        assert prompt == "今天演讲的主题是这个呃，实体1、实体2、实体3。好，那我就继续讲。"

    def test_instruct_style_contains_list_and_format_clause(self, lexicon, vocab):
        bank = build_bank(["实体1"], lexicon, vocab)
        prompt = format_prompt(self.rigged_result(bank), bank, "instruct")
        assert "[实体1]" in prompt
        assert "热词列表" in prompt
        assert prompt.endswith("请严格按照以下格式输出：{“音频内容”: 语音识别结果}")

    def test_instruct_style_empty_list(self, lexicon, vocab):
        bank = build_bank(["实体1"], lexicon, vocab)
        empty = RetrievalResult("", [], 0)
        assert "[]" in format_prompt(empty, bank, "instruct")

    def test_unknown_style_raises(self, lexicon, vocab):
        bank = build_bank(["实体1"], lexicon, vocab)
        with pytest.raises(ValueError):
            format_prompt(self.rigged_result(bank), bank, "other")
