"""Phonetic hotword ranking for speech-recognition post-processing.

Given a transcript and a large hotword list, rank the hotwords by
pronunciation similarity: text is converted to phonemes, a cosine
similarity matrix between phoneme embeddings is scored by a small CNN,
and the top-N candidates are returned for downstream biasing.
"""

__version__ = "0.1.0"

from .bank import HotwordBank, HotwordEntry, build_bank, load_bank, save_bank
from .canvas import SimilarityCanvas, cosine_matrix, diagonal_contrast, export_heatmap, to_canvas
from .embeddings import EmbeddingTable, embed_sequence, init_embedding_table
from .estimator import PhoneticHotwordRanker
from .frontend import (
    Lexicon, Phoneme, PhonemeSequence, Token, TokenKind,
    demo_lexicon_path, load_lexicon, normalize_text, split_pinyin, to_phonemes, tokenize_mixed,
)
from .metrics import EvalRecord, MetricsReport, edit_distance, evaluate_sweep, mer, post_metrics, prrr, scaling_curve
from .mining import TrainConfig, TrainingPair, augment_positives, build_initial_pairs, mine_negatives, train
from .retriever import RetrievalResult, format_prompt, retrieve_baseline_edit, retrieve_topn
from .scorer import (
    OptimizerState, ScoredPair, ScorerModel, adamw_step, forward, init_model,
    load_model, loss_and_grads, save_model, score_pair,
)
from .simulate import CorpusRecord, load_corpus, make_corpus, make_distractors, make_hotword_pool, save_corpus, simulate_asr_errors
from .vocab import PAD_ID, PAD_SYMBOL, PhonemeVocab, build_vocab
