"""Command-line interface.

Subcommands: bank, simulate, train, retrieve, evaluate, heatmap.
Exit codes: 0 success, 1 failed acceptance threshold, 2 usage/data error.
Data goes to stdout or files; logs go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from typing import List, Optional

import numpy as np

from . import __version__
from .bank import build_bank, load_bank, save_bank
from .canvas import export_heatmap, to_canvas
from .errors import HotwordRankerError
from .frontend import demo_lexicon_path, load_lexicon, normalize_text, to_phonemes
from .metrics import (
    EvalRecord, curve_tsv, evaluate_sweep, load_eval_records, scaling_curve, sweep_tsv,
)
from .mining import TrainConfig, train
from .retriever import format_prompt, retrieve_topn
from .scorer import load_model, save_model, score_id_pairs
from .simulate import load_corpus, make_corpus, save_corpus, simulate_asr_errors
from .vocab import build_vocab

log = logging.getLogger("hotword_ranker")


def _lexicon_path(args) -> str:
    return args.lexicon or os.environ.get("HOTWORD_LEXICON") or demo_lexicon_path()


def _write_atomic(path: str, data: bytes) -> None:
    """Write via a temp file + rename so interrupts leave no partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_bank(args) -> int:
    lexicon = load_lexicon(_lexicon_path(args))
    vocab = build_vocab(lexicon)
    with open(args.hotwords, encoding="utf-8") as fh:
        words = [ln.strip() for ln in fh if ln.strip()]
    if not words:
        print("error: empty bank (no hotwords in input)", file=sys.stderr)
        return 2
    bank = build_bank(words, lexicon, vocab, max_phonemes=args.canvas_rows)
    _write_atomic(args.out, save_bank(bank))
    log.info("wrote %d-entry bank to %s", len(bank), args.out)
    return 0


def cmd_simulate(args) -> int:
    lexicon = load_lexicon(_lexicon_path(args))
    band = (args.mer_lo, args.mer_hi)
    if args.generate:
        with open(args.hotwords, encoding="utf-8") as fh:
            words = [ln.strip() for ln in fh if ln.strip()]
        records = make_corpus(words, args.generate, lexicon, seed=args.seed, mer_band=band)
    else:
        records = load_corpus(args.corpus)
        out = []
        for i, rec in enumerate(records):
            if not rec.hypothesis:
                rec.hypothesis, rec.mer = simulate_asr_errors(
                    rec.reference, lexicon, band, seed=args.seed + i
                )
            out.append(rec)
        records = out
    save_corpus(records, args.out)
    log.info("wrote %d records to %s", len(records), args.out)
    return 0


def cmd_train(args) -> int:
    lexicon = load_lexicon(_lexicon_path(args))
    vocab = build_vocab(lexicon)
    with open(args.bank, "rb") as fh:
        bank = load_bank(fh.read(), vocab)
    corpus = load_corpus(args.corpus)
    config = TrainConfig(
        epochs=args.epochs, lr=args.lr, batch_size=args.batch_size,
        mining_rounds=args.mining_rounds, seed=args.seed,
        canvas_rows=args.canvas_rows, canvas_cols=args.canvas_cols,
        mining_sample=args.mining_sample, eval_sample=args.eval_sample,
        threads=args.threads,
    )
    model, report = train(corpus, bank, vocab, lexicon, config)
    _write_atomic(args.out, save_model(model))
    if args.report:
        _write_atomic(args.report, report.to_json().encode("utf-8"))
    log.info("wrote model to %s", args.out)
    return 0


def cmd_retrieve(args) -> int:
    lexicon = load_lexicon(_lexicon_path(args))
    vocab = build_vocab(lexicon)
    with open(args.model, "rb") as fh:
        model = load_model(fh.read())
    with open(args.bank, "rb") as fh:
        bank = load_bank(fh.read(), vocab)
    result = retrieve_topn(model, bank, vocab, lexicon, args.text, args.n, threads=args.threads)
    if args.emit_prompt:
        print(format_prompt(result, bank, args.emit_prompt))
        return 0
    for rank, pair in enumerate(result.ranked, 1):
        print(f"{rank}\t{pair.score:.6f}\t{bank.entries[pair.hotword_id].surface}")
    return 0


def cmd_evaluate(args) -> int:
    lexicon = load_lexicon(_lexicon_path(args))
    vocab = build_vocab(lexicon)
    with open(args.model, "rb") as fh:
        model = load_model(fh.read())
    with open(args.bank, "rb") as fh:
        bank = load_bank(fh.read(), vocab)
    records = load_eval_records(args.eval_set)
    n_list = [int(x) for x in args.topn.split(",")]
    report = evaluate_sweep(model, bank, vocab, lexicon, records, n_list, threads=args.threads)
    sys.stdout.write(sweep_tsv(report))
    if args.scaling:
        sizes = [int(x) for x in args.scaling.split(",")]
        with open(args.distractors, encoding="utf-8") as fh:
            pool = [ln.strip() for ln in fh if ln.strip()]
        curve = scaling_curve(
            model, bank, pool, sizes, records, vocab, lexicon,
            seeds=[args.seed], threads=args.threads,
        )
        sys.stdout.write(curve_tsv(curve))
    if args.require_prrr50 is not None:
        achieved = report.prrr_at.get(50)
        if achieved is None or achieved < args.require_prrr50:
            print(
                f"acceptance failure: recall@50 {achieved} < {args.require_prrr50}",
                file=sys.stderr,
            )
            return 1
    return 0


def cmd_heatmap(args) -> int:
    lexicon = load_lexicon(_lexicon_path(args))
    vocab = build_vocab(lexicon)
    with open(args.model, "rb") as fh:
        model = load_model(fh.read())
    from .canvas import cosine_from_ids, normalize_rows

    hw_ids = vocab.encode(to_phonemes(normalize_text(args.hotword), lexicon))
    tx_ids = vocab.encode(to_phonemes(normalize_text(args.text), lexicon))
    table = normalize_rows(model.params["emb"])
    sim = cosine_from_ids(table, np.asarray(hw_ids), np.asarray(tx_ids))
    canvas = to_canvas(sim, rows=model.hyper.canvas_rows, cols=model.hyper.canvas_cols)
    export_heatmap(canvas, args.out)
    score = score_id_pairs(model, [(hw_ids, tx_ids)])[0]
    log.info("score %.6f; heatmap written to %s", score, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hotword-ranker",
        description="Phonetic hotword ranking: bank building, training, retrieval, evaluation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--lexicon", help="lexicon TSV (default: $HOTWORD_LEXICON or the bundled demo)")
        p.add_argument("--seed", type=int, default=0, help="random seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads for scoring")

    p = sub.add_parser("bank", help="build a hotword bank from a word list")
    common(p)
    p.add_argument("hotwords", help="UTF-8 text file, one hotword per line")
    p.add_argument("--out", required=True, help="output bank file")
    p.add_argument("--canvas-rows", type=int, default=24, help="max phonemes per hotword")
    p.set_defaults(func=cmd_bank)

    p = sub.add_parser("simulate", help="simulate recognition errors / generate a corpus")
    common(p)
    p.add_argument("--corpus", help="input JSONL with reference/hotwords fields")
    p.add_argument("--hotwords", help="hotword list for --generate")
    p.add_argument("--generate", type=int, help="generate this many synthetic records")
    p.add_argument("--mer-lo", type=float, default=0.02, help="error-band lower bound")
    p.add_argument("--mer-hi", type=float, default=0.20, help="error-band upper bound")
    p.add_argument("--out", required=True, help="output JSONL")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="train the scorer with hard-negative mining")
    common(p)
    p.add_argument("corpus", help="training corpus JSONL")
    p.add_argument("bank", help="hotword bank file")
    p.add_argument("--epochs", type=int, default=50, help="total epoch budget")
    p.add_argument("--lr", type=float, default=1e-4, help="learning rate")
    p.add_argument("--batch-size", type=int, default=32, help="batch size")
    p.add_argument("--mining-rounds", type=int, default=3, help="training rounds (1 disables mining)")
    p.add_argument("--canvas-rows", type=int, default=24, help="canvas rows")
    p.add_argument("--canvas-cols", type=int, default=128, help="canvas columns")
    p.add_argument("--mining-sample", type=int, help="records mined per round")
    p.add_argument("--eval-sample", type=int, help="held-out records for retrieval eval")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--report", help="output training report JSON")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("retrieve", help="rank the bank against a transcript")
    common(p)
    p.add_argument("model", help="model file")
    p.add_argument("bank", help="bank file")
    p.add_argument("--text", required=True, help="transcript text")
    p.add_argument("-n", type=int, default=10, help="number of results")
    p.add_argument("--emit-prompt", choices=["whisper", "instruct"],
                   help="print a downstream prompt instead of the TSV ranking")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("evaluate", help="recall sweep and scaling curve")
    common(p)
    p.add_argument("model", help="model file")
    p.add_argument("bank", help="bank file")
    p.add_argument("eval_set", help="eval JSONL with reference/hypothesis/hotwords")
    p.add_argument("--topn", default="1,3,10,50", help="comma-separated recall cutoffs")
    p.add_argument("--scaling", help="comma-separated bank sizes for the scaling curve")
    p.add_argument("--distractors", help="distractor word list for --scaling")
    p.add_argument("--require-prrr50", type=float, help="exit 1 if recall@50 is below this")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("heatmap", help="export a cosine-similarity heatmap CSV")
    common(p)
    p.add_argument("model", help="model file")
    p.add_argument("--hotword", required=True, help="hotword text")
    p.add_argument("--text", required=True, help="transcript text")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_heatmap)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HotwordRankerError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
