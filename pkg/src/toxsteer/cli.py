"""Command-line front end.

Subcommands: generate, evaluate, train-ngram, spread, score. Settings come
from an optional YAML config file plus flags (flags win). Every command is
deterministic given config, seed and inputs. Exit codes: 0 success, 1
internal failure, 2 bad input (missing file, malformed data, invalid config).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .backends import MockBackend, NGramModel, RemoteBackend, train_ngram
from .datasets import dump_jsonl, load_jsonl
from .engine import CalibrationConfig, SamplerConfig
from .errors import ContractViolation, InputError, ToxsteerError
from .evaluation import evaluate_run, spread_analysis
from .report import spread_figure, spread_table, write_report
from .session import generate_set, new_session
from .toxicity import LexiconScorer, RemoteScorer, load_lexicon
from .vocab import Vocabulary

CONFIG_KEYS = ("backend", "scorer", "objectives", "fixed_lambda", "sampler",
               "nucleus_p", "seed", "k", "max_len", "min_len", "override_tox",
               "condition", "equality_tolerance", "lambda_floor_epsilon",
               "rescore_every")


def _load_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise InputError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise InputError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: config must be a flat key-value mapping")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise InputError(f"{path}: unknown config keys: {', '.join(unknown)} "
                         f"(known: {', '.join(CONFIG_KEYS)})")
    return data


def _parse_objectives(value) -> set[int]:
    if value is None:
        return set()
    if isinstance(value, (list, tuple, set)):
        items = [str(v) for v in value]
    else:
        text = str(value).strip().lower()
        if text in ("", "none", "off"):
            return set()
        items = text.split(",")
    out = set()
    for item in items:
        item = item.strip()
        if item not in ("1", "2", "3"):
            raise InputError(f"--objectives takes a comma list out of 1,2,3; got {item!r}")
        out.add(int(item))
    return out


def _effective_config(args) -> dict:
    """Merge config file and flags; flags win. Returns the flat dict that
    also feeds the provenance hash."""
    merged = dict.fromkeys(CONFIG_KEYS)
    merged.update({"sampler": "nucleus", "nucleus_p": 0.9, "seed": 0, "k": 2,
                   "max_len": 20, "min_len": 0, "condition": "off",
                   "equality_tolerance": 1e-6, "lambda_floor_epsilon": 1e-3,
                   "rescore_every": 1})
    if getattr(args, "config", None):
        merged.update(_load_config_file(args.config))
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    merged["objectives"] = sorted(_parse_objectives(merged["objectives"]))
    if 2 in merged["objectives"] and 1 not in merged["objectives"]:
        raise InputError("objective 2 requires objective 1: pass --objectives 1,2")
    if 2 in merged["objectives"] and merged["fixed_lambda"] is not None:
        raise InputError("--fixed-lambda cannot be combined with objective 2 "
                         "(objective 2 sets the strength from the target)")
    return merged


def _calibration_from(cfg: dict) -> CalibrationConfig:
    objectives = set(cfg["objectives"])
    try:
        return CalibrationConfig(
            objective1=1 in objectives,
            objective2=2 in objectives,
            objective3=3 in objectives,
            fixed_lambda=cfg["fixed_lambda"],
            equality_tolerance=float(cfg["equality_tolerance"]),
            lambda_floor_epsilon=float(cfg["lambda_floor_epsilon"]),
            rescore_every=int(cfg["rescore_every"]),
        )
    except ContractViolation as exc:
        raise InputError(f"invalid calibration config: {exc}") from exc


def _sampler_from(cfg: dict, seed: int) -> SamplerConfig:
    try:
        return SamplerConfig(mode=cfg["sampler"], nucleus_p=float(cfg["nucleus_p"]),
                             rng_seed=seed)
    except ContractViolation as exc:
        raise InputError(f"invalid sampler config: {exc}") from exc


def _build_scorer(spec: str | None):
    if not spec:
        raise InputError("a scorer is required: --scorer lexicon:PATH or remote:URL")
    if spec.startswith("lexicon:"):
        return LexiconScorer(load_lexicon(spec[len("lexicon:"):]))
    if spec.startswith("remote:"):
        return RemoteScorer(spec[len("remote:"):])
    raise InputError(f"unknown scorer spec {spec!r} (use lexicon:PATH or remote:URL)")


def _build_backend(spec: str | None, scorer):
    if not spec:
        raise InputError("a backend is required: --backend mock | ngram:PATH | remote:URL")
    if spec == "mock":
        if not isinstance(scorer, LexiconScorer):
            raise InputError("the mock backend derives its vocabulary from a "
                             "lexicon scorer; pass --scorer lexicon:PATH")
        vocab = Vocabulary.from_words(scorer.mapping.keys())
        return MockBackend.uniform(vocab)
    if spec.startswith("ngram:"):
        return NGramModel.load(spec[len("ngram:"):])
    if spec.startswith("remote:"):
        if not isinstance(scorer, LexiconScorer):
            raise InputError("remote backend needs an engine-side vocabulary; "
                             "pass --scorer lexicon:PATH")
        vocab = Vocabulary.from_words(scorer.mapping.keys())
        return RemoteBackend(spec[len("remote:"):], vocab)
    raise InputError(f"unknown backend spec {spec!r} (use mock, ngram:PATH or remote:URL)")


def _config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def _sentence_seed(seed: int, sentence_id: str) -> int:
    digest = hashlib.sha256(f"{seed}|{sentence_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def cmd_generate(args) -> int:
    cfg = _effective_config(args)
    scorer = _build_scorer(cfg["scorer"])
    backend = _build_backend(cfg["backend"], scorer)
    calibration = _calibration_from(cfg)
    records, _ = load_jsonl(args.dataset)

    condition = str(cfg["condition"]).lower() in ("on", "true", "1", "yes")
    out_records = []
    for sid in sorted(records):
        rec = records[sid]
        measured = rec.get("sentence_toxicity")
        if measured is None:
            measured = float(scorer.score_sentence(rec["sentence"]))
        seed = _sentence_seed(int(cfg["seed"]), sid)
        sampler = _sampler_from(cfg, seed)
        session = new_session(rec["sentence"], scorer, calibration, sampler,
                              set_size=int(cfg["k"]))
        session.base_target_toxicity = float(measured)
        session.current_target_toxicity = float(measured)
        if cfg["override_tox"] is not None:
            from .session import override_target
            override_target(session, float(cfg["override_tox"]))
        sentence_backend = backend
        if condition:
            from .backends import PromptedBackend
            from .vocab import tokenize
            sentence_backend = PromptedBackend(backend, tokenize(rec["sentence"]))
        result = generate_set(session, sentence_backend, scorer, k=int(cfg["k"]),
                              max_len=int(cfg["max_len"]),
                              min_len=int(cfg["min_len"]),
                              rng=np.random.default_rng(seed))
        out_records.append({
            "id": sid,
            "sentence": rec["sentence"],
            "sentence_toxicity": float(measured),
            "target_base": session.base_target_toxicity,
            "interpretations": [
                {"text": i.text, "toxicity": i.toxicity,
                 "target_used": i.target_used, "lambda_used": i.lambda_used}
                for i in result.interpretations
            ],
        })

    meta = {"kind": "generated", "version": __version__, "seed": int(cfg["seed"]),
            "config_hash": _config_hash(cfg), "config": cfg}
    dump_jsonl(out_records, args.out, meta=meta)
    print(f"wrote {len(out_records)} interpretation sets to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _effective_config(args)
    scorer = _build_scorer(cfg["scorer"])
    backend = _build_backend(cfg["backend"], scorer)
    reference, _ = load_jsonl(args.reference)

    comet_fn = None
    if args.comet_url:
        from .bridge_client import comet_scorer
        comet_fn = comet_scorer(args.comet_url)

    reports = []
    for gen_path in args.generated:
        generated, _ = load_jsonl(gen_path)
        reports.append(evaluate_run(generated, reference, backend, scorer,
                                    comet_fn=comet_fn))
    written = write_report(args.label, reports, args.out)
    print(f"evaluated {len(args.generated)} run(s); wrote {', '.join(map(str, written))}")
    return 0


def cmd_train_ngram(args) -> int:
    corpus_path = Path(args.corpus)
    if not corpus_path.exists():
        raise InputError(f"corpus file not found: {corpus_path}")
    lines = corpus_path.read_text(encoding="utf-8").splitlines()
    model = train_ngram(lines, order=args.order, alpha=args.alpha)
    model.save(args.out)
    print(f"trained order-{args.order} model over {len(model.vocabulary)} tokens; "
          f"saved to {args.out}")
    return 0


def cmd_spread(args) -> int:
    cfg = _effective_config(args)
    records, _ = load_jsonl(args.dataset)
    scorer = _build_scorer(cfg["scorer"]) if cfg["scorer"] else None

    rows = []
    for sid in sorted(records):
        rec = records[sid]
        if len(rec["interpretations"]) < 2:
            raise InputError(f"sentence {sid!r} needs >= 2 interpretations for spread analysis")
        sentence_tox = rec.get("sentence_toxicity")
        if sentence_tox is None:
            if scorer is None:
                raise InputError(f"sentence {sid!r} has no sentence_toxicity; "
                                 "pass --scorer to score inputs")
            sentence_tox = float(scorer.score_sentence(rec["sentence"]))
        toxes = []
        for item in rec["interpretations"]:
            if item.get("toxicity") is not None:
                toxes.append(float(item["toxicity"]))
            elif scorer is not None:
                toxes.append(float(scorer.score_sentence(item["text"])))
            else:
                raise InputError(f"sentence {sid!r} has unscored interpretations; "
                                 "pass --scorer")
        rows.append((float(sentence_tox), toxes))

    buckets = spread_analysis(rows)
    print(spread_table(buckets))
    if args.out:
        out_path = Path(args.out)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(json.dumps({"v": 1, "spread_buckets": buckets},
                                       indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
        png = out_path.with_suffix("").with_name(out_path.stem + "_spread.png")
        spread_figure(buckets, png)
        txt = out_path.with_suffix(".txt")
        txt.write_text(spread_table(buckets) + "\n", encoding="utf-8")
        print(f"wrote {out_path}, {txt}, {png}")
    return 0


def cmd_score(args) -> int:
    cfg = _effective_config(args)
    scorer = _build_scorer(cfg["scorer"])
    value = float(scorer.score_sentence(args.text))
    print(f"{value:.6f}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML config file; flags override it")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--k", type=int, default=None, help="interpretations per sentence")
    parser.add_argument("--max-len", dest="max_len", type=int, default=None)
    parser.add_argument("--min-len", dest="min_len", type=int, default=None,
                        help="mask the end token until this many tokens are out")
    parser.add_argument("--condition", choices=("on", "off"), default=None,
                        help="prefix generation with the input sentence")
    parser.add_argument("--sampler", choices=("nucleus", "greedy"), default=None)
    parser.add_argument("--nucleus-p", dest="nucleus_p", type=float, default=None)
    parser.add_argument("--objectives", default=None,
                        help="comma list out of 1,2,3 (empty for none)")
    parser.add_argument("--fixed-lambda", dest="fixed_lambda", type=float, default=None)
    parser.add_argument("--override-tox", dest="override_tox", type=float, default=None)
    parser.add_argument("--backend", default=None, help="mock | ngram:PATH | remote:URL")
    parser.add_argument("--scorer", default=None, help="lexicon:PATH | remote:URL")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toxsteer",
                                     description="toxicity-steered interpretation generation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate interpretation sets for a dataset")
    _add_common(p)
    p.add_argument("--dataset", required=True, help="input JSONL with id + sentence")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="score generated runs against references")
    _add_common(p)
    p.add_argument("--generated", required=True, nargs="+",
                   help="one or more generated JSONL files (runs)")
    p.add_argument("--reference", required=True, help="reference JSONL")
    p.add_argument("--out", required=True, help="report JSON path (siblings: .txt, *.png)")
    p.add_argument("--label", default="run", help="row label in the report table")
    p.add_argument("--comet-url", dest="comet_url", default=None,
                   help="bridge /comet endpoint for the optional semantic column")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("train-ngram", help="train the toy n-gram backend")
    p.add_argument("--corpus", required=True, help="plain text, one sentence per line")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--out", required=True, help="model artifact path (JSON)")
    p.set_defaults(func=cmd_train_ngram)

    p = sub.add_parser("spread", help="bucketed toxicity-spread table for a dataset")
    _add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", default=None, help="optional JSON path (siblings: .txt, *.png)")
    p.set_defaults(func=cmd_spread)

    p = sub.add_parser("score", help="print the toxicity of one text")
    _add_common(p)
    p.add_argument("text")
    p.set_defaults(func=cmd_score)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ToxsteerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
