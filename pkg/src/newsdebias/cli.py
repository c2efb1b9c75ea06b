"""Command-line interface.

Every subcommand exits 0 on success. On failure it exits 1 and writes one
JSON error record (``{"error": ..., "message": ...}``) to stderr. Settings
not given on the command line are read from the ``[newsdebias]`` section of
an INI file passed with ``--config``.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .dataset import load_group_config, load_records, write_csv
from .debias import DebiasConfig, NgramInfiller
from .detection import TrainConfig, classify, load_model, train_detector
from .news import ClientConfig, fetch_article
from .pipeline import Models, ablation_masking, evaluate_before_after, fit_models, run_pipeline
from .recognition import Lexicon, LexiconRecognizer, build_lexicon, spans_to_bio
from .synthetic import SyntheticConfig, generate
from .text import tokenize

log = logging.getLogger("newsdebias")

DEFAULTS = {
    "seed": 0,
    "top_k": 5,
    "threshold": 0.5,
    "epochs": 200,
    "learning_rate": 0.5,
    "l2": 1e-6,
    "hash_bits": 18,
    "fraction": 0.05,
    "p": "0.1,0.3,0.5,0.8,1.0",
    "min_score": 0.0,
    "timeout": 10.0,
}
INT_KEYS = {"seed", "top_k", "epochs", "hash_bits", "synthetic"}
FLOAT_KEYS = {"threshold", "learning_rate", "l2", "fraction", "min_score", "timeout"}


class CLIError(Exception):
    pass


def _setting(args: argparse.Namespace, name: str, required: bool = False):
    value = getattr(args, name, None)
    if value is None:
        value = args.file_config.get(name)
        if value is not None:
            if name in INT_KEYS:
                value = int(value)
            elif name in FLOAT_KEYS:
                value = float(value)
    if value is None:
        value = DEFAULTS.get(name)
    if value is None and required:
        raise CLIError(f"--{name.replace('_', '-')} is required (or set {name} in the config file)")
    return value


def _read_inputs(path: str) -> list[tuple[str, str]]:
    if path == "-":
        lines = sys.stdin.read().splitlines()
        return [(str(i), line) for i, line in enumerate(lines) if line.strip()]
    p = Path(path)
    if p.suffix == ".jsonl":
        out = []
        with open(p, encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                if not line.strip():
                    continue
                obj = json.loads(line)
                text = obj.get("text", obj.get("sentence"))
                if text is None:
                    raise CLIError(f"{path}:{i + 1}: record has no 'text' field")
                out.append((str(obj.get("id", i)), text))
        return out
    lines = p.read_text(encoding="utf-8").splitlines()
    return [(str(i), line) for i, line in enumerate(lines) if line.strip()]


def _write_jsonl(records, out: str | None) -> None:
    lines = "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in records)
    if out:
        Path(out).write_text(lines, encoding="utf-8")
    else:
        sys.stdout.write(lines)


def _write_json(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, ensure_ascii=False, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dataset(args) -> list:
    n = _setting(args, "synthetic")
    if n:
        return generate(SyntheticConfig(n_sentences=n, seed=_setting(args, "seed")))
    path = _setting(args, "dataset", required=True)
    result = load_records(path)
    for err in result.errors[:20]:
        log.warning("%s line %d: %s", path, err.line, err.message)
    if result.errors:
        log.warning("%d malformed rows skipped", len(result.errors))
    return result.records


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        epochs=_setting(args, "epochs"),
        learning_rate=_setting(args, "learning_rate"),
        l2=_setting(args, "l2"),
        seed=_setting(args, "seed"),
        hash_dimension=2 ** _setting(args, "hash_bits"),
    )


def _debias_config(args) -> DebiasConfig:
    return DebiasConfig(top_k=_setting(args, "top_k"), accept_threshold=_setting(args, "threshold"))


def _load_models(args) -> Models:
    # Load everything up front so a bad path fails before any text is processed.
    detector = load_model(_setting(args, "model", required=True))
    lexicon = Lexicon.load(_setting(args, "lexicon", required=True))
    infiller_path = _setting(args, "infiller")
    infiller = NgramInfiller.load(infiller_path) if infiller_path else NgramInfiller()
    return Models(detector, LexiconRecognizer(lexicon, _setting(args, "min_score")), infiller)


def cmd_train(args) -> None:
    records = _dataset(args)
    model = train_detector([(r.sentence, int(r.is_biased)) for r in records], _train_config(args))
    model.save(_setting(args, "out", required=True))
    preds = [classify(model, r.sentence).label == r.label for r in records]
    _write_json(
        {
            "records": len(records),
            "initial_loss": model.loss_history[0],
            "final_loss": model.loss_history[-1],
            "train_accuracy": sum(preds) / len(preds),
        },
        None,
    )


def cmd_build_lexicon(args) -> None:
    lexicon = build_lexicon(_dataset(args))
    lexicon.save(_setting(args, "out", required=True))
    _write_json({"terms": len(lexicon)}, None)


def cmd_build_infiller(args) -> None:
    records = _dataset(args)
    lex_path = _setting(args, "lexicon")
    lexicon = Lexicon.load(lex_path) if lex_path else build_lexicon(records)
    blocklist = [t for t in lexicon.terms() if " " not in t]
    infiller = NgramInfiller.fit([r.sentence for r in records if not r.is_biased], blocklist)
    infiller.save(_setting(args, "out", required=True))
    _write_json({"contexts": len(infiller.follows), "blocked": len(blocklist)}, None)


def cmd_detect(args) -> None:
    model = load_model(_setting(args, "model", required=True))
    out = []
    for doc_id, text in _read_inputs(_setting(args, "input", required=True)):
        res = classify(model, text)
        out.append({"id": doc_id, "text": text, "label": res.label.value, "probability": res.probability})
    _write_jsonl(out, _setting(args, "out"))


def cmd_recognize(args) -> None:
    lexicon = Lexicon.load(_setting(args, "lexicon", required=True))
    min_score = _setting(args, "min_score")
    out = []
    for doc_id, text in _read_inputs(_setting(args, "input", required=True)):
        doc = tokenize(text)
        spans = lexicon.recognize(doc, min_score)
        out.append(
            {
                "id": doc_id,
                "text": text,
                "tokens": doc.words(),
                "tags": spans_to_bio(doc, spans),
                "spans": [
                    {
                        "start": doc.char_range(b.span)[0],
                        "end": doc.char_range(b.span)[1],
                        "surface": b.span.surface,
                        "score": b.score,
                    }
                    for b in spans
                ],
            }
        )
    _write_jsonl(out, _setting(args, "out"))


def cmd_debias(args) -> None:
    models = _load_models(args)
    inputs = _read_inputs(_setting(args, "input", required=True))
    docs = run_pipeline(models, inputs, _debias_config(args))
    _write_jsonl([d.to_record() for d in docs], _setting(args, "out"))


def cmd_evaluate(args) -> None:
    records = _dataset(args)
    groups = load_group_config(_setting(args, "groups"))
    report = evaluate_before_after(
        records,
        groups,
        split_seed=_setting(args, "seed"),
        train_config=_train_config(args),
        debias_config=_debias_config(args),
        debias_enabled=not args.no_debias,
    )
    _write_json(report.to_dict(), _setting(args, "out"))


def cmd_ablate_masking(args) -> None:
    records = _dataset(args)
    if _setting(args, "model"):
        models = _load_models(args)
    else:
        models = fit_models(records, _train_config(args))
    p_values = [float(x) for x in str(_setting(args, "p")).split(",") if x.strip()]
    rows = ablation_masking(
        records, models, p_values, _setting(args, "fraction"), _setting(args, "seed"), _debias_config(args)
    )
    _write_json({"rows": [r.to_dict() for r in rows]}, _setting(args, "out"))


def cmd_fetch(args) -> None:
    article = fetch_article(_setting(args, "url", required=True), ClientConfig(timeout=_setting(args, "timeout")))
    _write_json(article.to_dict(), _setting(args, "out"))


def cmd_synthesize(args) -> None:
    n = _setting(args, "synthetic") or 500
    write_csv(generate(SyntheticConfig(n_sentences=n, seed=_setting(args, "seed"))), _setting(args, "out", True))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="newsdebias", description="Detect, locate and rewrite biased news text.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="INI file with a [newsdebias] section of default settings")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, *opts):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        for opt in opts:
            OPTIONS[opt](p)
        return p

    add("train", cmd_train, "train the bias detector", "dataset", "synthetic", "out", "seed", "hyper")
    add("build-lexicon", cmd_build_lexicon, "mine a biased-word lexicon", "dataset", "synthetic", "out", "seed")
    add(
        "build-infiller",
        cmd_build_infiller,
        "fit the bigram infiller on non-biased sentences",
        "dataset",
        "synthetic",
        "lexicon",
        "out",
        "seed",
    )
    add("detect", cmd_detect, "classify texts as biased / non-biased", "model", "input", "out")
    add("recognize", cmd_recognize, "tag bias-bearing spans", "lexicon", "input", "out", "min_score")
    add(
        "debias",
        cmd_debias,
        "rewrite biased sentences",
        "model",
        "lexicon",
        "infiller",
        "input",
        "out",
        "debias",
        "min_score",
    )
    ev = add(
        "evaluate",
        cmd_evaluate,
        "before/after debiasing metrics",
        "dataset",
        "synthetic",
        "groups",
        "seed",
        "out",
        "debias",
        "hyper",
    )
    ev.add_argument("--no-debias", action="store_true", help="skip debiasing (after == before)")
    add(
        "ablate-masking",
        cmd_ablate_masking,
        "random-p masking vs exact span masking",
        "dataset",
        "synthetic",
        "model",
        "lexicon",
        "infiller",
        "seed",
        "out",
        "debias",
        "hyper",
        "ablation",
        "min_score",
    )
    f = add("fetch", cmd_fetch, "fetch and extract a news article", "out")
    f.add_argument("--url")
    f.add_argument("--timeout", type=float)
    add("synthesize", cmd_synthesize, "write a synthetic planted-bias corpus CSV", "synthetic", "seed", "out")
    return parser


def _hyper(p):
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--l2", type=float)
    p.add_argument("--hash-bits", type=int, help="hash dimension is 2**bits (default 18)")


def _debias_opts(p):
    p.add_argument("--top-k", type=int)
    p.add_argument("--threshold", type=float, help="acceptance threshold for candidates")


def _ablation(p):
    p.add_argument("--p", help="comma-separated masking probabilities")
    p.add_argument("--fraction", type=float)


OPTIONS = {
    "dataset": lambda p: p.add_argument("--dataset", help="MBIC-style CSV or canonical JSONL"),
    "synthetic": lambda p: p.add_argument("--synthetic", type=int, metavar="N", help="use N synthetic sentences"),
    "out": lambda p: p.add_argument("--out"),
    "seed": lambda p: p.add_argument("--seed", type=int),
    "model": lambda p: p.add_argument("--model"),
    "lexicon": lambda p: p.add_argument("--lexicon"),
    "infiller": lambda p: p.add_argument("--infiller"),
    "input": lambda p: p.add_argument("--input", help=".txt (one text per line), .jsonl, or - for stdin"),
    "groups": lambda p: p.add_argument("--groups", help="group config JSON (default: shipped)"),
    "min_score": lambda p: p.add_argument("--min-score", type=float),
    "hyper": _hyper,
    "debias": _debias_opts,
    "ablation": _ablation,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.file_config = {}
        if args.config:
            cp = configparser.ConfigParser()
            if not cp.read(args.config):
                raise CLIError(f"cannot read config file {args.config}")
            if cp.has_section("newsdebias"):
                args.file_config = {k.replace("-", "_"): v for k, v in cp.items("newsdebias")}
        args.func(args)
    except Exception as exc:  # noqa: BLE001 - every failure becomes an error record
        log.debug("command failed", exc_info=True)
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
