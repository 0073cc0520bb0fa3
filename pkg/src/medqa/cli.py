"""Operator commands: train, eval, filter, query, serve.

Every command exits 0 on success and 1 with a one-line `error: ...` cause
on stderr otherwise. `--json` switches stdout to machine-readable output.
The query and serve commands fall back to the shipped fixture stack for
any of --model/--vectors/--graph/--qa left unset, so both work out of the
box on a fresh install.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace

from .corpus import filter_medical, load_qa_records, parse_pairs, write_pairs
from .embeddings import EmbeddingTable, load_vectors
from .encoder import EncoderParams, init_params, load_params, save_params
from .entities import build_automaton, load_dictionary
from .fixtures import (
    FIXTURE_ENCODER_SEED,
    fixture_embedding_table,
    fixture_graph,
    fixture_qa_records,
)
from .graph import KnowledgeGraph, import_graph
from .router import QaRecord, Router, RouterConfig
from .service import ServiceState, create_app
from .training import (
    LabeledPair,
    TrainConfig,
    evaluate,
    load_config,
    split,
    train,
    write_loss_history,
)


def _emit(args, payload: dict, plain: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(plain)


def _read_pairs_file(path: str) -> list[LabeledPair]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows, errors = parse_pairs(fh)
    if errors:
        print(f"warning: skipped {len(errors)} malformed rows in {path}",
              file=sys.stderr)
    return [LabeledPair(q1=r.question1, q2=r.question2, label=r.is_duplicate)
            for r in rows]


def cmd_train(args) -> int:
    config = load_config(args.config) if args.config else TrainConfig()
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    table = load_vectors(args.vectors)
    # the vectors file is the single source of truth for embedding width
    if table.dim != config.embedding_dim:
        config = replace(config, embedding_dim=table.dim)
    pairs = _read_pairs_file(args.pairs)
    if not pairs:
        print(f"error: no usable pairs in {args.pairs}", file=sys.stderr)
        return 1
    train_pairs, held_out = split(pairs, config.train_fraction, config.seed)
    params, history = train(config, table, train_pairs)
    save_params(params, args.out)
    loss_path = args.loss_out or f"{args.out}.loss.csv"
    write_loss_history(history, loss_path)
    accuracy = None
    if held_out:
        report = evaluate(params, table, held_out,
                          threshold=args.threshold, max_len=config.max_seq_length)
        accuracy = report.accuracy
    payload = {
        "model": args.out,
        "loss_csv": loss_path,
        "epochs": config.epochs,
        "final_loss": history[-1],
        "held_out_pairs": len(held_out),
        "held_out_accuracy": accuracy,
    }
    plain = (f"trained {config.epochs} epochs; final loss {history[-1]:.6f}; "
             f"held-out accuracy "
             f"{'n/a' if accuracy is None else format(accuracy, '.4f')} "
             f"on {len(held_out)} pairs; model -> {args.out}")
    _emit(args, payload, plain)
    return 0


def cmd_eval(args) -> int:
    params = load_params(args.model)
    table = load_vectors(args.vectors)
    pairs = _read_pairs_file(args.pairs)
    if not pairs:
        print(f"error: no usable pairs in {args.pairs}", file=sys.stderr)
        return 1
    report = evaluate(params, table, pairs,
                      threshold=args.threshold, max_len=args.max_len)
    plain = (f"accuracy {report.accuracy:.4f} "
             f"({report.n_correct}/{report.n_total} at threshold {report.threshold})")
    _emit(args, asdict(report), plain)
    return 0


def cmd_filter(args) -> int:
    dictionary = load_dictionary(args.dictionary)
    automaton = build_automaton(dictionary)
    with open(args.pairs, "r", encoding="utf-8", newline="") as fh:
        rows, errors = parse_pairs(fh)
    kept, report = filter_medical(rows, dictionary, automaton)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(write_pairs(kept))
    payload = report.to_dict()
    payload["parse_errors"] = len(errors)
    if args.out:
        payload["kept_path"] = args.out
    plain = f"kept {report.rows_kept} of {report.rows_read} rows"
    if args.out:
        plain += f" -> {args.out}"
    _emit(args, payload, plain)
    return 0


def _load_stack(args) -> tuple[KnowledgeGraph, EncoderParams, EmbeddingTable,
                               list[QaRecord]]:
    table = load_vectors(args.vectors) if args.vectors else fixture_embedding_table()
    if args.model:
        params = load_params(args.model)
        if params.embedding_dim != table.dim:
            raise ValueError(
                f"model expects embedding dim {params.embedding_dim}, "
                f"vectors file has {table.dim}"
            )
    else:
        seed = args.seed if args.seed is not None else FIXTURE_ENCODER_SEED
        params = init_params(hidden=8, embedding_dim=table.dim, seed=seed)
    if args.graph:
        with open(args.graph, "r", encoding="utf-8") as fh:
            graph = import_graph(fh)
    else:
        graph = fixture_graph()
    if args.qa:
        with open(args.qa, "r", encoding="utf-8") as fh:
            result = load_qa_records(fh)
        if result.errors:
            print(f"warning: skipped {len(result.errors)} bad lines in {args.qa}",
                  file=sys.stderr)
        corpus = result.records
    else:
        corpus = fixture_qa_records()
    return graph, params, table, corpus


def cmd_query(args) -> int:
    graph, params, table, corpus = _load_stack(args)
    config = RouterConfig(top_k=args.top_k, kg_enabled=not args.no_kg)
    answer = Router(graph, params, table, corpus, config).ask(args.text)
    lines = [f"[{answer.source}] {answer.text}"]
    for alt in answer.alternatives[1:]:
        lines.append(f"  ({alt.similarity:.3f}) {alt.question}")
    _emit(args, answer.to_dict(), "\n".join(lines))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    graph, params, table, corpus = _load_stack(args)
    config = RouterConfig(top_k=args.top_k, kg_enabled=not args.no_kg)
    state = ServiceState(graph, params, table, corpus, config)
    app = create_app(state)
    print(f"serving on http://{args.host}:{args.port}", file=sys.stderr)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _add_stack_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--model", help="trained model file (default: fresh seeded weights)")
    sub.add_argument("--vectors", help="word vector file (default: shipped fixture)")
    sub.add_argument("--graph", help="graph JSON-lines file (default: shipped fixture)")
    sub.add_argument("--qa", help="QA corpus JSON-lines file (default: shipped fixture)")
    sub.add_argument("--top-k", type=int, default=3, help="corpus alternatives to return")
    sub.add_argument("--no-kg", action="store_true", help="skip graph lookup entirely")
    sub.add_argument("--seed", type=int, default=None,
                     help="seed for fresh weights when no --model is given")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medqa",
        description="Medical question answering: graph lookup first, "
                    "similarity-ranked corpus retrieval on a miss.",
    )
    parser.add_argument("--json", action="store_true",
                        help="machine-readable output on stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train the sentence-pair encoder")
    p_train.add_argument("--config", help="key=value config file")
    p_train.add_argument("--pairs", required=True, help="labeled question-pair TSV")
    p_train.add_argument("--vectors", required=True,
                         help="word vectors; also fixes the embedding width")
    p_train.add_argument("--out", required=True, help="model output path (.npz)")
    p_train.add_argument("--loss-out", help="loss CSV path (default: <out>.loss.csv)")
    p_train.add_argument("--threshold", type=float, default=0.5,
                         help="duplicate threshold for the held-out report")
    p_train.add_argument("--seed", type=int, default=None,
                         help="override the config seed")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="score a labeled pair file with a model")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--vectors", required=True)
    p_eval.add_argument("--pairs", required=True)
    p_eval.add_argument("--threshold", type=float, default=0.5)
    p_eval.add_argument("--max-len", type=int, default=10)
    p_eval.set_defaults(func=cmd_eval)

    p_filter = sub.add_parser("filter", help="keep pairs that mention dictionary terms")
    p_filter.add_argument("--pairs", required=True)
    p_filter.add_argument("--dictionary", required=True)
    p_filter.add_argument("--out", help="write the kept rows to this TSV")
    p_filter.set_defaults(func=cmd_filter)

    p_query = sub.add_parser("query", help="answer one question from the command line")
    p_query.add_argument("text", help="the question to answer")
    _add_stack_flags(p_query)
    p_query.set_defaults(func=cmd_query)

    p_serve = sub.add_parser("serve", help="run the HTTP chat and manager service")
    _add_stack_flags(p_serve)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001  operator surface: one-line causes
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())
