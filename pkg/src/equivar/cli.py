"""Command line front end.

Exit codes: 0 when the command ran and any check it performed passed,
1 when a verification or trained-model check failed, 2 for usage errors
and malformed inputs. `--json` payloads are the same documents the HTTP
service returns, byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import nir as nirlib
from .errors import EquivarError, ParseError
from .report import render_markdown
from .scenarios import make_braking_dataset, resolve, validate
from .reparam import cognitive_load
from .serialize import dumps, report_to_dict
from .translation import Translation
from .turing import run_script, transcript, verdict_to_dict


def _write_json(dest: str, text: str) -> None:
    if dest == "-":
        sys.stdout.write(text + "\n")
    else:
        Path(dest).write_bytes(text.encode())


def _print_report_summary(doc: dict) -> None:
    print(f"mode {doc['mode']}, tolerance {doc['tolerance']:g}")
    print(f"checked {doc['checked']}, undefined {doc['undefined']},"
          f" ambiguous {doc['ambiguous']}, untestable {doc['untestable']}")
    print(f"max discrepancy {doc['max_discrepancy']:.6g}")
    print(f"cost: {doc['cost']} evaluations, {doc['cost_states']} states")
    for c in doc.get("counterexamples", [])[:3]:
        print(f"  counterexample {c['action']}: translated {c['lhs']:.6g}"
              f" vs native {c['rhs']:.6g}")
    print("PASS" if doc["passed"] else "FAIL")


def _cmd_verify(args) -> int:
    from .service import _run_verification

    scenario = resolve(args.scenario)
    payload = {
        "mode": args.mode,
        "action_family": args.action_family,
        "max_compound": args.max_compound,
    }
    if args.tolerance is not None:
        payload["tolerance"] = args.tolerance
    if args.actions:
        spec = json.loads(Path(args.actions).read_text())
        if isinstance(spec, dict):
            spec = spec.get("actions")
        if not isinstance(spec, list):
            raise ParseError(f"{args.actions}: expected a list of actions"
                             " or {\"actions\": [...]}")
        payload["region"] = spec
    doc = _run_verification(scenario, payload)
    if args.json:
        _write_json(args.json, dumps(doc))
    if args.json != "-":
        _print_report_summary(doc)
    return 0 if doc["passed"] else 1


def _cmd_load(args) -> int:
    scenario = resolve(args.scenario)
    print(f"scenario {scenario.name}")
    if scenario.metadata.get("description"):
        print(f"  {scenario.metadata['description']}")
    for side, model in (("machine", scenario.machine), ("human", scenario.human)):
        vars_ = ", ".join(
            f"{v.name}({len(v.domain)})" for v in model.system.variables
        )
        print(f"  {side}: {vars_}")
    t = scenario.translation
    blocks = []
    for j in range(len(t.target)):
        srcs = [t.source.names[i] for i in t.block(j)]
        blocks.append(f"{'+'.join(srcs)} -> {t.target.names[j]}")
    print(f"  translation: {'; '.join(blocks)}"
          + (" (relabeling)" if t.is_relabeling() else ""))
    machine_load = cognitive_load(scenario.machine)
    print(f"  cognitive load (machine): max {machine_load.max_load}"
          f" (limit {machine_load.limit})")
    if scenario.mixture is not None:
        mix_load = cognitive_load(scenario.mixture)
        print(f"  cognitive load (mixture): max {mix_load.max_load}"
              f" (limit {mix_load.limit})")
    diagnostics = validate(scenario, smoke=not args.no_smoke)
    for d in diagnostics:
        print(f"  problem: {d}")
    print("OK" if not diagnostics else f"{len(diagnostics)} problem(s)")
    return 0 if not diagnostics else 1


def _nir_config(scenario, config_path):
    if scenario.nir is None:
        raise ParseError(f"scenario {scenario.name!r} has no neural block")
    cfg = json.loads(json.dumps(scenario.nir))  # deep copy
    if config_path:
        overlay = json.loads(Path(config_path).read_text())
        for key, value in overlay.items():
            if isinstance(value, dict) and isinstance(cfg.get(key), dict):
                cfg[key].update(value)
            else:
                cfg[key] = value
    return cfg


def _nir_dataset(cfg):
    return make_braking_dataset(
        n=cfg["dataset"]["size"],
        seed=cfg["dataset"]["seed"],
        input_dim=cfg["input_dim"],
    )


def _cmd_train_nir(args) -> int:
    scenario = resolve(args.scenario)
    cfg = _nir_config(scenario, args.config)
    dataset = _nir_dataset(cfg)
    train_ds, eval_ds = dataset.split(cfg["dataset"]["train_fraction"])
    model = nirlib.make_nir_model(
        cfg["input_dim"], tuple(cfg["concepts"]),
        hidden=tuple(cfg["hidden"]), seed=cfg["train"]["seed"],
    )
    tc = nirlib.TrainConfig(
        learning_rate=cfg["train"]["learning_rate"],
        epochs=cfg["train"]["epochs"],
        batch_size=cfg["train"]["batch_size"],
        concept_weight=cfg["train"]["concept_weight"],
        seed=cfg["train"]["seed"],
    )
    trained, trace = nirlib.train(model, train_ds, tc)
    task_acc = nirlib.task_accuracy(trained, eval_ds)
    concept_acc = nirlib.concept_accuracy(trained, eval_ds)
    meta = {
        "scenario": scenario.name,
        "config": cfg,
        "task_accuracy": task_acc,
        "concept_accuracy": {n: float(a) for n, a in
                             zip(cfg["concepts"], concept_acc)},
        "final_loss": {"task": trace[-1][1], "concept": trace[-1][2]},
    }
    nirlib.save_nir(trained, args.out, meta=meta)
    if args.trace:
        Path(args.trace).write_text(nirlib.loss_trace_csv(trace))
    print(f"trained {cfg['train']['epochs']} epochs; task accuracy"
          f" {task_acc:.4f}; concept accuracy "
          + ", ".join(f"{n} {a:.4f}" for n, a in
                      zip(cfg["concepts"], concept_acc)))
    print(f"saved {args.out}")
    return 0


def _cmd_check_nir(args) -> int:
    from .verify import verify_region

    model, meta = nirlib.load_nir(args.model)
    scenario = resolve(args.scenario)
    cfg = _nir_config(scenario, None)
    dataset = _nir_dataset(cfg)
    disc = nirlib.discretize(model, dataset, task_name=cfg["task"])
    if disc.empty_cells:
        cells = ", ".join(str(c) for c in disc.empty_cells)
        print(f"unrealized concept cells: {cells}")
    n = len(disc.model.system)
    t = Translation(
        disc.model.system, scenario.human.system,
        omega=np.arange(n),
        value_maps={j: np.arange(len(disc.model.system.domain(j)))
                    for j in range(n)},
    )
    report = verify_region(
        disc.model, scenario.human, t, disc.region_actions(),
        tolerance=cfg.get("region_tolerance", 0.1),
    )
    doc = report_to_dict(report)
    if args.json:
        _write_json(args.json, dumps(doc))
    if args.json != "-":
        _print_report_summary(doc)
    return 0 if report.passed else 1


def _cmd_turing(args) -> int:
    scenario = resolve(args.scenario)
    if args.script:
        script = json.loads(Path(args.script).read_text())
        if args.query and "query" not in script:
            script["query"] = args.query
        if args.seed is not None and "seed" not in script:
            script["seed"] = args.seed
        session = run_script(scenario, script)
    elif args.interactive:
        session = _interactive_session(scenario, args)
    else:
        print("error: need --script FILE or --interactive", file=sys.stderr)
        return 2
    doc = transcript(session)
    if args.json:
        _write_json(args.json, dumps(doc))
    if args.json != "-":
        for row in doc["rounds"]:
            acts = "; ".join(
                f"{k}({var}={val})"
                for a in row["action"]
                for k, body in a.items()
                for var, val in body.items()
            )
            print(f"round {row['round']}: {acts} -> truth {row['truth']},"
                  f" score {row['score']:.3f}")
        v = doc["verdict"]
        label = ("interpretable" if v["interpretable"]
                 else "not interpretable" if v["sufficient"]
                 else "insufficient rounds")
        print(f"mean score {doc['mean_score']:.4f} over {v['rounds']} rounds:"
              f" {label}")
    v = doc["verdict"]
    return 1 if (v["sufficient"] and not v["interpretable"]) else 0


def _interactive_session(scenario, args):
    from .serialize import compound_from_obj
    from .turing import TuringSession

    if not args.query:
        raise ParseError("--query is required for --interactive")
    session = TuringSession(scenario, args.query, args.seed or 0)
    print(f"query {args.query} over {list(session.query_domain)};"
          " empty action line ends the session")
    while True:
        try:
            line = input("action> ").strip()
        except EOFError:
            break
        if not line:
            break
        try:
            actions = compound_from_obj(json.loads(line),
                                        scenario.machine.system, "action")
            raw = input("forecast> ").strip()
            forecast = json.loads(raw) if raw.startswith("{") else raw
            result = session.play_round(actions, forecast)
        except EquivarError as exc:
            print(f"rejected: {exc}")
            continue
        print(f"truth {result.truth}, score {result.score:.3f},"
              f" mean {session.mean_score():.3f}")
    session.close()
    return session


def _cmd_serve(args) -> int:
    from .service import run

    run(host=args.host, port=args.port, session_ttl=args.ttl,
        persist_path=args.persist, static_dir=args.static)
    return 0


def _cmd_report(args) -> int:
    doc = json.loads(Path(getattr(args, "in")).read_text())
    md = render_markdown(doc, title=args.title)
    Path(args.out).write_text(md)
    print(f"wrote {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equivar",
        description="check that explanations commute with inference",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run an equivariance check")
    p.add_argument("--scenario", required=True,
                   help="path to a scenario file or builtin:NAME")
    p.add_argument("--mode", choices=("brute", "ci", "markov", "region"),
                   default="brute")
    p.add_argument("--action-family", choices=("observe", "do", "both"),
                   default="both")
    p.add_argument("--max-compound", type=int, default=1)
    p.add_argument("--actions", help="JSON file with the region's actions")
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--json", help="write the report document here ('-' for stdout)")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("load", help="inspect and validate a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--no-smoke", action="store_true",
                   help="skip the equivariance smoke check")
    p.set_defaults(fn=_cmd_load)

    p = sub.add_parser("train-nir", help="train the neural concept model")
    p.add_argument("--scenario", required=True)
    p.add_argument("--config", help="JSON overrides for the scenario's block")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--trace", help="write the loss trace CSV here")
    p.set_defaults(fn=_cmd_train_nir)

    p = sub.add_parser("check-nir", help="discretize a checkpoint and verify it")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--scenario", required=True)
    p.add_argument("--json", help="write the report document here")
    p.set_defaults(fn=_cmd_check_nir)

    p = sub.add_parser("turing", help="run a scored forecasting session")
    p.add_argument("--scenario", required=True)
    p.add_argument("--query", help="human-side variable to forecast")
    p.add_argument("--script", help="script or transcript JSON to (re)play")
    p.add_argument("--interactive", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--json", help="write the transcript here")
    p.set_defaults(fn=_cmd_turing)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ttl", type=float, default=3600.0,
                   help="idle session lifetime in seconds")
    p.add_argument("--persist", help="append session events to this JSON-lines file")
    p.add_argument("--static", help="directory with the built web UI")
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("report", help="render a report document to Markdown")
    p.add_argument("--in", required=True, help="report JSON file")
    p.add_argument("--out", required=True, help="Markdown output path")
    p.add_argument("--title", default="Verification report")
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except EquivarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
