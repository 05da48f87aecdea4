"""Command-line front end.

Subcommands: infer, compare, check, run-episode.  Exit codes: 0 success,
1 moral rejection, 2 input or parse error.  All numeric scores print
with four decimals so output is stable for golden tests; belief
intervals print in compact form, e.g. ``[0.76, 1]``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import goal as gm
from .cases import load_library
from .config import build_config, load_config_file
from .dgroup import load_dgroup
from .errors import MoralRejectionError, NormkitError
from .inference import infer
from .rules import Scene, load_rules, load_scene
from .scripts import load_scenario, serialize_script
from .sme import render_template, similarity, verify_candidate_inference

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_ERROR = 2


def _score(value: float) -> str:
    return f"{value:.4f}"


def _ranking_text(ranking) -> str:
    return "; ".join(f"{name} {_score(score)} ({label})"
                     for name, score, label in ranking)


def render_event(event: gm.TraceEvent) -> str:
    payload = dict(event.payload)
    kind = event.kind
    if kind == "goal":
        return f"goal: {payload['goal']}"
    if kind == "script":
        return f"script:\n{payload['script']}"
    if kind == "search":
        line = f"search ({payload['rule']}): " + " & ".join(payload["features"])
        if payload["contexts"]:
            line += " | context: " + " & ".join(payload["contexts"])
        return line
    if kind == "affordance":
        return f"affordance: {payload['affordance']} {payload['interval']}"
    if kind == "bind":
        return f"bind: {payload['var']} = {payload['value']}"
    if kind == "grasp":
        line = f"grasp: {payload['grasp']}"
        if payload.get("orient"):
            line += f" (orient handle toward {payload['orient']})"
        return line
    if kind == "check":
        where = f" before {payload['before']}" if payload.get("before") else ""
        return f"moral check{where}: {_ranking_text(payload['ranking'])}"
    if kind == "modification":
        return f"modification: {payload['operator']} at {payload['site']}"
    if kind == "repair":
        return f"top precedent after repair: {payload['precedent']}"
    if kind == "decisive":
        return (f"decisive precedent: {payload['precedent']} "
                f"({payload['label']}) score {_score(payload['score'])}")
    if kind == "step":
        line = f"step: {payload['step']}({payload['params']})"
        if payload.get("grasp"):
            line += f" grasp={payload['grasp']}"
        if payload.get("orient"):
            line += f" orient={payload['orient']}"
        return line
    return f"{kind}: {payload}"


def _emit(events, output: str) -> None:
    for event in events:
        if output == "structured":
            record = {"event": event.kind}
            record.update(dict(event.payload))
            print(json.dumps(record))
        else:
            print(render_event(event))


def cmd_infer(config) -> int:
    rules = load_rules(config.rules)
    scene = load_scene(config.scene)
    beliefs = infer(rules, scene)
    for b in beliefs:
        if config.output == "structured":
            print(json.dumps({"affordance": str(b.affordance),
                              "alpha": b.belief.alpha, "beta": b.belief.beta}))
        else:
            print(f"{b.affordance} {b.belief}")
    return EXIT_OK


def cmd_compare(base_path, target_path, config) -> int:
    base = load_dgroup(base_path)
    target = load_dgroup(target_path)
    result = similarity(base, target, config.weights)
    scene = load_scene(config.scene) if Path(config.scene).exists() else Scene()
    print(f"score {_score(result.score)}")
    if result.best_gmap is None:
        return EXIT_OK
    base_exprs = base.expr_by_id()
    target_exprs = target.expr_by_id()

    def describe(exprs, eid):
        e = exprs[eid]
        return f"{e.predicate}({','.join(e.args)})"

    print("correspondences:")
    for mh in result.best_gmap.correspondences:
        print(f"  {describe(base_exprs, mh.base)} <-> "
              f"{describe(target_exprs, mh.target)}")
    if result.best_gmap.entity_map:
        pairs = "; ".join(f"{b} -> {t}" for b, t in result.best_gmap.entity_map)
        print(f"entity map: {pairs}")
    if result.best_gmap.candidate_inferences:
        print("candidate inferences:")
        for template in result.best_gmap.candidate_inferences:
            verdict = verify_candidate_inference(template, scene)
            print(f"  {render_template(template)} [{verdict}]")
    return EXIT_OK


def cmd_check(config) -> int:
    rules = load_rules(config.rules)
    scene = load_scene(config.scene)
    library = load_library(config.cases)
    scenario = load_scenario(config.scenario)
    scenario = gm.annotate_scenario(scenario, rules, scene)
    try:
        result = gm.check_moral_percept(scenario, library, config)
    except MoralRejectionError as exc:
        print(f"rejected: most similar precedent {exc.precedent} (violation)")
        print(str(exc))
        return EXIT_REJECTED
    print("accepted")
    for modification in result.modifications:
        print(f"modification: {modification.operator} at {modification.site}")
    print("script:")
    print(serialize_script(result.scenario.script))
    if result.decisive is not None:
        name, score, label = result.decisive
        if result.modifications:
            print(f"top precedent after repair: {name}")
        print(f"decisive precedent: {name} ({label}) score {_score(score)}")
    else:
        print("decisive precedent: none (permissive, empty library)")
    return EXIT_OK


def cmd_run_episode(config) -> int:
    rules = load_rules(config.rules)
    scene = load_scene(config.scene)
    library = load_library(config.cases)
    declared = load_scenario(config.scenario)
    if declared.goal is None:
        raise NormkitError(
            f"scenario file {config.scenario} declares no goal to run")

    events = [gm.TraceEvent("goal", (("goal", str(declared.goal)),))]
    script = gm.decompose(declared.goal)
    events.append(gm.TraceEvent("script", (("script", serialize_script(script)),)))
    script, resolve_events = gm.resolve_script(
        script, scene, rules, (), config.min_alpha, declared.goal)
    events.extend(resolve_events)

    scenario = declared.with_script(script)
    scenario = gm.annotate_scenario(scenario, rules, scene)
    try:
        result = gm.check_moral_percept(scenario, library, config)
    except MoralRejectionError as exc:
        events.append(gm.TraceEvent(
            "rejected", (("precedent", exc.precedent), ("message", str(exc)))))
        _emit(events, config.output)
        return EXIT_REJECTED
    for record in result.checks:
        events.append(gm.TraceEvent(
            "check", (("before", None), ("ranking", list(record.ranking)))))
    for modification in result.modifications:
        events.append(gm.TraceEvent(
            "modification", (("operator", modification.operator),
                             ("site", modification.site))))
    if result.modifications and result.decisive is not None:
        events.append(gm.TraceEvent(
            "repair", (("precedent", result.decisive[0]),)))
    if result.decisive is not None:
        name, score, label = result.decisive
        events.append(gm.TraceEvent(
            "decisive", (("precedent", name), ("label", label),
                         ("score", score))))
    trace = gm.execute(result.scenario, library, config)
    events.extend(trace.events)
    _emit(events, config.output)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="normkit",
        description="Affordance inference, analogical precedent matching, "
                    "and action-script repair.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--rules", type=Path, help="rule file")
        p.add_argument("--scene", type=Path, help="scene file")
        p.add_argument("--cases", type=Path, help="case directory or file")
        p.add_argument("--scenario", type=Path, help="scenario file")
        p.add_argument("--k", type=int, help="retrieval depth (default 3)")
        p.add_argument("--depth-limit", type=int, dest="depth_limit",
                       help="modification search depth (default 4)")
        p.add_argument("--min-alpha", type=float, dest="min_alpha",
                       help="minimum affordance support (default 0.5)")
        p.add_argument("--policy", choices=["strict", "permissive"],
                       help="empty-library behavior (default strict)")
        p.add_argument("--output", choices=["text", "structured"],
                       help="trace format (default text)")
        p.add_argument("--config", type=Path, help="JSON config file")

    add_common(sub.add_parser("infer", help="derive affordances for a scene"))
    compare = sub.add_parser("compare", help="compare two case files")
    compare.add_argument("base", type=Path)
    compare.add_argument("target", type=Path)
    add_common(compare)
    add_common(sub.add_parser("check", help="run the moral-perception gate"))
    add_common(sub.add_parser("run-episode",
                              help="run a goal end to end"))
    return parser


def _config_from_args(args) -> "RunConfig":
    file_values = load_config_file(args.config) if args.config else None
    return build_config(
        file_values,
        rules=args.rules, scene=args.scene, cases=args.cases,
        scenario=args.scenario, k=args.k, depth_limit=args.depth_limit,
        min_alpha=args.min_alpha, policy=args.policy, output=args.output)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "infer":
            return cmd_infer(config)
        if args.command == "compare":
            return cmd_compare(args.base, args.target, config)
        if args.command == "check":
            return cmd_check(config)
        return cmd_run_episode(config)
    except MoralRejectionError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except NormkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
