"""Command-line interface: ``listlab <subcommand> ...``.

Exit codes: 0 success, 2 invalid input, 3 budget exceeded, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .compression import CompressionTrace, compress_universe, replay_trace
from .errors import InvalidArgument, ResourceLimit, StageFailure, VerificationFailure
from .experiments import montecarlo_color_tail, montecarlo_expected_weight
from .generators import (
    LIST_MODES,
    as_multipartite,
    erdos_parts2,
    k33,
    lemma3,
    ohba_counterexample,
    planted_system,
    random_multipartite,
)
from .instance import InstanceFile
from .pipeline import PipelineConfig, plan_split, solve_via_theorem1
from .solver import chi_list_exact, find_acceptable_coloring, find_bad_assignment, is_choosable, verify_coloring
from .sweep import rows_to_csv, ohba_sweep

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_VERIFY = 0, 2, 3, 4

log = logging.getLogger("listlab")


def _emit(args, payload, csv_text: str | None = None) -> None:
    if args.format == "csv" and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str) -> InstanceFile:
    try:
        return InstanceFile.load(path)
    except OSError as exc:
        raise InvalidArgument(f"cannot read {path}: {exc}") from None


def _coloring_json(coloring) -> dict | None:
    return None if coloring is None else {str(v): c for v, c in sorted(coloring.items())}


def cmd_generate(args) -> int:
    kind = args.kind
    if kind == "k33":
        inst = k33(args.lists or "bad", seed=args.seed)
    elif kind == "erdos-parts2":
        inst = erdos_parts2(args.k, args.lists or "range", seed=args.seed, universe_size=args.universe)
    elif kind == "ohba-counterexample":
        inst = ohba_counterexample(args.k, args.lists or "range", seed=args.seed, universe_size=args.universe)
    elif kind == "lemma3":
        inst = lemma3(args.C, args.m, args.t, args.delta, seed=args.seed, n=args.n)
    elif kind == "random-multipartite":
        if not args.sizes:
            raise InvalidArgument("random-multipartite needs --sizes")
        inst = random_multipartite(args.sizes, args.k, args.universe, seed=args.seed)
    else:  # pragma: no cover - argparse restricts the choices
        raise InvalidArgument(f"unknown kind {kind}")
    if args.out:
        inst.save(args.out)
    else:
        sys.stdout.write(inst.to_json())
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    g, lists = inst.graph(), inst.list_map()
    coloring = find_acceptable_coloring(g, lists, max_nodes=args.budget or 10**7)
    if coloring is not None and not verify_coloring(g, lists, coloring):  # pragma: no cover
        raise VerificationFailure("solver returned an unacceptable coloring")
    _emit(args, {"colorable": coloring is not None, "coloring": _coloring_json(coloring)})
    return EXIT_OK


def cmd_chi_list(args) -> int:
    g = _load(args.instance).graph()
    budget = {"workers": args.threads}
    if args.budget:
        budget["max_assignments"] = args.budget
    if args.k is not None:
        res = is_choosable(g, args.k, **budget)
        witness = None if res.witness is None else {str(v): sorted(l) for v, l in sorted(res.witness.items())}
        _emit(args, {"k": args.k, "choosable": res.choosable, "checked": res.checked, "witness": witness})
    else:
        _emit(args, {"chi_l": chi_list_exact(g, **budget)})
    return EXIT_OK


def cmd_bad_search(args) -> int:
    inst = _load(args.instance)
    g = inst.graph()
    found = find_bad_assignment(g, args.k, budget=args.budget or 10**6, seed=args.seed, universe_size=args.universe)
    payload: dict = {"k": args.k, "found": found is not None}
    if found is not None:
        out = InstanceFile(inst.parts, [sorted(found[v]) for v in g.vertices], inst.edges,
                           {"generator": "bad-search", "source": inst.metadata, "k": args.k, "seed": args.seed})
        payload["instance"] = out.to_dict()
    _emit(args, payload)
    return EXIT_OK


def cmd_compress(args) -> int:
    inst = _load(args.instance)
    g, lists = inst.graph(), inst.list_map()
    if args.replay:
        trace = CompressionTrace.from_dict(json.loads(Path(args.replay).read_text()))
        final = replay_trace(g, lists, trace)
        _emit(args, {"valid": True, "final_universe": trace.final_universe,
                     "lists": {str(v): sorted(final[v]) for v in g.vertices}})
        return EXIT_OK
    final, trace = compress_universe(g, lists)
    _emit(args, {"lists": {str(v): sorted(final[v]) for v in g.vertices}, "trace": trace.to_dict()})
    return EXIT_OK


def _config(args) -> PipelineConfig:
    return PipelineConfig(
        epsilon=args.epsilon, m=args.m, retry_limit=args.retry_limit, seed=args.seed,
        solver_fallback=not args.no_fallback,
    )


def cmd_pipeline(args) -> int:
    inst = _load(args.instance)
    report = solve_via_theorem1(inst.graph(), inst.list_map(), _config(args))
    _emit(args, report.to_dict(timing=not args.no_timing))
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    inst = _load(args.instance)
    mp, system = as_multipartite(inst), planted_system(inst)
    plan = plan_split(mp, system, _config(args)) if args.split else None
    if args.color is None:
        report = montecarlo_expected_weight(mp, system, args.trials, seed=args.seed, plan=plan)
    else:
        report = montecarlo_color_tail(mp, system, args.color, args.threshold, args.trials,
                                       seed=args.seed, plan=plan, delta=args.epsilon / 2)
    _emit(args, report.to_dict(timing=not args.no_timing))
    return EXIT_OK


def cmd_sweep(args) -> int:
    budget = {"workers": args.threads}
    if args.budget:
        budget["max_assignments"] = args.budget
    rows = ohba_sweep(args.max_n, conjecture_only=not args.all, **budget)
    _emit(args, [r.to_dict(timing=not args.no_timing) for r in rows], rows_to_csv(rows, timing=not args.no_timing))
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _load(args.instance)
    data = json.loads(Path(args.coloring).read_text())
    if isinstance(data, dict) and "coloring" in data:
        data = data["coloring"]
    if not isinstance(data, dict):
        raise InvalidArgument("coloring file must map vertex ids to colors")
    coloring = {int(v): int(c) for v, c in data.items()}
    verdict = verify_coloring(inst.graph(), inst.list_map(), coloring)
    _emit(args, {"ok": verdict.ok, "reason": verdict.reason, "vertex": verdict.vertex,
                 "edge": None if verdict.edge is None else list(verdict.edge)})
    return EXIT_OK if verdict.ok else EXIT_VERIFY


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    def default(value):
        return argparse.SUPPRESS if suppress else value

    p.add_argument("--seed", type=int, default=default(0))
    p.add_argument("--budget", type=int, default=default(None), help="search budget (trials, assignments or nodes)")
    p.add_argument("--threads", type=int, default=default(int(os.environ.get("LISTLAB_THREADS", "1"))))
    p.add_argument("--format", choices=["json", "csv"], default=default("json"))
    p.add_argument("--out", default=default(None))
    p.add_argument("-v", "--verbose", action="store_true", default=default(False))


def build_parser() -> argparse.ArgumentParser:
    """Global flags work before or after the subcommand."""
    # subcommand copies use SUPPRESS so they only override when given
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)

    parser = argparse.ArgumentParser(prog="listlab", description="List-coloring laboratory.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write an instance file")
    p.add_argument("kind", choices=["k33", "erdos-parts2", "ohba-counterexample", "lemma3", "random-multipartite"])
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--lists", choices=LIST_MODES, default=None)
    p.add_argument("--universe", type=int, default=None)
    p.add_argument("--C", type=int, default=60)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--t", type=int, default=6)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--sizes", type=int, nargs="+")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", parents=[common], help="find an acceptable coloring")
    p.add_argument("instance")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("chi-list", parents=[common], help="list-chromatic number, or test one k")
    p.add_argument("instance")
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_chi_list)

    p = sub.add_parser("bad-search", parents=[common], help="search for a bad k-list assignment")
    p.add_argument("instance")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--universe", type=int, default=None)
    p.set_defaults(func=cmd_bad_search)

    p = sub.add_parser("compress", parents=[common], help="shrink the universe of a bad assignment")
    p.add_argument("instance")
    p.add_argument("--replay", default=None, metavar="TRACE", help="re-validate a saved trace instead")
    p.set_defaults(func=cmd_compress)

    def pipeline_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--epsilon", type=float, default=0.5)
        p.add_argument("--m", type=int, default=10)
        p.add_argument("--retry-limit", type=int, default=1000)
        p.add_argument("--no-fallback", action="store_true")
        p.add_argument("--no-timing", action="store_true", help="omit timings so reports compare byte for byte")

    p = sub.add_parser("pipeline", parents=[common], help="run the reduction pipeline")
    p.add_argument("instance")
    pipeline_flags(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("montecarlo", parents=[common], help="sample the weight of the uncolored vertices")
    p.add_argument("instance")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--color", type=int, default=None, help="measure the tail for this color")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--split", action="store_true", help="use the big/small split plan")
    pipeline_flags(p)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("sweep", parents=[common], help="choosability of small complete multipartite graphs")
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--all", action="store_true", help="include vectors with n > 2 chi + 1")
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="check a coloring against an instance")
    p.add_argument("instance")
    p.add_argument("coloring")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InvalidArgument, StageFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceLimit as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
