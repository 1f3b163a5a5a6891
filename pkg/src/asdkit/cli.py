"""Command-line front end: decompose, separate, verify, generate, bench.

Machine output is JSON on stdout (or --out); human-readable summaries go
to stderr.  Exit codes: 0 ok, 1 verification failed, 2 undecided,
3 usage or infeasible input.  Seeds default to 0, never the clock, so
identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from .config import EngineConfig
from .coloring import vizing_color
from .decomp import Decomposition
from .engine import asd
from .errors import AsdError
from .graphs import (GeneratorSpec, Graph, format_graph, generate,
                     parse_graph, gnm)
from .separator import SeparationInstance, separate
from .verifier import verify_decomposition

OK, VERIFY_FAILED, UNDECIDED, USAGE = 0, 1, 2, 3


def _config(args) -> EngineConfig:
    make = EngineConfig.paper if args.profile == "paper" else EngineConfig.desk
    over = {"seed": args.seed}
    if getattr(args, "fallback_m", None) is not None:
        over["fallback_m"] = args.fallback_m
    if getattr(args, "retry_budget", None) is not None:
        over["retry_budget"] = args.retry_budget
    return make(**over)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=1, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_decompose(args) -> int:
    try:
        g = parse_graph(Path(args.input).read_text())
    except (OSError, AsdError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return USAGE
    cfg = _config(args)
    try:
        d = asd(g, cfg)
    except AsdError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return USAGE
    _emit(d.as_dict(), args.out)
    print(f"decomposed {g.size} edges into {len(d.parts)} parts",
          file=sys.stderr)
    if args.verify:
        rep = verify_decomposition(g, d)
        if rep.undecided:
            print("verification undecided", file=sys.stderr)
            return UNDECIDED
        if not rep.ok:
            print(f"verification failed: {rep.failures[:3]}", file=sys.stderr)
            return VERIFY_FAILED
        print("verified", file=sys.stderr)
    return OK


def cmd_separate(args) -> int:
    try:
        targets = tuple(int(x) for x in args.targets.split(","))
        inst = SeparationInstance(args.m, targets)
        res = separate(inst, _config(args))
    except (ValueError, AsdError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return USAGE
    _emit(res.as_dict(), args.out)
    return OK


def cmd_verify(args) -> int:
    try:
        g = parse_graph(Path(args.graph).read_text())
        d = Decomposition.from_json(Path(args.decomposition).read_text(), g)
    except (OSError, AsdError, ValueError, KeyError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return USAGE
    rep = verify_decomposition(g, d)
    _emit(rep.as_dict(), args.out)
    if rep.undecided and not rep.failures:
        return UNDECIDED
    return OK if rep.ok else VERIFY_FAILED


def cmd_generate(args) -> int:
    try:
        params = tuple(int(x) for x in args.params)
        g = generate(GeneratorSpec(args.family, params, args.seed))
    except (ValueError, AsdError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return USAGE
    text = format_graph(g)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return OK


def _bench_coloring(seeds: int) -> dict:
    cases = []
    for s in range(seeds):
        g = gnm(60 + 10 * (s % 5), 150 + 30 * (s % 7), seed=s)
        t0 = time.perf_counter()
        fam = vizing_color(g)
        cases.append({
            "seed": s,
            "edges": g.size,
            "classes": len(fam.matchings),
            "max_degree": g.max_degree(),
            "seconds": round(time.perf_counter() - t0, 6),
        })
    return {"suite": "coloring", "cases": cases}


def _bench_asd_desk(seeds: int) -> dict:
    cases = []
    ok = 0
    for s in range(seeds):
        g = gnm(14 + (s % 4), 21, seed=s)
        t0 = time.perf_counter()
        try:
            d = asd(g, EngineConfig.desk(seed=s))
            good = verify_decomposition(g, d).ok
        except AsdError:
            good = False
        ok += bool(good)
        cases.append({"seed": s, "ok": bool(good),
                      "seconds": round(time.perf_counter() - t0, 6)})
    return {"suite": "asd-desk", "success_rate": ok / max(seeds, 1),
            "cases": cases}


def _bench_separator_oracle(seeds: int) -> dict:
    # Agreement counts for full enumerations at small m; `seeds` caps m.
    from .separator import _exact_separate
    agree = []
    for m in range(1, min(8, 1 + seeds) + 1):
        total = m * (m + 1) // 2
        count = 0

        def parts_of(left, maxv, acc):
            nonlocal count
            if left == 0:
                tagged = sorted(((v, i) for i, v in enumerate(acc)),
                                key=lambda t: (-t[0], t[1]))
                got = _exact_separate(m, tagged)
                try:
                    res = separate(SeparationInstance(m, tuple(acc)))
                    solved = True
                except AsdError:
                    solved = False
                assert solved == (got is not None)
                count += 1
                return
            for v in range(1, min(left, maxv) + 1):
                parts_of(left - v, v, acc + [v])

        parts_of(total, total, [])
        agree.append({"m": m, "instances": count})
    return {"suite": "separator-oracle", "agreement": agree}


_SUITES = {
    "coloring": _bench_coloring,
    "asd-desk": _bench_asd_desk,
    "separator-oracle": _bench_separator_oracle,
}


def cmd_bench(args) -> int:
    if args.suite not in _SUITES:
        print(f"error: unknown suite {args.suite!r}; "
              f"pick from {sorted(_SUITES)}", file=sys.stderr)
        return USAGE
    _emit(_SUITES[args.suite](args.seeds), args.out)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="asdkit",
        description="Construct and verify ascending subgraph decompositions.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--profile", choices=("desk", "paper"), default="desk")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None)

    d = sub.add_parser("decompose", help="decompose a graph file")
    d.add_argument("input")
    d.add_argument("--verify", action="store_true")
    d.add_argument("--fallback-m", dest="fallback_m", type=int, default=None)
    d.add_argument("--retry-budget", dest="retry_budget", type=int,
                   default=None)
    common(d)
    d.set_defaults(func=cmd_decompose)

    s = sub.add_parser("separate", help="partition [m] into prescribed sums")
    s.add_argument("m", type=int)
    s.add_argument("targets", help="comma-separated target sums")
    common(s)
    s.set_defaults(func=cmd_separate)

    v = sub.add_parser("verify", help="verify a decomposition JSON")
    v.add_argument("graph")
    v.add_argument("decomposition")
    common(v)
    v.set_defaults(func=cmd_verify)

    ggen = sub.add_parser("generate", help="emit a generator-family graph")
    ggen.add_argument("family")
    ggen.add_argument("params", nargs="*")
    common(ggen)
    ggen.set_defaults(func=cmd_generate)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("suite")
    b.add_argument("--seeds", type=int, default=5)
    common(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
