"""Command-line entry point.

Exit codes: 0 success, 1 input error (including a failed --verify-cache),
2 resource error (memory budget or operator-search limit).
"""

from __future__ import annotations

import argparse
import datetime
import itertools
import json
import os
import platform
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

from . import __version__
from .complexity import ClassifierParams, ClassifyError, r_n_scan
from .detectors import detect_additivity, nilpotency_probe, sensibility_report
from .evolve import BudgetError, EvolveError, spacetime, tabulate
from .matrices import MatrixError, StateMatrix, build_center_matrix, build_partition_matrix, netpbm_bytes
from .records import (
    DEFAULT_CACHE_DIR,
    CacheMismatch,
    ProfileCache,
    analyze_rule,
    parse_rule,
    records_to_csv,
    records_to_json,
)
from .rules import RuleError, representatives


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _emit(text: str | bytes, out: Optional[str]) -> None:
    if out:
        mode = "wb" if isinstance(text, bytes) else "w"
        with open(out, mode) as fh:
            fh.write(text)
    elif isinstance(text, bytes):
        sys.stdout.buffer.write(text)
    else:
        sys.stdout.write(text)


def _cache(args) -> Optional[ProfileCache]:
    if args.no_cache:
        return None
    return ProfileCache(args.cache_dir or os.environ.get("CACC_CACHE_DIR") or DEFAULT_CACHE_DIR)


def _params(args) -> ClassifierParams:
    return ClassifierParams(tail_len=args.tail_len, min_n=args.min_n)


def _stamp(records: list[dict], args) -> None:
    if not args.stamp:
        return
    meta = {
        "time": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "python": platform.python_version(),
    }
    for rec in records:
        rec["stamp"] = meta


def _format_records(records: list[dict], fmt: str, single: bool) -> str:
    if fmt == "csv":
        return records_to_csv(records)
    return records_to_json(records[0] if single else records)


def _budget(args) -> int:
    return args.budget_mib * 2**20


def cmd_analyze(args) -> int:
    rule = parse_rule(args.rule)
    rec = analyze_rule(
        rule, args.n_max, _params(args),
        detectors=not args.skip_detectors, rn=args.rn,
        cache=_cache(args), verify_cache=args.verify_cache, budget=_budget(args),
    )
    _stamp([rec], args)
    _emit(_format_records([rec], args.format, single=True), args.out)
    return 0


def _analyze_code(job) -> dict:
    code, n_max, params, detectors, cache_dir, verify, budget = job
    cache = ProfileCache(cache_dir) if cache_dir else None
    return analyze_rule(
        parse_rule(str(code)), n_max, params,
        detectors=detectors, cache=cache, verify_cache=verify, budget=budget,
    )


def cmd_classify_all(args) -> int:
    cache = _cache(args)
    jobs = [
        (code, args.n_max, _params(args), not args.skip_detectors,
         str(cache.root) if cache else None, args.verify_cache, _budget(args))
        for code in representatives()
    ]
    workers = args.jobs or os.cpu_count() or 1
    if workers == 1:
        records = [_analyze_code(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_analyze_code, jobs))
    records.sort(key=lambda r: r["rule"]["code"])
    _stamp(records, args)
    _emit(_format_records(records, args.format, single=False), args.out)
    return 0


def cmd_sequence(args) -> int:
    rule = parse_rule(args.rule)
    rec = analyze_rule(rule, args.n_max, _params(args), detectors=False,
                       cache=_cache(args), verify_cache=args.verify_cache, budget=_budget(args))
    _emit(" ".join(map(str, rec["d"])) + "\n", args.out)
    return 0


def cmd_render(args) -> int:
    rule = parse_rule(args.rule)
    table = tabulate(rule, args.n, _budget(args))
    if args.p is not None:
        m = build_partition_matrix(table, args.p)
    else:
        m = build_center_matrix(table, args.center)
    _emit(netpbm_bytes(m), args.out)
    return 0


def _parse_word(text: str, states: int) -> list[int]:
    cells = [int(ch) for ch in text.replace(",", "").replace(" ", "")]
    if any(not 0 <= c < states for c in cells):
        raise UsageError(f"word cells must lie in [0, {states})")
    return cells


def cmd_spacetime(args) -> int:
    rule = parse_rule(args.rule)
    if args.word:
        word = _parse_word(args.word, rule.states)
    else:
        width = 2 * rule.radius * args.steps + 1
        rng = random.Random(args.seed)
        word = [rng.randrange(rule.states) for _ in range(width)]
    diagram = spacetime(rule, word, args.steps)
    _emit(netpbm_bytes(StateMatrix(diagram.padded(), rule.states)), args.out)
    return 0


def cmd_partition_scan(args) -> int:
    rule = parse_rule(args.rule)
    n_values = range(args.n, (args.n_max or args.n) + 1)
    scans = []
    for n in n_values:
        sc = r_n_scan(rule, n, _budget(args))
        scans.append({
            "rule": rule.label, "n": n, "rows": list(sc.rows), "cols": list(sc.cols),
            "r_n": sc.r_n, "argmax_p": sc.argmax_p,
            "r_n_rows": sc.r_n_rows, "argmax_p_rows": sc.argmax_p_rows,
        })
    if args.format == "csv":
        lines = ["rule,n,r_n,argmax_p,r_n_rows,argmax_p_rows,rows,cols"]
        for s in scans:
            lines.append(",".join([
                s["rule"], str(s["n"]), str(s["r_n"]), str(s["argmax_p"]),
                str(s["r_n_rows"]), str(s["argmax_p_rows"]),
                " ".join(map(str, s["rows"])), " ".join(map(str, s["cols"])),
            ]))
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(json.dumps(scans, indent=2) + "\n", args.out)
    return 0


def cmd_detect(args) -> int:
    rule = parse_rule(args.rule)
    if args.kind == "additivity":
        wit = detect_additivity(rule)
        out = {"rule": rule.label, "additive": wit is not None, "witness": wit and wit.to_dict()}
    elif args.kind == "sensibility":
        rep = sensibility_report(rule, args.n_max, budget=_budget(args))
        out = {"rule": rule.label, "n_max": args.n_max, **rep.to_dict(),
               "essential": [sorted(lv.essential) for lv in rep.levels]}
    else:
        rep = nilpotency_probe(rule, args.n_max, budget=_budget(args))
        out = {"rule": rule.label, "n_max": rep.n_max, "constant_from": rep.constant_from,
               "value": rep.value, "experimental": True}
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return 0


def cmd_oracle_check(args) -> int:
    from . import oracles
    from .complexity import d_n
    from .matrices import profile
    from .rules import eca_from_wolfram, index_word

    results = []
    for n in range(1, args.n_max + 1):
        results.append((f"rule132 d_{n}", d_n(eca_from_wolfram(132), n) == oracles.rule132_dn(n)))
        results.append((f"rule23 d_{n}", d_n(eca_from_wolfram(23), n) == oracles.rule23_dn(n)))
    r105 = eca_from_wolfram(105)
    results.append(("rule105 formula", all(
        r105(*index_word(i, 3, 2)) == oracles.rule105_formula(*index_word(i, 3, 2)) for i in range(8))))
    three = oracles.three_state_rule()
    for n in range(1, min(args.n_max, 4) + 1):
        t = tabulate(three, n)
        ok = all(
            oracles.three_state_predict(*oracles.three_state_context(index_word(i, 2 * n + 1, 3)), n)
            == t.entries[i]
            for i in range(t.entries.size)
        )
        results.append((f"three-state predict n={n}", ok))
    cmp_rule = oracles.comparison_rule()
    for n in range(1, min(args.n_max, 4) + 1):
        t = tabulate(cmp_rule, n)
        ok = all(
            t(list(u) + [1] + [oracles.tilde(x) for x in v]) == oracles.comparison_expected(u, v)
            for u in itertools.product((0, 1), repeat=n)
            for v in itertools.product((0, 1), repeat=n)
        )
        ok = ok and profile(build_center_matrix(t, 1)).distinct_rows >= 2**n
        results.append((f"comparison n={n}", ok))
    for name, ok in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return 0 if all(ok for _, ok in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cacc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"cacc {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, n_default: int = 12):
        sp.add_argument("--n-max", type=int, default=n_default)
        sp.add_argument("--out", help="write to this path instead of stdout")
        sp.add_argument("--budget-mib", type=int, default=512, help="tabulation memory budget")

    def cached(sp):
        sp.add_argument("--cache-dir", help=f"profile cache (default $CACC_CACHE_DIR or {DEFAULT_CACHE_DIR})")
        sp.add_argument("--no-cache", action="store_true")
        sp.add_argument("--verify-cache", action="store_true", help="recompute and compare cached levels")
        sp.add_argument("--min-n", type=int, default=ClassifierParams.min_n)
        sp.add_argument("--tail-len", type=int, default=ClassifierParams.tail_len)
        sp.add_argument("--stamp", action="store_true", help="add time/platform metadata")

    sp = sub.add_parser("analyze", help="d_n sequence, class and detectors for one rule")
    sp.add_argument("--rule", required=True, help="ECA code, @three-state, @comparison or rule file")
    common(sp)
    cached(sp)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--rn", action="store_true", help="include partition scans for every n")
    sp.add_argument("--skip-detectors", action="store_true")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("classify-all", help="analyze all 88 ECA representatives")
    common(sp)
    cached(sp)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--jobs", type=int, default=None)
    sp.add_argument("--skip-detectors", action="store_true")
    sp.set_defaults(func=cmd_classify_all)

    sp = sub.add_parser("sequence", help="print d_1 .. d_n_max")
    sp.add_argument("--rule", required=True)
    common(sp)
    cached(sp)
    sp.set_defaults(func=cmd_sequence)

    sp = sub.add_parser("render", help="write M_c^n (or M_p^n with --p) as PBM/PGM")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--center", type=int, default=0)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--out")
    sp.add_argument("--budget-mib", type=int, default=512)
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("spacetime", help="write a space-time diagram as PBM/PGM, time upward")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--word", help="initial cells, e.g. 0110100")
    sp.add_argument("--seed", type=int, default=0, help="random initial word when --word is absent")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_spacetime)

    sp = sub.add_parser("partition-scan", help="distinct rows/cols of M_p^n over all splits p")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--n-max", type=int, default=None, help="scan n .. n_max")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--out")
    sp.add_argument("--budget-mib", type=int, default=512)
    sp.set_defaults(func=cmd_partition_scan)

    sp = sub.add_parser("detect", help="additivity, sensibility or nilpotency")
    sp.add_argument("kind", choices=("additivity", "sensibility", "nilpotency"))
    sp.add_argument("--rule", required=True)
    common(sp)
    sp.set_defaults(func=cmd_detect)

    sp = sub.add_parser("oracle-check", help="closed forms against brute force")
    sp.add_argument("--n-max", type=int, default=8)
    sp.set_defaults(func=cmd_oracle_check)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (RuleError, EvolveError, MatrixError, ClassifyError, ValueError) as exc:
        print(f"cacc: error: {exc}", file=sys.stderr)
        return 1
    except (BudgetError, MemoryError) as exc:
        print(f"cacc: resource limit: {exc}", file=sys.stderr)
        return 2
    except CacheMismatch as exc:
        print(f"cacc: cache verification failed: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
