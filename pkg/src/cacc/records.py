"""Result records (JSON / CSV) and the per-rule profile cache."""

from __future__ import annotations

import csv
import io
import json
import os
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional

from . import __version__
from .complexity import (
    ClassifierParams,
    ClassifyError,
    ClassLabel,
    classify,
    center_profiles,
    d_from_profiles,
    r_n_scan_table,
)
from .detectors import detect_additivity, nilpotency_probe, sensibility_report
from .evolve import check_budget, iter_tables
from .oracles import comparison_rule, three_state_rule
from .rules import RuleError, RuleTable, eca_from_wolfram, from_table

DEFAULT_CACHE_DIR = ".cacc-cache"
BUILTINS = {"@three-state": three_state_rule, "@comparison": comparison_rule}


class CacheMismatch(RuntimeError):
    pass


def parse_rule(spec: str) -> RuleTable:
    """An ECA code, a built-in name, or a rule file (``s r`` then the table)."""
    spec = spec.strip()
    if spec in BUILTINS:
        return BUILTINS[spec]()
    if spec.isdigit():
        return eca_from_wolfram(int(spec))
    path = Path(spec)
    if not path.is_file():
        raise RuleError(f"not an ECA code, built-in or rule file: {spec!r}")
    lines = [ln.split() for ln in path.read_text().splitlines() if ln.strip()]
    if len(lines) < 2 or len(lines[0]) != 2:
        raise RuleError(f"{spec}: expected 's r' on the first line and the table on the second")
    try:
        s, r = map(int, lines[0])
        entries = [int(x) for x in lines[1]]
    except ValueError as exc:
        raise RuleError(f"{spec}: {exc}") from None
    return from_table(s, r, entries)


def rule_id(rule: RuleTable) -> dict:
    return {
        "id": rule.label,
        "states": rule.states,
        "radius": rule.radius,
        "code": int(rule.label) if rule.is_eca and not rule.name else None,
    }


class ProfileCache:
    """``<dir>/<digest>.jsonl``; one line per level with the per-center profiles."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)

    def _path(self, rule: RuleTable) -> Path:
        return self.root / f"{rule.digest()}.jsonl"

    def load(self, rule: RuleTable) -> dict[int, list[tuple[int, int]]]:
        path = self._path(rule)
        out: dict[int, list[tuple[int, int]]] = {}
        if not path.exists():
            return out
        for line in path.read_text().splitlines():
            if not line.strip():
                continue
            item = json.loads(line)
            out[int(item["n"])] = [tuple(p) for p in item["profiles"]]
        return out

    def append(self, rule: RuleTable, entries: dict[int, list[tuple[int, int]]]) -> None:
        if not entries:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        with open(self._path(rule), "a") as fh:
            for n in sorted(entries):
                fh.write(json.dumps({"n": n, "profiles": [list(p) for p in entries[n]]}) + "\n")


def profiles_upto(
    rule: RuleTable,
    n_max: int,
    cache: Optional[ProfileCache] = None,
    verify: bool = False,
    budget: int | None = None,
) -> list[list[tuple[int, int]]]:
    cached = cache.load(rule) if cache else {}
    missing = [n for n in range(1, n_max + 1) if n not in cached]
    fresh: dict[int, list[tuple[int, int]]] = {}
    if missing or verify:
        last = n_max if verify else max(missing)
        check_budget(rule, last, budget)
        for table in iter_tables(rule, last, budget):
            if table.n in cached and not verify:
                continue
            prof = center_profiles(table)
            if table.n in cached and cached[table.n] != prof:
                raise CacheMismatch(
                    f"cache for rule {rule.label} at n={table.n}: {cached[table.n]} != {prof}"
                )
            fresh[table.n] = prof
    if cache:
        cache.append(rule, {n: p for n, p in fresh.items() if n not in cached})
    merged = {**cached, **fresh}
    return [merged[n] for n in range(1, n_max + 1)]


def label_to_dict(label: Optional[ClassLabel]) -> Optional[dict]:
    if label is None:
        return None
    return {
        "label": label.kind,
        "b": label.b,
        "period": label.period,
        "a1": None if label.a1 is None else str(label.a1),
        "a0": label.a0,
        "n0": label.n0,
        "growth_hint": label.growth_hint,
    }


def label_from_dict(d: Optional[dict]) -> Optional[ClassLabel]:
    if d is None:
        return None
    return ClassLabel(
        d["label"],
        b=d.get("b"),
        period=d.get("period"),
        a1=None if d.get("a1") is None else Fraction(d["a1"]),
        a0=d.get("a0"),
        n0=d.get("n0"),
        growth_hint=d.get("growth_hint"),
    )


def analyze_rule(
    rule: RuleTable,
    n_max: int,
    params: ClassifierParams = ClassifierParams(),
    detectors: bool = True,
    rn: bool = False,
    cache: Optional[ProfileCache] = None,
    verify_cache: bool = False,
    budget: int | None = None,
) -> dict:
    profiles = profiles_upto(rule, n_max, cache, verify_cache, budget)
    d = [d_from_profiles(p) for p in profiles]
    try:
        label = classify(d, params)
    except ClassifyError:
        label = None
    record = {
        "rule": rule_id(rule),
        "digest": rule.digest(),
        "n_max": n_max,
        "d": d,
        "class": label_to_dict(label),
        "params": {"min_n": params.min_n, "tail_len": params.tail_len},
        "detectors": None,
        "r_n": None,
        "version": __version__,
    }
    if detectors:
        wit = detect_additivity(rule)
        sens = sensibility_report(rule, n_max, budget=budget)
        nil = nilpotency_probe(rule, n_max, budget=budget)
        record["detectors"] = {
            "additive": None if wit is None else wit.to_dict(),
            "sensibility": sens.to_dict(),
            "nilpotent_from": nil.constant_from,
        }
    if rn:
        scans = []
        for table in iter_tables(rule, n_max, budget):
            sc = r_n_scan_table(table)
            scans.append(
                {
                    "n": sc.n,
                    "rows": list(sc.rows),
                    "cols": list(sc.cols),
                    "r_n": sc.r_n,
                    "argmax_p": sc.argmax_p,
                    "r_n_rows": sc.r_n_rows,
                    "argmax_p_rows": sc.argmax_p_rows,
                }
            )
        record["r_n"] = scans
    return record


def verify_record(record: dict, rule: RuleTable) -> bool:
    return record["digest"] == rule.digest() and len(record["d"]) == record["n_max"]


# --- CSV ---------------------------------------------------------------------

_CLASS_FIELDS = ["class", "b", "period", "a1", "a0", "n0", "growth_hint"]
_TAIL_FIELDS = [
    "min_n", "tail_len", "additive", "limited", "half_limited",
    "sens_total", "sens_left", "sens_right", "nilpotent_from", "r_n", "digest", "version",
]


def csv_header(n_max: int) -> list[str]:
    return ["id", "code", "states", "radius", "n_max"] + [f"d_{k}" for k in range(1, n_max + 1)] + _CLASS_FIELDS + _TAIL_FIELDS


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _ints(s: str) -> list[int]:
    return [int(x) for x in s.split()]


def record_to_row(rec: dict) -> dict[str, str]:
    row = {
        "id": rec["rule"]["id"],
        "code": _cell(rec["rule"]["code"]),
        "states": str(rec["rule"]["states"]),
        "radius": str(rec["rule"]["radius"]),
        "n_max": str(rec["n_max"]),
    }
    for k, v in enumerate(rec["d"], 1):
        row[f"d_{k}"] = str(v)
    cls = rec["class"] or {}
    row["class"] = cls.get("label", "")
    for key in _CLASS_FIELDS[1:]:
        row[key] = _cell(cls.get(key))
    row["min_n"] = str(rec["params"]["min_n"])
    row["tail_len"] = str(rec["params"]["tail_len"])
    det = rec["detectors"]
    if det is None:
        for key in ("additive", "limited", "half_limited", "sens_total", "sens_left", "sens_right", "nilpotent_from"):
            row[key] = ""
    else:
        w = det["additive"]
        row["additive"] = "" if w is None else json.dumps(w, separators=(",", ":"))
        sens = det["sensibility"]
        row["limited"] = _cell(sens["limited"])
        row["half_limited"] = _cell(sens["half_limited"])
        row["sens_total"] = " ".join(map(str, sens["total"]))
        row["sens_left"] = " ".join(map(str, sens["left"]))
        row["sens_right"] = " ".join(map(str, sens["right"]))
        row["nilpotent_from"] = _cell(det["nilpotent_from"])
    row["r_n"] = "" if rec["r_n"] is None else json.dumps(rec["r_n"], separators=(",", ":"))
    row["digest"] = rec["digest"]
    row["version"] = rec["version"]
    return row


def record_from_row(row: dict[str, str]) -> dict:
    def opt_int(key: str) -> Optional[int]:
        return int(row[key]) if row.get(key) else None

    n_max = int(row["n_max"])
    cls = None
    if row.get("class"):
        cls = {
            "label": row["class"],
            "b": opt_int("b"),
            "period": opt_int("period"),
            "a1": row["a1"] or None,
            "a0": opt_int("a0"),
            "n0": opt_int("n0"),
            "growth_hint": float(row["growth_hint"]) if row.get("growth_hint") else None,
        }
    det = None
    if row.get("limited"):
        det = {
            "additive": json.loads(row["additive"]) if row["additive"] else None,
            "sensibility": {
                "limited": row["limited"] == "true",
                "half_limited": row["half_limited"] == "true",
                "total": _ints(row["sens_total"]),
                "left": _ints(row["sens_left"]),
                "right": _ints(row["sens_right"]),
            },
            "nilpotent_from": opt_int("nilpotent_from"),
        }
    return {
        "rule": {
            "id": row["id"],
            "states": int(row["states"]),
            "radius": int(row["radius"]),
            "code": opt_int("code"),
        },
        "digest": row["digest"],
        "n_max": n_max,
        "d": [int(row[f"d_{k}"]) for k in range(1, n_max + 1)],
        "class": cls,
        "params": {"min_n": int(row["min_n"]), "tail_len": int(row["tail_len"])},
        "detectors": det,
        "r_n": json.loads(row["r_n"]) if row.get("r_n") else None,
        "version": row["version"],
    }


def records_to_csv(records: Iterable[dict]) -> str:
    records = list(records)
    n_max = max((r["n_max"] for r in records), default=0)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=csv_header(n_max), lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow(record_to_row(rec))
    return buf.getvalue()


def records_from_csv(text: str) -> list[dict]:
    return [record_from_row(row) for row in csv.DictReader(io.StringIO(text))]


def records_to_json(records) -> str:
    return json.dumps(records, indent=2) + "\n"
