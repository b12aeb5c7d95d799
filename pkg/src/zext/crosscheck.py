"""Run every applicable solver against the exhaustive oracle over a corpus."""

from __future__ import annotations

import csv
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from . import dispatch
from .instance import INF, Instance
from .io import load
from .metric import MetricTree, NoExtension
from .oracle import OracleRefused, brute_solve
from .relaxation import NotInterpolating, build_networks

CONTRACTION_RETRIES = 3
BENCH_COLUMNS = ("instance", "algorithm", "seed", "n", "m", "|D|", "k", "q", "rho", "gap", "cost",
                 "crossings", "branches", "ms", "verified")


@dataclass
class RunRecord:
    instance: str
    algorithm: str
    seed: int
    answer: object
    expected: object
    crossings: int | None
    branches: int | None
    ms: float
    verified: bool
    status: str  # pass | fail | miss | skip
    note: str = ""


def _fmt(x):
    return "inf" if x is INF else x


def _target(inst: Instance, algorithm: str):
    """Oracle answer for what ``algorithm`` promises to return."""
    if algorithm in ("pushing", "contractions"):
        sol = brute_solve(inst, kmax=inst.k)
        return INF if sol is INF else sol.cost
    sol = brute_solve(inst)
    if sol is INF or (inst.q is not None and sol.cost > inst.q):
        return INF
    return sol.cost


def _one(inst: Instance, name: str, algorithm: str, seed: int, eps: float) -> RunRecord:
    t0 = time.perf_counter()
    try:
        out = dispatch.run(inst, algorithm, seed=seed, eps=eps)
    except (NotInterpolating, NoExtension) as exc:
        return RunRecord(name, algorithm, seed, None, None, None, None, 0.0, False, "skip", str(exc))
    ms = (time.perf_counter() - t0) * 1000
    exp = _target(inst, algorithm)
    got = out.cost
    sol = out.solution
    rec = RunRecord(name, algorithm, seed, _fmt(got), _fmt(exp),
                    None if sol is None else sol.crossings, out.stats.get("branches"), ms,
                    out.verified, "pass")
    if not out.verified:
        rec.status, rec.note = "fail", "reported cost does not match the labelling"
    elif got != exp:
        if algorithm == "contractions" and got > exp:
            rec.status, rec.note = "miss", f"missed the optimum at seed {seed}"
        else:
            rec.status, rec.note = "fail", f"expected {_fmt(exp)}"
    return rec


def check_instance(inst: Instance, name: str, seed: int = 0, eps: float = 0.01) -> list[RunRecord]:
    recs = []
    try:
        brute_solve(inst, cap=2_000_000)
    except OracleRefused as exc:
        return [RunRecord(name, "brute", seed, None, None, None, None, 0.0, False, "skip", str(exc))]
    exp = inst.meta.get("expected", {}).get("optimum")
    if exp is not None:
        sol = brute_solve(inst)
        got = "inf" if sol is INF else sol.cost
        recs.append(RunRecord(name, "brute", seed, got, exp, None, 1, 0.0, True,
                              "pass" if got == exp else "fail",
                              "" if got == exp else "stored expected value disagrees with the oracle"))
    if inst.is_tree and not inst.unary:
        full = MetricTree(inst.tree.nodes, inst.tree.edges, inst.tree.nodes)
        rel = brute_solve(Instance(inst.graph, full)).cost
        val = build_networks(inst).value
        recs.append(RunRecord(name, "relaxed-value", seed, val, rel, None, None, 0.0, True,
                              "pass" if val == rel else "fail"))
    for alg in dispatch.applicable(inst):
        rec = _one(inst, name, alg, seed, eps)
        if rec.status == "miss":
            # a Monte Carlo miss is tolerated if another seed recovers the optimum
            for extra in range(1, CONTRACTION_RETRIES + 1):
                again = _one(inst, name, alg, seed + extra, eps)
                if again.status == "pass":
                    break
            else:
                rec.status = "fail"
                rec.note += "; no seed recovered it"
        recs.append(rec)
    return recs


def corpus_files(corpus) -> list[Path]:
    return sorted(Path(corpus).glob("*.json"))


def crosscheck(corpus, seed: int = 0, eps: float = 0.01) -> list[RunRecord]:
    out = []
    for path in corpus_files(corpus):
        out += check_instance(load(path), path.stem, seed, eps)
    return out


def bench(corpus, csv_path, seed: int = 0, eps: float = 0.01) -> list[dict]:
    """Time every applicable solver on every instance and write the CSV."""
    rows = []
    for path in corpus_files(corpus):
        inst = load(path)
        rho = None
        if inst.is_tree and not inst.unary:
            rho = build_networks(inst).value
        for alg in ["brute"] + dispatch.applicable(inst):
            t0 = time.perf_counter()
            try:
                out = dispatch.run(inst, alg, seed=seed, eps=eps)
            except (NotInterpolating, NoExtension, OracleRefused):
                continue
            ms = (time.perf_counter() - t0) * 1000
            sol = out.solution
            r = out.stats.get("rho0", rho)
            rows.append({"instance": path.stem, "algorithm": alg, "seed": seed,
                         "n": inst.graph.n, "m": inst.graph.m, "|D|": len(inst.labels),
                         "k": "" if inst.k is None else inst.k, "q": "" if inst.q is None else inst.q,
                         "rho": "" if r is None else r,
                         "gap": "" if r is None or inst.q is None else inst.q - r,
                         "cost": "inf" if sol is None else sol.cost,
                         "crossings": "" if sol is None else sol.crossings,
                         "branches": out.stats.get("branches", ""), "ms": f"{ms:.3f}",
                         "verified": out.verified})
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    return rows


def summary(records: list[RunRecord]) -> dict:
    out: dict = {}
    for r in records:
        out[r.status] = out.get(r.status, 0) + 1
    return out


def as_dicts(records: list[RunRecord]) -> list[dict]:
    return [asdict(r) for r in records]
