"""Experiment driver: one record per (algorithm, instance, seed), plus sweeps.

Records are plain dicts with a fixed key order, so JSON-lines output is
byte-stable for a fixed configuration. Each record embeds the fingerprint
of the configuration that produced it and enough of its outputs for
:func:`verify_record` to re-check them against the oracles later.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .config import CUT_CHECK_MAX_N, MFL_ORACLE_MAX_N, SimConfig
from .engine import Clique
from .errors import ConfigError
from .facility import solve_mfl
from .metric import Instance, InstanceSpec, generate, ids_to_mask, threshold_graph
from .mis import low_dimensional_mis
from .mst import check_cut_preservation, check_layer_structure, check_light_connectivity, mst_approximation
from .oracles import brute_force_mfl, exact_mst, verify_independent, verify_mis, verify_t_ruling
from .results import FacilitySolution
from .ruling import three_ruling_set

log = logging.getLogger(__name__)

ALGORITHMS = ("ruling3", "mis", "mst", "mfl-general", "mfl-doubling")
INSTANCE_KIND = {"ruling3": "gnp", "mis": "euclidean", "mst": "euclidean", "mfl-general": "euclidean", "mfl-doubling": "euclidean"}


@dataclass(frozen=True)
class ExperimentConfig:
    algo: str
    n: int
    seeds: tuple[int, ...] = (0,)
    dim: int = 2
    p: float = 0.1
    radius: float = 0.05
    sim: SimConfig = field(default_factory=SimConfig)
    mst_ratio_bound: float = 12.0
    mfl_ratio_bound: float = 20.0

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ConfigError(f"algo must be one of {', '.join(ALGORITHMS)}")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if any(s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative")
        if self.radius < 0:
            raise ConfigError("radius must be >= 0")
        # InstanceSpec validates dim and p
        self.spec(0)

    def spec(self, seed: int) -> InstanceSpec:
        try:
            return InstanceSpec(INSTANCE_KIND[self.algo], self.n, seed, dim=self.dim, p=self.p)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def canonical(self) -> dict:
        """Everything that influences a record except the seed."""
        d = asdict(self)
        d.pop("seeds")
        d["sim"] = self.sim.to_dict()
        return d

    @property
    def fingerprint(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _phases(ledger) -> dict:
    return {label: {"rounds": r, "messages": m} for label, (r, m) in ledger.phases.items()}


def _head(cfg: ExperimentConfig, seed: int) -> dict:
    return {"algo": cfg.algo, "n": cfg.n, "seed": seed, "fingerprint": cfg.fingerprint, "config": cfg.canonical()}


def config_from_record(record: dict) -> ExperimentConfig:
    """Rebuild the configuration embedded in a record and check its fingerprint."""
    d = dict(record["config"])
    sim = SimConfig(**d.pop("sim"))
    cfg = ExperimentConfig(seeds=(int(record["seed"]),), sim=sim, **d)
    if cfg.fingerprint != record["fingerprint"]:
        raise ConfigError("record fingerprint does not match its embedded config")
    return cfg


# ---------------------------------------------------------------- per algo

def _run_ruling3(cfg, inst: Instance, seed: int) -> dict:
    clique = Clique(cfg.n, cfg.sim, seed)
    res = three_ruling_set(inst.graph, clique)
    ind = verify_independent(inst.graph, res.members)
    rul = verify_t_ruling(inst.graph, res.members, 3)
    rec = _head(cfg, seed)
    rec.update(
        t_param=3,
        rounds=clique.ledger.rounds,
        messages=clique.ledger.messages,
        rounds_by_phase=_phases(clique.ledger),
        selected=int(res.selected.sum()),
        selected_edges=res.selected_edges,
        ruling_set_size=res.size,
        verified={"independent": ind.passed, "ruling_distance": rul.passed},
        passed=ind.passed and rul.passed,
        output=np.flatnonzero(res.members).tolist(),
    )
    return rec


def _run_mis(cfg, inst: Instance, seed: int) -> dict:
    clique = Clique(cfg.n, cfg.sim, seed)
    res = low_dimensional_mis(inst.metric, cfg.radius, clique)
    ok = verify_mis(threshold_graph(inst.metric, cfg.radius), res.members)
    rec = _head(cfg, seed)
    rec.update(
        r=cfg.radius,
        rounds=clique.ledger.rounds,
        messages=clique.ledger.messages,
        rounds_by_phase=_phases(clique.ledger),
        reduced=int(res.reduced.sum()),
        sampled=int(res.sampled.sum()),
        sample_ruling=int(res.sample_ruling.sum()),
        leftover=int(res.leftover.sum()),
        mis_size=res.size,
        stats=res.stats,
        whp_flags=res.whp_flags,
        verified={"mis": ok.passed},
        passed=ok.passed,
        output=np.flatnonzero(res.members).tolist(),
    )
    return rec


def _run_mst(cfg, inst: Instance, seed: int) -> dict:
    clique = Clique(cfg.n, cfg.sim, seed)
    tree, sp, plan = mst_approximation(inst.metric, clique)
    opt = exact_mst(inst.metric)
    ratio = tree.total_weight / opt.total_weight if opt.total_weight > 0 else 1.0
    checks = {
        "connectivity": check_light_connectivity(inst.metric, sp).passed,
        "cardinality": sp.size <= cfg.sim.sparse_budget * max(cfg.n, 1),
        "spanning": tree.spanning,
        "ratio_in_range": 1.0 - 1e-12 <= ratio <= cfg.mst_ratio_bound,
    }
    if cfg.n <= CUT_CHECK_MAX_N:
        checks["cut_preservation"] = check_cut_preservation(inst.metric, sp, opt).passed
    for rep in check_layer_structure(inst.metric, sp, cfg.sim.rho):
        checks[rep.check] = rep.passed
    rec = _head(cfg, seed)
    rec.update(
        c1=cfg.sim.c1,
        c2=cfg.sim.c2,
        h=sp.h,
        light_edges=int(sp.light_u.size),
        sparse_edges=sp.size,
        wt_hat=tree.total_weight,
        wt_opt=opt.total_weight,
        ratio=ratio,
        parallel_charge=plan.charge if plan else cfg.sim.parallel_charge,
        rounds=clique.ledger.rounds,
        messages=clique.ledger.messages,
        rounds_by_phase=_phases(clique.ledger),
        checks=checks,
        passed=all(checks.values()),
        output=[[a, b] for a, b, _ in tree.edges],
    )
    return rec


def _run_mfl(cfg, inst: Instance, seed: int) -> dict:
    mode = cfg.algo.split("-", 1)[1]
    clique = Clique(cfg.n, cfg.sim, seed)
    res = solve_mfl(inst.metric, inst.costs, clique, mode)
    opt_cost = ratio = None
    if cfg.n <= MFL_ORACLE_MAX_N:
        opt_cost = brute_force_mfl(inst.metric, inst.costs).cost
        ratio = res.cost / opt_cost if opt_cost > 0 else 1.0
    checks = {"nonempty": res.open.size > 0, "class_sets": all(res.reports)}
    if ratio is not None:
        checks["ratio_in_range"] = 1.0 - 1e-12 <= ratio <= cfg.mfl_ratio_bound
    rec = _head(cfg, seed)
    rec.update(
        mode=mode,
        num_classes=res.profile.num_classes,
        open_count=int(res.open.size),
        cost=res.cost,
        opt_cost=opt_cost,
        ratio=ratio,
        rounds=clique.ledger.rounds,
        messages=clique.ledger.messages,
        rounds_by_phase=_phases(clique.ledger),
        checks=checks,
        passed=all(checks.values()),
        output=res.open.tolist(),
    )
    return rec


_RUNNERS = {"ruling3": _run_ruling3, "mis": _run_mis, "mst": _run_mst, "mfl-general": _run_mfl, "mfl-doubling": _run_mfl}


def run_one(cfg: ExperimentConfig, seed: int) -> dict:
    inst = generate(cfg.spec(seed))
    return _RUNNERS[cfg.algo](cfg, inst, seed)


def _run_one_args(args):
    return run_one(*args)


def aggregate(cfg: ExperimentConfig, records: list[dict]) -> dict:
    rounds = [r["rounds"] for r in records]
    passed = [r["passed"] for r in records]
    return {
        "aggregate": True,
        "algo": cfg.algo,
        "n": cfg.n,
        "fingerprint": cfg.fingerprint,
        "runs": len(records),
        "mean_rounds": float(np.mean(rounds)) if rounds else 0.0,
        "max_rounds": int(max(rounds)) if rounds else 0,
        "pass_rate": float(np.mean(passed)) if passed else 1.0,
    }


def run(cfg: ExperimentConfig, jobs: int = 1) -> tuple[list[dict], dict]:
    """Per-seed records in seed order, plus the aggregate row."""
    tasks = [(cfg, s) for s in cfg.seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_one_args, tasks))
    else:
        records = [run_one(c, s) for c, s in tasks]
    return records, aggregate(cfg, records)


def to_jsonl(records: list[dict]) -> str:
    return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)


# ------------------------------------------------------------------ sweeps

def sweep(cfg: ExperimentConfig, ns, jobs: int = 1) -> list[dict]:
    """One row per distinct ``n``: totals plus mean/max rounds and mean messages per phase."""
    seen, order = set(), []
    for n in ns:
        if n in seen:
            log.warning("duplicate n=%d in sweep ignored", n)
            continue
        seen.add(n)
        order.append(int(n))
    rows = []
    for n in order:
        records, _ = run(replace(cfg, n=n), jobs)
        row = {
            "n": n,
            "runs": len(records),
            "mean_rounds": float(np.mean([r["rounds"] for r in records])),
            "max_rounds": int(max(r["rounds"] for r in records)),
            "mean_messages": float(np.mean([r["messages"] for r in records])),
            "pass_rate": float(np.mean([r["passed"] for r in records])),
            "phases": {},
        }
        labels = []
        for r in records:
            labels += [k for k in r["rounds_by_phase"] if k not in labels]
        for label in labels:
            vals = [r["rounds_by_phase"].get(label, {"rounds": 0, "messages": 0}) for r in records]
            row["phases"][label] = {
                "mean_rounds": float(np.mean([v["rounds"] for v in vals])),
                "max_rounds": int(max(v["rounds"] for v in vals)),
                "mean_messages": float(np.mean([v["messages"] for v in vals])),
            }
        rows.append(row)
    return rows


def sweep_csv(rows: list[dict]) -> str:
    labels: list[str] = []
    for row in rows:
        labels += [k for k in row["phases"] if k not in labels]
    header = ["n", "runs", "mean_rounds", "max_rounds", "mean_messages", "pass_rate"]
    for label in labels:
        header += [f"{label}_mean_rounds", f"{label}_max_rounds", f"{label}_mean_messages"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        line = [row[k] for k in header[:6]]
        for label in labels:
            ph = row["phases"].get(label, {"mean_rounds": 0.0, "max_rounds": 0, "mean_messages": 0.0})
            line += [ph["mean_rounds"], ph["max_rounds"], ph["mean_messages"]]
        writer.writerow(line)
    return buf.getvalue()


# ------------------------------------------------------------------ verify

def verify_record(record: dict, cfg: ExperimentConfig | None = None) -> bool:
    """Regenerate the record's instance and re-check its stored output."""
    cfg = cfg or config_from_record(record)
    inst = generate(cfg.spec(record["seed"]))
    out = record["output"]
    algo = record["algo"]
    if algo == "ruling3":
        mask = ids_to_mask(out, cfg.n)
        return bool(verify_independent(inst.graph, mask)) and bool(verify_t_ruling(inst.graph, mask, 3))
    if algo == "mis":
        return bool(verify_mis(threshold_graph(inst.metric, cfg.radius), ids_to_mask(out, cfg.n)))
    if algo == "mst":
        if cfg.n < 2:
            return not out
        u = np.array([e[0] for e in out], dtype=np.int64)
        v = np.array([e[1] for e in out], dtype=np.int64)
        tree = exact_mst(cfg.n, u, v, inst.metric.dist[u, v])
        weight = float(inst.metric.dist[u, v].sum())
        opt = exact_mst(inst.metric).total_weight
        return len(tree) == len(out) and tree.spanning and weight >= opt * (1 - 1e-12) and np.isclose(weight, record["wt_hat"])
    sol = FacilitySolution.evaluate(inst.metric.dist, inst.costs, ids_to_mask(out, cfg.n))
    ok = bool(np.isclose(sol.cost, record["cost"], rtol=1e-12))
    if record.get("opt_cost") is not None:
        ok = ok and sol.cost >= record["opt_cost"] * (1 - 1e-12)
    return ok
