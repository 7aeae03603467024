"""End-to-end experiment drivers writing CSV/JSON artifacts plus a manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, rng
from .config import ExperimentConfig
from .dynamics import (
    LOCALIZATION_QUANTILE,
    basis_state,
    eigendecompose,
    evolve_classical,
    evolve_quantum,
    hitting_probability,
    packet_extent,
    time_grid,
    write_profiles_csv,
)
from .graph import (
    DENSE_MAX_N,
    build_glued_tree,
    classical_evolve_full,
    classical_generator,
    column_sums,
    quantum_evolve_full,
    quantum_hamiltonian_full,
)
from .line import (
    DisorderSpec,
    apply_disorder,
    column_basis,
    compress,
    lumped_classical_chain,
    reduced_hamiltonian,
    verify_subspace_closure,
    write_disorder_csv,
)
from .localization import Extended, scaling_exponent, thouless_inverse_length

DATA_SCHEMA = "# schema: gluedtrees.{}/v1"
CROSSCHECK_TOL = {
    "closure_residual": 1e-10,
    "compression_deviation": 1e-12,
    "quantum_deviation": 1e-8,
    "classical_deviation": 1e-8,
}


class OutputCollision(FileExistsError):
    pass


def fmt(x) -> str:
    if isinstance(x, Extended):
        return "inf"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


@dataclass
class Run:
    """Collects output files of one experiment and writes its manifest last."""

    config: ExperimentConfig
    out: Path = field(init=False)
    files: list[Path] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    started: float = field(default_factory=time.perf_counter)

    def __post_init__(self):
        self.out = Path(self.config.out)
        self.out.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        p = self.out / name
        if p.exists() and not self.config.overwrite:
            raise OutputCollision(f"{p} exists; pass --overwrite to replace it")
        self.files.append(p)
        return p

    def write_csv(self, name: str, schema: str, header: list[str], rows) -> Path:
        p = self.path(name)
        with open(p, "w", newline="") as fh:
            fh.write(DATA_SCHEMA.format(schema) + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])
        return p

    def write_json(self, name: str, payload: dict) -> Path:
        p = self.path(name)
        p.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
        return p

    def finish(self, extra: dict | None = None) -> dict:
        manifest_path = self.out / f"manifest_{self.config.experiment}.json"
        if manifest_path.exists() and not self.config.overwrite:
            raise OutputCollision(f"{manifest_path} exists; pass --overwrite to replace it")
        manifest = {
            "experiment": self.config.experiment,
            "code_version": __version__,
            "seed": self.config.seed,
            "config": self.config.to_text(),
            "files": {p.name: sha256(p) for p in self.files},
            "duration_s": time.perf_counter() - self.started,
            "warnings": self.warnings,
        }
        if extra:
            manifest.update(extra)
        manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
        manifest["path"] = str(manifest_path)
        return manifest


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, Extended):
        return "inf"
    raise TypeError(f"cannot serialize {type(o).__name__}")


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _tag(x: float) -> str:
    return f"{x:g}"


def disordered_line(n: int, gamma: float, family: str, delta: float, seed: int):
    h = reduced_hamiltonian(n, gamma)
    return apply_disorder(h, DisorderSpec(family, delta), seed)


# -- Fig. 4 propagation ---------------------------------------------------------

def run_fig4(config: ExperimentConfig) -> dict:
    """Column profiles on the left half of the line for each disorder width."""
    run = Run(config)
    n, gamma, family = config.n[0], config.gamma, config.family[0]
    times = config.fig4_times()
    L = 2 * n + 1
    summary_rows = []
    extents: dict[float, np.ndarray] = {}
    for delta in config.delta:
        reps = 1 if delta == 0 else config.seeds
        per_rep = []
        for rep in range(reps):
            seed = rng.child_seed(config.seed, "fig4", float(delta), rep)
            h = disordered_line(n, gamma, family, delta, seed)
            profiles = evolve_quantum(eigendecompose(h), basis_state(L, 0), times)
            tag = f"{family}_delta{_tag(delta)}_rep{rep}"
            write_profiles_csv(profiles, run.path(f"fig4_{tag}.csv"), columns=slice(0, n))
            if delta > 0:
                write_disorder_csv(h, run.path(f"disorder_{tag}.csv"))
            row_ext = []
            for prof in profiles:
                e_q = packet_extent(prof, config.quantile)
                e_loc = packet_extent(prof, LOCALIZATION_QUANTILE)
                left = float(np.sum(prof.probabilities[:n]))
                summary_rows.append((float(delta), rep, seed, prof.time, e_q, e_loc, left))
                row_ext.append((e_q, e_loc))
            per_rep.append(row_ext)
        extents[float(delta)] = np.array(per_rep)  # (reps, times, 2)
    run.write_csv(
        "fig4_extent.csv", "extent",
        ["delta", "rep", "seed", "time", f"extent_q{config.quantile:g}", "extent_loc", "left_mass"],
        summary_rows,
    )
    manifest = run.finish()
    return {"manifest": manifest, "times": np.array(times), "extents": extents, "rows": summary_rows}


# -- localization length scaling -----------------------------------------------

def run_scaling(config: ExperimentConfig) -> dict:
    run = Run(config)
    seeds = [rng.child_seed(config.seed, "scaling", r) for r in range(config.seeds)]
    results = {}
    for family in config.family:
        res = scaling_exponent(family, config.gamma, config.delta, config.steps, seeds)
        ref = res.reference if res.reference is not None else [None] * len(res.deltas)
        run.write_csv(
            f"scaling_{family}.csv", "scaling",
            ["family", "delta", "length", "stderr", "thouless_length"],
            [(family, d, l, e, "" if r is None else r)
             for d, l, e, r in zip(res.deltas, res.lengths, res.stderrs, ref)],
        )
        summary = res.summary()
        if res.reference is not None:
            summary["max_rel_dev_from_thouless"] = float(np.max(np.abs(res.lengths / res.reference - 1)))
        if not res.monotone:
            run.warnings.append(f"{family}: l(delta) not monotone beyond noise")
        run.write_json(f"scaling_{family}.json", summary)
        results[family] = res
    manifest = run.finish()
    return {"manifest": manifest, "results": results}


# -- hitting the right-most column ----------------------------------------------

def run_hitting(config: ExperimentConfig) -> dict:
    run = Run(config)
    gamma, family, delta = config.gamma, config.family[0], config.delta[0]
    rows = []
    medians = []
    for n in config.n:
        horizon = config.horizon * n / gamma
        if horizon < 2 * n / (2 * math.sqrt(2) * gamma):
            run.warnings.append(f"n={n}: horizon {horizon:g} shorter than ballistic crossing time")
        grid = time_grid(horizon, config.grid_dt / gamma)
        probs = []
        for rep in range(config.seeds):
            seed = rng.child_seed(config.seed, "hitting", int(n), rep)
            h = disordered_line(n, gamma, family, delta, seed)
            res = hitting_probability(eigendecompose(h), basis_state(2 * n + 1, 0), 2 * n, grid)
            rows.append((int(n), rep, seed, res.probability, res.time))
            probs.append(res.probability)
        medians.append(float(np.median(probs)))
    run.write_csv("hitting.csv", "hitting", ["n", "rep", "seed", "max_probability", "argmax_time"], rows)
    ns = np.array(config.n, dtype=float)
    logm = np.log(medians)
    fit = {"n": list(config.n), "median_probability": medians}
    if len(ns) >= 2:
        slope, intercept = np.polyfit(ns, logm, 1)
        pred = slope * ns + intercept
        ss_tot = float(np.sum((logm - logm.mean()) ** 2))
        fit.update({
            "slope": float(slope),
            "intercept": float(intercept),
            "r_squared": 1.0 - float(np.sum((logm - pred) ** 2)) / ss_tot if ss_tot > 0 else 1.0,
            "ratio_last_first": medians[-1] / medians[0],
        })
    run.write_json("hitting_fit.json", fit)
    manifest = run.finish()
    return {"manifest": manifest, "rows": rows, "fit": fit}


# -- reduced model vs full graph -------------------------------------------------

def crosscheck(n: int, gamma: float, times) -> dict:
    if n > DENSE_MAX_N:
        raise ValueError(f"cross-checks need the dense full graph (n <= {DENSE_MAX_N})")
    g = build_glued_tree(n)
    basis = column_basis(g)
    h = reduced_hamiltonian(n, gamma)
    closure = verify_subspace_closure(g, basis, gamma)
    compression = float(np.max(np.abs(compress(g, basis, gamma) - h.dense())))

    start = np.zeros(g.num_vertices)
    start[g.leftmost] = 1.0
    full_q = quantum_evolve_full(quantum_hamiltonian_full(g, gamma), start, times)
    red_q = evolve_quantum(eigendecompose(h), basis_state(h.length, 0), times)
    q_dev = max(
        float(np.max(np.abs(column_sums(g, np.abs(f) ** 2) - r.probabilities)))
        for f, r in zip(full_q, red_q)
    )
    full_c = classical_evolve_full(classical_generator(g, gamma), start, times)
    p0 = np.zeros(h.length)
    p0[0] = 1.0
    red_c = evolve_classical(lumped_classical_chain(n, gamma), p0, times)
    c_dev = max(
        float(np.max(np.abs(column_sums(g, f) - r.probabilities)))
        for f, r in zip(full_c, red_c)
    )
    report = {
        "n": n,
        "closure_residual": closure,
        "compression_deviation": compression,
        "quantum_deviation": q_dev,
        "classical_deviation": c_dev,
    }
    report["pass"] = {k: report[k] <= tol for k, tol in CROSSCHECK_TOL.items()}
    report["all_pass"] = all(report["pass"].values())
    return report


def run_crosscheck(config: ExperimentConfig) -> dict:
    run = Run(config)
    times = config.times or (1.0, 3.0, 10.0)
    reports = [crosscheck(n, config.gamma, times) for n in config.n]
    payload = {"times": list(times), "tolerances": CROSSCHECK_TOL, "reports": reports,
               "all_pass": all(r["all_pass"] for r in reports)}
    run.write_json("crosscheck.json", payload)
    manifest = run.finish()
    return {"manifest": manifest, "report": payload}


# -- Lloyd formula table -----------------------------------------------------------

def run_thouless(config: ExperimentConfig) -> dict:
    run = Run(config)
    gamma = config.gamma
    energies = 3.0 * gamma + gamma * np.arange(-600, 601) * 0.01
    rows = []
    for delta in config.delta:
        lam = thouless_inverse_length(energies, gamma, delta)
        for E, l in zip(energies, lam):
            rows.append((float(delta), float(E), math.inf if l == 0 else 1.0 / float(l)))
    run.write_csv("thouless.csv", "thouless", ["delta", "energy", "length"], rows)
    manifest = run.finish()
    return {"manifest": manifest, "rows": rows}


RUNNERS = {
    "fig4": run_fig4,
    "scaling": run_scaling,
    "hitting": run_hitting,
    "crosscheck": run_crosscheck,
    "thouless": run_thouless,
}


def run_experiment(config: ExperimentConfig) -> dict:
    return RUNNERS[config.experiment](config)
