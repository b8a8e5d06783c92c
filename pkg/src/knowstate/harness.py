"""Scenario runners behind the command line.

Each ``cmd_*`` returns a :class:`Report`; rendering to JSON or CSV is
separate so the same report can be written in either format.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import ConfigError, ExperimentConfig
from .ensemble import (BasisOnly, Full, KnowledgeView, NoKnowledge, Notebook,
                       PreparationSpec, ensemble_density, measure_all, prepare)
from .protocols import (ProtocolAParams, ProtocolBParams, alice_win_probability_a,
                        charles_win_probability_b, charles_win_probability_b_for,
                        run_protocol_a, run_protocol_b)
from .quantum import direction_grid_26, outcome_distribution, trace_distance
from .stats import TrialEstimate, run_trials, trial_rng
from .strategies import direction_at_angle


@dataclass
class Report:
    scenario: str
    master_seed: int
    config_digest: str
    summary: dict
    columns: list
    rows: list
    extra: dict = field(default_factory=dict)

    def to_structured(self) -> str:
        body = {
            "scenario": self.scenario,
            "master_seed": self.master_seed,
            "config_digest": self.config_digest,
            "summary": self.summary,
            "rows": [dict(zip(self.columns, r)) for r in self.rows],
            **self.extra,
        }
        return json.dumps(body, indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        buf = io.StringIO()
        buf.write(f"# scenario={self.scenario} master_seed={self.master_seed} "
                  f"config_digest={self.config_digest}\n")
        for k in sorted(self.summary):
            buf.write(f"# {k}={self.summary[k]}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows(self.rows)
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        return self.to_table() if fmt == "table" else self.to_structured()


def _view(kind: str, spec: PreparationSpec, nb: Notebook) -> KnowledgeView:
    if kind == "full":
        return Full(nb)
    if kind == "basis_only":
        return BasisOnly(spec.axis)
    return NoKnowledge()


def _freq_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def cmd_tomography(cfg: ExperimentConfig) -> Report:
    """Compare outcome frequencies of two preparations over 26 directions.

    A fresh pair of ensembles is prepared per direction (each particle can
    only be measured once). Streams depend only on the spec seed and the
    direction index, so identical specs and seeds give identical outcomes.
    """
    if cfg.compare is None:
        raise ConfigError("tomography needs both 'preparation' and 'compare'")
    spec_a, spec_b = cfg.specs()
    rho_a, rho_b = ensemble_density(spec_a), ensemble_density(spec_b)
    rows = []
    all_within = True
    for j, d in enumerate(direction_grid_26()):
        freqs = []
        for spec in (spec_a, spec_b):
            rng = _freq_rng(spec.seed, j)
            e, _ = prepare(spec, rng)
            freqs.append(float(np.mean(measure_all(e, d, rng) == 1)))
        fa, fb = freqs
        band = 3.0 * math.sqrt(fa * (1 - fa) / spec_a.count + fb * (1 - fb) / spec_b.count)
        gap = abs(fa - fb)
        within = gap <= band
        all_within &= within
        rows.append([j, d.x, d.y, d.z, outcome_distribution(rho_a, d),
                     outcome_distribution(rho_b, d), fa, fb, gap, band, within])
    summary = {
        "trace_distance": trace_distance(rho_a, rho_b),
        "indistinguishable": all_within,
        "flagged_directions": sum(1 for r in rows if not r[-1]),
        "count_a": spec_a.count,
        "count_b": spec_b.count,
    }
    cols = ["index", "x", "y", "z", "p_exact_a", "p_exact_b", "freq_a", "freq_b",
            "gap", "band_3sigma", "within_band"]
    return Report("tomography", cfg.seed, cfg.digest(), summary, cols, rows)


def _dispute_experiment(cfg: ExperimentConfig, protocol: str,
                        params, direction=None) -> Callable[[np.random.Generator], tuple]:
    spec = cfg.specs()[0]
    spec = PreparationSpec(spec.axis, params.n, spec.bias, spec.seed)

    def run(rng: np.random.Generator):
        e, nb = prepare(spec, rng)
        alice = _view(cfg.alice, spec, nb)
        charles = _view(cfg.charles, spec, nb)
        if protocol == "a":
            return run_protocol_a(alice, charles, e, params, rng)
        return run_protocol_b(alice, charles, e, params, rng, direction=direction)

    return run


def _estimates(run, trials: int, seed: int) -> tuple[TrialEstimate, TrialEstimate]:
    alice = run_trials(lambda rng: run(rng)[0].alice_wins, trials, seed)
    charles = TrialEstimate.from_counts(trials - alice.successes, trials, alice.level)
    return alice, charles


def cmd_dispute(cfg: ExperimentConfig, protocol: str) -> Report:
    if protocol not in ("a", "b"):
        raise ConfigError(f"unknown protocol {protocol!r}")
    direction = None
    if protocol == "a":
        params = cfg.params_a()
        closed = {"alice_win": alice_win_probability_a(cfg.alice, cfg.charles, params)}
    else:
        params = cfg.params_b()
        theta = cfg.protocol_b.theta_deg
        if theta is not None:
            direction = direction_at_angle(cfg.specs()[0].axis, math.radians(theta))
            c = (charles_win_probability_b(params.n, params.delta, math.radians(theta),
                                           params.charles_target_accuracy)
                 if cfg.charles == "full" else
                 charles_win_probability_b_for("basis_only", cfg.charles, params))
        else:
            c = charles_win_probability_b_for(cfg.alice, cfg.charles, params)
        closed = {"charles_win": c}
    run = _dispute_experiment(cfg, protocol, params, direction)
    alice, charles = _estimates(run, cfg.trials, cfg.seed)
    closed_alice = closed.get("alice_win", 1.0 - closed.get("charles_win", 0.0))
    closed_charles = 1.0 - closed_alice if "alice_win" in closed else closed["charles_win"]

    transcripts = [run(trial_rng(cfg.seed, i))[1].to_lines()
                   for i in range(min(cfg.transcripts, cfg.trials))]
    cols = ["party", "trials", "wins", "rate", "ci_low", "ci_high", "closed_form", "ci_contains"]
    rows = [
        ["alice", alice.trials, alice.successes, alice.estimate, alice.low, alice.high,
         closed_alice, alice.contains(closed_alice)],
        ["charles", charles.trials, charles.successes, charles.estimate, charles.low,
         charles.high, closed_charles, charles.contains(closed_charles)],
    ]
    summary = {"protocol": protocol, "alice": cfg.alice, "charles": cfg.charles,
               "n": params.n, "required_matches": params.required,
               "alice_win_rate": alice.estimate, "charles_win_rate": charles.estimate,
               "closed_form_alice_win": closed_alice, "ci_level": alice.level}
    return Report(f"dispute-{protocol}", cfg.seed, cfg.digest(), summary, cols, rows,
                  extra={"transcripts": transcripts})


def _sweep_point(cfg: ExperimentConfig, point: dict, seed: int) -> list:
    protocol = cfg.sweep.protocol
    n = int(point.get("n", cfg.preparation.count))
    if n != point.get("n", n) or n < 1:
        raise ConfigError(f"sweep value n={point['n']!r} is not a positive integer")
    try:
        if protocol == "a":
            alpha = math.radians(point.get("alpha_deg", cfg.protocol_a.alpha_deg))
            params = ProtocolAParams(n, alpha, cfg.protocol_a.threshold)
            closed = alice_win_probability_a(cfg.alice, cfg.charles, params)
            direction = None
        else:
            params = ProtocolBParams(n, point.get("delta", cfg.protocol_b.delta),
                                     point.get("target_accuracy",
                                               cfg.protocol_b.charles_target_accuracy))
            theta_deg = point.get("theta_deg", cfg.protocol_b.theta_deg)
            if theta_deg is not None:
                direction = direction_at_angle(cfg.specs()[0].axis, math.radians(theta_deg))
                closed = 1.0 - (charles_win_probability_b(
                    n, params.delta, math.radians(theta_deg), params.charles_target_accuracy)
                    if cfg.charles == "full"
                    else charles_win_probability_b_for("basis_only", cfg.charles, params))
            else:
                direction = None
                closed = 1.0 - charles_win_probability_b_for(cfg.alice, cfg.charles, params)
    except ValueError as exc:
        raise ConfigError(f"sweep point {point}: {exc}") from None
    run = _dispute_experiment(cfg, protocol, params, direction)
    alice, charles = _estimates(run, cfg.trials, seed)
    return [closed, alice.estimate, alice.low, alice.high, alice.contains(closed),
            1.0 - closed, charles.estimate, charles.low, charles.high]


def cmd_sweep(cfg: ExperimentConfig) -> Report:
    """Closed-form and Monte Carlo error rates over the cartesian product of the grid.

    Every grid point reuses the master seed, so a single-point grid
    reproduces the matching dispute run exactly.
    """
    grid = cfg.sweep.grid
    if not grid:
        raise ConfigError("sweep.grid is empty; give at least one parameter with values")
    keys = sorted(grid)
    rows = []
    for values in itertools.product(*(grid[k] for k in keys)):
        point = dict(zip(keys, values))
        shown = [int(v) if k == "n" and float(v).is_integer() else v for k, v in point.items()]
        rows.append(shown + _sweep_point(cfg, point, cfg.seed))
    cols = keys + ["alice_win_closed", "alice_win_mc", "alice_ci_low", "alice_ci_high",
                   "ci_contains", "charles_win_closed", "charles_win_mc",
                   "charles_ci_low", "charles_ci_high"]
    summary = {"protocol": cfg.sweep.protocol, "alice": cfg.alice, "charles": cfg.charles,
               "points": len(rows), "trials_per_point": cfg.trials}
    return Report("sweep", cfg.seed, cfg.digest(), summary, cols, rows)


def run_scenario(cfg: ExperimentConfig) -> Report:
    if cfg.scenario == "tomography":
        return cmd_tomography(cfg)
    if cfg.scenario == "dispute-a":
        return cmd_dispute(cfg, "a")
    if cfg.scenario == "dispute-b":
        return cmd_dispute(cfg, "b")
    return cmd_sweep(cfg)
