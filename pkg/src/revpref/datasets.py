"""Dataset generation and flat-file persistence.

The public dataset stores only (a, b, x) records; realized utilities are
unobservable and go to a private oracle sidecar used by property tests.
Files are JSON Lines with a header line, so they diff and stream cleanly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from revpref.consistency import Observation
from revpref.evaluation import Scenario, draw_ab, draw_utilities
from revpref.knapsack import solve_batch

FORMAT_NAME = "revpref-dataset"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class DatasetHeader:
    n: int
    scenario: str
    seed: int | None

    def to_json(self) -> str:
        return json.dumps({"format": FORMAT_NAME, "version": FORMAT_VERSION,
                           "n": self.n, "scenario": self.scenario, "seed": self.seed},
                          sort_keys=True)


def generate_observations(scenario: Scenario, T: int, rng: np.random.Generator):
    """Draw T observations; returns (observations, realized_utilities)."""
    U = draw_utilities(scenario, T, rng)
    A, B = draw_ab(scenario, T, rng)
    X, _ = solve_batch(U, A, B)
    obs = [Observation(x_star=X[t], a=A[t], b=float(B[t])) for t in range(T)]
    return obs, U


def scenario_descriptor(scenario: Scenario) -> str:
    law = scenario.utility_law
    if law is None:
        tag = "none"
    elif hasattr(law, "kappa"):
        tag = f"vmf(kappa={law.kappa:.6g})"
    else:
        tag = f"delta_corrupt(delta={law.delta:.6g})"
    return f"n={scenario.n};ab={scenario.ab_law};u={tag}"


def write_dataset(path, observations, header: DatasetHeader, utilities=None) -> None:
    """Write the dataset; when utilities are given, also write the oracle
    sidecar at <path>.oracle.jsonl."""
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(header.to_json() + "\n")
        for obs in observations:
            fh.write(json.dumps({"a": obs.a.tolist(), "b": obs.b, "x": obs.x_star.tolist()},
                                sort_keys=True) + "\n")
    if utilities is not None:
        with open(path.with_name(path.name + ".oracle.jsonl"), "w") as fh:
            for u in utilities:
                fh.write(json.dumps({"u": np.asarray(u).tolist()}) + "\n")


def read_dataset(path):
    """Read a dataset file; returns (header, observations)."""
    path = Path(path)
    with open(path) as fh:
        head = json.loads(fh.readline())
        if head.get("format") != FORMAT_NAME:
            raise ValueError(f"{path} is not a {FORMAT_NAME} file")
        header = DatasetHeader(n=head["n"], scenario=head["scenario"], seed=head.get("seed"))
        observations = []
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            observations.append(Observation(x_star=np.array(rec["x"]), a=np.array(rec["a"]), b=rec["b"]))
    return header, observations


def read_oracle_sidecar(path) -> np.ndarray:
    path = Path(path)
    side = path.with_name(path.name + ".oracle.jsonl")
    with open(side) as fh:
        return np.array([json.loads(line)["u"] for line in fh if line.strip()])


def write_dataset_csv(path, observations, header: DatasetHeader) -> None:
    """Spreadsheet-friendly alternative: one CSV row per observation."""
    import csv

    n = header.n
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"a_{i + 1}" for i in range(n)] + ["b"] + [f"x_{i + 1}" for i in range(n)])
        for obs in observations:
            writer.writerow([repr(v) for v in obs.a] + [repr(obs.b)] + [repr(v) for v in obs.x_star])
