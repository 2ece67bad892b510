"""Experiment configuration: defaults per task, JSON round-trip, CLI overrides."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ..emission import NoiseModel
from ..regression import ElasticNetGrid, PreprocessSpec
from ..tasks.pso import PsoConfig

TASKS = ("witness", "satwap", "hamiltonian", "snr", "correspondence")
FAMILIES = ("separable", "SP", "DP", "qudit1", "qudit2", "qudit3", "qudit4")


@dataclass(frozen=True)
class ReservoirSettings:
    depth: float = 1.4
    phase_signal: float = 0.0
    phase_idler: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to regenerate data and results for one task.

    ``train`` and ``test`` map state families to sample counts. ``pool``
    is the state pool that resampled witness splits draw from. ``repeats``
    is the number of resampled splits (witness) or training sets (SATWAP
    probes).
    """

    task: str = "witness"
    train: dict = field(default_factory=dict)
    test: dict = field(default_factory=dict)
    pool: dict = field(default_factory=dict)
    noise: NoiseModel = field(default_factory=NoiseModel)
    grid: ElasticNetGrid = field(default_factory=ElasticNetGrid)
    preprocess: PreprocessSpec = field(default_factory=PreprocessSpec)
    reservoir: ReservoirSettings = field(default_factory=ReservoirSettings)
    pso: PsoConfig = field(default_factory=PsoConfig)
    master_seed: int = 1
    noiseless: bool = False
    repeats: int = 30
    multitask_independent: bool = False
    out_dir: str = "runs"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}; choose from {TASKS}")
        for name in ("train", "test", "pool"):
            comp = getattr(self, name)
            for fam, n in comp.items():
                if fam not in FAMILIES:
                    raise ValueError(f"invalid composition: unknown family {fam!r} in {name}")
                if int(n) != n or n < 0:
                    raise ValueError(f"invalid composition: count for {fam!r} must be a nonnegative integer")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if self.repeats < 1:
            raise ValueError("repeats must be positive")

    @property
    def n_train(self) -> int:
        return sum(self.train.values())

    @property
    def n_test(self) -> int:
        return sum(self.test.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"]["l1_ratios"] = list(self.grid.l1_ratios)
        d["grid"]["alphas"] = list(self.grid.alphas)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(d)
        nested = {"noise": NoiseModel, "grid": ElasticNetGrid, "preprocess": PreprocessSpec,
                  "reservoir": ReservoirSettings, "pso": PsoConfig}
        for key, typ in nested.items():
            if key in kw and isinstance(kw[key], dict):
                kw[key] = typ(**kw[key])
        return cls(**kw)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text())

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def default_config(task: str = "witness") -> ExperimentConfig:
    """Shipped defaults with the reference dataset compositions."""
    if task == "witness":
        return ExperimentConfig(
            task="witness",
            train={"separable": 70, "SP": 70, "DP": 150},
            test={"separable": 16, "SP": 35, "DP": 45},
            pool={"separable": 125, "SP": 225, "DP": 400},
            grid=ElasticNetGrid.witness(),
            preprocess=PreprocessSpec(0.0, True),
            out_dir="runs/witness",
        )
    if task == "satwap":
        return ExperimentConfig(
            task="satwap",
            train={"qudit4": 54, "qudit3": 54, "qudit2": 54, "qudit1": 54},
            test={"qudit4": 26, "qudit3": 26, "qudit2": 26, "qudit1": 26},
            grid=ElasticNetGrid.satwap(),
            preprocess=PreprocessSpec(5e-4, True),
            repeats=5,
            out_dir="runs/satwap",
        )
    if task == "hamiltonian":
        return ExperimentConfig(
            task="hamiltonian",
            train={"DP": 512},
            test={"DP": 87},
            grid=ElasticNetGrid.hamiltonian(),
            preprocess=PreprocessSpec(2.5e-5, True),
            out_dir="runs/hamiltonian",
        )
    if task == "snr":
        return ExperimentConfig(task="snr", test={"DP": 100}, out_dir="runs/snr")
    if task == "correspondence":
        return ExperimentConfig(task="correspondence", test={"SP": 34, "DP": 33, "qudit4": 33},
                                out_dir="runs/correspondence")
    raise ValueError(f"unknown task {task!r}")
