"""Per-sample state generation, feature acquisition and JSON-lines persistence.

Every sample draws from its own generator seeded by
``(master_seed, split, index)``, so records do not depend on the order in
which they are produced or on the number of worker processes.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..emission import add_osa_noise, sample_coincidences, scale_to_power, spontaneous_pattern, stimulated_pattern
from ..lattice import DEFAULT_WINDOW, BinWindow, measurement_window, normalize_and_vectorize
from ..reservoir import ReservoirMap, conjugated_seed_chain
from ..synthesis import (BiphotonAmplitude, StateFamilySpec, WaveshaperWeights, dp_source, dp_state,
                         qudit_source, qudit_state, qudit_weights, sample_weights, sp_source, sp_state)
from ..tasks.hamiltonian import labels_from_vector
from ..tasks.satwap import qudit_satwap_label
from ..tasks.witness import witness_value
from .config import ExperimentConfig

SPLIT_CODES = {"train": 0, "test": 1, "pool": 2, "probe": 3, "cv": 4, "mle": 5, "resample": 6}
FIELDS = ("id", "family", "weights", "labels", "features", "provenance", "seed")


def derived_seed(master_seed: int, split: str, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), SPLIT_CODES[split], int(index)])


def seed_value(ss: np.random.SeedSequence) -> int:
    """A 63-bit integer summarising a derived seed, stored with each record."""
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class PreparedState:
    """A synthesised state together with the waveshaper setting that makes it."""

    family: str
    weights: np.ndarray  # g for SP/DP, alpha for qudits
    state: BiphotonAmplitude
    source: np.ndarray  # unshaped source amplitude
    shaper: WaveshaperWeights


def prepare_state(family: str, weights, window: BinWindow = DEFAULT_WINDOW) -> PreparedState:
    """Build the normalised state and its source/waveshaper decomposition."""
    w = np.asarray(weights, complex)
    base = family.split("-")[-1]
    if base == "SP":
        return PreparedState(family, w, sp_state(w, window), sp_source(window),
                             WaveshaperWeights.from_qubit(w, window))
    if base == "DP":
        return PreparedState(family, w, dp_state(w, window), dp_source(window),
                             WaveshaperWeights.from_qubit(w, window))
    if base.startswith("QUDIT"):
        return PreparedState(family, w, qudit_state(w, window), qudit_source(4, window), qudit_weights(w, window))
    raise ValueError(f"unknown family {family!r}")


def draw_state(family: str, rng: np.random.Generator) -> PreparedState:
    """Sample a random state of a composition family."""
    if family == "separable":
        if rng.random() < 0.5:
            return prepare_state("SEP-SP", sample_weights(StateFamilySpec("SP", separable_fraction=1.0), rng))
        return prepare_state("SEP-DP", sample_weights(StateFamilySpec("DP", separable_fraction=1.0), rng))
    if family in ("SP", "DP"):
        return prepare_state(family, sample_weights(StateFamilySpec(family), rng))
    if family.startswith("qudit"):
        rank = int(family[5:])
        return prepare_state(f"QUDIT{rank}", sample_weights(StateFamilySpec("QUDIT", dim=rank), rng))
    raise ValueError(f"unknown family {family!r}")


def task_window(task: str) -> BinWindow:
    return measurement_window("qudit" if task == "satwap" else "qubit")


def task_labels(task: str, prepared: PreparedState) -> list:
    if task == "witness":
        return [witness_value(prepared.state.qubit_vector())]
    if task == "satwap":
        return [qudit_satwap_label(prepared.weights)[0]]
    if task == "hamiltonian":
        return labels_from_vector(prepared.state.qubit_vector()).tolist()
    raise ValueError(f"task {task!r} has no labels")


def reservoir_for(cfg: ExperimentConfig, window: BinWindow = DEFAULT_WINDOW) -> ReservoirMap:
    r = cfg.reservoir
    return ReservoirMap.from_settings(r.depth, r.phase_signal, r.phase_idler, window)


def stimulated_features(prepared: PreparedState, rmap: ReservoirMap, window: BinWindow, cfg: ExperimentConfig,
                        rng: np.random.Generator | None) -> np.ndarray:
    """Classical acquisition: seed through the back-propagated idler chain.

    The signal-arm weights act on the pair source directly; the idler-arm
    weights enter only through the conjugated seed chain.
    """
    shaped = BiphotonAmplitude(prepared.shaper.signal[:, None] * prepared.source, prepared.state.window)
    chain = conjugated_seed_chain(rmap.idler, prepared.shaper)
    pattern = stimulated_pattern(shaped, rmap, chain, 1.0, window)
    if not cfg.noiseless:
        pattern = add_osa_noise(scale_to_power(pattern, cfg.noise), cfg.noise, rng)
    return normalize_and_vectorize(pattern)


def spontaneous_features(state: BiphotonAmplitude, rmap: ReservoirMap, window: BinWindow, cfg: ExperimentConfig,
                         rng: np.random.Generator | None) -> np.ndarray:
    """Quantum acquisition: coincidences of spontaneously emitted pairs."""
    pattern = spontaneous_pattern(state, rmap, window)
    if not cfg.noiseless:
        pattern = sample_coincidences(pattern, cfg.noise, rng).net_pattern()
    return normalize_and_vectorize(pattern)


def _complex_pairs(z) -> list:
    return [[float(v.real), float(v.imag)] for v in np.asarray(z, complex)]


def make_record(cfg: ExperimentConfig, split: str, index: int, family: str, provenance: str | None = None) -> dict:
    """Generate one dataset record (pure function of its arguments)."""
    ss = derived_seed(cfg.master_seed, split, index)
    rng = np.random.default_rng(ss)
    prepared = draw_state(family, rng)
    window = task_window(cfg.task)
    rmap = reservoir_for(cfg)
    path = provenance or ("stimulated" if split == "train" else "spontaneous")
    noise_rng = np.random.default_rng(ss.spawn(1)[0])
    if path == "stimulated":
        x = stimulated_features(prepared, rmap, window, cfg, noise_rng)
    else:
        x = spontaneous_features(prepared.state, rmap, window, cfg, noise_rng)
    return {
        "id": f"{split}-{index:06d}",
        "family": prepared.family,
        "weights": _complex_pairs(prepared.weights),
        "labels": [float(v) for v in task_labels(cfg.task, prepared)],
        "features": [float(v) for v in x],
        "provenance": "noiseless" if cfg.noiseless else path,
        "seed": seed_value(ss),
    }


def expand_composition(comp: dict) -> list:
    """Family name for each sample index, in composition order."""
    return [fam for fam, n in comp.items() for _ in range(int(n))]


def _make_record_args(args):
    return make_record(*args)


def generate_records(cfg: ExperimentConfig, split: str, comp: dict | None = None, jobs: int = 1,
                     provenance: str | None = None) -> list:
    """All records of one split; ``jobs > 1`` fans out over processes."""
    comp = getattr(cfg, split) if comp is None else comp
    fams = expand_composition(comp)
    args = [(cfg, split, i, fam, provenance) for i, fam in enumerate(fams)]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_make_record_args, args, chunksize=max(1, len(args) // (4 * jobs))))
    return [make_record(*a) for a in args]


def dumps_record(rec: dict) -> str:
    return json.dumps({k: rec[k] for k in FIELDS}, separators=(",", ":"))


def write_jsonl(records, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for rec in records:
            fh.write(dumps_record(rec) + "\n")


def read_jsonl(path) -> list:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                missing = set(FIELDS) - set(rec)
                if missing:
                    raise ValueError(f"record missing fields {sorted(missing)}")
                out.append(rec)
    return out


def arrays(records) -> tuple[np.ndarray, np.ndarray]:
    """Feature matrix and label matrix (samples, labels) from records."""
    X = np.array([r["features"] for r in records], float)
    Y = np.array([r["labels"] for r in records], float)
    return X, Y


def record_weights(rec: dict) -> np.ndarray:
    return np.array([complex(a, b) for a, b in rec["weights"]])


def generate_dataset(cfg: ExperimentConfig, out_dir=None, jobs: int = 1) -> dict:
    """Write ``train.jsonl``, ``test.jsonl`` and ``config.json`` to ``out_dir``."""
    out = Path(out_dir or cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"unwritable output path {out}: {exc}") from exc
    if cfg.n_train == 0 or cfg.n_test == 0:
        raise ValueError("invalid composition: train and test sets must be nonempty")
    train = generate_records(cfg, "train", jobs=jobs)
    test = generate_records(cfg, "test", jobs=jobs)
    write_jsonl(train, out / "train.jsonl")
    write_jsonl(test, out / "test.jsonl")
    cfg.save(out / "config.json")
    return {"train": train, "test": test, "dir": str(out)}
