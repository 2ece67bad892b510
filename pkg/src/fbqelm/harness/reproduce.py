"""Figure tables: the data behind each headline plot, written as CSV."""
from __future__ import annotations

import csv
import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, default_config
from .experiments import run_satwap_probes, run_snr, run_task, run_witness_resampled

FIGURES = ("fig4", "fig5e", "fig6d", "snr")

# Reference headline values as (value, uncertainty); uncertainty None when not quoted.
REFERENCE = {
    "fig4": {"mse": (0.012, 0.007), "nmse": (0.18, 0.04), "entangled_accuracy": (0.93, 0.04),
             "separable_false_positive_rate": (0.12, 0.08), "single_split_accuracy": (0.96, None)},
    "fig5e": {"nmse": (0.033, 0.006), "n_features": (21, None)},
    "fig6d": {"fidelity_mean": (0.96, 0.04), "nmse": (0.034, None)},
    "snr": {"coincidence_db": (16.0, 2.0), "stimulated_db": (35.0, 4.0), "improvement_db": (19.0, 5.0)},
}


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def acquisition_model(cfg: ExperimentConfig, coincidence_rate_hz: float = 1e3,
                      stimulated_pattern_s: float = 1.0) -> dict:
    """Simulated pattern counts and the acquisition time they imply.

    A coincidence pattern needs ``total_pairs`` detected pairs at
    ``coincidence_rate_hz``; a stimulated pattern is one spectrometer
    readout of ``stimulated_pattern_s``. Both rates are assumptions, so
    only the ratio is meaningful.
    """
    n_train, n_test = cfg.n_train, cfg.n_test
    per_coinc = cfg.noise.total_pairs / coincidence_rate_hz
    return {"train_patterns": n_train, "test_patterns": n_test,
            "train_hours_stimulated": n_train * stimulated_pattern_s / 3600,
            "train_hours_coincidence": n_train * per_coinc / 3600,
            "speedup": per_coinc / stimulated_pattern_s}


def _summary_rows(figure: str, simulated: dict) -> list:
    rows = []
    for key, (val, err) in REFERENCE[figure].items():
        sim = simulated.get(key)
        rows.append([key, "" if sim is None else f"{sim:.6g}", val, "" if err is None else err])
    return rows


def _fig4(cfg, out: Path, jobs: int) -> dict:
    art = run_task(cfg, jobs=jobs)
    rows = [[p["id"], p["family"], int(p["family"].startswith("SEP")), p["true"][0], p["pred"][0]]
            for p in art["predictions"]]
    write_csv(out / "fig4_scatter.csv", ["id", "family", "separable", "true_w", "inferred_w"], rows)
    res = run_witness_resampled(cfg, jobs=jobs)
    write_csv(out / "fig4_resampled.csv", ["split", "mse", "nmse", "entangled_accuracy",
                                          "separable_false_positive_rate", "alpha", "l1_ratio"],
              [[r[k] for k in ("split", "mse", "nmse", "entangled_accuracy", "separable_false_positive_rate",
                               "alpha", "l1_ratio")] for r in res["splits"]])
    s = res["summary"]
    return {"mse": s["mse"]["mean"], "nmse": s["nmse"]["mean"], "entangled_accuracy": s["entangled_accuracy"]["mean"],
            "separable_false_positive_rate": s["separable_false_positive_rate"]["mean"],
            "single_split_accuracy": art["entangled_accuracy"], "detail": {"single": art["scores"], "resampled": s}}


def _fig5e(cfg, out: Path, jobs: int) -> dict:
    res = run_satwap_probes(cfg, jobs=jobs)
    write_csv(out / "fig5e_bars.csv", ["dim", "inferred_mean", "inferred_std", "true", "lhv_bound", "dimension_bound"],
              [[p["dim"], p["inferred_mean"], p["inferred_std"], p["true"], p["classical_bound"],
                p["dimension_bound"]] for p in res["probes"]])
    return {"nmse": float(np.mean(res["nmse"])), "n_features": float(np.mean(res["n_features"])),
            "detail": {"nmse": res["nmse"], "n_features": res["n_features"]}}


def _fig6d(cfg, out: Path, jobs: int) -> dict:
    art = run_task(cfg, jobs=jobs)
    fid = np.array([m["fidelity"] for m in art["mle"]])
    resolved = np.array([m["resolved_fidelity"] for m in art["mle"]])
    write_csv(out / "fig6d_states.csv", ["id", "fidelity", "resolved_fidelity", "residual"],
              [[p["id"], m["fidelity"], m["resolved_fidelity"], m["residual"]]
               for p, m in zip(art["predictions"], art["mle"])])
    edges = np.linspace(0, 1, 21)
    counts, _ = np.histogram(fid, edges)
    rcounts, _ = np.histogram(resolved, edges)
    write_csv(out / "fig6d_histogram.csv", ["bin_lo", "bin_hi", "count", "resolved_count"],
              [[edges[i], edges[i + 1], int(counts[i]), int(rcounts[i])] for i in range(len(counts))])
    return {"fidelity_mean": float(fid.mean()), "nmse": art["scores"]["nmse"],
            "detail": {"fidelity": art["fidelity"], "per_task_nmse": art["scores"]["per_task"]}}


def _snr(cfg, out: Path, jobs: int) -> dict:
    res = run_snr(cfg)
    rows = []
    for st in res["states"]:
        for mode in ("coincidence", "stimulated"):
            for ks, ki, db in st[f"{mode}_bins"]:
                rows.append([st["state"], st["family"], mode, ks, ki, db])
    write_csv(out / "snr_bins.csv", ["state", "family", "mode", "signal_bin", "idler_bin", "snr_db"], rows)
    s = res["summary"]
    return {k: s[k] for k in ("coincidence_db", "stimulated_db", "improvement_db")} | {"detail": s}


_DEFAULT_TASK = {"fig4": "witness", "fig5e": "satwap", "fig6d": "hamiltonian", "snr": "snr"}
_RUNNERS = {"fig4": _fig4, "fig5e": _fig5e, "fig6d": _fig6d, "snr": _snr}


def reproduce(figure: str, out_dir, cfg: ExperimentConfig | None = None, jobs: int = 1) -> dict:
    """Write the CSV tables behind ``figure`` and a side-by-side summary."""
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; choose from {FIGURES}")
    cfg = cfg or default_config(_DEFAULT_TASK[figure])
    if cfg.task != _DEFAULT_TASK[figure]:
        cfg = replace(default_config(_DEFAULT_TASK[figure]), master_seed=cfg.master_seed, noiseless=cfg.noiseless)
    out = Path(out_dir)
    sim = _RUNNERS[figure](cfg, out, jobs)
    write_csv(out / f"{figure}_summary.csv", ["quantity", "simulated", "reference", "reference_uncertainty"],
              _summary_rows(figure, sim))
    summary = {"figure": figure, "config": cfg.to_dict(), "simulated": sim,
               "reference": {k: list(v) for k, v in REFERENCE[figure].items()},
               "acquisition": acquisition_model(cfg)}
    (out / f"{figure}_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
