"""Command-line entry point: ``fbqelm {gen,train,infer,reproduce,snr,selftest}``."""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .harness.config import TASKS, ExperimentConfig, default_config
from .harness.datasets import generate_dataset, read_jsonl
from .harness.experiments import evaluate, run_snr, train_readout
from .harness.reproduce import FIGURES, reproduce
from .regression import TrainedReadout


def _common(p: argparse.ArgumentParser, task: bool = True) -> None:
    if task:
        p.add_argument("--task", choices=TASKS, default=None, help="task whose defaults to start from")
    p.add_argument("--config", type=Path, help="JSON config file; flags override its values")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--noiseless", action="store_true", default=None, help="skip all noise models")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def resolve_config(args, fallback_task: str = "witness") -> ExperimentConfig:
    """Defaults, then the config file, then command-line flags."""
    if args.config is not None:
        cfg = ExperimentConfig.load(args.config)
        if getattr(args, "task", None) and args.task != cfg.task:
            raise SystemExit(f"--task {args.task} conflicts with config task {cfg.task}")
    else:
        cfg = default_config(getattr(args, "task", None) or fallback_task)
    return cfg.with_overrides(master_seed=args.seed, noiseless=args.noiseless,
                              out_dir=None if args.out is None else str(args.out))


def _dump(obj, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_gen(args) -> int:
    cfg = resolve_config(args)
    res = generate_dataset(cfg, cfg.out_dir, jobs=args.jobs)
    print(f"wrote {len(res['train'])} train and {len(res['test'])} test records to {res['dir']}")
    return 0


def cmd_train(args) -> int:
    cfg = resolve_config(args)
    data = Path(args.data or cfg.out_dir)
    t0 = time.perf_counter()
    model = train_readout(cfg, read_jsonl(data / "train.jsonl"))
    out = Path(cfg.out_dir)
    _dump(model.to_dict(), out / "model.json")
    print(f"alpha={model.alpha:.3g} l1_ratio={model.l1_ratio} cv_r2={model.cv_score:.4f} "
          f"features={int(model.feature_mask.sum())} ({time.perf_counter() - t0:.1f} s)")
    return 0


def cmd_infer(args) -> int:
    cfg = resolve_config(args)
    out = Path(cfg.out_dir)
    data = Path(args.data or cfg.out_dir)
    model = TrainedReadout.from_dict(json.loads(Path(args.model or out / "model.json").read_text()))
    t0 = time.perf_counter()
    result = evaluate(cfg, model, read_jsonl(data / "test.jsonl"), jobs=args.jobs)
    timing = {"infer_s": time.perf_counter() - t0}
    if "mle_seconds_max" in result:
        timing["mle_max_s"] = result.pop("mle_seconds_max")
    artifact = {"version": __version__, "task": cfg.task, "config": cfg.to_dict(), "readout": model.to_dict(),
                **result, "timing": timing}
    _dump(artifact, out / "results.json")
    s = result["scores"]
    print(f"mse={s['mse']:.4g} nmse={s['nmse']:.4g} r2={s['r2']:.4f} -> {out / 'results.json'}")
    return 0


def cmd_reproduce(args) -> int:
    cfg = resolve_config(args, fallback_task={"fig4": "witness", "fig5e": "satwap", "fig6d": "hamiltonian",
                                              "snr": "snr"}[args.figure])
    out = Path(args.out or f"runs/{args.figure}")
    summary = reproduce(args.figure, out, cfg, jobs=args.jobs)
    for key, (ref, err) in summary["reference"].items():
        sim = summary["simulated"].get(key)
        print(f"{key:32s} simulated={sim if sim is None else f'{sim:.4g}'} reference={ref}"
              + ("" if err is None else f"({err})"))
    return 0


def cmd_snr(args) -> int:
    cfg = resolve_config(args, fallback_task="snr")
    res = run_snr(cfg)
    _dump(res, Path(cfg.out_dir) / "snr.json")
    s = res["summary"]
    print(f"coincidence {s['coincidence_db']:.2f} dB, stimulated {s['stimulated_db']:.2f} dB, "
          f"improvement {s['improvement_db']:.2f} dB")
    return 0


def cmd_selftest(args) -> int:
    """Fast numerical checks of the core identities."""
    from .harness.datasets import draw_state
    from .harness.experiments import correspondence_deviation
    from .regression import elastic_net_fit
    from .reservoir import EomConfig, ReservoirMap, eom_unitary
    from .tasks.satwap import satwap_classical_bound, satwap_value, satwap_value_operator

    rng = np.random.default_rng(0 if args.seed is None else args.seed)
    checks = []
    U = eom_unitary(EomConfig(1.4, 0.3)).matrix
    Up = eom_unitary(EomConfig(1.4, 0.3 + np.pi)).matrix
    checks.append(("eom adjoint", np.abs(Up - U.conj().T).max() < 1e-12))
    rmap = ReservoirMap.from_settings(1.4, 0.4, -0.7)
    dev = max(correspondence_deviation(draw_state(f, rng), rmap) for f in ("SP", "DP", "qudit4"))
    checks.append(("stimulated/spontaneous correspondence", dev < 1e-10))
    c = np.array([satwap_classical_bound(d) for d in (2, 3, 4)])
    checks.append(("classical bounds", np.allclose(c, [1.41421356, 3.09807621, 4.79271])))
    psi = rng.normal(size=9) + 1j * rng.normal(size=9)
    psi /= np.linalg.norm(psi)
    checks.append(("bell value routes", abs(satwap_value(psi, 3) - satwap_value_operator(psi, 3)) < 1e-10))
    X = rng.normal(size=(40, 5))
    y = X @ rng.normal(size=5) + 0.1
    fit = elastic_net_fit(X, y, 1e-12, 0.5, tol=1e-14)
    ls = np.linalg.lstsq(np.c_[X, np.ones(40)], y, rcond=None)[0]
    checks.append(("small-alpha least squares", np.abs(fit.coef - ls[:5]).max() < 1e-8))
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return 0 if all(ok for _, ok in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fbqelm", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("gen", help="generate train/test datasets")
    _common(p)
    p.set_defaults(func=cmd_gen)
    p = sub.add_parser("train", help="cross-validate and fit the linear readout")
    _common(p)
    p.add_argument("--data", type=Path, help="dataset directory (default: --out)")
    p.set_defaults(func=cmd_train)
    p = sub.add_parser("infer", help="score a trained readout on the test set")
    _common(p)
    p.add_argument("--data", type=Path, help="dataset directory (default: --out)")
    p.add_argument("--model", type=Path, help="model file (default: OUT/model.json)")
    p.set_defaults(func=cmd_infer)
    p = sub.add_parser("reproduce", help="write the CSV tables behind a figure")
    p.add_argument("figure", choices=FIGURES)
    _common(p, task=False)
    p.set_defaults(func=cmd_reproduce)
    p = sub.add_parser("snr", help="bright-bin SNR of both acquisition modes")
    _common(p, task=False)
    p.set_defaults(func=cmd_snr)
    p = sub.add_parser("selftest", help="quick numerical identity checks")
    _common(p, task=False)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
