"""Experiment command line: dataset synthesis, training runs, sweeps, ablations.

Configs are JSON documents mirroring TrainerConfig plus a dataset block and
an output directory; unknown keys are rejected.  All randomness flows from
the config's single ``seed``: the dataset and trainer sub-seeds are derived
deterministically from it and echoed into the run summary.  Every command
exits 0 on success and 1 with a single-line JSON error on failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import data, losses, oracle, trainer

OUTPUT_DIR_ENV = "TAYLORPU_OUTPUT_DIR"

_TRAINER_KEYS = {
    "loss": str,
    "order": int,
    "alpha": float,
    "beta": float,
    "n_pseudo_batches": int,
    "epochs": int,
    "base_lr": float,
    "momentum": float,
    "weight_decay": float,
    "gamma": float,
    "hidden_sizes": tuple,
    "threshold": float,
    "seed": int,
}

_DATASET_KEYS = {
    "gaussians": {"n", "prior", "separation", "n_labeled", "max_unlabeled"},
    "moons": {"n", "noise", "n_labeled", "max_unlabeled"},
    "csv": {"path", "label_column", "positive_value", "n_labeled", "standardize", "max_unlabeled"},
}


def _fmt(value) -> str:
    """Stable text for CSV cells: full-precision floats, plain ints."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def derive_seeds(root_seed: int) -> dict:
    """Deterministic dataset/trainer sub-seeds from the one root seed."""
    children = np.random.SeedSequence(root_seed).spawn(2)
    return {
        "seed": int(root_seed),
        "dataset_seed": int(children[0].generate_state(1)[0]),
        "trainer_seed": int(children[1].generate_state(1)[0]),
    }


def load_config(path) -> dict:
    """Read and validate a run config file."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    allowed = set(_TRAINER_KEYS) | {"dataset", "output_dir"}
    unknown = set(raw) - allowed
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    if "dataset" not in raw:
        raise ValueError(f"{path}: missing required key 'dataset'")
    ds = raw["dataset"]
    if not isinstance(ds, dict) or "kind" not in ds:
        raise ValueError(f"{path}: dataset block must be an object with a 'kind'")
    kind = ds["kind"]
    if kind not in _DATASET_KEYS:
        raise ValueError(f"{path}: dataset kind must be one of {sorted(_DATASET_KEYS)}")
    unknown = set(ds) - _DATASET_KEYS[kind] - {"kind"}
    if unknown:
        raise ValueError(f"{path}: unknown dataset keys {sorted(unknown)} for kind {kind!r}")
    raw.setdefault("output_dir", "runs")
    return raw


def build_trainer_config(cfg: dict, seed: int) -> trainer.TrainerConfig:
    kwargs = {k: cfg[k] for k in _TRAINER_KEYS if k in cfg and k != "seed"}
    if "hidden_sizes" in kwargs:
        kwargs["hidden_sizes"] = tuple(kwargs["hidden_sizes"])
    return trainer.TrainerConfig(seed=seed, **kwargs).validate()


def build_dataset(ds: dict, seed: int) -> data.PuDataset:
    kind = ds["kind"]
    if kind == "gaussians":
        return data.make_gaussians(
            n=ds["n"],
            prior=ds["prior"],
            separation=ds["separation"],
            n_labeled=ds["n_labeled"],
            seed=seed,
            max_unlabeled=ds.get("max_unlabeled"),
        )
    if kind == "moons":
        return data.make_two_moons(
            n=ds["n"],
            noise=ds["noise"],
            n_labeled=ds["n_labeled"],
            seed=seed,
            max_unlabeled=ds.get("max_unlabeled"),
        )
    return data.load_csv(
        ds["path"],
        label_column=ds["label_column"],
        positive_value=ds["positive_value"],
        n_labeled=ds["n_labeled"],
        seed=seed,
        standardize_features=ds.get("standardize", True),
        max_unlabeled=ds.get("max_unlabeled"),
    )


def resolve_output_dir(cfg: dict) -> Path:
    out = Path(os.environ.get(OUTPUT_DIR_ENV) or cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


HISTORY_COLUMNS = [
    "epoch",
    "lr",
    "loss_total",
    "loss_pos",
    "loss_unl",
    "loss_kl",
    "student_precision",
    "student_recall",
    "student_f1",
    "teacher_precision",
    "teacher_recall",
    "teacher_f1",
]


def write_history_csv(history, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HISTORY_COLUMNS)
        for rec in history:
            writer.writerow([_fmt(getattr(rec, col)) for col in HISTORY_COLUMNS])


def cmd_synth(args) -> int:
    if args.kind == "gaussians":
        dataset = data.make_gaussians(
            n=args.n,
            prior=args.prior,
            separation=args.separation,
            n_labeled=args.labeled,
            seed=args.seed,
        )
        params = {
            "kind": "gaussians",
            "n": args.n,
            "prior": args.prior,
            "separation": args.separation,
            "n_labeled": args.labeled,
            "seed": args.seed,
        }
    else:
        dataset = data.make_two_moons(
            n=args.n,
            noise=args.noise,
            n_labeled=args.labeled,
            seed=args.seed,
        )
        params = {
            "kind": "moons",
            "n": args.n,
            "noise": args.noise,
            "n_labeled": args.labeled,
            "seed": args.seed,
        }
    data.save_csv(dataset, args.out)
    meta = dict(params, rows=dataset.n_samples, label_column="label", positive_value="1")
    with open(f"{args.out}.meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {dataset.n_samples} rows to {args.out}")
    return 0


def _apply_overrides(cfg: dict, args) -> dict:
    for key in _TRAINER_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "output_dir", None) is not None:
        cfg["output_dir"] = args.output_dir
    return cfg


def cmd_train(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    seeds = derive_seeds(cfg.get("seed", 0))
    dataset = build_dataset(cfg["dataset"], seeds["dataset_seed"])
    config = build_trainer_config(cfg, seeds["trainer_seed"])
    teacher, _, history = trainer.train(dataset, config)

    out = resolve_output_dir(cfg)
    write_history_csv(history, out / "history.csv")
    final = history[-1]
    summary = {
        "config": cfg,
        "seeds": seeds,
        "dataset": dataset.name,
        "final_teacher": {
            "precision": final.teacher_precision,
            "recall": final.teacher_recall,
            "f1": final.teacher_f1,
        },
        "final_student": {
            "precision": final.student_precision,
            "recall": final.student_recall,
            "f1": final.student_f1,
        },
    }
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"final teacher F1 {final.teacher_f1:.4f}; history in {out / 'history.csv'}")
    return 0


def _parse_int_list(text: str, name: str) -> list[int]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise ValueError(f"{name} must be a non-empty comma-separated integer list")
    return [int(t) for t in items]


def cmd_sweep_order(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    orders = _parse_int_list(args.orders, "--orders")
    seeds_list = _parse_int_list(args.seeds, "--seeds")
    out = resolve_output_dir(cfg)

    rows = []
    for order in sorted(orders):
        for seed in sorted(seeds_list):
            seeds = derive_seeds(seed)
            dataset = build_dataset(cfg["dataset"], seeds["dataset_seed"])
            run_cfg = build_trainer_config({**cfg, "order": order, "loss": "taylor"}, seeds["trainer_seed"])
            _, _, history = trainer.train(dataset, run_cfg)
            rows.extend((order, seed, rec.epoch, rec.teacher_f1) for rec in history)

    path = out / "sweep_order.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["order", "seed", "epoch", "f1"])
        for order, seed, epoch, f1 in rows:
            writer.writerow([order, seed, epoch, _fmt(f1)])
    print(f"wrote {len(rows)} rows to {path}")
    return 0


ABLATION_GRID = [
    (False, "none"),
    (True, "none"),
    (True, "l2"),
    (True, "kl"),
]


def cmd_ablate(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    orders = _parse_int_list(args.orders, "--orders")
    seeds = derive_seeds(cfg.get("seed", 0))
    dataset = build_dataset(cfg["dataset"], seeds["dataset_seed"])
    out = resolve_output_dir(cfg)

    path = out / "ablation.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["order", "use_ema", "consistency", "f1"])
        for order in sorted(orders):
            run_cfg = build_trainer_config({**cfg, "order": order, "loss": "taylor"}, seeds["trainer_seed"])
            for use_ema, consistency in ABLATION_GRID:
                history = trainer.ablation_run(dataset, run_cfg, use_ema=use_ema, consistency=consistency)
                # teacher_f1 mirrors student_f1 when EMA is off, so this
                # column is uniformly the final-classifier F1.
                writer.writerow([order, int(use_ema), consistency, _fmt(history[-1].teacher_f1)])
    print(f"wrote {4 * len(orders)} rows to {path}")
    return 0


def cmd_gradcheck(args) -> int:
    """Run the oracle suite and print the worst deviation per check."""
    rng = np.random.default_rng(args.seed)
    worst_fd = 0.0
    for _ in range(args.batches):
        n_p = int(rng.integers(1, 33))
        n_u = int(rng.integers(2, 65))
        f_p = rng.uniform(0.05, 0.95, n_p)
        f_u = rng.uniform(0.05, 0.95, n_u)
        order = int(rng.integers(1, 11))

        pairs = [
            (
                lambda x: losses.variational_loss(x[:n_p], x[n_p:]).total,
                np.concatenate(losses.variational_loss_grad(f_p, f_u)),
            ),
            (
                lambda x: losses.taylor_variational_loss(x[:n_p], x[n_p:], order).total,
                np.concatenate(losses.taylor_variational_grad(f_p, f_u, order)),
            ),
            (
                lambda x: losses.cross_entropy_loss(x[:n_p], x[n_p:]).total,
                np.concatenate(losses.cross_entropy_grad(f_p, f_u)),
            ),
        ]
        point = np.concatenate([f_p, f_u])
        for fn, analytic in pairs:
            fd = oracle.finite_diff_grad(fn, point)
            rel = np.max(np.abs(analytic - fd) / np.maximum(np.abs(fd), 1e-12))
            worst_fd = max(worst_fd, float(rel))

    worst_series = 0.0
    worst_kl = 0.0
    for _ in range(args.batches):
        f_u = rng.uniform(0.05, 0.95, int(rng.integers(2, 65)))
        worst_series = max(worst_series, oracle.series_identity_check(f_u, int(rng.integers(1, 11))))
        world = oracle.random_toy_world(rng)
        f = rng.uniform(0.05, 1.0, world.marginal_prob.size)
        kl, gap = oracle.exact_variational_kl(world, f)
        worst_kl = max(worst_kl, abs(kl - gap))

    print(f"max relative gradient deviation vs central differences: {worst_fd:.3e}")
    print(f"max geometric-series closed-form gap: {worst_series:.3e}")
    print(f"max variational KL-identity gap: {worst_kl:.3e}")
    ok = worst_fd < 1e-6 and worst_series < 1e-12 and worst_kl < 1e-12
    print("gradcheck PASS" if ok else "gradcheck FAIL")
    return 0 if ok else 1


def _add_config_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--loss", choices=trainer.LOSS_CHOICES)
    parser.add_argument("--order", type=int)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--n-pseudo-batches", dest="n_pseudo_batches", type=int)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--base-lr", dest="base_lr", type=float)
    parser.add_argument("--momentum", type=float)
    parser.add_argument("--weight-decay", dest="weight_decay", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--threshold", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--output-dir", dest="output_dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taylorpu",
        description="Class-prior-free PU learning experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    synth.add_argument("kind", choices=["gaussians", "moons"])
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--prior", type=float, default=0.5)
    synth.add_argument("--separation", type=float, default=4.0)
    synth.add_argument("--noise", type=float, default=0.1)
    synth.add_argument("--labeled", type=int, required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_synth)

    train_p = sub.add_parser("train", help="run one training config")
    train_p.add_argument("--config", required=True)
    _add_config_overrides(train_p)
    train_p.set_defaults(func=cmd_train)

    sweep = sub.add_parser("sweep-order", help="train across truncation orders and seeds")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--orders", default="1,2,3,4,5")
    sweep.add_argument("--seeds", default="0")
    _add_config_overrides(sweep)
    sweep.set_defaults(func=cmd_sweep_order)

    ablate = sub.add_parser("ablate", help="toggle EMA/consistency grid")
    ablate.add_argument("--config", required=True)
    ablate.add_argument("--orders", default="2,5")
    _add_config_overrides(ablate)
    ablate.set_defaults(func=cmd_ablate)

    gradcheck = sub.add_parser("gradcheck", help="run the oracle verification suite")
    gradcheck.add_argument("--batches", type=int, default=200)
    gradcheck.add_argument("--seed", type=int, default=0)
    gradcheck.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # single-line machine-readable failure
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
