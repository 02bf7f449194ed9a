"""Command-line interface: config-driven experiment runner.

    drfwi forward   --config run.toml      simulate shot records
    drfwi invert    --config run.toml      run one inversion pipeline
    drfwi sweep     --config run.toml      grid the pretraining budget
    drfwi metrics   PRED [TRUTH]           model-agreement metrics as JSON
    drfwi spectrum  MODEL                  vertical-wavenumber spectra as CSV
    drfwi paramdiag CKPT CKPT [CKPT]       per-layer checkpoint similarity as CSV

Each config-driven command writes into <paths.output_dir>/<command>-<hash>/
where <hash> digests the resolved config; the resolved config is copied into
the directory. Artifacts are deterministic for a fixed config and seed, except
timing.json (wall-clock measurements). DRFWI_THREADS caps the numba thread
pool (the bundled kernels are single-threaded; the knob exists for parallel
builds of them).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, config_hash, load_run_config
from .diagnostics import (
    SimilarityReport,
    compute_metrics,
    similarity_report,
    wavenumber_spectrum,
)
from .errors import ConfigurationError, DrfwiError
from .model import VelocityModel, load_model, save_model
from .optimize import InversionReport, run_pipeline, sweep_pretraining
from .siren import load_checkpoint
from .svgplot import heatmap, line_plot
from .wavesim import forward_all_shots, load_shot_record, save_shot_record

log = logging.getLogger(__name__)


# -- helpers -------------------------------------------------------------------


def _apply_thread_env() -> None:
    raw = os.environ.get("DRFWI_THREADS")
    if not raw:
        return
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError:
        raise ConfigurationError(f"DRFWI_THREADS must be a positive integer, got {raw!r}")
    import numba

    numba.set_num_threads(n)


def _run_dir(cfg: RunConfig, command: str) -> Path:
    out_root = Path(cfg.output_dir)
    if not out_root.is_absolute():
        out_root = cfg.base_dir / out_root
    run_dir = out_root / f"{command}-{config_hash(cfg)}"
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "resolved_config.json", "w") as f:
        json.dump(cfg.resolved, f, indent=2, sort_keys=True)
        f.write("\n")
    return run_dir


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _progress_printer(total_hint: int):
    def progress(stage: str, epoch: int, total: int, loss: float, mse: float):
        stride = max(1, total // 20)
        if epoch % stride and epoch != total - 1:
            return
        msg = f"[{stage}] epoch {epoch + 1}/{total} loss={loss:.6e}"
        if np.isfinite(mse):
            msg += f" model_mse={mse:.6e}"
        print(msg, file=sys.stderr)

    return progress


def _load_observed(cfg: RunConfig) -> list | None:
    if cfg.observed_dir is None:
        return None
    obs_dir = cfg.resolve_path(cfg.observed_dir)
    manifest = obs_dir / "manifest.json"
    if not manifest.is_file():
        raise ConfigurationError(f"paths.observed_dir: no manifest.json in {obs_dir}")
    with open(manifest) as f:
        names = json.load(f)["shots"]
    return [load_shot_record(obs_dir / name) for name in names]


# -- commands -------------------------------------------------------------------


def cmd_forward(args) -> int:
    cfg = load_run_config(args.config)
    m_true = cfg.resolve_true_model()
    geometry = cfg.build_geometry(m_true)
    wavelet = cfg.build_wavelet()
    run_dir = _run_dir(cfg, "forward")

    t0 = time.perf_counter()
    records = forward_all_shots(m_true, geometry, wavelet, cfg.sim)
    names = []
    for i, rec in enumerate(records):
        name = f"shot_{i:03d}.bin"
        save_shot_record(rec, run_dir / name)
        names.append(name)
    manifest = {
        "shots": names,
        "n_shots": len(names),
        "nt": cfg.sim.nt,
        "dt": cfg.sim.dt,
        "n_receivers": geometry.n_receivers,
        "config_hash": config_hash(cfg),
    }
    with open(run_dir / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    with open(run_dir / "timing.json", "w") as f:
        json.dump({"total_seconds": time.perf_counter() - t0}, f, indent=2)
        f.write("\n")
    print(f"wrote {len(names)} shot records to {run_dir}")
    return 0


def _write_curves_csv(report: InversionReport, path: Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["stage", "epoch", "loss", "model_mse"])
        for stage in report.stages:
            for e in range(stage.loss.size):
                mse = "" if stage.model_mse is None else repr(float(stage.model_mse[e]))
                writer.writerow([stage.name, e, repr(float(stage.loss[e])), mse])


def _write_invert_plots(report: InversionReport, run_dir: Path) -> None:
    loss_series = []
    mse_series = []
    offset = 0
    for stage in report.stages:
        epochs = np.arange(stage.loss.size) + offset
        loss_series.append((stage.name, epochs, stage.loss))
        if stage.model_mse is not None and np.isfinite(stage.model_mse).any():
            keep = np.isfinite(stage.model_mse)
            mse_series.append((stage.name, epochs[keep], stage.model_mse[keep]))
        offset += stage.loss.size
    if any(y.size for _, _, y in loss_series):
        line_plot(
            run_dir / "loss.svg", loss_series,
            title="Training objective", xlabel="epoch (stages concatenated)",
            ylabel="loss", logy=True,
        )
    if mse_series:
        line_plot(
            run_dir / "model_error.svg", mse_series,
            title="Model error vs ground truth", xlabel="epoch (stages concatenated)",
            ylabel="MSE (km/s)^2",
        )


def cmd_invert(args) -> int:
    cfg = load_run_config(args.config)
    if cfg.training is None:
        raise ConfigurationError("training: section is required for invert")
    m_true = cfg.resolve_true_model()
    m_init = cfg.resolve_initial_model(m_true)
    geometry = cfg.build_geometry(m_true)
    wavelet = cfg.build_wavelet()
    observed = _load_observed(cfg)
    run_dir = _run_dir(cfg, "invert")

    t0 = time.perf_counter()
    report = run_pipeline(
        m_true, m_init, geometry, wavelet, cfg.sim, cfg.network, cfg.training,
        observed=observed, out_dir=run_dir,
        progress=None if args.quiet else _progress_printer(cfg.training.fwi_epochs),
    )
    total = time.perf_counter() - t0

    save_model(m_init, run_dir / "initial_model.bin")
    save_model(report.start_model, run_dir / "start_model.bin")
    save_model(report.final_model, run_dir / "final_model.bin")
    _write_curves_csv(report, run_dir / "curves.csv")
    metrics = {
        "mode": report.mode,
        "final": report.metrics.as_dict() if report.metrics else None,
        "initial": report.init_metrics.as_dict() if report.init_metrics else None,
    }
    with open(run_dir / "metrics.json", "w") as f:
        json.dump(metrics, f, indent=2, sort_keys=True)
        f.write("\n")
    _write_invert_plots(report, run_dir)
    with open(run_dir / "timing.json", "w") as f:
        json.dump(
            {
                "total_seconds": total,
                "per_stage_seconds": {s.name: float(s.epoch_seconds.sum()) for s in report.stages},
            },
            f, indent=2, sort_keys=True,
        )
        f.write("\n")

    if report.metrics:
        print(
            f"{report.mode}: final mse={report.metrics.mse:.6f} "
            f"mae={report.metrics.mae:.6f} r2={report.metrics.r2:.4f} "
            f"ssim={report.metrics.ssim:.4f}"
        )
    print(f"report written to {run_dir}")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_run_config(args.config)
    if cfg.training is None:
        raise ConfigurationError("training: section is required for sweep")
    epochs_list = args.epochs if args.epochs is not None else cfg.sweep_epochs
    lr_list = args.lrs if args.lrs is not None else cfg.sweep_lrs
    if not epochs_list or not lr_list:
        raise ConfigurationError(
            "sweep needs epochs and learning rates (--epochs/--lrs or a [sweep] section)"
        )
    m_true = cfg.resolve_true_model()
    m_init = cfg.resolve_initial_model(m_true)
    geometry = cfg.build_geometry(m_true)
    wavelet = cfg.build_wavelet()
    run_dir = _run_dir(cfg, "sweep")

    def progress(done: int, total: int, row) -> None:
        if not args.quiet:
            print(
                f"[sweep] {done}/{total} epochs={row.pretrain_epochs} lr={row.pretrain_lr:g} "
                f"mse={row.final_mse:.6f} ({row.status})",
                file=sys.stderr,
            )

    t0 = time.perf_counter()
    result = sweep_pretraining(
        m_true, m_init, geometry, wavelet, cfg.sim, cfg.network, cfg.training,
        epochs_list, lr_list, observed=_load_observed(cfg), progress=progress,
    )

    with open(run_dir / "sweep.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["pretrain_epochs", "pretrain_lr", "final_mse", "status", "best"])
        for i, row in enumerate(result.rows):
            writer.writerow([
                row.pretrain_epochs, repr(row.pretrain_lr), repr(row.final_mse),
                row.status, "yes" if i == result.best_index else "",
            ])

    grid = np.full((len(epochs_list), len(lr_list)), np.nan)
    for row in result.rows:
        i = epochs_list.index(row.pretrain_epochs)
        j = lr_list.index(row.pretrain_lr)
        grid[i, j] = row.final_mse
    heatmap(
        run_dir / "sweep.svg", grid,
        title="Final model MSE over the pretraining budget",
        xlabel="pretraining learning rate", ylabel="pretraining epochs",
        x_ticks=[((j + 0.5) / len(lr_list), f"{lr:g}") for j, lr in enumerate(lr_list)],
        y_ticks=[((i + 0.5) / len(epochs_list), str(e)) for i, e in enumerate(epochs_list)],
        cell_labels=True,
    )
    with open(run_dir / "timing.json", "w") as f:
        json.dump({"total_seconds": time.perf_counter() - t0}, f, indent=2)
        f.write("\n")

    if result.best is None:
        print("sweep finished: every cell failed")
    else:
        b = result.best
        print(
            f"sweep finished: best pretrain_epochs={b.pretrain_epochs} "
            f"pretrain_lr={b.pretrain_lr:g} final_mse={b.final_mse:.6f}"
        )
    print(f"report written to {run_dir}")
    return 0


def cmd_metrics(args) -> int:
    predicted = load_model(args.predicted)
    if args.truth is not None:
        truth = load_model(args.truth)
    elif args.config is not None:
        truth = load_run_config(args.config).resolve_true_model()
    else:
        raise ConfigurationError("metrics needs a TRUTH argument or --config with a true model")
    block = compute_metrics(predicted, truth)
    text = json.dumps(block.as_dict(), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"metrics written to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_spectrum(args) -> int:
    if args.model is not None:
        model = load_model(args.model)
    elif args.config is not None:
        model = load_run_config(args.config).resolve_true_model()
    else:
        raise ConfigurationError("spectrum needs a MODEL argument or --config with a true model")
    profiles = wavenumber_spectrum(model, args.columns)

    rows = [["wavenumber_cycles_per_km"] + [f"column_{p.lateral_index}" for p in profiles]]
    for b in range(profiles[0].wavenumbers.size):
        rows.append(
            [repr(float(profiles[0].wavenumbers[b]))]
            + [repr(float(p.magnitudes[b])) for p in profiles]
        )
    if args.out:
        with open(args.out, "w", newline="") as f:
            csv.writer(f).writerows(rows)
        print(f"spectra written to {args.out}")
    else:
        csv.writer(sys.stdout).writerows(rows)
    if args.svg:
        line_plot(
            Path(args.svg),
            [
                (f"column {p.lateral_index}", p.wavenumbers, p.magnitudes)
                for p in profiles
            ],
            title="Vertical wavenumber spectra",
            xlabel="wavenumber (cycles/km)", ylabel="magnitude",
        )
        print(f"plot written to {args.svg}")
    return 0


def _similarity_csv_rows(report: SimilarityReport) -> list[list[str]]:
    header = ["layer"]
    for name, _ in report.comparisons:
        header += [f"{name} CS", f"{name} ED"]
    layer_order = [row.layer for row in report.comparisons[0][1]]
    rows = [header]
    for i, layer in enumerate(layer_order):
        out = [layer]
        for _, rws in report.comparisons:
            cs = rws[i].cosine_similarity
            out.append("" if cs is None else repr(cs))
            out.append(repr(rws[i].euclidean_distance))
        rows.append(out)
    return rows


def cmd_paramdiag(args) -> int:
    nets = [load_checkpoint(p) for p in args.checkpoints]
    labels = ("INI", "Stage1", "Stage2") if len(nets) == 3 else ("INI", "FWI")
    report = similarity_report(list(zip(labels, nets)))
    rows = _similarity_csv_rows(report)
    if args.out:
        with open(args.out, "w", newline="") as f:
            csv.writer(f).writerows(rows)
        print(f"similarity table written to {args.out}")
    else:
        csv.writer(sys.stdout).writerows(rows)
    return 0


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drfwi",
        description="Full waveform inversion with neural-network-reparameterized velocity models.",
    )
    parser.add_argument("--version", action="version", version=f"drfwi {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("forward", help="simulate shot records from the true model")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("invert", help="run one inversion pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("sweep", help="grid the pretraining budget")
    p.add_argument("--config", required=True)
    p.add_argument("--epochs", type=_int_list, default=None,
                   help="comma-separated pretraining epoch counts")
    p.add_argument("--lrs", type=_float_list, default=None,
                   help="comma-separated pretraining learning rates")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("metrics", help="agreement metrics between two model files")
    p.add_argument("predicted")
    p.add_argument("truth", nargs="?", default=None)
    p.add_argument("--config", default=None, help="config supplying the true model")
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("spectrum", help="vertical wavenumber spectra of a model file")
    p.add_argument("model", nargs="?", default=None)
    p.add_argument("--config", default=None, help="config supplying the model")
    p.add_argument("--columns", type=_int_list, default=None,
                   help="comma-separated lateral column indices")
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p.add_argument("--svg", default=None, help="also write a line plot here")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("paramdiag", help="per-layer similarity of 2 or 3 checkpoints")
    p.add_argument("checkpoints", nargs="+", help="checkpoint files (INI [stage1] final)")
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_paramdiag)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        _apply_thread_env()
        return args.func(args)
    except DrfwiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
