"""Full-scale reference run: 94 x 288 model, 13 shots, 1000 epochs per mode.

This is the multi-hour configuration whose published reference MSE values
(smooth initial model) are 0.1839 (pretrain), 0.1605 (s-denorm) and 0.1517
(a-denorm). The script runs all three modes in checkpointed-tape mode and
writes a side-by-side comparison table; no tolerances are checked — the
synthetic stand-in model makes exact reproduction out of scope.

Run:  python3 demos/full_scale_reference.py   (several hours on one core)
      The acceptance suite runs the same configuration when DRFWI_FULL_SCALE=1.
"""

import csv
import time
from pathlib import Path

import drfwi as D

REFERENCE = {"pretrain": 0.1839, "s-denorm": 0.1605, "a-denorm": 0.1517}


def main():
    out = Path("runs") / "full-scale"
    out.mkdir(parents=True, exist_ok=True)

    m_true = D.synthetic_marmousi()
    m_init = D.gaussian_smooth(m_true, 8.0)
    geometry = D.surface_line_geometry(m_true.nz, m_true.nx, 13)
    sim = D.SimConfig(
        dt=0.0015, nt=1000, pml_width=20, pml_reference_velocity=6.2,
        backend="numba", tape="checkpoint", checkpoint_interval=32,
    )
    wavelet = D.ricker(8.0, sim.dt, sim.nt, 0.15)
    network = D.NetworkConfig(depth=4, width=128, omega=30.0)

    print(f"grid {m_true.nz} x {m_true.nx}, {geometry.n_sources} shots, "
          f"{sim.nt} steps, checkpointed tape (interval {sim.checkpoint_interval})")
    observed = D.forward_all_shots(m_true, geometry, wavelet, sim)
    init_mse = D.compute_metrics(m_init, m_true).mse
    print(f"initial model MSE {init_mse:.4f}")

    rows = []
    for mode in ("pretrain", "s-denorm", "a-denorm"):
        training = D.TrainingConfig(mode=mode, fwi_epochs=1000, fwi_lr=1e-4,
                                    pretrain_epochs=1000, pretrain_lr=5e-5, seed=0)
        t0 = time.time()
        rep = D.run_pipeline(m_true, m_init, geometry, wavelet, sim,
                             network, training, observed=observed,
                             out_dir=out / mode)
        hours = (time.time() - t0) / 3600
        D.save_model(rep.final_model, out / mode / "final_model.bin")
        rows.append((mode, rep.metrics.mse, REFERENCE[mode]))
        print(f"{mode:9s} final MSE {rep.metrics.mse:.4f} "
              f"(reference {REFERENCE[mode]})  [{hours:.2f} h]")

    with open(out / "reference_comparison.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "final_mse", "reference_mse"])
        for mode, mse, ref in rows:
            writer.writerow([mode, repr(mse), ref])
    print(f"comparison table written to {out / 'reference_comparison.csv'}")


if __name__ == "__main__":
    main()
