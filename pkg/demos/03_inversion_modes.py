"""Network-reparameterized inversion: the three training modes side by side.

Instead of updating velocity cells directly, the inversion trains a
sine-activated coordinate network whose output is mapped to velocity by a
denormalization step. The three modes differ in how the initial model enters:

  pretrain  two stages: fit the network to the initial model around a global
            mean, then continue on the seismic misfit
  s-denorm  single stage: network output is a static additive correction to
            the (frozen) initial model
  a-denorm  like s-denorm, but the initial model is itself trainable

Run:  python3 demos/03_inversion_modes.py   (about a minute on one core)
"""

import numpy as np

import drfwi as D
from drfwi.svgplot import heatmap, line_plot

from _shared import ensure_out, toy_problem


def main():
    out = ensure_out()
    m_true, m_init, geometry, wavelet, sim = toy_problem()
    observed = D.forward_all_shots(m_true, geometry, wavelet, sim)
    network = D.NetworkConfig(depth=3, width=48, omega=30.0)
    init_mse = D.compute_metrics(m_init, m_true).mse
    print(f"initial model MSE {init_mse:.5f}")

    reports, curves = {}, []
    for mode in ("pretrain", "s-denorm", "a-denorm"):
        training = D.TrainingConfig(
            mode=mode, fwi_epochs=120, fwi_lr=3e-4,
            pretrain_epochs=400, pretrain_lr=1e-3, seed=0,
        )
        rep = D.run_pipeline(m_true, m_init, geometry, wavelet, sim,
                             network, training, observed=observed)
        reports[mode] = rep
        fwi = rep.stage("fwi")
        curves.append((mode, np.arange(1, fwi.loss.size + 1), fwi.loss))
        print(f"{mode:9s} final MSE {rep.metrics.mse:.5f}  "
              f"SSIM {rep.metrics.ssim:.3f}  R2 {rep.metrics.r2:.3f}")
        heatmap(out / f"03_final_{mode}.svg", rep.final_model.values,
                title=f"{mode}: recovered velocity (km/s)",
                vmin=m_true.values.min(), vmax=m_true.values.max())

    line_plot(out / "03_loss_curves.svg", curves, logy=True,
              title="seismic misfit during training", xlabel="epoch",
              ylabel="loss")
    heatmap(out / "03_true.svg", m_true.values, title="true velocity (km/s)",
            vmin=m_true.values.min(), vmax=m_true.values.max())

    best = min(reports, key=lambda k: reports[k].metrics.mse)
    print(f"best final MSE: {best} "
          f"({reports[best].metrics.mse:.5f} vs initial {init_mse:.5f})")
    print(f"figures written to {out}/03_*.svg")


if __name__ == "__main__":
    main()
