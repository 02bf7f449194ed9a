"""Pretraining sweep: how stage-1 effort affects the final inversion.

Grid-searches pretraining epochs x learning rate for the two-stage mode and
reports the final model error of each cell.

Run:  python3 demos/05_sweep.py   (a few minutes on one core)
"""

import numpy as np

import drfwi as D
from drfwi.svgplot import heatmap

from _shared import ensure_out, toy_problem


def main():
    out = ensure_out()
    m_true, m_init, geometry, wavelet, sim = toy_problem()
    observed = D.forward_all_shots(m_true, geometry, wavelet, sim)
    network = D.NetworkConfig(depth=3, width=48, omega=30.0)
    training = D.TrainingConfig(mode="pretrain", fwi_epochs=60, fwi_lr=3e-4,
                                pretrain_epochs=100, pretrain_lr=1e-3, seed=0)

    epochs_grid = [100, 400]
    lr_grid = [3e-4, 1e-3]
    result = D.sweep_pretraining(
        m_true, m_init, geometry, wavelet, sim, network, training,
        epochs_grid, lr_grid, observed=observed,
    )

    table = np.full((len(epochs_grid), len(lr_grid)), np.nan)
    for row in result.rows:
        i = epochs_grid.index(row.pretrain_epochs)
        j = lr_grid.index(row.pretrain_lr)
        table[i, j] = row.final_mse
        marker = "  <- best" if row is result.best else ""
        print(f"pretrain {row.pretrain_epochs:4d} epochs at lr {row.pretrain_lr:g}: "
              f"final MSE {row.final_mse:.5f}{marker}")

    heatmap(out / "05_sweep.svg", table, cell_labels=True,
            title="final model MSE by pretraining schedule",
            xlabel="pretraining lr", ylabel="pretraining epochs",
            x_ticks=[(j / (len(lr_grid) - 1), f"{lr:g}") for j, lr in enumerate(lr_grid)],
            y_ticks=[(i / (len(epochs_grid) - 1), str(e)) for i, e in enumerate(epochs_grid)])
    print(f"figure written to {out}/05_sweep.svg")


if __name__ == "__main__":
    main()
