"""Diagnostics: what the network must learn, and how much its parameters move.

Two views explain why the single-stage denormalization modes behave
differently from pretraining:

1. Wavenumber spectra of the learning target. With init-based
   denormalization the network only has to represent m_true - m_init, which
   has far less low-wavenumber content than the pretraining target
   m_true - mean. Networks fit low frequencies first, so a smaller
   low-wavenumber burden converges faster.

2. Per-layer parameter similarity across training stages. After pretraining,
   stage-2 parameters stay nearly parallel to stage-1 (cosine similarity
   near 1: the network has lost plasticity); the single-stage modes drift
   much further from their initialization.

Run:  python3 demos/04_diagnostics.py   (about a minute on one core)
"""

import numpy as np

import drfwi as D
from drfwi.svgplot import line_plot

from _shared import ensure_out, toy_problem


def main():
    out = ensure_out()
    m_true, m_init, geometry, wavelet, sim = toy_problem()

    # --- 1. spectra of the two learning targets ------------------------------
    r_mean = D.Reparameterization.global_mean(1.0, 3.0, like=m_true)
    r_init = D.Reparameterization.static_init(1.0, m_init)
    _, pert_mean = D.target_decomposition(m_true, r_mean)
    _, pert_init = D.target_decomposition(m_true, r_init)

    col = D.default_profile_columns(m_true.nx)[1]
    sp_mean = D.wavenumber_spectrum(pert_mean, [col])[0]
    sp_init = D.wavenumber_spectrum(pert_init, [col])[0]
    line_plot(
        out / "04_target_spectra.svg",
        [("pretraining target (m_true - mean)", sp_mean.wavenumbers, sp_mean.magnitudes),
         ("denorm target (m_true - m_init)", sp_init.wavenumbers, sp_init.magnitudes)],
        title=f"vertical wavenumber spectra, column {col}",
        xlabel="wavenumber (cycles/km)", ylabel="|amplitude|",
    )
    lo = slice(1, 4)
    print("summed magnitude of the 3 lowest nonzero wavenumber bins "
          f"(column {col}):")
    print(f"  pretraining target {sp_mean.magnitudes[lo].sum():8.3f}")
    print(f"  denorm target      {sp_init.magnitudes[lo].sum():8.3f}")

    # --- 2. parameter drift: pretrain vs single-stage ------------------------
    observed = D.forward_all_shots(m_true, geometry, wavelet, sim)
    network = D.NetworkConfig(depth=3, width=48, omega=30.0)
    for mode in ("pretrain", "s-denorm"):
        training = D.TrainingConfig(mode=mode, fwi_epochs=120, fwi_lr=3e-4,
                                    pretrain_epochs=400, pretrain_lr=1e-3, seed=0)
        rep = D.run_pipeline(m_true, m_init, geometry, wavelet, sim,
                             network, training, observed=observed)
        sim_rep = D.similarity_report(rep.checkpoints)
        print(f"\n{mode}: parameter similarity between stages")
        for name, rows in sim_rep.comparisons:
            mean_cs = sim_rep.mean_weight_cosine(name)
            print(f"  {name}: mean weight-row cosine {mean_cs:.3f}")
            for row in rows:
                cs = "  n/a" if row.cosine_similarity is None else f"{row.cosine_similarity:+.3f}"
                print(f"    {row.layer:12s} cs {cs}  |d| {row.euclidean_distance:.3f}")
    print(f"\nfigure written to {out}/04_target_spectra.svg")


if __name__ == "__main__":
    main()
