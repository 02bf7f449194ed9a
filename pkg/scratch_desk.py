"""Desk-scale pilot: 47x144 downsampled synthetic model, 7 shots, 300 epochs.

Prints the criterion-6/7/8 quantities for one initial model.
"""
import argparse
import time

import numpy as np

import drfwi as D

ap = argparse.ArgumentParser()
ap.add_argument("--init", default="smooth", choices=["smooth", "linear"])
ap.add_argument("--modes", default="s-denorm,a-denorm,pretrain")
ap.add_argument("--fwi-lr", type=float, default=1e-4)
ap.add_argument("--fwi-epochs", type=int, default=300)
ap.add_argument("--pre-epochs", type=int, default=1000)
ap.add_argument("--pre-lr", type=float, default=5e-5)
ap.add_argument("--f", type=float, default=8.0)
ap.add_argument("--nt", type=int, default=625)
ap.add_argument("--width", type=int, default=128)
ap.add_argument("--depth", type=int, default=4)
ap.add_argument("--omega", type=float, default=30.0)
ap.add_argument("--sigma", type=float, default=4.0)
args = ap.parse_args()
modes = args.modes.split(",")

m_true = D.downsample(D.synthetic_marmousi(), 2, 2)
if args.init == "smooth":
    m_init = D.gaussian_smooth(m_true, args.sigma)
else:
    m_init = D.linear_model(m_true.nz, m_true.nx, m_true.dz, m_true.dx, 1.5, 4.0)

geom = D.surface_line_geometry(m_true.nz, m_true.nx, 7)
sim = D.SimConfig(dt=0.0024, nt=args.nt, pml_width=20, pml_reference_velocity=6.2,
                  backend="numba")
w = D.ricker(args.f, sim.dt, sim.nt, round(1.2 / args.f, 12))
net = D.NetworkConfig(depth=args.depth, width=args.width, omega=args.omega)

print(f"init={args.init} modes={modes} fwi_lr={args.fwi_lr} "
      f"pre={args.pre_epochs}@{args.pre_lr} f={args.f} nt={args.nt} "
      f"net={args.depth}/{args.width}/omega{args.omega}", flush=True)
ini_mse = np.mean((m_init.values - m_true.values) ** 2)
print(f"true v in [{m_true.values.min():.3f},{m_true.values.max():.3f}]  "
      f"init mse={ini_mse:.5f}", flush=True)

obs = D.forward_all_shots(m_true, geom, w, sim)
results = {}
for mode in modes:
    tc = D.TrainingConfig(mode=mode, fwi_epochs=args.fwi_epochs, fwi_lr=args.fwi_lr,
                          pretrain_epochs=args.pre_epochs, pretrain_lr=args.pre_lr,
                          seed=0)
    t0 = time.time()

    def prog(stage, e, total, loss, mse, _mode=mode):
        if e % 50 == 0 or e == total - 1:
            print(f"  [{_mode}/{stage}] {e + 1}/{total} loss={loss:.4e} mse={mse:.5f}",
                  flush=True)

    rep = D.run_pipeline(m_true, m_init, geom, w, sim, net, tc, observed=obs,
                         progress=prog)
    mins = (time.time() - t0) / 60
    results[mode] = rep
    print(f"{mode:9s} final mse={rep.metrics.mse:.5f} ssim={rep.metrics.ssim:.4f} "
          f"({mins:.1f} min)", flush=True)

print("\n== criterion 6 ==")
for mode in modes:
    print(f"{mode:9s} {results[mode].metrics.mse:.5f} beats init: "
          f"{results[mode].metrics.mse < ini_mse}")

print("\n== criterion 7 ==")
for mode in modes:
    simrep = D.similarity_report(results[mode].checkpoints)
    for name, rows in simrep.comparisons:
        all_rows = [(r.layer, r.cosine_similarity) for r in rows]
        defined = [abs(c) for _, c in all_rows if c is not None]
        signed = [c for _, c in all_rows if c is not None]
        print(f"{mode:9s} {name}: mean|CS|={np.mean(defined):.3f} meanCS={np.mean(signed):.3f}  "
              + " ".join(f"{l}={c:.3f}" if c is not None else f"{l}=undef" for l, c in all_rows))
