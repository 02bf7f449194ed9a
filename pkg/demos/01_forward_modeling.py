"""Forward modeling: simulate surface shots over a known velocity model.

The simulator solves the 2D acoustic wave equation (4th-order space,
2nd-order time) with a free surface on top and PML absorbing strips on the
other edges, and records the pressure field at the receiver line.

Run:  python3 demos/01_forward_modeling.py
"""

import numpy as np

import drfwi as D
from drfwi.svgplot import heatmap, line_plot

from _shared import ensure_out, toy_problem


def main():
    out = ensure_out()
    m_true, _, geometry, wavelet, sim = toy_problem()

    print(f"model: {m_true.nz} x {m_true.nx} cells at {m_true.dz:.0f} m, "
          f"v in [{m_true.values.min():.2f}, {m_true.values.max():.2f}] km/s")
    print(f"acquisition: {geometry.n_sources} shots into "
          f"{geometry.n_receivers} receivers along the surface")
    print(f"time stepping: {sim.nt} steps of {sim.dt * 1e3:.1f} ms "
          f"({sim.nt * sim.dt:.2f} s records)")

    heatmap(out / "01_true_model.svg", m_true.values,
            title="true velocity (km/s)", xlabel="x cell", ylabel="depth cell")

    records = D.forward_all_shots(m_true, geometry, wavelet, sim)
    for k, rec in enumerate(records):
        print(f"shot {k}: traces {rec.traces.shape}, "
              f"peak amplitude {np.abs(rec.traces).max():.3e}")
    mid = records[len(records) // 2]
    heatmap(out / "01_shot_record.svg", mid.traces,
            title="middle shot record (time down, receivers across)",
            xlabel="receiver", ylabel="time sample",
            vmin=-0.02 * np.abs(mid.traces).max(),
            vmax=0.02 * np.abs(mid.traces).max())

    t = (np.arange(sim.nt) + 1) * sim.dt
    near = mid.traces[:, geometry.receivers[geometry.n_receivers // 2, 1]]
    far = mid.traces[:, 2]
    line_plot(out / "01_traces.svg",
              [("near offset", t, near), ("far offset", t, far)],
              title="two traces from the middle shot",
              xlabel="time (s)", ylabel="pressure")

    D.save_shot_record(mid, out / "01_shot.bin")
    again = D.load_shot_record(out / "01_shot.bin")
    print(f"round-trip through {out / '01_shot.bin'}: "
          f"max |diff| {np.abs(again.traces - mid.traces).max():.1e} "
          "(float32 storage)")
    print(f"figures written to {out}/01_*.svg")


if __name__ == "__main__":
    main()
