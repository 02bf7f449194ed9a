import time

import numpy as np

from drfwi import (
    AcquisitionGeometry,
    SimConfig,
    VelocityModel,
    adjoint_apply,
    linearized_forward,
    ricker,
)

rng = np.random.default_rng(7)
nz, nx = 16, 24
vals = 2.0 + 0.5 * rng.random((nz, nx))
m = VelocityModel(vals, 10.0, 10.0)

geom = AcquisitionGeometry(
    sources=np.array([[1, 5], [1, 18]]),
    receivers=np.column_stack([np.ones(nx, dtype=int), np.arange(nx)]),
)
dt = 0.0015
nt = 200
w = ricker(12.0, dt, nt, 0.08)

for backend in ("numpy", "numba"):
    cfg = SimConfig(dt=dt, nt=nt, pml_width=8, backend=backend, pml_reference_velocity=2.5)
    dm = rng.standard_normal((nz, nx))
    dd = rng.standard_normal((geom.n_sources, nt, nx))
    t0 = time.time()
    Jdm = linearized_forward(m, dm, geom, w, cfg)
    g = adjoint_apply(m, geom, w, dd, cfg)
    t1 = time.time()
    lhs = float(np.sum(Jdm * dd))
    rhs = float(np.sum(dm * g.values))
    rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
    print(f"{backend:6s}  lhs={lhs:+.12e}  rhs={rhs:+.12e}  rel={rel:.3e}  {t1-t0:.2f}s")
