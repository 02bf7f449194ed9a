"""Evaluation and analysis tools for inversion results.

Four families:

  * compute_metrics  — MSE / MAE / R² / SSIM between a prediction and truth
  * wavenumber_spectrum — one-sided vertical-wavenumber magnitudes per profile
  * target_decomposition — what the network must represent under each
    reparameterization mode (full target vs. residual perturbation)
  * parameter_similarity / similarity_report — per-layer cosine similarity and
    Euclidean distance between network checkpoints

All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.ndimage import correlate

from .errors import MetricsError
from .model import GridField, VelocityModel
from .reparam import Reparameterization
from .siren import SirenNetwork, layer_names

__all__ = [
    "MetricsBlock",
    "SpectrumProfile",
    "LayerSimilarityRow",
    "SimilarityReport",
    "compute_metrics",
    "ssim",
    "wavenumber_spectrum",
    "default_profile_columns",
    "target_decomposition",
    "parameter_similarity",
    "similarity_report",
]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricsBlock:
    """Scalar agreement metrics between a predicted and a true model."""

    mse: float
    mae: float
    r2: float
    ssim: float

    def as_dict(self) -> dict:
        return {"mse": self.mse, "mae": self.mae, "r2": self.r2, "ssim": self.ssim}


@dataclass(frozen=True)
class SpectrumProfile:
    """One-sided vertical-wavenumber magnitudes of one lateral profile."""

    lateral_index: int
    wavenumbers: np.ndarray  # cycles/km, len == nz//2 + 1
    magnitudes: np.ndarray

    def __post_init__(self):
        for name in ("wavenumbers", "magnitudes"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class LayerSimilarityRow:
    """Cosine similarity and Euclidean distance of one flattened tensor.

    cosine_similarity is None when either vector has zero norm (undefined);
    the Euclidean distance is always reported.
    """

    layer: str
    cosine_similarity: float | None
    euclidean_distance: float


@dataclass(frozen=True)
class SimilarityReport:
    """Named checkpoint comparisons, each a full set of per-layer rows."""

    comparisons: tuple[tuple[str, tuple[LayerSimilarityRow, ...]], ...]

    def mean_weight_cosine(self, name: str) -> float:
        """Mean cosine similarity over the parameter rows of one comparison.

        Averages every row of the per-layer table — weight matrices and bias
        vectors alike — excluding rows whose cosine similarity is undefined
        (zero-norm side, e.g. a zero-initialized layer).
        """
        for cmp_name, rows in self.comparisons:
            if cmp_name == name:
                vals = [
                    r.cosine_similarity
                    for r in rows
                    if r.cosine_similarity is not None
                ]
                if not vals:
                    raise MetricsError(f"no defined weight-row cosine values in '{name}'")
                return float(np.mean(vals))
        raise MetricsError(f"no comparison named '{name}'")


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = size // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(a: np.ndarray, b: np.ndarray, data_range: float) -> float:
    """Mean local SSIM with an 11×11 Gaussian window (σ=1.5), valid positions only.

    `data_range` fixes the stabilization constants, so the result is symmetric
    in (a, b) for any fixed range.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise MetricsError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim != 2:
        raise MetricsError("ssim expects 2D arrays")
    if min(a.shape) < SSIM_WINDOW:
        raise MetricsError(
            f"inputs of shape {a.shape} are smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    if not np.isfinite(data_range) or data_range <= 0:
        raise MetricsError(f"data_range must be positive and finite, got {data_range}")

    w = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2

    def local(img):
        return correlate(img, w, mode="constant")

    mu_a = local(a)
    mu_b = local(b)
    var_a = local(a * a) - mu_a * mu_a
    var_b = local(b * b) - mu_b * mu_b
    cov = local(a * b) - mu_a * mu_b

    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    smap = num / den

    half = SSIM_WINDOW // 2
    valid = smap[half:-half, half:-half]
    return float(valid.mean())


def _field_values(x) -> np.ndarray:
    """2D float array from a VelocityModel, GridField, or bare array."""
    arr = x.values if hasattr(x, "values") else np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise MetricsError(f"expected a 2D field, got shape {arr.shape}")
    return arr


def compute_metrics(predicted, truth) -> MetricsBlock:
    """MSE, MAE, R² (about the truth's mean), and SSIM (range = truth max−min).

    Accepts VelocityModel / GridField containers or bare 2D arrays.
    """
    p = _field_values(predicted)
    t = _field_values(truth)
    if p.shape != t.shape:
        raise MetricsError(f"shape mismatch: predicted {p.shape}, truth {t.shape}")
    diff = p - t
    mse = float(np.mean(diff**2))
    mae = float(np.mean(np.abs(diff)))
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        raise MetricsError("truth has zero variance; r2 is undefined")
    r2 = 1.0 - float(np.sum(diff**2)) / ss_tot
    data_range = float(t.max() - t.min())
    return MetricsBlock(mse=mse, mae=mae, r2=r2, ssim=ssim(p, t, data_range))


def default_profile_columns(nx: int, count: int = 4) -> list[int]:
    """`count` evenly spaced interior column indices (edges excluded)."""
    if nx < count + 2:
        raise MetricsError(f"model with nx={nx} is too narrow for {count} interior profiles")
    edges = np.linspace(0.0, nx - 1.0, count + 2)
    cols = [int(round(c)) for c in edges[1:-1]]
    if len(set(cols)) != count:
        raise MetricsError(f"cannot place {count} distinct interior profiles in nx={nx}")
    return cols


def wavenumber_spectrum(
    m: VelocityModel | GridField, lateral_indices: Sequence[int] | None = None
) -> list[SpectrumProfile]:
    """One-sided magnitude spectrum of mean-removed vertical profiles.

    Accepts a velocity model or a signed field (e.g. a perturbation from
    target_decomposition). Wavenumbers are in cycles per kilometre (grid
    spacing dz is in metres).
    """
    if lateral_indices is None:
        lateral_indices = default_profile_columns(m.nx)
    freqs = np.fft.rfftfreq(m.nz, d=m.dz / 1000.0)
    out = []
    for ix in lateral_indices:
        ix = int(ix)
        if not 0 <= ix < m.nx:
            raise MetricsError(f"profile column {ix} out of range [0, {m.nx})")
        profile = m.values[:, ix]
        mags = np.abs(np.fft.rfft(profile - profile.mean()))
        out.append(SpectrumProfile(lateral_index=ix, wavenumbers=freqs, magnitudes=mags))
    return out


def target_decomposition(
    m_true: VelocityModel, r: Reparameterization
) -> tuple[VelocityModel, GridField]:
    """(full target, network perturbation) under the given reparameterization.

    The full target is the true model itself; the perturbation is the part the
    network must represent: m_true − M·1 for global-mean denormalization,
    m_true − m_init for the init-based modes. The perturbation is signed, so it
    comes back as a GridField rather than a VelocityModel.
    """
    if m_true.shape != r.base.shape:
        raise MetricsError(f"shape mismatch: m_true {m_true.shape}, base {r.base.shape}")
    target = m_true.with_values(m_true.values.copy())
    perturbation = GridField(m_true.values - r.base.values, m_true.dz, m_true.dx)
    return target, perturbation


def _similarity_row(name: str, a: np.ndarray, b: np.ndarray) -> LayerSimilarityRow:
    av = a.ravel()
    bv = b.ravel()
    ed = float(np.linalg.norm(av - bv))
    na = float(np.linalg.norm(av))
    nb = float(np.linalg.norm(bv))
    if na == 0.0 or nb == 0.0:
        cs = None
    else:
        cs = float(np.dot(av, bv) / (na * nb))
        cs = max(-1.0, min(1.0, cs))
    return LayerSimilarityRow(layer=name, cosine_similarity=cs, euclidean_distance=ed)


def parameter_similarity(a: SirenNetwork, b: SirenNetwork) -> list[LayerSimilarityRow]:
    """Per-tensor cosine similarity and Euclidean distance, rows ordered
    L0.weight, L0.bias, …, L{depth}.bias."""
    if len(a.weights) != len(b.weights):
        raise MetricsError("networks have different depths")
    rows: list[LayerSimilarityRow] = []
    for name, wa, ba, wb, bb in zip(layer_names(a), a.weights, a.biases, b.weights, b.biases):
        if wa.shape != wb.shape or ba.shape != bb.shape:
            raise MetricsError(f"layer {name} shapes differ: {wa.shape} vs {wb.shape}")
        rows.append(_similarity_row(f"{name}.weight", wa, wb))
        rows.append(_similarity_row(f"{name}.bias", ba, bb))
    return rows


def similarity_report(
    checkpoints: Sequence[tuple[str, SirenNetwork]],
) -> SimilarityReport:
    """Checkpoint comparisons in the standard layout.

    Three checkpoints (two-stage run: initial, post-stage-1, final) yield
    "<stage1> vs <ini>" and "<stage1> vs <final>"; two checkpoints
    (single-stage run: initial, final) yield "<final> vs <ini>".
    """
    if len(checkpoints) == 3:
        (n0, c0), (n1, c1), (n2, c2) = checkpoints
        comparisons = (
            (f"{n1} vs {n0}", tuple(parameter_similarity(c1, c0))),
            (f"{n1} vs {n2}", tuple(parameter_similarity(c1, c2))),
        )
    elif len(checkpoints) == 2:
        (n0, c0), (n1, c1) = checkpoints
        comparisons = ((f"{n1} vs {n0}", tuple(parameter_similarity(c1, c0))),)
    else:
        raise MetricsError(
            f"expected 2 or 3 checkpoints (single- or two-stage run), got {len(checkpoints)}"
        )
    return SimilarityReport(comparisons=comparisons)
