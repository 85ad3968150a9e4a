"""
Random instance models: uniform, phi-perturbed and Gaussian-smoothed points.

All samplers draw from PCG64 streams derived from ``SeedSequence(seed)``
with one child stream per point and purpose, so a point's coordinates do
not depend on how many other points are drawn or in which order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import Instance, Metric

_OFFSET, _ANCHOR, _NOISE = 0, 1, 2


def point_rng(seed: int, purpose: int, index: int) -> np.random.Generator:
    """Independent generator for one (seed, purpose, point) triple."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(purpose, int(index)))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class DensitySpec:
    """Per-point density bound ``phi`` on ``[0,1]^d``, optionally with anchors."""

    phi: float
    d: int = 2
    anchors: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.phi >= 1:
            raise ValueError(f"phi must be >= 1, got {self.phi}")
        if self.d < 2:
            raise ValueError("d must be >= 2")

    @property
    def side(self) -> float:
        """Side length of the support subcube (its volume is 1/phi)."""
        return self.phi ** (-1.0 / self.d)


@dataclass(frozen=True)
class SmoothingParams:
    sigma: float
    alpha: float = 1.0
    truncated: bool = True

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not self.alpha >= 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")


def _check_nd(n, d):
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")


def sample_uniform(n: int, d: int = 2, seed: int = 0, p: Metric = 2) -> Instance:
    _check_nd(n, d)
    pts = np.array([point_rng(seed, _OFFSET, i).random(d) for i in range(n)])
    return Instance(pts, p, f"uniform-n{n}-d{d}-s{seed}",
                    meta={"model": "uniform", "seed": str(seed), "phi": "1"})


def sample_phi_perturbed(n: int, d: int = 2, phi: float = 1.0, seed: int = 0,
                         anchors: Optional[Sequence] = None, p: Metric = 2) -> Instance:
    """Point i is uniform on a subcube of volume 1/phi centred at ``anchors[i]``.

    The subcube is shifted (not shrunk) to stay inside ``[0,1]^d``, so every
    point density equals ``phi`` on its support. Without anchors, they are
    drawn uniformly from a dedicated seeded stream.
    """
    _check_nd(n, d)
    spec = DensitySpec(phi, d, None if anchors is None else np.asarray(anchors, dtype=float))
    if spec.anchors is None:
        anch = np.array([point_rng(seed, _ANCHOR, i).random(d) for i in range(n)])
    else:
        anch = spec.anchors
        if anch.shape != (n, d):
            raise ValueError(f"anchors must have shape ({n}, {d}), got {anch.shape}")
    s = spec.side
    lo = np.clip(anch - s / 2, 0.0, 1.0 - s)
    u = np.array([point_rng(seed, _OFFSET, i).random(d) for i in range(n)])
    pts = lo + s * u
    return Instance(pts, p, f"phi{phi:g}-n{n}-d{d}-s{seed}",
                    meta={"model": "phi", "seed": str(seed), "phi": f"{phi:.17g}"})


def _truncated_normal(rng, sigma, alpha, d, truncated):
    out = np.empty(d)
    for k in range(d):
        while True:
            z = rng.normal(0.0, sigma)
            if not truncated or -alpha <= z <= alpha:
                out[k] = z
                break
    return out


def gaussian_offsets(n: int, d: int, params: SmoothingParams, seed: int) -> np.ndarray:
    """Raw (pre-rescale) perturbations, rejection-sampled into [-alpha, alpha] when truncated."""
    return np.array([_truncated_normal(point_rng(seed, _NOISE, i), params.sigma, params.alpha, d,
                                       params.truncated) for i in range(n)])


def rescale_from_hull(x, alpha: float):
    """Affine map of ``[-alpha, 1+alpha]^d`` onto ``[0,1]^d``."""
    return (np.asarray(x, dtype=float) + alpha) / (1.0 + 2.0 * alpha)


def sample_smoothed_gaussian(base_points, params: SmoothingParams, seed: int = 0,
                             p: Metric = 2) -> Instance:
    """Perturb adversarial base points by Gaussian noise and rescale to the unit cube."""
    base = np.asarray(base_points, dtype=float)
    if base.ndim != 2:
        raise ValueError("base_points must have shape (n, d)")
    if np.any(base < 0) or np.any(base > 1):
        raise ValueError("base points must lie in [0,1]^d")
    n, d = base.shape
    _check_nd(n, d)
    pts = rescale_from_hull(base + gaussian_offsets(n, d, params, seed), params.alpha)
    phi = phi_of_gaussian(params, d) if params.sigma <= 1 or not params.truncated else math.nan
    return Instance(pts, p, f"gauss-s{params.sigma:g}-n{n}-d{d}-s{seed}",
                    meta={"model": "gaussian", "seed": str(seed), "sigma": f"{params.sigma:.17g}",
                          "alpha": f"{params.alpha:.17g}", "truncated": str(params.truncated),
                          "phi": f"{phi:.17g}",
                          "phi_rescaled": f"{phi * (2 * params.alpha + 1) ** d:.17g}"})


def phi_of_gaussian(params: SmoothingParams, d: int) -> float:
    """Density bound of the (truncated) Gaussian perturbation in d dimensions.

    Untruncated: ``(1/(sqrt(2 pi) sigma))**d``. Truncated (needs sigma <= 1):
    ``((1/(sigma sqrt(2 pi))) / (1 - sigma exp(-alpha^2 / (2 sigma^2))))**d``.
    Both are before rescaling ``[-alpha, 1+alpha]^d`` to the unit cube; see
    :func:`phi_rescaled`.
    """
    s = params.sigma
    peak = 1.0 / (s * math.sqrt(2.0 * math.pi))
    if not params.truncated:
        return peak ** d
    if s > 1:
        raise ValueError(f"truncated density bound needs sigma <= 1, got {s}")
    return (peak / (1.0 - s * math.exp(-params.alpha ** 2 / (2.0 * s * s)))) ** d


def phi_rescaled(params: SmoothingParams, d: int) -> float:
    """Density bound after mapping ``[-alpha, 1+alpha]^d`` onto ``[0,1]^d``."""
    return phi_of_gaussian(params, d) * (2.0 * params.alpha + 1.0) ** d
