"""Seeded benchmark data: real SIFT descriptors and a synthetic mixture."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def gaussian_mixture(
    n: int,
    dim: int = 128,
    n_clusters: int = 64,
    intrinsic_dim: int = 48,
    seed: int = 0,
    spread: float = 4.0,
    noise: float = 0.1,
) -> np.ndarray:
    """Draw ``n`` float32 vectors from a mixture of low-rank Gaussians.

    Each component lives near an ``intrinsic_dim``-dimensional subspace with
    isotropic noise of scale ``noise``; ``spread`` scales the distances
    between component centers. This gives neighborhoods closer to real
    descriptor data than a plain isotropic Gaussian does.
    """
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=spread, size=(n_clusters, dim))
    bases = rng.normal(size=(n_clusters, intrinsic_dim, dim)) / np.sqrt(intrinsic_dim)
    labels = rng.integers(n_clusters, size=n)
    latent = rng.normal(size=(n, intrinsic_dim))
    x = centers[labels] + np.einsum("ni,nid->nd", latent, bases[labels])
    x += rng.normal(scale=noise, size=(n, dim))
    return x.astype(np.float32)


# Sample images shipped inside scikit-image, so no download is needed.
# Together they yield about 28k keypoints.
_SIFT_IMAGES = (
    "astronaut", "camera", "coffee", "chelsea", "rocket", "brick", "grass", "gravel",
    "coins", "page", "text", "hubble_deep_field", "immunohistochemistry", "logo",
)


@lru_cache(maxsize=1)
def _sift_pool() -> np.ndarray:
    from skimage import color, data
    from skimage.feature import SIFT

    blocks = []
    for name in _SIFT_IMAGES:
        img = getattr(data, name)()
        if img.ndim == 3:
            img = color.rgb2gray(img[..., :3])
        extractor = SIFT()
        extractor.detect_and_extract(img)
        blocks.append(extractor.descriptors)
    # uint8 components, the same value range as the TEXMEX SIFT files
    pool = np.vstack(blocks).astype(np.float32)
    pool.setflags(write=False)
    return pool


def sift_descriptors(n: int, seed: int = 0) -> np.ndarray:
    """``n`` real 128-d SIFT descriptors from scikit-image's sample images.

    Rows are drawn without replacement in a seeded random order, so any
    contiguous split of the result is an unbiased sample of the pool.
    """
    pool = _sift_pool()
    if not 0 < n <= len(pool):
        raise ValueError(f"n must be in [1, {len(pool)}], got {n}")
    order = np.random.default_rng(seed).permutation(len(pool))[:n]
    return pool[order].copy()
