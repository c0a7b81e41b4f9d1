"""Seeded generators for random states, unitaries, and measurement elements.

Every generator takes an explicit ``numpy.random.Generator`` so callers stay
deterministic and reproducible.
"""

from __future__ import annotations

import numpy as np

from .linalg import PureState, DensityOperator, dagger


def random_complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_pure_state(dim: int, rng: np.random.Generator) -> PureState:
    vec = random_complex_gaussian(rng, dim)
    return PureState(vec / np.linalg.norm(vec))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via phase-fixed QR of a Ginibre matrix."""
    q, r = np.linalg.qr(random_complex_gaussian(rng, (dim, dim)))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_psd(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = random_complex_gaussian(rng, (dim, rank or dim))
    return g @ dagger(g)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    m = random_psd(dim, rng, rank=rank)
    return DensityOperator(m / np.trace(m).real)


def random_povm_effect(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random PSD matrix with spectrum strictly inside [0, 1)."""
    m = random_psd(dim, rng)
    top = float(np.linalg.eigvalsh(m).max())
    return m / (top + float(rng.uniform(0.1, 1.0)))
