"""Discrete Sobolev-Slobodetskii weights and norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import PreconditionError
from .lattice import (
    GridFunction,
    LatticeGrid,
    LineFunction,
    LineSpectrum,
    SpectrumFunction,
    dft1_forward,
    dft_forward,
    exterior_mass,
    quadrant_mask,
    zeta,
    zeta_squared,
)

WEIGHT_MODES = ("paper_literal", "modulus_sum")

# Exterior modulus (relative) tolerated before a function counts as leaving the quadrant.
SUPPORT_TOL = 1e-13


def _check_mode(mode):
    if mode not in WEIGHT_MODES:
        raise PreconditionError(f"weight mode must be one of {WEIGHT_MODES}, got {mode!r}")


def sobolev_weight(grid: LatticeGrid, mode: str = "modulus_sum") -> np.ndarray:
    """Weight ``W(xi) >= 1`` on the 2-D frequency nodes.

    ``paper_literal`` is ``1 + |zeta_1^2 + zeta_2^2|`` (the squares may cancel);
    ``modulus_sum`` is ``1 + |zeta_1|^2 + |zeta_2|^2``.
    """
    _check_mode(mode)
    if mode == "paper_literal":
        return 1.0 + np.abs(zeta_squared(grid))
    z2 = np.abs(zeta(grid)) ** 2
    return 1.0 + z2[:, None] + z2[None, :]


def sobolev_weight_1d(grid: LatticeGrid, mode: str = "modulus_sum") -> np.ndarray:
    _check_mode(mode)
    z = zeta(grid)
    if mode == "paper_literal":
        return 1.0 + np.abs(z ** 2)
    return 1.0 + np.abs(z) ** 2


@dataclass(frozen=True)
class SobolevWeight:
    """Weight ``W`` bound to a grid; ``values`` is computed on demand."""

    grid: LatticeGrid
    mode: str = "modulus_sum"

    def __post_init__(self):
        _check_mode(self.mode)

    @property
    def values(self) -> np.ndarray:
        return sobolev_weight(self.grid, self.mode)

    def power(self, s: float) -> np.ndarray:
        return self.values ** s


@dataclass(frozen=True)
class SobolevParams:
    s: float
    weight_mode: str = "modulus_sum"

    def __post_init__(self):
        _check_mode(self.weight_mode)
        if not np.isfinite(self.s):
            raise PreconditionError("smoothness exponent must be finite")


def _params(p, weight_mode):
    if isinstance(p, SobolevParams):
        return p
    return SobolevParams(float(p), weight_mode)


def spectral_norm(s: SpectrumFunction, p, weight_mode: str = "modulus_sum") -> float:
    p = _params(p, weight_mode)
    w = sobolev_weight(s.grid, p.weight_mode)
    dens = w ** p.s * np.abs(s.values) ** 2
    return float(np.sqrt(dens.sum()) * s.grid.dxi)


def norm_hs(u: GridFunction, p, weight_mode: str = "modulus_sum") -> float:
    """Weighted spectral L2 norm over the period square (no ``(2 pi)^-2`` factor).

    At ``s = 0`` this is ``2 pi`` times the lattice ``l2`` norm.
    """
    return spectral_norm(dft_forward(u), p, weight_mode)


def norm_hs_plus(v: GridFunction, p, conv="closed", weight_mode: str = "modulus_sum") -> float:
    """Norm of the zero extension of a quadrant-supported ``v``.

    This is an upper bound for the infimum over all continuations, which has
    no finite algorithm.
    """
    if exterior_mass(v, quadrant_mask(v.grid, conv)) > SUPPORT_TOL:
        raise PreconditionError("right-hand side has support outside the quadrant")
    return norm_hs(v, p, weight_mode)


def norm_1d(c, s_k: float, weight_mode: str = "modulus_sum") -> float:
    """1-D analogue of the 2-D norm for a line function or line spectrum."""
    spec = dft1_forward(c) if isinstance(c, LineFunction) else c
    if not isinstance(spec, LineSpectrum):
        raise PreconditionError("norm_1d expects a LineFunction or LineSpectrum")
    w = sobolev_weight_1d(spec.grid, weight_mode)
    return float(np.sqrt((w ** s_k * np.abs(spec.values) ** 2).sum() * spec.grid.dxi))
