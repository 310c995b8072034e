"""Wendland kernel restricted to S^2, its scaled versions, and Legendre spectra."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from zoomrbf.geometry import as_xyz


class KernelError(ValueError):
    pass


def wendland(r):
    """Compactly supported Wendland function ``(1 - r)^4_+ (4 r + 1)``."""
    r = np.asarray(r, dtype=float)
    s = np.clip(1.0 - r, 0.0, None)
    out = s**4 * (4.0 * r + 1.0)
    return float(out) if out.ndim == 0 else out


radial_eval = wendland


@dataclass(frozen=True)
class ScaledZonalKernel:
    """``delta^-2 * wendland(|x - y| / delta)`` for x, y on S^2.

    The support in chordal distance is ``[0, delta)``.  ``sigma`` is the
    Sobolev index of the native space, used only by :func:`decay_check`.
    """

    delta: float = 1.0
    dim: int = 2
    sigma: float = 2.5

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise KernelError(f"delta must lie in (0, 1], got {self.delta}")

    def of_chord(self, chord):
        """Kernel value as a function of chordal distance."""
        return wendland(np.asarray(chord, dtype=float) / self.delta) / self.delta**2

    def __call__(self, a, b):
        return kernel_eval(self, a, b)


def kernel_eval(k: ScaledZonalKernel, a, b):
    """Evaluate the scaled kernel at point pairs (broadcasting)."""
    chord = np.linalg.norm(as_xyz(a) - as_xyz(b), axis=-1)
    out = k.of_chord(chord)
    return float(out) if np.ndim(out) == 0 else out


def zonal_eval(k: ScaledZonalKernel, t):
    """Kernel as a function of ``t = x . y`` via chord ``sqrt(2 - 2 t)``."""
    t = np.asarray(t, dtype=float)
    if np.any((t < -1.0) | (t > 1.0)):
        raise KernelError("zonal argument outside [-1, 1]")
    out = k.of_chord(np.sqrt(2.0 - 2.0 * t))
    return float(out) if np.ndim(out) == 0 else out


def legendre_table(ell_max: int, t) -> np.ndarray:
    """Rows ``P_0(t) .. P_ell_max(t)`` by the three-term recurrence."""
    t = np.asarray(t, dtype=float)
    out = np.empty((ell_max + 1,) + t.shape)
    out[0] = 1.0
    if ell_max >= 1:
        out[1] = t
    for ell in range(1, ell_max):
        out[ell + 1] = ((2 * ell + 1) * t * out[ell] - ell * out[ell - 1]) / (ell + 1)
    return out


def legendre(ell: int, t):
    return legendre_table(ell, t)[ell]


@lru_cache(maxsize=32)
def _gauss_nodes(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def default_quad_order(ell_max: int) -> int:
    return ell_max + 16


def legendre_coefficients(k: ScaledZonalKernel, ell_max: int, quad_order: int | None = None) -> np.ndarray:
    r"""Coefficients ``hat phi_delta(ell)`` for ``ell = 0 .. ell_max``.

    With ``phi(t) = (1/4pi) sum (2 ell + 1) hat phi(ell) P_ell(t)``,
    orthogonality gives ``hat phi(ell) = 2 pi int_{-1}^{1} phi(t) P_ell(t) dt``.
    The kernel vanishes unless the chord ``r = sqrt(2 - 2t)`` is below
    delta, and substituting ``t = 1 - (delta u)^2 / 2`` leaves

        hat phi(ell) = 2 pi int_0^1 wendland(u) P_ell(1 - delta^2 u^2 / 2) u du,

    a polynomial of degree ``2 ell + 6`` in u.  Gauss-Legendre with at least
    ``ell + 4`` nodes integrates it exactly.
    """
    if ell_max < 0:
        raise KernelError("degree must be non-negative")
    if quad_order is None:
        quad_order = default_quad_order(ell_max)
    if quad_order < 2:
        raise KernelError("quadrature order must be at least 2")
    x, w = _gauss_nodes(int(quad_order))
    u = 0.5 * (x + 1.0)
    weights = 0.5 * w * wendland(u) * u
    t = 1.0 - 0.5 * (k.delta * u) ** 2
    return 2.0 * math.pi * (legendre_table(ell_max, t) @ weights)


def legendre_coefficient(k: ScaledZonalKernel, ell: int, quad_order: int | None = None) -> float:
    return float(legendre_coefficients(k, ell, quad_order)[ell])


def zonal_series(coeffs, t) -> np.ndarray:
    """Truncated Fourier-Legendre sum ``sum (2l+1)/(4 pi) c_l P_l(t)``."""
    coeffs = np.asarray(coeffs, dtype=float)
    ell = np.arange(len(coeffs))
    P = legendre_table(len(coeffs) - 1, t)
    return np.tensordot((2 * ell + 1) / (4.0 * math.pi) * coeffs, P, axes=1)


def decay_check(k: ScaledZonalKernel, ell_max: int, quad_order: int | None = None,
                noise: float = 1e-14) -> tuple[float, float]:
    """Empirical envelope of ``hat phi_delta(ell) * (1 + delta ell)^(2 sigma)``.

    Returns ``(c_low, c_high)``, the min and max over ``ell <= ell_max``.
    Coefficients smaller in magnitude than ``noise * hat phi_delta(0)`` are
    left out.  Any coefficient below ``-noise * hat phi_delta(0)`` raises
    :class:`KernelError`.
    """
    if ell_max < 10:
        raise KernelError("ell_max must be at least 10")
    c = legendre_coefficients(k, ell_max, quad_order)
    floor = noise * c[0]
    if c[0] <= 0 or np.any(c <= -floor):
        bad = np.flatnonzero(c <= -floor) if c[0] > 0 else [0]
        raise KernelError(f"non-positive Legendre coefficient at degree {int(bad[0])}")
    keep = c > floor
    ell = np.arange(ell_max + 1)[keep]
    scaled = c[keep] * (1.0 + k.delta * ell) ** (2.0 * k.sigma)
    return float(scaled.min()), float(scaled.max())
