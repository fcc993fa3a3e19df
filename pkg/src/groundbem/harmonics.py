"""Special-function substrate: complete elliptic integrals, Legendre-derived
constant tables, and recursively evaluated real solid harmonics.

Conventions used throughout the package:

* Elliptic integrals follow the parameter convention,
  ``K(mu) = int_0^{pi/2} (1 - mu sin^2 t)^{-1/2} dt`` (and ``+1/2`` for E),
  so ``mu`` plays the role usually written ``m``, not the modulus ``k``.
* Real solid harmonics ``R[n, m]`` are homogeneous of degree ``n`` and carry
  the ``(-1)^(n+m) / (n+|m|)!`` scaling that makes the recurrences below
  free of factorials.  For ``m >= 0`` the azimuthal factor is ``cos(m phi)``,
  for ``m < 0`` it is ``sin(m phi)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "EllipticPair",
    "SpectralConstants",
    "SolidHarmonicTable",
    "TruncationAccuracyWarning",
    "elliptic_ke",
    "build_spectral_constants",
    "solid_harmonics",
    "solid_harmonics_batch",
    "sh_index",
    "sh_size",
]

# Accuracy of the recursions is asserted by the test suite only up to this
# truncation; beyond it we warn.  Past _P_HARD_LIMIT the double-factorial
# products consumed by the kernel series overflow float64, so we refuse.
# (Between the two, unused corners of the sign-product table may reach inf;
# consumers restrict themselves to the finite region.)
_P_SOFT_LIMIT = 40
_P_HARD_LIMIT = 128


class TruncationAccuracyWarning(UserWarning):
    """Truncation number beyond the envelope validated by the test suite."""


# ---------------------------------------------------------------------------
# Complete elliptic integrals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EllipticPair:
    """Values K(mu), E(mu) of the complete elliptic integrals (parameter
    convention) at a common parameter."""

    k_value: float
    e_value: float
    parameter: float


def _elliptic_ke_arrays(mu):
    """Vectorized AGM evaluation of (K, E) for parameters in [0, 1)."""
    mu = np.asarray(mu, dtype=float)
    a = np.ones_like(mu)
    b = np.sqrt(1.0 - mu)
    c = np.sqrt(mu)
    # Running sum of 2^(n-1) c_n^2, n = 0 term included up front.
    s = 0.5 * mu.copy()
    pow2 = 1.0
    for _ in range(60):
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        s += pow2 * c * c
        pow2 *= 2.0
        if np.max(np.abs(c)) <= 1e-17 * np.min(a):
            break
    k = np.pi / (2.0 * a)
    e = k * (1.0 - s)
    return k, e


def elliptic_ke(parameter: float) -> EllipticPair:
    """Complete elliptic integrals K and E at ``parameter`` in [0, 1).

    Uses arithmetic-geometric-mean iteration; both values are accurate to a
    relative error of a few ulp away from the logarithmic blow-up of K at
    ``parameter -> 1``.
    """
    mu = float(parameter)
    if not 0.0 <= mu < 1.0:
        raise DomainError(f"elliptic parameter must lie in [0, 1), got {mu!r}")
    k, e = _elliptic_ke_arrays(mu)
    return EllipticPair(k_value=float(k), e_value=float(e), parameter=mu)


# ---------------------------------------------------------------------------
# Spectral constant tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralConstants:
    """Constant tables indexed ``[n, m]`` with ``m >= 0`` (all entries are
    even in the sign of m).

    Tables are filled for ``0 <= m <= n <= 2p - 2``; one extra band beyond
    the kernel truncation because the ground-point radial recurrences
    consume degrees up to ``2p - 3`` at ``m = 0``.

    Fields
    ------
    p:      truncation number the table was built for.
    a:      z-derivative coupling coefficients (zero for n < m).
    big_l:  values of the orthonormal spherical harmonics on the equator,
            zero whenever n + m is odd.
    parity: 1 where n + m is even, else 0.
    nu:     signed double-factorial products pairing with the real basis,
            zero whenever n + m is odd.
    norm:   orthonormal harmonic normalization factors.
    """

    p: int
    a: np.ndarray
    big_l: np.ndarray
    parity: np.ndarray
    nu: np.ndarray
    norm: np.ndarray

    @property
    def nmax(self) -> int:
        return self.a.shape[0] - 1


def build_spectral_constants(p: int) -> SpectralConstants:
    """Build all constant tables needed for truncation number ``p``.

    Every table is produced by stable running products / two-term ratio
    recurrences; no factorial of a large argument is ever formed.
    """
    p = int(p)
    if p < 1:
        raise DomainError(f"truncation number must be >= 1, got {p}")
    if p > _P_HARD_LIMIT:
        raise DomainError(
            f"truncation number {p} exceeds the float64-safe limit {_P_HARD_LIMIT}"
        )
    if p > _P_SOFT_LIMIT:
        warnings.warn(
            f"truncation number {p} is beyond the validated envelope "
            f"(p <= {_P_SOFT_LIMIT}); expect reduced accuracy",
            TruncationAccuracyWarning,
            stacklevel=2,
        )

    nmax = max(2 * p - 2, 1)
    shape = (nmax + 1, nmax + 1)
    a = np.zeros(shape)
    big_l = np.zeros(shape)
    parity = np.zeros(shape, dtype=np.int64)
    nu = np.zeros(shape)
    norm = np.zeros(shape)

    n = np.arange(nmax + 1, dtype=float)
    for m in range(nmax + 1):
        nn = n[m:]
        a[m:, m] = np.sqrt(
            (nn + 1.0 + m) * (nn + 1.0 - m) / ((2.0 * nn + 1.0) * (2.0 * nn + 3.0))
        )

    for nn in range(nmax + 1):
        parity[nn, : nn + 1] = (np.arange(nn + 1) + nn + 1) % 2

    # norm[n, m] by running ratio in m at fixed n.
    for nn in range(nmax + 1):
        norm[nn, 0] = math.sqrt((2 * nn + 1) / (4.0 * math.pi))
        for m in range(1, nn + 1):
            norm[nn, m] = -norm[nn, m - 1] / math.sqrt((nn + m) * (nn - m + 1))

    # big_l: diagonal seeds, then a two-term vertical ratio (parity zeros
    # are kept exact by construction).
    big_l[0, 0] = math.sqrt(1.0 / (4.0 * math.pi))
    for m in range(1, nmax + 1):
        big_l[m, m] = big_l[m - 1, m - 1] * math.sqrt((2 * m + 1) / (2.0 * m))
    for m in range(nmax + 1):
        for nn in range(m + 2, nmax + 1):
            if (nn + m) % 2 == 1:
                continue
            ratio = -math.sqrt(
                (2 * nn + 1)
                * (nn - m - 1)
                * (nn + m - 1)
                / ((2 * nn - 3) * (nn - m) * (nn + m))
            )
            big_l[nn, m] = ratio * big_l[nn - 2, m]

    # nu: diagonal seeds (-1)^m (2m-1)!!, vertical two-term products.  High
    # corners of the table may overflow to +-inf; every consumer restricts
    # itself to the finite region (the overflowing entries pair with series
    # terms far below double precision).
    with np.errstate(over="ignore"):
        nu[0, 0] = 1.0
        for m in range(1, nmax + 1):
            nu[m, m] = nu[m - 1, m - 1] * (-(2.0 * m - 1.0))
        for m in range(nmax + 1):
            for nn in range(m + 2, nmax + 1):
                if (nn + m) % 2 == 1:
                    continue
                nu[nn, m] = -(nn - m - 1.0) * (nn + m - 1.0) * nu[nn - 2, m]

    return SpectralConstants(p=p, a=a, big_l=big_l, parity=parity, nu=nu, norm=norm)


# ---------------------------------------------------------------------------
# Real solid harmonics
# ---------------------------------------------------------------------------


def sh_index(n: int, m: int) -> int:
    """Flat index of the (n, m) entry in a degree-major table."""
    return n * n + n + m


def sh_size(p: int) -> int:
    """Number of (n, m) entries with n < p."""
    return p * p


def solid_harmonics_batch(points: np.ndarray, p: int) -> np.ndarray:
    """Real solid harmonics for all degrees ``n < p`` at many points.

    Parameters
    ----------
    points : (N, 3) array
    p : truncation number

    Returns
    -------
    (N, p*p) array, flat-indexed by :func:`sh_index`.  Cost is O(p^2) per
    point; the recursion is the diagonal fill, one subdiagonal step, then a
    vertical three-term recurrence at fixed |m|.
    """
    p = int(p)
    if p < 1:
        raise DomainError(f"truncation number must be >= 1, got {p}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 3:
        raise DomainError("points must have shape (N, 3)")
    if not np.all(np.isfinite(pts)):
        raise DomainError("points must have finite coordinates")

    npts = pts.shape[0]
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    r2 = x * x + y * y + z * z

    vals = np.zeros((npts, p * p))
    vals[:, sh_index(0, 0)] = 1.0
    if p == 1:
        return vals

    vals[:, sh_index(1, 1)] = -0.5 * x
    vals[:, sh_index(1, -1)] = 0.5 * y

    # Diagonal fill for m >= 2.
    for m in range(2, p):
        cp = vals[:, sh_index(m - 1, m - 1)]
        cm = vals[:, sh_index(m - 1, -(m - 1))]
        vals[:, sh_index(m, m)] = -(x * cp + y * cm) / (2.0 * m)
        vals[:, sh_index(m, -m)] = (y * cp - x * cm) / (2.0 * m)

    # Subdiagonal, then vertical three-term recurrence at fixed |m|.
    for m in range(0, p - 1):
        for sign in ((1,) if m == 0 else (1, -1)):
            sm = sign * m
            vals[:, sh_index(m + 1, sm)] = -z * vals[:, sh_index(m, sm)]
            for n in range(m + 1, p - 1):
                vals[:, sh_index(n + 1, sm)] = -(
                    (2.0 * n + 1.0) * z * vals[:, sh_index(n, sm)]
                    + r2 * vals[:, sh_index(n - 1, sm)]
                ) / ((n + 1.0) ** 2 - m * m)

    return vals


@dataclass(frozen=True)
class SolidHarmonicTable:
    """All real solid harmonics with n < p at one point."""

    point: np.ndarray
    p: int
    values: np.ndarray

    def value(self, n: int, m: int) -> float:
        if not (0 <= n < self.p and abs(m) <= n):
            raise DomainError(f"(n, m) = ({n}, {m}) outside table for p = {self.p}")
        return float(self.values[sh_index(n, m)])


def solid_harmonics(point, p: int) -> SolidHarmonicTable:
    """Real solid harmonics at a single point; see
    :func:`solid_harmonics_batch` for the recursion."""
    pt = np.asarray(point, dtype=float).reshape(3)
    vals = solid_harmonics_batch(pt[None, :], p)[0]
    return SolidHarmonicTable(point=pt, p=int(p), values=vals)
