"""Shared independent oracles for the test suite.

Everything here is deliberately built from different primitives than the
library paths it checks: associated Legendre values come from polynomial
differentiation, the plane-source radial functions from a positive-integrand
Legendre-function representation plus Gauss quadrature, and the triangle
self-term from a polar-coordinate ray integral.
"""

import math

import numpy as np
import pytest
from numpy.polynomial import polynomial as P
from scipy import integrate


# ---------------------------------------------------------------------------
# Associated Legendre / solid harmonic oracle (Rodrigues formula)
# ---------------------------------------------------------------------------


def legendre_p(n, m, xi):
    """P_n^m via Rodrigues-formula polynomial differentiation, including
    the Condon-Shortley phase."""
    base = [1.0]
    for _ in range(n):
        base = P.polymul(base, [-1.0, 0.0, 1.0])
    d = P.polyder(base, n + m)
    val = P.polyval(xi, d)
    return (-1) ** m * (1 - xi * xi) ** (m / 2) / (2**n * math.factorial(n)) * val


def oracle_solid_harmonic(pt, n, m):
    """Direct evaluation of the scaled real solid harmonic."""
    x, y, z = pt
    r = math.sqrt(x * x + y * y + z * z)
    if r == 0.0:
        return 1.0 if n == 0 else 0.0
    am = abs(m)
    phi = math.atan2(y, x)
    trig = math.cos(m * phi) if m >= 0 else math.sin(m * phi)
    return (
        (-1) ** ((n + am) % 2)
        / math.factorial(n + am)
        * r**n
        * legendre_p(n, am, z / r)
        * trig
    )


def oracle_complex_harmonic(pt, n, m):
    """Orthonormal complex solid harmonic r^n Y_n^m.

    The normalization carries (-1)^|m|, so Y_n^{-m} = conj(Y_n^m) with no
    extra phase; the azimuthal factor uses the signed order directly.
    """
    x, y, z = pt
    r = math.sqrt(x * x + y * y + z * z)
    am = abs(m)
    norm = (-1) ** am * math.sqrt(
        (2 * n + 1)
        / (4 * math.pi)
        * math.factorial(n - am)
        / math.factorial(n + am)
    )
    phi = math.atan2(y, x)
    val = norm * legendre_p(n, am, z / r if r else 1.0) * r**n
    return val * complex(math.cos(m * phi), math.sin(m * phi))


# ---------------------------------------------------------------------------
# Plane-source radial function oracles
# ---------------------------------------------------------------------------


def oracle_w(m, xi):
    """Azimuthal integral of the inverse ring distance.

    Uses the Legendre-function-of-the-second-kind representation with a
    positive, exponentially decaying integrand, so the value is accurate
    in relative terms even where it is exponentially small in m.  The
    equivalence with the raw oscillatory integral is itself asserted by a
    test at moderate parameters.
    """
    chi = (1.0 + xi * xi) / (2.0 * xi)
    s = math.sqrt(chi * chi - 1.0)
    val, _ = integrate.quad(
        lambda t: (chi + s * math.cosh(t)) ** (-(m + 0.5)),
        0.0,
        80.0,
        epsabs=1e-300,
        epsrel=1e-13,
        limit=500,
    )
    return 2.0 / math.sqrt(xi) * val


def oracle_w_raw(m, xi):
    """Direct oscillatory quadrature of the defining integral; reliable
    only for small m where cancellation is mild."""
    val, _ = integrate.quad(
        lambda ph: math.cos(m * ph) / math.sqrt(1.0 - 2.0 * xi * math.cos(ph) + xi * xi),
        0.0,
        2.0 * math.pi,
        epsabs=1e-14,
        epsrel=1e-12,
        limit=500,
    )
    return val


class RadialOracle:
    """u_n^m by Gauss-Legendre quadrature of the radial moment of w_m,
    with w values cached per (m, node) and a two-resolution consistency
    check."""

    def __init__(self, xi, m_max, nodes=96):
        self.xi = xi
        t, w = np.polynomial.legendre.leggauss(nodes)
        self.t = 0.5 * (t + 1.0)
        self.wq = 0.5 * w
        t2, w2 = np.polynomial.legendre.leggauss(nodes // 2 + 8)
        self.t_lo = 0.5 * (t2 + 1.0)
        self.wq_lo = 0.5 * w2
        self.wvals = {
            m: np.array([oracle_w(m, xi * tt) for tt in self.t])
            for m in range(m_max + 1)
        }
        self.wvals_lo = {
            m: np.array([oracle_w(m, xi * tt) for tt in self.t_lo])
            for m in range(m_max + 1)
        }

    def u(self, n, m):
        m = abs(m)
        hi = float(np.sum(self.wq * self.t**n * self.wvals[m]))
        lo = float(np.sum(self.wq_lo * self.t_lo**n * self.wvals_lo[m]))
        assert abs(hi - lo) <= 1e-9 * abs(hi), (
            f"radial oracle not converged at n={n}, m={m}, xi={self.xi}"
        )
        return hi


# ---------------------------------------------------------------------------
# Triangle self-term oracle (polar ray integral, in-plane points)
# ---------------------------------------------------------------------------


def oracle_triangle_self(vertices2d, point2d):
    """For an in-plane evaluation point, the single-layer integral over a
    plane triangle reduces to the angular integral of the ray length to
    the boundary."""
    v = np.asarray(vertices2d, dtype=float)
    y = np.asarray(point2d, dtype=float)

    def rho_max(phi):
        d = np.array([math.cos(phi), math.sin(phi)])
        best = math.inf
        for q in range(3):
            p0, p1 = v[q], v[(q + 1) % 3]
            a = np.array([[d[0], p0[0] - p1[0]], [d[1], p0[1] - p1[1]]])
            det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
            if abs(det) < 1e-14:
                continue
            t, s = np.linalg.solve(a, p0 - y)
            if t > 0.0 and -1e-12 <= s <= 1.0 + 1e-12:
                best = min(best, t)
        return best if math.isfinite(best) else 0.0

    val, _ = integrate.quad(
        rho_max, 0.0, 2.0 * math.pi, limit=500, epsabs=1e-12, epsrel=1e-11
    )
    return val / (4.0 * math.pi)


# ---------------------------------------------------------------------------
# Misc helpers
# ---------------------------------------------------------------------------


def green(y, x):
    return 1.0 / (4.0 * math.pi * np.linalg.norm(np.asarray(y, float) - np.asarray(x, float)))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
