"""Standardized innovation distributions for the parametric benchmarks.

Every law here has mean 0 and variance 1: the normal, the Student-t scaled
by sqrt((nu-2)/nu), and a skewed Student-t built by Fernandez-Steel skewing
of the standardized t, then re-centered and re-scaled to unit variance.

``abs_moment`` (E|z|) feeds the exponential-GARCH recursion; it is closed
form for the normal and computed by 64-point Gauss-Legendre quadrature on a
compactified half-line for the t laws.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln, ndtri, stdtrit

from .errors import AlphaOutOfRange, BadDistParams

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
# map [-1, 1] onto [0, 1]
_GL_U = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _abs_moment_by_quadrature(logpdf) -> float:
    """E|Z| = int_0^inf z (f(z) + f(-z)) dz with z = u/(1-u)."""
    z = _GL_U / (1.0 - _GL_U)
    jac = 1.0 / (1.0 - _GL_U) ** 2
    integrand = z * (np.exp(logpdf(z)) + np.exp(logpdf(-z))) * jac
    return float(np.sum(_GL_W * integrand))


class NormalInnovation:
    """Standard normal innovations."""

    name = "norm"

    def logpdf(self, z):
        z = np.asarray(z, dtype=float)
        return -0.5 * math.log(2.0 * math.pi) - 0.5 * z * z

    def ppf(self, alpha):
        _check_alpha(np.min(alpha))
        _check_alpha(np.max(alpha))
        return ndtri(alpha)

    def abs_moment(self) -> float:
        return math.sqrt(2.0 / math.pi)


class StudentTInnovation:
    """Student-t scaled to unit variance; requires nu > 2."""

    name = "std"

    def __init__(self, nu: float):
        if not nu > 2.0:
            raise BadDistParams(f"Student-t needs nu > 2, got {nu}")
        self.nu = float(nu)
        # z * scale ~ t_nu
        self._scale = math.sqrt(self.nu / (self.nu - 2.0))

    def logpdf(self, z):
        z = np.asarray(z, dtype=float)
        t = z * self._scale
        nu = self.nu
        const = (
            gammaln((nu + 1.0) / 2.0)
            - gammaln(nu / 2.0)
            - 0.5 * math.log(nu * math.pi)
        )
        return const - 0.5 * (nu + 1.0) * np.log1p(t * t / nu) + math.log(self._scale)

    def ppf(self, alpha):
        _check_alpha(np.min(alpha))
        _check_alpha(np.max(alpha))
        return stdtrit(self.nu, alpha) / self._scale

    def abs_moment(self) -> float:
        return _abs_moment_by_quadrature(self.logpdf)


class SkewedTInnovation:
    """Fernandez-Steel skewed Student-t, standardized to mean 0, variance 1.

    The base density f is the unit-variance t; the skewed density is
    proportional to f(x/xi) for x >= 0 and f(x*xi) for x < 0. xi = 1
    recovers the symmetric law; xi > 1 puts mass on the right tail.
    """

    name = "sstd"

    def __init__(self, nu: float, xi: float):
        if not nu > 2.0:
            raise BadDistParams(f"skewed-t needs nu > 2, got {nu}")
        if not xi > 0.0:
            raise BadDistParams(f"skewed-t needs xi > 0, got {xi}")
        self.nu = float(nu)
        self.xi = float(xi)
        self._base = StudentTInnovation(nu)
        xi2 = self.xi * self.xi
        # E|base| in closed form, then the usual skew moments
        m1 = (
            2.0
            * math.sqrt(self.nu - 2.0)
            * math.exp(gammaln((self.nu + 1.0) / 2.0) - gammaln(self.nu / 2.0))
            / (math.sqrt(math.pi) * (self.nu - 1.0))
        )
        self._mu = m1 * (self.xi - 1.0 / self.xi)
        ex2 = xi2 - 1.0 + 1.0 / xi2
        var = ex2 - self._mu * self._mu
        if var <= 0.0:
            raise BadDistParams(f"degenerate skewed-t for nu={nu}, xi={xi}")
        self._sigma = math.sqrt(var)
        self._p0 = 1.0 / (1.0 + xi2)
        self._lognorm = math.log(2.0 / (self.xi + 1.0 / self.xi))

    def _logpdf_skewed(self, x):
        x = np.asarray(x, dtype=float)
        arg = np.where(x >= 0.0, x / self.xi, x * self.xi)
        return self._lognorm + self._base.logpdf(arg)

    def logpdf(self, z):
        z = np.asarray(z, dtype=float)
        return math.log(self._sigma) + self._logpdf_skewed(self._mu + self._sigma * z)

    def ppf(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        _check_alpha(np.min(alpha))
        _check_alpha(np.max(alpha))
        xi2 = self.xi * self.xi
        left_p = alpha * (1.0 + xi2) / 2.0
        right_p = 0.5 + (alpha - self._p0) * (1.0 + xi2) / (2.0 * xi2)
        left_p = np.clip(left_p, 1e-300, 1.0 - 1e-16)
        right_p = np.clip(right_p, 1e-300, 1.0 - 1e-16)
        x = np.where(
            alpha < self._p0,
            self._base.ppf(left_p) / self.xi,
            self._base.ppf(right_p) * self.xi,
        )
        out = (x - self._mu) / self._sigma
        return float(out) if out.ndim == 0 else out

    def abs_moment(self) -> float:
        return _abs_moment_by_quadrature(self.logpdf)


def make_innovation(dist: str, nu: float | None = None, xi: float | None = None):
    """Factory keyed by the distribution codes norm/std/sstd."""
    if dist == "norm":
        return NormalInnovation()
    if dist == "std":
        if nu is None:
            raise BadDistParams("Student-t requires nu")
        return StudentTInnovation(nu)
    if dist == "sstd":
        if nu is None or xi is None:
            raise BadDistParams("skewed-t requires nu and xi")
        return SkewedTInnovation(nu, xi)
    raise BadDistParams(f"unknown innovation distribution {dist!r}")
