"""Reproduction kernels for linear Hawkes processes.

A kernel ``h`` is a nonnegative integrable function on ``[0, inf)``.  Its
total mass ``alpha = int h`` is the expected number of children a single
event produces through this kernel, and ``h / alpha`` is the probability
density of the parent-to-child delay.  Four families are provided:

* :class:`ExponentialKernel`   ``h(t) = alpha * beta * exp(-beta t)``
* :class:`PowerLawKernel`      ``h(t) = alpha * theta * c**theta / (c+t)**(1+theta)``
* :class:`UniformKernel`       ``h(t) = (alpha / a) * 1[0 <= t <= a]``
* :class:`ZeroKernel`          identically zero

All Fourier transforms use the convention ``F h (xi) = int exp(-2 i pi xi u)
h(u) du``.  Kernel objects are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import InfiniteMomentError

__all__ = [
    "Kernel",
    "ExponentialKernel",
    "PowerLawKernel",
    "UniformKernel",
    "ZeroKernel",
    "kernel_from_dict",
]


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("kernels are supported on [0, inf); got negative t")
    return t


class Kernel:
    """Common interface of all kernel families.

    Subclasses implement pointwise evaluation, exact total mass, normalized
    delay moments, the Fourier transform, and inverse-CDF delay sampling.
    """

    family = "abstract"

    @property
    def l1_norm(self) -> float:
        """Total mass ``int_0^inf h(t) dt``, exact."""
        raise NotImplementedError

    def evaluate(self, t):
        """Evaluate ``h(t)`` for ``t >= 0`` (scalar or array)."""
        raise NotImplementedError

    def moment(self, p: float) -> float:
        """Normalized delay moment ``int t**p h(t)/alpha dt``.

        Raises
        ------
        InfiniteMomentError
            If the moment of order ``p`` does not exist for this family.
        """
        raise NotImplementedError

    def fourier(self, xi):
        """Fourier transform ``int_0^inf exp(-2 i pi xi t) h(t) dt``."""
        raise NotImplementedError

    def fourier_envelope(self) -> float:
        """Constant ``A`` with ``|F h (xi)| <= A / |xi|`` for all ``xi != 0``."""
        raise NotImplementedError

    def tail_mass(self, b: float) -> float:
        """Mass beyond ``b``: ``int_b^inf h(t) dt``, exact."""
        raise NotImplementedError

    def delay_from_uniform(self, u):
        """Map a uniform variate on (0, 1) to a delay by the inverse CDF."""
        raise NotImplementedError

    def sample_delays(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` i.i.d. delays from the normalized density ``h / alpha``."""
        u = rng.random(n)
        # rng.random has range [0, 1); remap exact zeros into the open interval
        while True:
            bad = u <= 0.0
            if not bad.any():
                break
            u[bad] = rng.random(int(bad.sum()))
        return self.delay_from_uniform(u)

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __call__(self, t):
        return self.evaluate(t)


def _as_uniform(u):
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0.0) | (u >= 1.0)):
        raise ValueError("uniform variates must lie strictly inside (0, 1)")
    return u


@dataclass(frozen=True)
class ExponentialKernel(Kernel):
    """``h(t) = alpha * beta * exp(-beta * t)``; delays are Exp(beta)."""

    alpha: float
    beta: float
    family = "exponential"

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError("alpha must be >= 0")
        if self.beta <= 0.0:
            raise ValueError("beta must be > 0")

    @property
    def l1_norm(self) -> float:
        return self.alpha

    def evaluate(self, t):
        t = _check_time(t)
        return self.alpha * self.beta * np.exp(-self.beta * t)

    def moment(self, p: float) -> float:
        if p <= 0.0:
            raise ValueError("moment order must be positive")
        return float(special.gamma(p + 1.0) / self.beta**p)

    def fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        out = self.alpha * self.beta / (self.beta + 2j * np.pi * xi)
        return out if out.ndim else complex(out)

    def fourier_envelope(self) -> float:
        return self.alpha * self.beta / (2.0 * np.pi)

    def tail_mass(self, b: float) -> float:
        return self.alpha * float(np.exp(-self.beta * b))

    def delay_from_uniform(self, u):
        return -np.log(_as_uniform(u)) / self.beta

    def to_dict(self) -> dict:
        return {"family": "exponential", "alpha": self.alpha, "beta": self.beta}


# Nodes for the power-law Fourier transform.  After rotating the contour of
# int_0^inf (1+x)^(-1-theta) exp(-i v x) dx onto the negative imaginary axis
# and substituting x = exp(w)/v, the integrand decays doubly exponentially on
# the right and like exp(w) on the left, so a fixed trapezoid grid in w gives
# near machine precision uniformly over v >= 1e-12.  The left endpoint -58
# keeps the truncated mass below 1e-13 relative to the smallest admissible v.
_PLW_STEP = 0.24
_PLW = np.arange(-58.0, 3.8 + 0.5 * _PLW_STEP, _PLW_STEP)
_PLW_EXP = np.exp(_PLW)
_PLW_WEIGHT = np.exp(-_PLW_EXP) * _PLW_EXP * _PLW_STEP


@dataclass(frozen=True)
class PowerLawKernel(Kernel):
    """Heavy-tailed kernel ``h(t) = alpha * theta * c**theta / (c+t)**(1+theta)``.

    Parameters
    ----------
    alpha : float
        Total mass, ``alpha >= 0``.
    c : float
        Scale of the algebraic decay, ``c > 0``.
    theta : float
        Tail exponent, ``theta > 1`` so that delays have a finite mean.

    Notes
    -----
    Delay moments of order ``p`` exist exactly for ``p < theta``.  The
    Fourier transform has no elementary closed form; it is computed by exact
    contour rotation onto the negative imaginary axis followed by a fixed
    double-exponential quadrature rule, which is vectorized over frequencies
    and accurate to ~1e-12 relative for every ``2 pi xi c >= 1e-12``.  Below
    that threshold a first-order expansion in ``xi`` is exact to the same
    level.
    """

    alpha: float
    c: float
    theta: float
    family = "powerlaw"

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError("alpha must be >= 0")
        if self.c <= 0.0:
            raise ValueError("c must be > 0")
        if self.theta <= 1.0:
            raise ValueError("theta must be > 1 so delays have a finite mean")

    @property
    def l1_norm(self) -> float:
        return self.alpha

    def evaluate(self, t):
        t = _check_time(t)
        return self.alpha * self.theta * self.c**self.theta / (self.c + t) ** (
            1.0 + self.theta
        )

    def moment(self, p: float) -> float:
        if p <= 0.0:
            raise ValueError("moment order must be positive")
        if p >= self.theta:
            raise InfiniteMomentError(
                f"power-law moment of order {p} requires theta > {p}, "
                f"got theta = {self.theta}"
            )
        # Change of variables s = t / (c + t) maps [0, inf) onto [0, 1) and
        # turns the integrand into theta * c**p * s**p * (1-s)**(theta-p-1).
        # The endpoint singularity (integrable for p < theta) goes into the
        # algebraic weight of the quadrature rule.
        th, cc = self.theta, self.c
        val, _ = integrate.quad(
            lambda s: 1.0,
            0.0,
            1.0,
            weight="alg",
            wvar=(p, th - p - 1.0),
            epsabs=0.0,
            epsrel=1e-12,
            limit=200,
        )
        return float(th * cc**p * val)

    def _fourier_normalized(self, v: np.ndarray) -> np.ndarray:
        """``F (h/alpha)`` as a function of ``v = 2 pi xi c``, ``v > 0``."""
        out = np.empty(v.shape, dtype=complex)
        small = v < 1e-12
        if small.any():
            out[small] = 1.0 - 1j * v[small] / (self.theta - 1.0)
        big = ~small
        vb = v[big]
        vals = np.empty(vb.shape, dtype=complex)
        # chunk so the (n_v, n_nodes) work array stays small
        for lo in range(0, vb.size, 16384):
            chunk = vb[lo : lo + 16384, None]
            z = (1.0 - 1j * _PLW_EXP[None, :] / chunk) ** (-(1.0 + self.theta))
            vals[lo : lo + 16384] = z @ _PLW_WEIGHT
        out[big] = -1j * self.theta / vb * vals
        return out

    def fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        scalar = xi.ndim == 0
        xi = np.atleast_1d(xi)
        v = 2.0 * np.pi * np.abs(xi) * self.c
        res = np.ones(xi.shape, dtype=complex)
        nz = v > 0.0
        if nz.any():
            res[nz] = self._fourier_normalized(v[nz])
        res[xi < 0.0] = np.conj(res[xi < 0.0])
        res *= self.alpha
        return complex(res[0]) if scalar else res

    def fourier_envelope(self) -> float:
        # integration by parts: |F h| <= (h(0+) + TV(h)) / (2 pi |xi|), and
        # TV(h) = h(0+) for a nonincreasing kernel
        return self.alpha * self.theta / (np.pi * self.c)

    def tail_mass(self, b: float) -> float:
        return self.alpha * float((self.c / (self.c + b)) ** self.theta)

    def delay_from_uniform(self, u):
        return self.c * (_as_uniform(u) ** (-1.0 / self.theta) - 1.0)

    def to_dict(self) -> dict:
        return {
            "family": "powerlaw",
            "alpha": self.alpha,
            "c": self.c,
            "theta": self.theta,
        }


@dataclass(frozen=True)
class UniformKernel(Kernel):
    """Flat kernel ``(alpha / a) * 1[0 <= t <= a]``; delays are Uniform(0, a)."""

    alpha: float
    a: float
    family = "uniform"

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError("alpha must be >= 0")
        if self.a <= 0.0:
            raise ValueError("a must be > 0")

    @property
    def l1_norm(self) -> float:
        return self.alpha

    def evaluate(self, t):
        t = _check_time(t)
        return (self.alpha / self.a) * ((t >= 0.0) & (t <= self.a)).astype(float)

    def moment(self, p: float) -> float:
        if p <= 0.0:
            raise ValueError("moment order must be positive")
        return self.a**p / (p + 1.0)

    def fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        # exact: alpha * exp(-i pi xi a) * sin(pi xi a) / (pi xi a)
        out = self.alpha * np.exp(-1j * np.pi * xi * self.a) * np.sinc(xi * self.a)
        return out if out.ndim else complex(out)

    def fourier_envelope(self) -> float:
        return self.alpha / (np.pi * self.a)

    def tail_mass(self, b: float) -> float:
        return self.alpha * float(np.clip(1.0 - b / self.a, 0.0, 1.0))

    def delay_from_uniform(self, u):
        return self.a * _as_uniform(u)

    def to_dict(self) -> dict:
        return {"family": "uniform", "alpha": self.alpha, "a": self.a}


@dataclass(frozen=True)
class ZeroKernel(Kernel):
    """The identically zero kernel (no influence)."""

    family = "zero"

    @property
    def l1_norm(self) -> float:
        return 0.0

    def evaluate(self, t):
        t = _check_time(t)
        return np.zeros_like(t, dtype=float)

    def moment(self, p: float) -> float:
        raise InfiniteMomentError("the zero kernel has no delay distribution")

    def fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape, dtype=complex)
        return out if out.ndim else 0j

    def fourier_envelope(self) -> float:
        return 0.0

    def tail_mass(self, b: float) -> float:
        return 0.0

    def delay_from_uniform(self, u):
        raise ValueError("the zero kernel has no delay distribution")

    def to_dict(self) -> dict:
        return {"family": "zero"}


_FAMILIES = {
    "exponential": (ExponentialKernel, ("alpha", "beta")),
    "powerlaw": (PowerLawKernel, ("alpha", "c", "theta")),
    "uniform": (UniformKernel, ("alpha", "a")),
    "zero": (ZeroKernel, ()),
}


def kernel_from_dict(spec: dict) -> Kernel:
    """Build a kernel from its JSON representation.

    The expected shape is ``{"family": name, **params}``, e.g.
    ``{"family": "exponential", "alpha": 0.5, "beta": 2.0}``.
    """
    if "family" not in spec:
        raise ValueError("kernel spec is missing the 'family' field")
    family = spec["family"]
    if family not in _FAMILIES:
        raise ValueError(f"unknown kernel family {family!r}")
    cls, fields = _FAMILIES[family]
    missing = [f for f in fields if f not in spec]
    if missing:
        raise ValueError(f"kernel spec for {family!r} is missing {missing}")
    extra = set(spec) - set(fields) - {"family"}
    if extra:
        raise ValueError(f"kernel spec for {family!r} has unknown fields {sorted(extra)}")
    return cls(**{f: float(spec[f]) for f in fields})
