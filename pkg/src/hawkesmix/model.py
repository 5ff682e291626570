"""Multivariate Hawkes model definition and stationarity checks.

A model couples a vector of baseline rates ``eta`` with a ``d x d`` array of
kernels.  Entry ``(i, j)`` of the kernel array is the influence of component
``i`` on component ``j``, so the reproduction matrix ``M`` with
``M[i, j] = l1_norm(h[i][j])`` acts on row vectors of ancestor counts.  The
process is stationary and all moment formulas below apply exactly when the
Perron root of ``M`` is strictly below one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InfiniteMomentError, NumericError, SubcriticalityError
from .kernels import Kernel, ZeroKernel, kernel_from_dict

__all__ = [
    "HawkesModel",
    "ModelSummary",
    "spectral_radius",
    "model_from_dict",
    "load_model",
]

_POWER_TOL = 1e-12
_POWER_MAXIT = 100_000


def spectral_radius(m: np.ndarray) -> float:
    """Perron root of a nonnegative square matrix.

    Power iteration from the all-ones vector with tolerance 1e-12; if the
    iteration does not settle (for example when dominant eigenvalues come in
    modulus pairs) a direct eigenvalue solve is used for ``d <= 4``.

    Raises
    ------
    NumericError
        If power iteration fails to converge and the matrix is too large for
        the direct fallback.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if np.any(m < 0.0):
        raise ValueError("reproduction matrices are nonnegative")
    d = m.shape[0]
    x = np.ones(d)
    est = 0.0
    for _ in range(_POWER_MAXIT):
        y = m @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        new = float(x @ y / (x @ x))
        x = y / norm
        if abs(new - est) <= _POWER_TOL * max(1.0, abs(new)):
            # one confirmation step guards against slow oscillation
            z = m @ x
            confirm = float(x @ z / (x @ x))
            if abs(confirm - new) <= _POWER_TOL * max(1.0, abs(confirm)):
                return abs(confirm)
        est = new
    if d <= 4:
        return float(np.max(np.abs(np.linalg.eigvals(m))))
    raise NumericError("power iteration did not converge for the spectral radius")


@dataclass(frozen=True)
class ModelSummary:
    """Validated stationarity data: reproduction matrix, Perron root, rates."""

    reproduction: np.ndarray
    rho: float
    mean_intensity: np.ndarray

    def to_dict(self) -> dict:
        return {
            "reproduction": self.reproduction.tolist(),
            "rho": self.rho,
            "mean_intensity": self.mean_intensity.tolist(),
        }


class HawkesModel:
    """Baseline rates plus a ``d x d`` kernel array.

    Parameters
    ----------
    eta : array_like
        Strictly positive baseline rates, length ``d``.
    kernels : sequence of sequence of Kernel
        ``kernels[i][j]`` is the kernel through which component ``i`` excites
        component ``j``.
    """

    def __init__(self, eta, kernels):
        eta = np.asarray(eta, dtype=float)
        if eta.ndim != 1 or eta.size == 0:
            raise ValueError("eta must be a nonempty vector")
        if np.any(eta <= 0.0):
            raise ValueError("baseline rates must be strictly positive")
        d = eta.size
        if len(kernels) != d or any(len(row) != d for row in kernels):
            raise ValueError(f"kernel array must be {d} x {d}")
        for row in kernels:
            for k in row:
                if not isinstance(k, Kernel):
                    raise TypeError("kernel array entries must be Kernel instances")
        self.eta = eta
        self.kernels = tuple(tuple(row) for row in kernels)
        self.d = d
        self._rho = None
        self._mean = None

    @property
    def reproduction(self) -> np.ndarray:
        """Matrix of kernel masses ``M[i, j] = int h_ij``."""
        return np.array(
            [[k.l1_norm for k in row] for row in self.kernels], dtype=float
        )

    @property
    def rho(self) -> float:
        if self._rho is None:
            self._rho = spectral_radius(self.reproduction)
        return self._rho

    def _check_subcritical(self) -> None:
        if self.rho >= 1.0:
            raise SubcriticalityError(
                f"spectral radius {self.rho:.6g} >= 1; the process has no "
                "stationary version"
            )

    @property
    def mean_intensity(self) -> np.ndarray:
        """Stationary rates ``m`` solving ``(I - M^T) m = eta``."""
        if self._mean is None:
            self._check_subcritical()
            m = self.reproduction
            sol = np.linalg.solve(np.eye(self.d) - m.T, self.eta)
            if np.any(sol <= 0.0):
                raise NumericError("mean intensity solve produced a nonpositive rate")
            self._mean = sol
        return self._mean.copy()

    def validate(self, beta: float | None = None) -> ModelSummary:
        """Check stationarity and, optionally, delay-moment hypotheses.

        Parameters
        ----------
        beta : float, optional
            When given, also require every non-zero kernel to have a finite
            normalized moment of order ``1 + beta``.

        Returns
        -------
        ModelSummary

        Raises
        ------
        SubcriticalityError
            If the Perron root of the reproduction matrix is >= 1.
        InfiniteMomentError
            If ``beta`` is given and a kernel lacks the required moment.
        """
        self._check_subcritical()
        if beta is not None:
            self.delay_moment(1.0 + beta)
        return ModelSummary(self.reproduction, self.rho, self.mean_intensity)

    def delay_moment(self, p: float) -> float:
        """Worst normalized delay moment ``sup_ij int t**p h_ij / alpha_ij``.

        Zero kernels transport no events and are skipped; a model with no
        active kernel returns 0.
        """
        worst = 0.0
        for row in self.kernels:
            for k in row:
                if k.l1_norm > 0.0:
                    worst = max(worst, k.moment(p))
        return worst

    def max_kernel_peak(self) -> float:
        return max(
            (float(k.evaluate(0.0)) for row in self.kernels for k in row),
            default=0.0,
        )

    def to_dict(self) -> dict:
        return {
            "eta": self.eta.tolist(),
            "kernels": [[k.to_dict() for k in row] for row in self.kernels],
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")


def model_from_dict(spec: dict) -> HawkesModel:
    """Build a model from ``{"eta": [...], "kernels": [[...], ...]}``."""
    if set(spec) != {"eta", "kernels"}:
        raise ValueError("model spec must have exactly the fields 'eta', 'kernels'")
    kernels = [[kernel_from_dict(k) for k in row] for row in spec["kernels"]]
    return HawkesModel(spec["eta"], kernels)


def load_model(path) -> HawkesModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def zero_coupling(d: int) -> list[list[Kernel]]:
    """A ``d x d`` array of zero kernels (independent Poisson components)."""
    return [[ZeroKernel() for _ in range(d)] for _ in range(d)]
