"""Exception types shared across the package.

Two failure modes are kept distinct: a model that violates the standing
hypotheses (subcriticality, finite kernel moments, admissible exponents) is
refused with :class:`HypothesisError`, while a computation that fails to
converge raises :class:`NumericError`.  The command line maps the former to
exit code 2 and everything else to exit code 1.
"""

from __future__ import annotations


class HawkesError(Exception):
    """Base class for all package-specific errors."""


class HypothesisError(HawkesError):
    """A standing assumption of the theory is violated by the inputs."""


class SubcriticalityError(HypothesisError):
    """Spectral radius of the reproduction matrix is not below one."""


class InfiniteMomentError(HypothesisError):
    """A requested kernel moment does not exist."""


class NumericError(HawkesError):
    """An iterative computation failed to converge or overflowed."""
