"""Quantum reference statistics for the two-qubit singlet state.

For spin measurements along unit vectors a (Alice) and b (Bob) the
singlet gives the joint distribution

    P(sigma, tau | a, b) = (1 - sigma*tau * a.b) / 4,   sigma, tau in {+1, -1},

hence uniform single-party marginals and the correlator

    E[sigma*tau] = -a.b.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import coplanar

__all__ = [
    "OUTCOMES",
    "InvalidProbabilityError",
    "JointTable",
    "qm_joint",
    "qm_correlator",
    "chsh",
    "chsh_optimal_settings",
    "CHSH_QUANTUM_BOUND",
]

OUTCOMES = (1, -1)  # row/column order of JointTable arrays

CHSH_QUANTUM_BOUND = 2.0 * np.sqrt(2.0)

_IDX = {1: 0, -1: 1}


class InvalidProbabilityError(ValueError):
    """A joint table failed normalization or positivity checks."""


@dataclass(frozen=True)
class JointTable:
    """2x2 table of outcome probabilities, rows sigma in (+1,-1), cols tau."""

    p: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.p, dtype=float)
        if arr.shape != (2, 2):
            raise InvalidProbabilityError(f"expected shape (2, 2), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidProbabilityError("non-finite probability entries")
        if arr.min() < -1e-12 or arr.max() > 1.0 + 1e-12:
            raise InvalidProbabilityError(f"entries outside [0, 1]: {arr.tolist()}")
        if abs(arr.sum() - 1.0) > 1e-9:
            raise InvalidProbabilityError(f"entries sum to {arr.sum()}, not 1")
        object.__setattr__(self, "p", np.clip(arr, 0.0, 1.0))

    def prob(self, sigma, tau):
        return float(self.p[_IDX[sigma], _IDX[tau]])

    def correlator(self):
        s = np.array([1.0, -1.0])
        return float(s @ self.p @ s)


def qm_joint(a, b) -> JointTable:
    """Singlet joint table for measurement directions a, b."""
    c = float(np.dot(a, b))
    p = np.array([[(1.0 - s * t * c) / 4.0 for t in OUTCOMES] for s in OUTCOMES])
    return JointTable(p)


def qm_correlator(a, b) -> float:
    """Singlet correlator E[sigma*tau] = -a.b."""
    return -float(np.dot(a, b))


def chsh(corr, a, a2, b, b2) -> float:
    """CHSH combination S = E(a,b) - E(a,b') + E(a',b) + E(a',b').

    ``corr`` is any correlator function of two directions; with
    ``qm_correlator`` and optimally chosen coplanar settings S reaches
    2*sqrt(2).
    """
    return corr(a, b) - corr(a, b2) + corr(a2, b) + corr(a2, b2)


def chsh_optimal_settings():
    """Coplanar settings (a, a', b, b') achieving |S| = 2*sqrt(2) on the singlet.

    Angles from +z in the x-z plane: a = 0, a' = 90, b = 225, b' = 315
    degrees, so every correlator in S contributes sqrt(2)/2 with the
    right sign.
    """
    return coplanar(0.0), coplanar(90.0), coplanar(225.0), coplanar(315.0)
