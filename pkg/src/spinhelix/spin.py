"""Spin-s representation carried by the integer ``twice_s = 2s``.

Basis order is ``|s>, |s-1>, ..., |-s>``; index ``n`` holds ``m = s - n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpin

__all__ = ["SpinRep", "build_spin_rep", "spin_matrix"]


@dataclass(frozen=True, eq=False)
class SpinRep:
    twice_s: int
    sz_diag: np.ndarray
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    kappa: np.ndarray

    @property
    def s(self) -> float:
        return self.twice_s / 2

    @property
    def dim(self) -> int:
        return self.twice_s + 1

    def __eq__(self, other):
        return isinstance(other, SpinRep) and other.twice_s == self.twice_s

    def __hash__(self):
        return hash(("SpinRep", self.twice_s))

    def __repr__(self):
        return f"SpinRep(twice_s={self.twice_s})"


def _kappa(twice_s: int) -> np.ndarray:
    # sqrt of binomial(2s, n) by a ratio recurrence, mirrored so kappa_n == kappa_{2s-n} bitwise
    k = np.ones(twice_s + 1)
    for n in range(twice_s // 2):
        k[n + 1] = k[n] * math.sqrt((twice_s - n) / (n + 1))
    k[twice_s // 2 + 1:] = k[: (twice_s + 1) // 2][::-1]
    return k


def build_spin_rep(twice_s: int) -> SpinRep:
    if int(twice_s) != twice_s or twice_s < 1:
        raise InvalidSpin(f"twice_s must be a positive integer, got {twice_s!r}")
    twice_s = int(twice_s)
    s = twice_s / 2
    m = s - np.arange(twice_s + 1)
    lam_p = np.sqrt(np.clip((s - m) * (s + m + 1), 0, None))
    lam_m = np.sqrt(np.clip((s + m) * (s - m + 1), 0, None))
    for arr in (m, lam_p, lam_m):
        arr.setflags(write=False)
    kappa = _kappa(twice_s)
    kappa.setflags(write=False)
    return SpinRep(twice_s, m, lam_p, lam_m, kappa)


def spin_matrix(rep: SpinRep, axis: str) -> np.ndarray:
    """Dense ``dim x dim`` matrix of ``S^axis``, axis in ``x, y, z, +, -``."""
    dim = rep.dim
    if axis == "z":
        return np.diag(rep.sz_diag).astype(complex)
    if axis == "+":
        # S+ |m> = lambda+_m |m+1>: column n (m = s-n) to row n-1
        out = np.zeros((dim, dim), dtype=complex)
        out[np.arange(dim - 1), np.arange(1, dim)] = rep.lambda_plus[1:]
        return out
    if axis == "-":
        out = np.zeros((dim, dim), dtype=complex)
        out[np.arange(1, dim), np.arange(dim - 1)] = rep.lambda_minus[:-1]
        return out
    sp, sm = spin_matrix(rep, "+"), spin_matrix(rep, "-")
    if axis == "x":
        return (sp + sm) / 2
    if axis == "y":
        return (sp - sm) / 2j
    raise ValueError(f"unknown spin axis {axis!r}")
