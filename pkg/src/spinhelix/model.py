"""Couplings, bond operators and matrix-free Hamiltonian application."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .elliptic import EllipticContext, ell
from .errors import DimensionMismatch, NearPole, TooLarge
from .lattice import Bond, Lattice, axial_neighbors
from .spin import SpinRep, spin_matrix

__all__ = [
    "VARIANTS",
    "Couplings",
    "ModelSpec",
    "couplings_xyz",
    "couplings_xxz",
    "bond_operator",
    "bond_terms",
    "apply_hamiltonian",
    "dense_hamiltonian",
    "helper_a",
    "helper_g",
    "helper_b",
    "DENSE_LIMIT",
    "MATRIX_FREE_LIMIT",
]

VARIANTS = ("xyz", "xxz", "xy_a", "xy_b", "long_range", "direction_dependent", "open_chain_1d")

DENSE_LIMIT = 4096
MATRIX_FREE_LIMIT = 2 ** 24


@dataclass(frozen=True)
class Couplings:
    jx: complex
    jy: complex
    jz: complex

    @property
    def j_plus(self) -> complex:
        return self.jx + self.jy

    @property
    def j_minus(self) -> complex:
        return self.jx - self.jy

    def as_tuple(self):
        return (self.jx, self.jy, self.jz)


def couplings_xyz(eta: complex, ctx: EllipticContext) -> Couplings:
    def r(a):
        return ell(a, eta, ctx, derivative=False).value / ell(a, 0.0, ctx, derivative=False).value

    return Couplings(r(4), r(3), r(2))


def couplings_xxz(eta: complex) -> Couplings:
    return Couplings(1.0 + 0j, 1.0 + 0j, complex(cmath.cos(math.pi * eta)))


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Everything needed to assemble a Hamiltonian.

    ``eta`` is a complex number, or a per-axis tuple for
    ``direction_dependent``.  ``ctx`` may be omitted for ``xxz`` only.
    For ``xy_a``/``xy_b`` the anisotropy is fixed by the variant
    (``1/2`` and ``1/2 - tau``) and ``eta`` is ignored.
    """

    variant: str
    spin: SpinRep
    lattice: Lattice
    eta: complex | tuple[complex, ...] = 0.0
    ctx: EllipticContext | None = None
    long_range_weights: tuple[tuple[int, float], ...] = field(default_factory=tuple)
    u0: complex = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.variant != "xxz" and self.ctx is None:
            raise ValueError(f"variant {self.variant!r} needs an EllipticContext")
        if self.variant == "direction_dependent":
            etas = tuple(complex(e) for e in np.atleast_1d(self.eta))
            if len(etas) != self.lattice.d:
                raise ValueError(f"need one eta per axis ({self.lattice.d}), got {len(etas)}")
            object.__setattr__(self, "eta", etas)
        else:
            object.__setattr__(self, "eta", complex(self.eta))
        if self.variant == "open_chain_1d":
            if self.lattice.d != 1 or self.lattice.boundary != "open":
                raise ValueError("open_chain_1d needs a 1D lattice with open boundary")
            object.__setattr__(self, "u0", complex(self.u0))
        elif self.lattice.boundary != "periodic":
            raise ValueError(f"variant {self.variant!r} needs a periodic lattice")
        if self.variant == "long_range":
            weights = tuple((int(k), float(f)) for k, f in self.long_range_weights)
            if not weights:
                raise ValueError("long_range needs at least one (k, F_k) pair")
            object.__setattr__(self, "long_range_weights", tuple(sorted(weights)))

    @property
    def hilbert_dim(self) -> int:
        return self.spin.dim ** self.lattice.volume

    def eta_for(self, axis: int = 0, k: int = 1) -> complex:
        """Anisotropy actually entering bonds along ``axis`` at range ``k``."""
        v = self.variant
        if v == "xy_a":
            return 0.5 + 0j
        if v == "xy_b":
            return 0.5 - self.ctx.tau
        if v == "direction_dependent":
            return self.eta[axis]
        if v == "long_range":
            return k * self.eta
        return self.eta

    def couplings(self, axis: int = 0, k: int = 1) -> Couplings:
        if self.variant == "xxz":
            return couplings_xxz(self.eta)
        c = couplings_xyz(self.eta_for(axis, k), self.ctx)
        if self.variant in ("xy_a", "xy_b"):
            # ell_2 vanishes identically at 1/2 (and 1/2 - tau); drop the rounding residue
            c = Couplings(c.jx, c.jy, 0j)
        return c


def _two_site(spin: SpinRep):
    ops = [spin_matrix(spin, a) for a in ("x", "y", "z")]
    return [np.kron(o, o) for o in ops]


def bond_operator(spec: ModelSpec, range_k: int = 1, axis: int = 0) -> np.ndarray:
    """Dense two-site matrix ``Jx SxSx + Jy SySy + Jz SzSz`` (site a is the slow index)."""
    c = spec.couplings(axis, range_k)
    xx, yy, zz = _two_site(spec.spin)
    return c.jx * xx + c.jy * yy + c.jz * zz


def bond_terms(spec: ModelSpec) -> list[tuple[Bond, float]]:
    """Bonds with their weights, ordered by (axis, site, range)."""
    lat = spec.lattice
    if spec.variant == "long_range":
        terms = []
        for k, f in spec.long_range_weights:
            terms.extend((b, f) for b in axial_neighbors(lat, k))
    else:
        terms = [(b, 1.0) for b in lat.bonds]
    terms.sort(key=lambda t: (t[0].direction, t[0].site_a, t[0].range))
    return terms


def _boundary_fields(spec: ModelSpec) -> list[tuple[int, complex]]:
    if spec.variant != "open_chain_1d":
        return []
    s, L, eta = spec.spin.s, spec.lattice.volume, spec.eta
    h1 = -s * helper_a(spec.u0 + eta, eta, spec.ctx)
    hL = s * helper_a(spec.u0 + L * eta, eta, spec.ctx)
    return [(0, h1), (L - 1, hL)]


def _apply_two_site(m4, psi, a, b):
    out = np.tensordot(m4, psi, axes=([2, 3], [a, b]))
    return np.moveaxis(out, [0, 1], [a, b])


def apply_hamiltonian(spec: ModelSpec, state: np.ndarray) -> np.ndarray:
    """``H @ state`` without forming ``H``.

    Bonds are visited in the fixed order of :func:`bond_terms` and added to
    one accumulator, so repeated calls are bit-identical.
    """
    state = np.asarray(state)
    dim, V = spec.spin.dim, spec.lattice.volume
    if dim ** V > MATRIX_FREE_LIMIT:
        raise TooLarge(f"{dim ** V} amplitudes exceed the matrix-free budget {MATRIX_FREE_LIMIT}")
    if state.shape != (dim ** V,):
        raise DimensionMismatch(f"state has shape {state.shape}, expected ({dim ** V},)")
    psi = state.astype(complex, copy=False).reshape((dim,) * V)
    acc = np.zeros_like(psi)
    cache = {}
    for bond, weight in bond_terms(spec):
        key = (bond.direction, bond.range)
        if key not in cache:
            cache[key] = bond_operator(spec, bond.range, bond.direction).reshape((dim,) * 4)
        acc += weight * _apply_two_site(cache[key], psi, bond.site_a, bond.site_b)
    sz = spec.spin.sz_diag
    for site, h in _boundary_fields(spec):
        shape = [1] * V
        shape[site] = dim
        acc += h * sz.reshape(shape) * psi
    return acc.reshape(-1)


def dense_hamiltonian(spec: ModelSpec) -> np.ndarray:
    """Full matrix from Kronecker products of single-site operators.

    Built independently of :func:`apply_hamiltonian`; capped at
    ``DENSE_LIMIT`` basis states.
    """
    dim, V = spec.spin.dim, spec.lattice.volume
    n = dim ** V
    if n > DENSE_LIMIT:
        raise TooLarge(f"dense Hamiltonian of size {n} exceeds {DENSE_LIMIT}")
    ops = {a: spin_matrix(spec.spin, a) for a in ("x", "y", "z")}
    eye = np.eye(dim)

    def site_op(op, j):
        out = np.ones((1, 1))
        for i in range(V):
            out = np.kron(out, op if i == j else eye)
        return out

    local = {(a, j): site_op(ops[a], j) for a in ops for j in range(V)}
    H = np.zeros((n, n), dtype=complex)
    for bond, weight in bond_terms(spec):
        c = spec.couplings(bond.direction, bond.range)
        i, j = bond.site_a, bond.site_b
        for a, J in zip(("x", "y", "z"), c.as_tuple()):
            H += weight * J * (local[(a, i)] @ local[(a, j)])
    for site, h in _boundary_fields(spec):
        H += h * local[("z", site)]
    return H


# ---------------------------------------------------------------------------
# scalar helpers entering the two-site reduction
# ---------------------------------------------------------------------------

def _pole_guard(x, ctx, what):
    if abs(x) < ctx.pole_scale:
        raise NearPole(f"{what} vanishes at this argument")


def helper_a(u: complex, eta: complex, ctx: EllipticContext) -> complex:
    """``ell1(eta) ell2(u) / (ell2(0) ell1(u))``."""
    l1u = ell(1, u, ctx, derivative=False).value
    _pole_guard(l1u, ctx, "ell_1(u)")
    return (ell(1, eta, ctx, derivative=False).value * ell(2, u, ctx, derivative=False).value
            / (ell(2, 0.0, ctx, derivative=False).value * l1u))


def helper_g(u: complex, eta: complex, ctx: EllipticContext) -> complex:
    """``ell1(eta) ell1'(u) / (ell1'(0) ell1(u))``."""
    t = ell(1, u, ctx)
    _pole_guard(t.value, ctx, "ell_1(u)")
    return ell(1, eta, ctx, derivative=False).value * t.derivative / (ell(1, 0.0, ctx).derivative * t.value)


def helper_b(u: complex, eta: complex, ctx: EllipticContext) -> complex:
    """``g(eta) + g(u) - g(u + eta)``.

    ``g(eta)`` is evaluated as ``ell1'(eta) / ell1'(0)``: the ``ell1(eta)``
    prefactor cancels analytically, which keeps ``eta -> 0`` finite.
    """
    g_eta = ell(1, eta, ctx).derivative / ell(1, 0.0, ctx).derivative
    return g_eta + helper_g(u, eta, ctx) - helper_g(u + eta, eta, ctx)
