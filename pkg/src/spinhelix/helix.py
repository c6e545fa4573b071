"""Spin-helix product states and the closed-form quantities attached to them."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .elliptic import EllipticContext, bell, ell
from .errors import (
    DegenerateArgument,
    NearPole,
    NotCommensurate,
    OutOfRange,
    TooLarge,
    WrongLength,
)
from .lattice import Lattice, check_epsilon
from .model import ModelSpec, helper_b
from .spin import SpinRep, spin_matrix

__all__ = [
    "LocalVector",
    "ProductState",
    "CommensurabilityWitness",
    "TowerState",
    "local_vector",
    "local_vector_xxz",
    "analytic_norm",
    "local_expectations",
    "canonical_eta",
    "commensurability",
    "commensurability_xxz",
    "witness_for",
    "site_arguments",
    "build_shs",
    "open_chain_shs",
    "open_chain_energy",
    "shs_energy",
    "tower_state",
    "tower_entropy",
    "tower_entropy_asymptotic",
    "qp_functions",
    "expansion_states",
    "spin1_xy_state",
    "texture",
    "basis_digits",
]

COMMENSURABILITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LocalVector:
    coeffs: np.ndarray
    u: complex
    gamma: float
    beta: float


@dataclass(frozen=True, eq=False)
class ProductState:
    locals: tuple[LocalVector, ...]
    u: complex
    epsilon: tuple[int, ...]
    eta_used: complex | tuple[complex, ...]

    def to_dense(self) -> np.ndarray:
        out = np.ones(1, dtype=complex)
        for v in self.locals:
            out = np.kron(out, v.coeffs)
        return out


@dataclass(frozen=True)
class CommensurabilityWitness:
    p: tuple[int, ...]
    q: tuple[int, ...]
    residuals: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class TowerState:
    n: int
    epsilon: tuple[int, ...]
    amplitudes: np.ndarray


# ---------------------------------------------------------------------------
# local vectors
# ---------------------------------------------------------------------------

def _angles(ratio: complex) -> tuple[float, float]:
    return 2.0 * math.atan(abs(ratio)), cmath.phase(ratio)


def _angles_of(top: complex, bottom: complex) -> tuple[float, float]:
    """Angles of ``bottom / top`` without overflowing when ``top`` is (nearly) zero."""
    if abs(top) < 1e-300 * max(abs(bottom), 1.0):
        return math.pi, cmath.phase(bottom)
    return _angles(bottom / top)


def _coherent(spin: SpinRep, top: complex, bottom: complex) -> np.ndarray:
    """Normalized ``sum_n kappa_n top^(2s-n) bottom^n |s-n>``."""
    scale = max(abs(top), abs(bottom))
    t, b = top / scale, bottom / scale
    n = np.arange(spin.dim)
    c = spin.kappa * t ** (spin.twice_s - n) * b ** n
    return c / np.linalg.norm(c)


def local_vector(u: complex, spin: SpinRep, ctx: EllipticContext) -> LocalVector:
    """Elliptic coherent vector with amplitudes ``kappa_n b1^(2s-n) b4^n``.

    Normalized numerically to unit 2-norm; see :func:`analytic_norm` for the
    closed-form norm.
    """
    u = complex(u)
    b1 = bell(1, u, ctx, derivative=False).value
    b4 = bell(4, u, ctx, derivative=False).value
    if max(abs(b1), abs(b4)) < ctx.pole_scale:
        raise DegenerateArgument(f"bell_1 and bell_4 both vanish at u={u}")
    gamma, beta = _angles_of(b1, b4)
    return LocalVector(_coherent(spin, b1, b4), u, gamma, beta)


def local_vector_xxz(u: complex, spin: SpinRep) -> LocalVector:
    """Trigonometric coherent vector with amplitudes ``kappa_n exp(i pi n u)``."""
    u = complex(u)
    z = cmath.exp(1j * math.pi * u)
    gamma, beta = _angles(z)
    return LocalVector(_coherent(spin, 1.0, z), u, gamma, beta)


def analytic_norm(u: complex, spin: SpinRep, ctx: EllipticContext) -> float:
    """``[ell4(Re u) ell3(i Im u)]^s``, the closed-form norm of the unnormalized vector.

    Only checked for purely imaginary ``tau``.
    """
    u = complex(u)
    val = ell(4, u.real, ctx, derivative=False).value * ell(3, 1j * u.imag, ctx, derivative=False).value
    return val ** spin.s


def local_expectations(v: LocalVector, spin: SpinRep) -> tuple[float, float, float]:
    c = v.coeffs
    return tuple(float(np.real(np.vdot(c, spin_matrix(spin, a) @ c))) for a in ("x", "y", "z"))


# ---------------------------------------------------------------------------
# commensurability
# ---------------------------------------------------------------------------

def canonical_eta(eta: complex, tau: complex) -> complex:
    """Representative of ``eta`` modulo ``2`` and ``2 tau`` in the fundamental rectangle
    ``0 <= Re < 2``, ``0 <= Im < 2 Im(tau)`` (for purely imaginary ``tau``)."""
    eta, tau = complex(eta), complex(tau)
    m = math.floor(eta.imag / (2 * tau.imag))
    e = eta - 2 * m * tau
    re = e.real % 2.0
    return complex(0.0 if re == 2.0 else re, e.imag)


def commensurability(eta, tau: complex, dims: Sequence[int], tol: float = COMMENSURABILITY_TOL
                     ) -> CommensurabilityWitness:
    """Integers ``p, q`` with ``L eta = 2 p tau + 2 q`` on every axis.

    ``eta`` may be a scalar or one value per axis.  Raises
    :class:`NotCommensurate` carrying the nearest lattice point otherwise.
    """
    tau = complex(tau)
    if not tau.imag > 0:
        raise ValueError("Im(tau) must be positive")
    etas = np.broadcast_to(np.asarray(eta, dtype=complex), (len(dims),))
    ps, qs, res = [], [], []
    for L, e in zip(dims, etas):
        target = L * complex(e)
        p = round(target.imag / (2 * tau.imag))
        q = round((target - 2 * p * tau).real / 2)
        ps.append(int(p))
        qs.append(int(q))
        res.append(abs(target - 2 * p * tau - 2 * q))
    if max(res) > tol:
        raise NotCommensurate(
            f"L*eta is not on the lattice 2Z*tau + 2Z (residuals {res})", ps, qs, res)
    return CommensurabilityWitness(tuple(ps), tuple(qs), tuple(res))


def commensurability_xxz(eta: complex, dims: Sequence[int], tol: float = COMMENSURABILITY_TOL
                         ) -> CommensurabilityWitness:
    """Root-of-unity condition ``L eta = 2 q``."""
    eta = complex(eta)
    qs, res = [], []
    for L in dims:
        q = round((L * eta).real / 2)
        qs.append(int(q))
        res.append(abs(L * eta - 2 * q))
    if max(res) > tol:
        raise NotCommensurate(f"L*eta is not an even integer (residuals {res})",
                              [0] * len(dims), qs, res)
    return CommensurabilityWitness((0,) * len(dims), tuple(qs), tuple(res))


def witness_for(spec: ModelSpec) -> CommensurabilityWitness:
    dims = spec.lattice.dims
    v = spec.variant
    if v == "xxz":
        return commensurability_xxz(spec.eta, dims)
    if v in ("xy_a", "xy_b"):
        bad = [L for L in dims if L % 4]
        if bad:
            raise WrongLength(f"XY helix needs every length divisible by 4, got {dims}")
        # L (1/2 - tau) = 2 p tau + 2 q  gives p = -L/2 for xy_b
        p = tuple(0 if v == "xy_a" else -L // 2 for L in dims)
        return CommensurabilityWitness(p, tuple(L // 4 for L in dims), (0.0,) * len(dims))
    if v == "direction_dependent":
        return commensurability(spec.eta, spec.ctx.tau, dims)
    if v == "open_chain_1d":
        raise ValueError("the open chain has no periodicity condition")
    return commensurability(spec.eta, spec.ctx.tau, dims)


# ---------------------------------------------------------------------------
# helix states
# ---------------------------------------------------------------------------

def site_arguments(spec: ModelSpec, u: complex, epsilon: Sequence[int]) -> np.ndarray:
    """``u + sum_a eps_a eta_a n_{j,a}`` for every site."""
    eps = check_epsilon(spec.lattice, epsilon)
    etas = np.array([spec.eta_for(a) for a in range(spec.lattice.d)])
    return complex(u) + spec.lattice.site_coords @ (np.asarray(eps) * etas)


def _eta_record(spec):
    if spec.variant == "direction_dependent":
        return tuple(spec.eta)
    return spec.eta_for(0)


def build_shs(u: complex, epsilon: Sequence[int], spec: ModelSpec, *, check: bool = True) -> ProductState:
    """Product of local coherent vectors at ``u + eta eps . n_j``.

    With ``check`` the variant's periodicity condition is enforced first
    (raising :class:`NotCommensurate` or :class:`WrongLength`).
    """
    if spec.variant == "open_chain_1d":
        raise ValueError("use open_chain_shs for the open chain")
    if check:
        witness_for(spec)
    args = site_arguments(spec, u, epsilon)
    if spec.variant == "xxz":
        locs = tuple(local_vector_xxz(a, spec.spin) for a in args)
    else:
        locs = tuple(local_vector(a, spec.spin, spec.ctx) for a in args)
    return ProductState(locs, complex(u), check_epsilon(spec.lattice, epsilon), _eta_record(spec))


def open_chain_shs(spec: ModelSpec) -> ProductState:
    """``psi(u0 + eta) x psi(u0 + 2 eta) x ... x psi(u0 + L eta)``."""
    if spec.variant != "open_chain_1d":
        raise ValueError("open_chain_shs needs the open_chain_1d variant")
    L = spec.lattice.volume
    locs = tuple(local_vector(spec.u0 + n * spec.eta, spec.spin, spec.ctx) for n in range(1, L + 1))
    return ProductState(locs, spec.u0, (1,), spec.eta)


def open_chain_energy(spec: ModelSpec) -> complex:
    """Sum of the bond eigen-terms ``s^2 b(u0 + n eta)``, ``n = 1..L-1``.

    The boundary fields cancel the two leftover ``S^z`` terms exactly.
    """
    s, L, eta = spec.spin.s, spec.lattice.volume, spec.eta
    return s * s * sum(helper_b(spec.u0 + n * eta, eta, spec.ctx) for n in range(1, L))


def _elliptic_energy(s, eta, p, dims, ctx):
    V = int(np.prod(dims))
    d1 = ell(1, eta, ctx)
    d10 = ell(1, 0.0, ctx).derivative
    cross = sum(pb * V // L for pb, L in zip(p, dims))
    return len(dims) * s * s * d1.derivative / d10 * V + 4j * math.pi * s * s * d1.value / d10 * cross


def shs_energy(spec: ModelSpec, witness: CommensurabilityWitness | None = None) -> complex:
    """Closed-form eigenvalue of the helix state for a periodic lattice."""
    if witness is None:
        witness = witness_for(spec)
    s, dims = spec.spin.s, spec.lattice.dims
    V = spec.lattice.volume
    v = spec.variant
    if v == "xxz":
        return complex(len(dims) * s * s * cmath.cos(math.pi * spec.eta) * V)
    if v == "long_range":
        return sum(f * _elliptic_energy(s, k * spec.eta, [k * p for p in witness.p], dims, spec.ctx)
                   for k, f in spec.long_range_weights)
    if v == "direction_dependent":
        total = 0j
        d10 = ell(1, 0.0, spec.ctx).derivative
        for a, (e, p, L) in enumerate(zip(spec.eta, witness.p, dims)):
            t = ell(1, e, spec.ctx)
            total += s * s * (t.derivative / d10 * V + 4j * math.pi * t.value / d10 * p * (V // L))
        return total
    if v == "open_chain_1d":
        raise ValueError("no periodic closed form for the open chain; see open_chain_energy")
    return _elliptic_energy(s, spec.eta_for(0), witness.p, dims, spec.ctx)


# ---------------------------------------------------------------------------
# XXZ tower states
# ---------------------------------------------------------------------------

def basis_digits(dim: int, V: int) -> np.ndarray:
    """Local basis index of every site for every product-basis state (site 0 slowest)."""
    idx = np.arange(dim ** V)
    out = np.empty((dim ** V, V), dtype=np.int64)
    for j in range(V - 1, -1, -1):
        out[:, j] = idx % dim
        idx //= dim
    return out


def tower_state(n: int, epsilon: Sequence[int], spec: ModelSpec) -> TowerState:
    """``(J^-_eps)^n |Omega> / n!`` by direct enumeration of flip patterns.

    The amplitude of a configuration with ``k_j`` lowerings on site ``j`` is
    ``prod_j kappa_{k_j} c_j^{k_j}``, ``c_j = exp(i pi eta eps . n_j)``.
    """
    if spec.variant != "xxz":
        raise ValueError("tower states are defined for the xxz variant")
    spin, lat = spec.spin, spec.lattice
    V = lat.volume
    if not 0 <= n <= spin.twice_s * V:
        raise OutOfRange(f"n must lie in 0..{spin.twice_s * V}, got {n}")
    if spin.dim ** V > 2 ** 22:
        raise TooLarge("tower state enumeration is limited to 2**22 amplitudes")
    witness_for(spec)
    eps = check_epsilon(lat, epsilon)
    phases = np.exp(1j * math.pi * spec.eta * (lat.site_coords @ np.asarray(eps)))
    k = basis_digits(spin.dim, V)
    amp = np.ones(len(k), dtype=complex)
    for j in range(V):
        amp *= spin.kappa[k[:, j]] * phases[j] ** k[:, j]
    amp[k.sum(axis=1) != n] = 0
    return TowerState(n, eps, amp)


def _hypergeometric_weights(n, va, twice_s, V):
    na, nt = twice_s * va, twice_s * V
    total = math.comb(nt, n)
    lo, hi = max(0, n - (nt - na)), min(n, na)
    return [math.comb(na, j) * math.comb(nt - na, n - j) / total for j in range(lo, hi + 1)]


def tower_entropy(n: int, va: int, twice_s: int, V: int) -> float:
    """Entanglement entropy of a tower state for a block of ``va`` sites.

    Summed over the full support of the hypergeometric weights.
    """
    if not 0 <= n <= twice_s * V:
        raise OutOfRange(f"n must lie in 0..{twice_s * V}, got {n}")
    if not 1 <= va < V:
        raise OutOfRange(f"subsystem volume must satisfy 1 <= va < V, got {va}")
    return 0.0 - sum(p * math.log(p) for p in _hypergeometric_weights(n, va, twice_s, V) if p > 0)


def tower_entropy_asymptotic(twice_s: int, V: int) -> float:
    """Large-V form ``ln(s pi V / 4) / 2 + 1/2`` at ``n = V_A = sV``."""
    return 0.5 * math.log(twice_s / 2 * math.pi * V / 4) + 0.5


# ---------------------------------------------------------------------------
# expansion of the spin-1/2 chain helix in Q and P
# ---------------------------------------------------------------------------

def qp_functions(u, ctx: EllipticContext):
    """``Q = bell1/bell4`` and ``P = Q' / (pi bell2(0) bell3(0))``.

    ``P`` comes from the analytic derivative, so ``P(0) = 1`` and ``P`` is even.
    Accepts arrays.
    """
    t1, t4 = bell(1, u, ctx), bell(4, u, ctx)
    if np.any(np.abs(t4.value) < ctx.pole_scale):
        raise NearPole("bell_4(u) vanishes")
    Q = t1.value / t4.value
    dQ = (t1.derivative * t4.value - t1.value * t4.derivative) / t4.value ** 2
    norm = math.pi * bell(2, 0.0, ctx, derivative=False).value * bell(3, 0.0, ctx, derivative=False).value
    return Q, dQ / norm


EXPANSION_LEVELS = ("tilde0", "bar0", "tilde1", "bar1")


def expansion_states(level: str, epsilon_sign: int, spec: ModelSpec, offset: complex = 0.0) -> np.ndarray:
    """The four explicit ``u``-independent components of the spin-1/2 chain helix.

    ``tilde0``/``bar0`` sum over even/odd flip sets weighted by
    ``prod Q(w_j)``; ``tilde1``/``bar1`` add one more flipped site ``k``
    weighted by ``P(w_k)``.  Flips act on ``|-1/2 ... -1/2>``.

    ``w_j = offset + eps x_j eta`` with ``x_j`` the 0-based site coordinate,
    so these are the coefficients of ``build_shs(u + offset)`` expanded in
    ``Q(u)``.  A nonzero ``offset`` is needed whenever some ``w_j`` lands on
    a pole of ``Q`` (e.g. ``x_j eta = tau``), which raises :class:`NearPole`.
    """
    if level not in EXPANSION_LEVELS:
        raise ValueError(f"level must be one of {EXPANSION_LEVELS}")
    if spec.spin.twice_s != 1 or spec.lattice.d != 1:
        raise ValueError("expansion states are built for spin-1/2 chains")
    if epsilon_sign not in (1, -1):
        raise ValueError("epsilon_sign must be +1 or -1")
    L = spec.lattice.volume
    if L > 16:
        raise TooLarge("expansion states are enumerated for L <= 16")
    eta = spec.eta_for(0)
    Q, P = qp_functions(complex(offset) + epsilon_sign * np.arange(L) * eta, spec.ctx)
    out = np.zeros(2 ** L, dtype=complex)
    want_even = level in ("tilde0", "tilde1")
    with_p = level.endswith("1")
    for m in range(L + 1):
        for subset in combinations(range(L), m):
            # basis digit 0 is |+1/2> (flipped), 1 is |-1/2>; site 0 is the top bit
            idx = (2 ** L - 1) - sum(1 << (L - 1 - j) for j in subset)
            if not with_p:
                if (m % 2 == 0) == want_even:
                    out[idx] = np.prod(Q[list(subset)])
            else:
                if m == 0 or ((m - 1) % 2 == 0) != want_even:
                    continue
                acc = 0j
                for k in subset:
                    rest = [j for j in subset if j != k]
                    acc += P[k] * np.prod(Q[rest])
                out[idx] = acc
    return out


# ---------------------------------------------------------------------------
# spin-1 XY alternative helix
# ---------------------------------------------------------------------------

def spin1_xy_state(u: complex, spec: ModelSpec) -> ProductState:
    """Product of ``bell1^2(w)|1> - bell4^2(w)|-1>`` at ``w = u + (n_1 + ... + n_d)/2``."""
    if spec.spin.twice_s != 2 or spec.variant != "xy_a":
        raise ValueError("the alternative helix exists for the spin-1 xy_a model")
    if any(L % 2 for L in spec.lattice.dims):
        raise WrongLength(f"all lengths must be even, got {spec.lattice.dims}")
    ws = complex(u) + spec.lattice.site_coords.sum(axis=1) / 2
    locs = []
    for w in ws:
        b1 = bell(1, w, spec.ctx, derivative=False).value
        b4 = bell(4, w, spec.ctx, derivative=False).value
        c = np.array([b1 * b1, 0.0, -b4 * b4], dtype=complex)
        nrm = np.linalg.norm(c)
        if nrm < spec.ctx.pole_scale:
            raise DegenerateArgument(f"local vector vanishes at w={w}")
        c = c / nrm
        gamma, beta = _angles_of(c[0], c[2])
        locs.append(LocalVector(c, complex(w), gamma, beta))
    return ProductState(tuple(locs), complex(u), (1,) * spec.lattice.d, 0.5 + 0j)


def texture(state: ProductState, spin: SpinRep) -> np.ndarray:
    """``(V, 3)`` array of per-site ``<Sx>, <Sy>, <Sz>``."""
    return np.array([local_expectations(v, spin) for v in state.locals])
