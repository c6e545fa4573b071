"""Residual-based checks of the closed-form claims.

Every check returns a small record (:class:`VerificationReport` or
:class:`DegeneracyReport`) that serializes to plain JSON via ``to_dict``.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .elliptic import EllipticContext, bell
from .errors import TooLarge
from .helix import (
    ProductState,
    TowerState,
    local_vector,
    tower_entropy,
)
from .lattice import build_lattice
from .model import (
    DENSE_LIMIT,
    MATRIX_FREE_LIMIT,
    ModelSpec,
    apply_hamiltonian,
    bond_operator,
    dense_hamiltonian,
    helper_a,
    helper_b,
)
from .spin import SpinRep, spin_matrix

__all__ = [
    "VerificationReport",
    "DegeneracyReport",
    "encode_complex",
    "check_divergence",
    "check_eigenstate",
    "rayleigh_residual",
    "degeneracy_scan",
    "gram_rank",
    "check_entropy",
    "schmidt_entropy",
    "check_trig_limit",
    "trig_limit_deviation",
    "degeneration_overlap",
    "ENTROPY_LIMIT",
]

ENTROPY_LIMIT = 2 ** 20
CLUSTER_REL_TOL = 1e-8
RANK_TOL = 1e-8


def encode_complex(z) -> list[float] | None:
    if z is None:
        return None
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class VerificationReport:
    check_name: str
    parameters: dict
    residual: float
    measured_energy: complex | None
    expected_energy: complex | None
    passed: bool
    tolerance: float
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "parameters": self.parameters,
            "residual": float(self.residual),
            "measured_energy": encode_complex(self.measured_energy),
            "expected_energy": encode_complex(self.expected_energy),
            "passed": bool(self.passed),
            "tolerance": float(self.tolerance),
            "extra": self.extra,
        }


@dataclass
class DegeneracyReport:
    target_energy: complex
    eigenvalue_cluster: list[complex]
    cluster_size: int
    span_dimension: int
    predicted_dimension: int | None
    states_in_cluster: bool = True
    max_state_residual: float = 0.0

    def to_dict(self) -> dict:
        return {
            "target_energy": encode_complex(self.target_energy),
            "eigenvalue_cluster": [encode_complex(z) for z in self.eigenvalue_cluster],
            "cluster_size": self.cluster_size,
            "span_dimension": self.span_dimension,
            "predicted_dimension": self.predicted_dimension,
            "states_in_cluster": self.states_in_cluster,
            "max_state_residual": float(self.max_state_residual),
        }


def _dense(state) -> np.ndarray:
    if isinstance(state, ProductState):
        return state.to_dense()
    if isinstance(state, TowerState):
        return state.amplitudes
    return np.asarray(state, dtype=complex)


def _describe(spec: ModelSpec) -> dict:
    eta = spec.eta if spec.variant not in ("xy_a", "xy_b") else spec.eta_for(0)
    return {
        "variant": spec.variant,
        "twice_s": spec.spin.twice_s,
        "dims": list(spec.lattice.dims),
        "boundary": spec.lattice.boundary,
        "eta": [encode_complex(e) for e in eta] if isinstance(eta, tuple) else encode_complex(eta),
        "tau": encode_complex(spec.ctx.tau) if spec.ctx is not None else None,
    }


# ---------------------------------------------------------------------------
# two-site divergence identity
# ---------------------------------------------------------------------------

def check_divergence(spin: SpinRep, eta: complex, tau: complex, u: complex, sign: int,
                     tolerance: float = 1e-10, ctx: EllipticContext | None = None) -> VerificationReport:
    """Bond action on ``psi(u) x psi(u + sign eta)`` against its reduced form.

    Right side: ``s^2 b(sign u) + sign s (a(u) Sz_i - a(u + sign eta) Sz_j)``
    applied to the same product.  Residual is relative to the larger of the left side and the summed
    magnitudes of the right-side terms.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    t0 = time.perf_counter()
    ctx = ctx or EllipticContext(complex(tau))
    eta, u = complex(eta), complex(u)
    s = spin.s
    # unnormalized locals: the identity is linear in each factor
    v1 = local_vector(u, spin, ctx).coeffs
    v2 = local_vector(u + sign * eta, spin, ctx).coeffs
    pair = np.kron(v1, v2)
    lat = build_lattice((2,), "open")
    spec = ModelSpec("open_chain_1d", spin, lat, eta, ctx)
    lhs = bond_operator(spec) @ pair
    sz = spin_matrix(spin, "z")
    eye = np.eye(spin.dim)
    sz_i, sz_j = np.kron(sz, eye), np.kron(eye, sz)
    terms = (s * s * helper_b(sign * u, eta, ctx) * pair,
             sign * s * helper_a(u, eta, ctx) * (sz_i @ pair),
             -sign * s * helper_a(u + sign * eta, eta, ctx) * (sz_j @ pair))
    rhs = terms[0] + terms[1] + terms[2]
    # near a pole of a(u) the right-side terms cancel; measure against their size
    scale = max(np.linalg.norm(lhs), sum(np.linalg.norm(t) for t in terms), 1e-300)
    res = float(np.linalg.norm(lhs - rhs) / scale)
    params = {"twice_s": spin.twice_s, "eta": encode_complex(eta), "tau": encode_complex(ctx.tau),
              "u": encode_complex(u), "sign": sign}
    return VerificationReport("divergence", params, res, None, None, res <= tolerance, tolerance,
                              time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# eigenstates
# ---------------------------------------------------------------------------

def rayleigh_residual(spec: ModelSpec, x: np.ndarray) -> tuple[float, complex]:
    """``(||Hx - lam x|| / ||x||, lam)`` with ``lam`` the Rayleigh quotient."""
    x = np.asarray(x, dtype=complex)
    nrm = np.linalg.norm(x)
    if nrm == 0:
        raise ValueError("zero vector")
    x = x / nrm
    hx = apply_hamiltonian(spec, x)
    lam = complex(np.vdot(x, hx))
    return float(np.linalg.norm(hx - lam * x)), lam


def check_eigenstate(spec: ModelSpec, state, expected_energy: complex | None = None,
                     tolerance: float = 1e-10, name: str = "eigenstate") -> VerificationReport:
    """Matrix-free residual of ``state`` and comparison of its Rayleigh quotient.

    Passes iff the residual is at most ``tolerance`` and, when an expected
    energy is given, ``|lam - E| <= tolerance * max(1, |E|)``.
    """
    t0 = time.perf_counter()
    x = _dense(state)
    if x.size > MATRIX_FREE_LIMIT:
        raise TooLarge(f"{x.size} amplitudes exceed {MATRIX_FREE_LIMIT}")
    res, lam = rayleigh_residual(spec, x)
    ok = res <= tolerance
    extra = {}
    if expected_energy is not None:
        gap = abs(lam - expected_energy)
        extra["energy_error"] = float(gap)
        ok = ok and gap <= tolerance * max(1.0, abs(expected_energy))
    params = _describe(spec)
    if isinstance(state, ProductState):
        params["u"] = encode_complex(state.u)
        params["epsilon"] = list(state.epsilon)
    return VerificationReport(name, params, res, lam, expected_energy, ok, tolerance,
                              time.perf_counter() - t0, extra)


# ---------------------------------------------------------------------------
# exact diagonalization
# ---------------------------------------------------------------------------

def gram_rank(states: Sequence, rank_tol: float = RANK_TOL) -> int:
    """Numerical rank of the normalized state set (relative singular value cut)."""
    if not states:
        return 0
    m = np.array([_dense(x) / np.linalg.norm(_dense(x)) for x in states])
    sv = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(sv > rank_tol * sv[0]))


def degeneracy_scan(spec: ModelSpec, target_energy: complex, constructed_states: Sequence,
                    predicted_dimension: int | None = None, cluster_tol: float | None = None,
                    rank_tol: float = RANK_TOL) -> DegeneracyReport:
    """Full diagonalization and comparison with a set of constructed states.

    Hermitian matrices go through ``eigh``; anything else through the general
    complex solver.  The cluster holds eigenvalues within ``cluster_tol``
    (default ``1e-8`` times the spectral range) of the target.
    """
    if spec.hilbert_dim > DENSE_LIMIT:
        raise TooLarge(f"dense diagonalization limited to {DENSE_LIMIT} states")
    H = dense_hamiltonian(spec)
    if np.allclose(H, H.conj().T, rtol=0, atol=1e-13 * max(1.0, np.abs(H).max())):
        evals = scipy.linalg.eigh(H, eigvals_only=True).astype(complex)
    else:
        evals = scipy.linalg.eigvals(H)
    span = float(np.max(np.abs(evals - evals[0]))) if len(evals) > 1 else 0.0
    tol = cluster_tol if cluster_tol is not None else CLUSTER_REL_TOL * max(span, 1.0)
    target = complex(target_energy)
    cluster = sorted((complex(e) for e in evals if abs(e - target) <= tol),
                     key=lambda z: (z.real, z.imag))
    worst = 0.0
    inside = True
    for x in constructed_states:
        v = _dense(x)
        v = v / np.linalg.norm(v)
        r = float(np.linalg.norm(H @ v - target * v))
        worst = max(worst, r)
        inside = inside and r <= max(tol, 1e-9)
    return DegeneracyReport(target, cluster, len(cluster), gram_rank(constructed_states, rank_tol),
                            predicted_dimension, inside, worst)


# ---------------------------------------------------------------------------
# entanglement
# ---------------------------------------------------------------------------

def schmidt_entropy(amplitudes: np.ndarray, dim: int, va: int) -> float:
    """Von Neumann entropy of the first ``va`` sites (site 0 slowest)."""
    x = np.asarray(amplitudes, dtype=complex)
    x = x / np.linalg.norm(x)
    sv = np.linalg.svd(x.reshape(dim ** va, -1), compute_uv=False)
    p = sv ** 2
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log(p)))


def check_entropy(spec: ModelSpec, n: int, va: int, tolerance: float = 1e-12) -> VerificationReport:
    """Hypergeometric entropy formula against a Schmidt decomposition of the tower state."""
    from .helix import tower_state

    t0 = time.perf_counter()
    if spec.hilbert_dim > ENTROPY_LIMIT:
        raise TooLarge(f"Schmidt decomposition limited to {ENTROPY_LIMIT} amplitudes")
    V = spec.lattice.volume
    formula = tower_entropy(n, va, spec.spin.twice_s, V)
    t = tower_state(n, (1,) * spec.lattice.d, spec)
    measured = schmidt_entropy(t.amplitudes, spec.spin.dim, va)
    res = abs(formula - measured)
    params = _describe(spec) | {"n": n, "va": va}
    return VerificationReport("entropy", params, res, None, None, res <= tolerance, tolerance,
                              time.perf_counter() - t0, {"formula": formula, "schmidt": measured})


# ---------------------------------------------------------------------------
# trigonometric degeneration
# ---------------------------------------------------------------------------

def trig_limit_deviation(eta: float, im_tau: float, samples: int = 17) -> dict:
    """Largest deviations from the trigonometric forms on ``u = v + (1 + tau)/2``."""
    ctx = EllipticContext(1j * im_tau)
    vs = np.linspace(-1.0, 1.0, samples)
    db = da = dr = 0.0
    c, sn = math.cos(math.pi * eta), math.sin(math.pi * eta)
    for v in vs:
        u = v + (1 + ctx.tau) / 2
        db = max(db, abs(helper_b(u, eta, ctx) - c))
        da = max(da, abs(helper_a(u, eta, ctx) + 1j * sn))
        ratio = bell(4, u, ctx, derivative=False).value / bell(1, u, ctx, derivative=False).value
        dr = max(dr, abs(ratio - cmath.exp(1j * math.pi * v)))
    return {"b": db, "a": da, "ratio": dr}


def check_trig_limit(eta: float, im_tau_sequence: Sequence[float], tolerance: float = 1e-6,
                     samples: int = 17) -> VerificationReport:
    """Convergence of ``b``, ``a`` and the local ratio to their ``Im tau -> oo`` forms.

    Passes iff every deviation shrinks strictly along the sequence and the
    last one is below ``tolerance``.  (At ``eta = 0`` the deviations vanish
    identically; then only the final bound is required.)
    """
    t0 = time.perf_counter()
    eta = float(eta)
    rows = [trig_limit_deviation(eta, t, samples) for t in im_tau_sequence]
    worst = [max(r.values()) for r in rows]
    flat = all(w < 1e-12 for w in worst)
    monotone = flat or all(b < a for a, b in zip(worst, worst[1:]))
    ok = monotone and worst[-1] < tolerance
    params = {"eta": eta, "im_tau_sequence": [float(t) for t in im_tau_sequence]}
    return VerificationReport("trig_limit", params, worst[-1], None, None, ok, tolerance,
                              time.perf_counter() - t0, {"deviations": rows, "monotone": monotone})


def degeneration_overlap(spin: SpinRep, L: int, eta: float, im_tau: float, v: complex = 0.3) -> float:
    """``|<Omega|Psi>|`` for the helix at ``u = tau + v`` (unit-norm states)."""
    ctx = EllipticContext(1j * im_tau)
    amp = 1.0 + 0j
    for n in range(L):
        amp *= local_vector(ctx.tau + v + n * eta, spin, ctx).coeffs[0]
    return abs(amp)
