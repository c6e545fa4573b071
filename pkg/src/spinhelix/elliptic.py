"""Jacobi theta functions and the derived ratios used throughout the package.

Conventions: ``theta(alpha, u, nome)`` is the classical series in the
argument ``u`` and nome ``q``.  The shorthands ``ell`` and ``bell`` take the
argument in units of pi and use the nomes ``exp(i pi tau)`` and
``exp(2 i pi tau)`` respectively, so ``ell(1, u + 1) == -ell(1, u)``.

All evaluations accept scalars or numpy arrays for the argument; scalars
come back as Python ``complex``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidNome, NearPole, NonConvergent

__all__ = [
    "EllipticContext",
    "ThetaValue",
    "IdentityReport",
    "theta",
    "ell",
    "bell",
    "zeta",
    "zeta_tilde",
    "reduce_argument",
    "identity_suite",
]


@dataclass(frozen=True)
class EllipticContext:
    """Modular parameter plus the truncation policy for every theta series.

    Parameters
    ----------
    tau : complex
        Modular parameter, ``Im(tau) > 0``.
    truncation_eps : float
        Series tail bound, relative to ``1 + |value|``.
    max_terms : int
        Hard cap on the number of series terms.
    pole_eps : float
        Relative threshold below which a theta value used as a denominator
        counts as a zero.  Scaled by ``|ell(2, 0)|``.
    """

    tau: complex
    truncation_eps: float = 1e-15
    max_terms: int = 64
    pole_eps: float = 1e-12

    def __post_init__(self):
        tau = complex(self.tau)
        object.__setattr__(self, "tau", tau)
        if not tau.imag > 0:
            raise InvalidNome(f"Im(tau) must be > 0, got tau={tau}")
        if not self.truncation_eps > 0:
            raise ValueError("truncation_eps must be positive")
        if self.max_terms < 4:
            raise ValueError("max_terms must be >= 4")
        if tau.imag < 0.05:
            warnings.warn(
                f"Im(tau)={tau.imag} < 0.05: double precision results are not validated here",
                RuntimeWarning, stacklevel=2)

    @property
    def nome_q(self) -> complex:
        return cmath.exp(1j * math.pi * self.tau)

    @property
    def nome_q2(self) -> complex:
        return cmath.exp(2j * math.pi * self.tau)

    @cached_property
    def pole_scale(self) -> float:
        return self.pole_eps * abs(ell(2, 0.0, self).value)


@dataclass(frozen=True)
class ThetaValue:
    value: complex | np.ndarray
    derivative: complex | np.ndarray | None = None


def _series(alpha: int, z, log_q: complex, eps: float, max_terms: int, want_der: bool):
    """Partial sums of theta_alpha(z) and its z-derivative for nome exp(log_q)."""
    if alpha not in (1, 2, 3, 4):
        raise ValueError(f"theta index must be 1..4, got {alpha}")
    log_abs_q = log_q.real
    if not log_abs_q < 0:
        raise InvalidNome(f"|nome| must be < 1, got {math.exp(log_abs_q)}")

    half = alpha in (1, 2)
    if np.ndim(z) == 0:
        return _series_scalar(alpha, complex(z), log_q, eps, max_terms, want_der, half)
    z = np.asarray(z, dtype=complex)
    y = float(np.max(np.abs(z.imag))) if z.size else 0.0

    def log_bound(n):
        k = n + 0.5 if half else float(n)
        freq = 2 * n + 1 if half else 2 * n
        return k * k * log_abs_q + freq * y + math.log(2.0 * (freq + 1))

    if half:
        val = np.zeros_like(z)
    else:
        val = np.ones_like(z)
    der = np.zeros_like(z) if want_der else None

    start = 0 if half else 1
    for n in range(start, max_terms + start):
        if half:
            k, freq = n + 0.5, 2 * n + 1
        else:
            k, freq = n, 2 * n
        coef = 2.0 * cmath.exp(k * k * log_q)
        if alpha in (1, 4) and n % 2:
            coef = -coef
        if alpha == 1:
            val = val + coef * np.sin(freq * z)
            if want_der:
                der = der + coef * freq * np.cos(freq * z)
        else:
            val = val + coef * np.cos(freq * z)
            if want_der:
                der = der - coef * freq * np.sin(freq * z)
        nxt = log_bound(n + 1)
        # the term bound only shrinks once its ratio to the previous bound is < 1
        if nxt <= log_bound(n):
            floor = eps * (1.0 + (float(np.min(np.abs(val))) if val.size else 0.0))
            if nxt < math.log(floor):
                return val, der
    raise NonConvergent(
        f"theta_{alpha} did not reach tail bound {eps} within {max_terms} terms"
    )


def _series_scalar(alpha, z, log_q, eps, max_terms, want_der, half):
    # same recurrence as the array path, with cmath to avoid numpy call overhead
    log_abs_q = log_q.real
    y = abs(z.imag)
    val = 0j if half else 1 + 0j
    der = 0j
    start = 0 if half else 1
    prev = None
    sin, cos = cmath.sin, cmath.cos
    for n in range(start, max_terms + start):
        if half:
            k, freq = n + 0.5, 2 * n + 1
        else:
            k, freq = n, 2 * n
        coef = 2.0 * cmath.exp(k * k * log_q)
        if alpha in (1, 4) and n % 2:
            coef = -coef
        if alpha == 1:
            val += coef * sin(freq * z)
            if want_der:
                der += coef * freq * cos(freq * z)
        else:
            val += coef * cos(freq * z)
            if want_der:
                der -= coef * freq * sin(freq * z)
        cur = k * k * log_abs_q + freq * y + math.log(2.0 * (freq + 1)) if prev is None else prev
        k1, f1 = (n + 1.5, 2 * n + 3) if half else (n + 1.0, 2 * n + 2)
        nxt = k1 * k1 * log_abs_q + f1 * y + math.log(2.0 * (f1 + 1))
        prev = nxt
        if nxt <= cur and nxt < math.log(eps * (1.0 + abs(val))):
            return val, (der if want_der else None)
    raise NonConvergent(
        f"theta_{alpha} did not reach tail bound {eps} within {max_terms} terms"
    )


def _unwrap(arr):
    if isinstance(arr, np.ndarray) and arr.ndim == 0:
        return complex(arr)
    return arr


def _eval(alpha, u, log_q, ctx, scale, derivative):
    eps = ctx.truncation_eps if ctx is not None else 1e-15
    max_terms = ctx.max_terms if ctx is not None else 64
    z = u * scale if np.ndim(u) == 0 else np.asarray(u) * scale
    val, der = _series(alpha, z, log_q, eps, max_terms, derivative)
    if derivative:
        der = der * scale
    return ThetaValue(_unwrap(val), _unwrap(der) if derivative else None)


def theta(alpha: int, u, nome: complex, ctx: EllipticContext | None = None, *, derivative=True) -> ThetaValue:
    """Jacobi theta function ``theta_alpha(u, q)`` with its u-derivative.

    ``q**(n + 1/2)**2`` is taken on the principal branch of ``log(nome)``;
    use :func:`ell`/:func:`bell` when the nome comes from a modular parameter.
    """
    nome = complex(nome)
    if abs(nome) >= 1:
        raise InvalidNome(f"|nome| must be < 1, got {abs(nome)}")
    if nome == 0:
        log_q = complex(-math.inf)
        # q = 0 leaves only the constant term of theta_3 / theta_4
        u_arr = np.asarray(u, dtype=complex)
        base = np.zeros_like(u_arr) if alpha in (1, 2) else np.ones_like(u_arr)
        return ThetaValue(_unwrap(base), _unwrap(np.zeros_like(u_arr)) if derivative else None)
    log_q = cmath.log(nome)
    return _eval(alpha, u, log_q, ctx, 1.0, derivative)


def ell(alpha: int, u, ctx: EllipticContext, *, derivative=True) -> ThetaValue:
    """``theta_alpha(pi u, exp(i pi tau))``; derivative taken with respect to ``u``."""
    return _eval(alpha, u, 1j * math.pi * ctx.tau, ctx, math.pi, derivative)


def bell(alpha: int, u, ctx: EllipticContext, *, derivative=True) -> ThetaValue:
    """``theta_alpha(pi u, exp(2 i pi tau))``; derivative taken with respect to ``u``."""
    return _eval(alpha, u, 2j * math.pi * ctx.tau, ctx, math.pi, derivative)


def _check_pole(den, ctx, what):
    scale = ctx.pole_scale
    if np.any(np.abs(den) < scale):
        raise NearPole(f"{what} is within {scale:.3g} of zero")


def zeta(u, ctx: EllipticContext):
    """Logarithmic derivative of ``ell(1, .)``."""
    t = ell(1, u, ctx)
    _check_pole(t.value, ctx, "ell_1(u)")
    return t.derivative / t.value


def zeta_tilde(u, ctx: EllipticContext):
    """Logarithmic derivative of ``bell(1, .)``."""
    t = bell(1, u, ctx)
    _check_pole(t.value, ctx, "bell_1(u)")
    return t.derivative / t.value


def reduce_argument(alpha: int, u: complex, ctx: EllipticContext) -> tuple[complex, complex]:
    """Shift ``u`` into the strip ``|Im u| <= Im(tau)/2`` using quasi-periodicity.

    Returns ``(u_reduced, factor)`` with ``ell(alpha, u) == factor * ell(alpha, u_reduced)``.
    Intended for arguments with large imaginary part; the series itself never
    needs this.
    """
    u = complex(u)
    tau = ctx.tau
    m = round(u.imag / tau.imag)
    ur = u - m * tau
    # ell_a(w + tau) = sgn * exp(-i pi (2w + tau)) ell_a(w), sgn=-1 for a in (1, 4)
    sgn = -1.0 if alpha in (1, 4) else 1.0
    factor = complex(1.0)
    w = ur
    step = 1 if m > 0 else -1
    for _ in range(abs(m)):
        if step > 0:
            factor *= sgn * cmath.exp(-1j * math.pi * (2 * w + tau))
            w += tau
        else:
            w -= tau
            factor /= sgn * cmath.exp(-1j * math.pi * (2 * w + tau))
    return ur, factor


# ---------------------------------------------------------------------------
# identity catalogue
# ---------------------------------------------------------------------------

@dataclass
class IdentityReport:
    tau: complex
    sample_count: int
    seed: int
    residuals: dict[str, float] = field(default_factory=dict)
    exclusions: dict[str, int] = field(default_factory=dict)
    tolerance: float = 1e-11

    @property
    def failures(self) -> list[str]:
        return [k for k, v in self.residuals.items() if not v < self.tolerance]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    def to_dict(self) -> dict:
        return {
            "tau": [self.tau.real, self.tau.imag],
            "sample_count": self.sample_count,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "residuals": dict(self.residuals),
            "near_pole_exclusions": dict(self.exclusions),
            "passed": self.passed,
        }


def _rel(lhs, rhs, *terms):
    scale = max([abs(lhs), abs(rhs)] + [abs(t) for t in terms])
    if scale == 0:
        return 0.0
    return abs(lhs - rhs) / scale


def _identities(ctx: EllipticContext):
    """Map of name -> callable(u, v, eta) returning a relative residual."""
    tau = ctx.tau
    ipi = 1j * math.pi

    def L(a, x):
        return ell(a, x, ctx, derivative=False).value

    def B(a, x):
        return bell(a, x, ctx, derivative=False).value

    def z(x):
        return zeta(x, ctx)

    def zt(x):
        return zeta_tilde(x, ctx)

    l1p0 = ell(1, 0.0, ctx).derivative
    ids = {}

    ids["ell2_from_ell1"] = lambda u, v, e: _rel(L(2, u), L(1, u + 0.5))
    ids["ell3_from_ell1"] = lambda u, v, e: _rel(
        L(3, u), cmath.exp(ipi * (u + tau / 4)) * L(1, u + (1 + tau) / 2))
    ids["ell4_from_ell1"] = lambda u, v, e: _rel(
        L(4, u), -cmath.exp(ipi * (u + tau / 4 + 0.5)) * L(1, u + tau / 2))

    ids["parity_ell1"] = lambda u, v, e: _rel(L(1, -u), -L(1, u))
    for a in (2, 3, 4):
        ids[f"parity_ell{a}"] = (lambda a: lambda u, v, e: _rel(L(a, -u), L(a, u)))(a)

    for a in (1, 2, 3, 4):
        sgn = -1.0 if a in (1, 2) else 1.0
        ids[f"shift_one_ell{a}"] = (
            lambda a, sgn: lambda u, v, e: _rel(L(a, u + 1), sgn * L(a, u)))(a, sgn)
        sgn_t = -1.0 if a in (1, 4) else 1.0
        ids[f"shift_tau_ell{a}"] = (
            lambda a, sgn_t: lambda u, v, e: _rel(
                L(a, u + tau), sgn_t * cmath.exp(-ipi * (2 * u + tau)) * L(a, u)))(a, sgn_t)
        ids[f"shift_minus_tau_ell{a}"] = (
            lambda a, sgn_t: lambda u, v, e: _rel(
                L(a, u), sgn_t * cmath.exp(-ipi * (2 * (u - tau) + tau)) * L(a, u - tau)))(a, sgn_t)

    ids["landen_bell1"] = lambda u, v, e: _rel(
        B(1, 2 * u) / B(4, 0), L(1, u) * L(2, u) / (L(3, 0) * L(4, 0)))
    ids["landen_bell4"] = lambda u, v, e: _rel(
        B(4, 2 * u) / B(4, 0), L(3, u) * L(4, u) / (L(3, 0) * L(4, 0)))
    ids["landen_ell1"] = lambda u, v, e: _rel(
        L(1, u) / L(2, 0), B(1, u) * B(4, u) / (B(2, 0) * B(3, 0)))

    def prod11(u, v, e):
        a, b = B(1, u) ** 2 * B(4, v) ** 2, B(1, v) ** 2 * B(4, u) ** 2
        return _rel(B(1, u + v) * B(1, u - v) * B(4, 0) ** 2, a - b, a, b)

    def prod44(u, v, e):
        a, b = B(4, u) ** 2 * B(4, v) ** 2, B(1, v) ** 2 * B(1, u) ** 2
        return _rel(B(4, u + v) * B(4, u - v) * B(4, 0) ** 2, a - b, a, b)

    def half11(u, v, e):
        a, b = L(4, u) * L(3, v), L(4, v) * L(3, u)
        return _rel(2 * B(1, u + v) * B(1, u - v), a - b, a, b)

    def half44(u, v, e):
        a, b = L(4, u) * L(3, v), L(4, v) * L(3, u)
        return _rel(2 * B(4, u + v) * B(4, u - v), a + b, a, b)

    def half14(u, v, e):
        a, b = L(1, u) * L(2, v), L(1, v) * L(2, u)
        return _rel(2 * B(4, u + v) * B(1, u - v), a - b, a, b)

    ids.update(product_bell11=prod11, product_bell44=prod44, product_half11=half11,
               product_half44=half44, product_half14=half14)

    ids["zeta_odd"] = lambda u, v, e: _rel(z(u), -z(-u))
    ids["zeta_shift_one"] = lambda u, v, e: _rel(z(u + 1), z(u))
    ids["zeta_shift_tau"] = lambda u, v, e: _rel(z(u + tau), z(u) - 2 * ipi, z(u), 2 * math.pi)
    ids["zeta_tilde_odd"] = lambda u, v, e: _rel(zt(u), -zt(-u))
    ids["zeta_tilde_shift_one"] = lambda u, v, e: _rel(zt(u + 1), zt(u))
    ids["zeta_tilde_shift_2tau"] = lambda u, v, e: _rel(
        zt(u + 2 * tau), zt(u) - 2 * ipi, zt(u), 2 * math.pi)

    def dup(u, v, e):
        a, b = z(u), z(u + 0.5)
        return _rel(2 * zt(2 * u), a + b, a, b)

    def split(u, v, e):
        a, b = zt(u), zt(u + tau)
        return _rel(z(u), ipi + a + b, a, b, math.pi)

    def quarter(u, v, e):
        terms = [z(u / 2), z((u + 1) / 2), z((u + tau) / 2), z((u + tau + 1) / 2)]
        return _rel(2 * z(u), 2 * ipi + sum(terms), *terms, 2 * math.pi)

    def sigma1(u, v, e):
        terms = [z(u / 2), z((u + 1) / 2), z(u)]
        pref = L(2, 0) / l1p0
        return _rel(L(2, u) / L(1, u), pref * (terms[0] + terms[1] - terms[2]),
                    *[pref * t for t in terms])

    def sigma5(u, v, e):
        x1, x2 = u, v
        lhs = (B(4, e) * B(1, x1 + x2) * B(1, x1 + e) * B(1, x2 + e)) / (
            B(4, 0) * B(1, x1) * B(1, x2) * B(1, x1 + x2 + e))
        pref = L(1, e) / l1p0
        terms = [zt(x1), zt(x2), zt(e), -zt(x1 + x2 + e)]
        return _rel(lhs, pref * sum(terms), *[pref * t for t in terms])

    ids.update(zeta_tilde_duplication=dup, zeta_split=split, zeta_quarter_periods=quarter,
               zeta_sigma_ratio=sigma1, zeta_sigma_triple=sigma5)
    return ids


def identity_suite(ctx: EllipticContext, sample_count: int = 100, rng_seed: int = 0,
                   tolerance: float = 1e-11) -> IdentityReport:
    """Evaluate the theta/zeta identity catalogue on seeded random points.

    Points are drawn from ``Re u in [-1, 1]``, ``|Im u| <= 0.45 Im(tau)``.
    Samples where a zeta ratio lands within ``pole_eps`` of a pole are
    counted in ``exclusions`` rather than reported as failures.
    """
    rng = np.random.default_rng(rng_seed)
    h = 0.45 * ctx.tau.imag

    def draw(n):
        return rng.uniform(-1, 1, n) + 1j * rng.uniform(-h, h, n)

    us, vs, es = draw(sample_count), draw(sample_count), draw(sample_count)
    report = IdentityReport(tau=ctx.tau, sample_count=sample_count, seed=rng_seed,
                            tolerance=tolerance)
    for name, fn in _identities(ctx).items():
        worst, skipped = 0.0, 0
        for u, v, e in zip(us, vs, es):
            try:
                r = fn(complex(u), complex(v), complex(e))
            except NearPole:
                skipped += 1
                continue
            worst = max(worst, r)
        report.residuals[name] = worst
        if skipped:
            report.exclusions[name] = skipped
    return report
