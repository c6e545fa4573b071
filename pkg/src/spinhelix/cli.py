"""Command-line front end.

Every subcommand resolves a :class:`RunConfig` from an optional JSON file
plus flags, runs, and writes one JSON document (or a CSV for textures and
spectra).  Exit status: 0 all checks passed, 1 invalid input, 2 a check
failed (output is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np
import scipy.linalg

from . import __version__
from .elliptic import EllipticContext, identity_suite
from .errors import SpinHelixError
from .helix import (
    build_shs,
    canonical_eta,
    open_chain_energy,
    open_chain_shs,
    shs_energy,
    texture,
    tower_entropy,
    tower_state,
)
from .lattice import build_lattice
from .model import VARIANTS, ModelSpec, couplings_xxz, dense_hamiltonian
from .spin import build_spin_rep
from .verify import (
    check_divergence,
    check_eigenstate,
    check_entropy,
    degeneracy_scan,
    encode_complex,
)

__all__ = ["COMMANDS", "Eta", "RunConfig", "ConfigError", "resolve_config", "run", "main",
           "emit_texture_csv", "OUTPUT_DIR_ENV"]

COMMANDS = ("couplings", "identities", "verify-shs", "texture", "spectrum", "entropy",
            "divergence", "towers")
_HELP = {
    "couplings": "print Jx, Jy, Jz for the model",
    "identities": "run the theta-function identity catalogue",
    "verify-shs": "check the helix state is an eigenstate",
    "texture": "local spin expectations per site",
    "spectrum": "dense eigenvalues and the cluster at the target energy",
    "entropy": "tower-state entanglement entropy against the Schmidt value",
    "divergence": "two-site reduction at random arguments",
    "towers": "rank of tower/helix states inside the degenerate cluster",
}
OUTPUT_DIR_ENV = "SPINHELIX_OUTPUT_DIR"

DEFAULT_TOLERANCES = {
    "eigenstate": 1e-10,
    "identity": 1e-11,
    "divergence": 1e-10,
    "entropy": 1e-12,
    "negative_control": 1e-5,
}
NEGATIVE_SHIFT = 1e-3


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field."""

    def __init__(self, fieldname: str, message: str):
        super().__init__(f"{fieldname}: {message}")
        self.field = fieldname


# ---------------------------------------------------------------------------
# exact anisotropy values
# ---------------------------------------------------------------------------

_TERM = re.compile(r"[+-]?[^+-]+")


@dataclass(frozen=True)
class Eta:
    """An anisotropy value: exactly ``a + b tau`` with rational ``a, b``, or a float complex."""

    rational: Fraction | None = None
    tau_coeff: Fraction | None = None
    numeric: complex | None = None

    @property
    def exact(self) -> bool:
        return self.rational is not None

    def value(self, tau: complex) -> complex:
        if self.exact:
            return float(self.rational) + float(self.tau_coeff) * complex(tau)
        return self.numeric

    def to_json(self):
        if not self.exact:
            return encode_complex(self.numeric)
        parts = []
        if self.rational or not self.tau_coeff:
            parts.append(str(self.rational))
        if self.tau_coeff:
            c = self.tau_coeff
            sign = "-" if c < 0 and parts else ("" if not parts else "+")
            mag = abs(c) if parts else c
            parts.append(f"{sign}{mag}*tau")
        return "".join(parts)

    def lattice_point(self, L: int, has_tau: bool = True):
        """Integers ``(p, q)`` with ``L eta = 2 p tau + 2 q`` exactly, or ``None``."""
        if not self.exact:
            return None
        p, q = L * self.tau_coeff / 2, L * self.rational / 2
        if not has_tau and p != 0:
            return False
        if p.denominator == 1 and q.denominator == 1:
            return int(p), int(q)
        return False

    @classmethod
    def parse(cls, raw, fieldname: str = "model.eta") -> "Eta":
        if isinstance(raw, Eta):
            return raw
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return cls(numeric=complex(raw))
        if isinstance(raw, (list, tuple)):
            return cls(numeric=_complex(raw, fieldname))
        if not isinstance(raw, str):
            raise ConfigError(fieldname, f"cannot read {raw!r} as an anisotropy")
        text = raw.replace(" ", "")
        if "," in text:
            return cls(numeric=_complex(text, fieldname))
        a = b = Fraction(0)
        try:
            terms = _TERM.findall(text)
            if not terms or "".join(terms) != text:
                raise ValueError
            for term in terms:
                if "tau" in term:
                    coef = term.replace("tau", "").replace("*", "")
                    if coef in ("", "+", "-"):
                        coef += "1"
                    elif coef.lstrip("+-").startswith("/"):
                        sign = "-" if coef.startswith("-") else ""
                        coef = sign + "1" + coef.lstrip("+-")
                    b += Fraction(coef)
                else:
                    a += Fraction(term)
        except (ValueError, ZeroDivisionError):
            try:
                return cls(numeric=complex(text.replace("i", "j")))
            except ValueError:
                raise ConfigError(fieldname, f"cannot read {raw!r} as an anisotropy") from None
        return cls(rational=a, tau_coeff=b)


def _complex(raw, fieldname: str) -> complex:
    try:
        if isinstance(raw, str):
            if "," in raw:
                re_, im_ = raw.split(",")
                return complex(float(re_), float(im_))
            return complex(raw.replace(" ", "").replace("i", "j"))
        if isinstance(raw, (list, tuple)):
            if len(raw) != 2:
                raise ValueError
            return complex(float(raw[0]), float(raw[1]))
        if isinstance(raw, bool):
            raise ValueError
        return complex(raw)
    except (TypeError, ValueError):
        raise ConfigError(fieldname, f"expected a complex number as [re, im], got {raw!r}") from None


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    variant: str = "xyz"
    twice_s: int = 1
    dims: tuple[int, ...] = (11,)
    boundary: str = "periodic"
    eta: tuple[Eta, ...] = (Eta(Fraction(2, 11), Fraction(0)),)
    tau: complex = 0.8j
    long_range_weights: tuple[tuple[int, float], ...] = ()
    u0: complex = 0.25
    u: complex = 0.28
    epsilon: tuple[int, ...] = (1,)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    output_path: str | None = None
    output_format: str = "json"
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        per_axis = self.variant == "direction_dependent"
        return {
            "command": self.command,
            "model": {
                "variant": self.variant,
                "twice_s": self.twice_s,
                "dims": list(self.dims),
                "boundary": self.boundary,
                "eta": [e.to_json() for e in self.eta] if per_axis else self.eta[0].to_json(),
                "tau": encode_complex(self.tau),
                "long_range_weights": [[k, f] for k, f in self.long_range_weights],
                "u0": encode_complex(self.u0),
            },
            "state": {"u": encode_complex(self.u), "epsilon": list(self.epsilon)},
            "tolerances": dict(sorted(self.tolerances.items())),
            "seed": self.seed,
            "output": {"path": self.output_path, "format": self.output_format},
            "options": dict(sorted(self.options.items())),
        }

    def eta_values(self) -> tuple[complex, ...]:
        return tuple(e.value(self.tau) for e in self.eta)

    def context(self) -> EllipticContext:
        return EllipticContext(self.tau)

    def model_spec(self) -> ModelSpec:
        ctx = None if self.variant == "xxz" else self.context()
        etas = self.eta_values()
        eta = etas if self.variant == "direction_dependent" else etas[0]
        return ModelSpec(self.variant, build_spin_rep(self.twice_s), build_lattice(self.dims, self.boundary),
                         eta, ctx, self.long_range_weights, self.u0)


_OPTION_TYPES = {"samples": int, "n": int, "va": int, "sign": int, "target": "complex"}


def resolve_config(raw: dict) -> RunConfig:
    """Validate a config dictionary and fill in every default."""
    if not isinstance(raw, dict):
        raise ConfigError("config", "expected a JSON object")
    command = raw.get("command")
    if command not in COMMANDS:
        raise ConfigError("command", f"expected one of {COMMANDS}, got {command!r}")
    model = dict(raw.get("model") or {})
    state = dict(raw.get("state") or {})
    cfg = RunConfig(command)

    variant = model.get("variant", cfg.variant)
    if variant not in VARIANTS:
        raise ConfigError("model.variant", f"expected one of {VARIANTS}, got {variant!r}")
    cfg.variant = variant

    twice_s = model.get("twice_s", cfg.twice_s)
    if isinstance(twice_s, bool) or not isinstance(twice_s, int) or twice_s < 1:
        raise ConfigError("model.twice_s", f"expected a positive integer, got {twice_s!r}")
    cfg.twice_s = twice_s

    dims = model.get("dims", list(cfg.dims))
    if isinstance(dims, int):
        dims = [dims]
    if (not isinstance(dims, (list, tuple)) or not dims
            or not all(isinstance(L, int) and not isinstance(L, bool) and L >= 1 for L in dims)):
        raise ConfigError("model.dims", f"expected a list of positive integers, got {dims!r}")
    cfg.dims = tuple(dims)

    default_boundary = "open" if variant == "open_chain_1d" else "periodic"
    boundary = model.get("boundary", default_boundary)
    if boundary not in ("periodic", "open"):
        raise ConfigError("model.boundary", f"expected 'periodic' or 'open', got {boundary!r}")
    cfg.boundary = boundary

    cfg.tau = _complex(model.get("tau", encode_complex(cfg.tau)), "model.tau")
    if cfg.tau.imag <= 0:
        raise ConfigError("model.tau", f"Im tau must be positive, got {cfg.tau}")

    raw_eta = model.get("eta", cfg.eta[0].to_json())
    if variant == "direction_dependent":
        if not isinstance(raw_eta, (list, tuple)) or len(raw_eta) != len(cfg.dims):
            raise ConfigError("model.eta", f"direction_dependent needs one eta per axis ({len(cfg.dims)})")
        cfg.eta = tuple(Eta.parse(e, f"model.eta[{i}]") for i, e in enumerate(raw_eta))
    else:
        cfg.eta = (Eta.parse(raw_eta),)

    weights = model.get("long_range_weights", [])
    try:
        cfg.long_range_weights = tuple((int(k), float(f)) for k, f in weights)
    except (TypeError, ValueError):
        raise ConfigError("model.long_range_weights", f"expected [[k, F_k], ...], got {weights!r}") from None
    if variant == "long_range" and not cfg.long_range_weights:
        raise ConfigError("model.long_range_weights", "long_range needs at least one [k, F_k] pair")
    cfg.u0 = _complex(model.get("u0", encode_complex(cfg.u0)), "model.u0")

    cfg.u = _complex(state.get("u", encode_complex(cfg.u)), "state.u")
    eps = state.get("epsilon", [1] * len(cfg.dims))
    if (not isinstance(eps, (list, tuple)) or len(eps) != len(cfg.dims)
            or any(e not in (1, -1) or isinstance(e, bool) for e in eps)):
        raise ConfigError("state.epsilon", f"expected {len(cfg.dims)} entries of +1/-1, got {eps!r}")
    cfg.epsilon = tuple(int(e) for e in eps)

    tol = dict(DEFAULT_TOLERANCES)
    for k, v in (raw.get("tolerances") or {}).items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"tolerances.{k}", f"unknown tolerance; expected one of {sorted(DEFAULT_TOLERANCES)}")
        try:
            tol[k] = float(v)
        except (TypeError, ValueError):
            raise ConfigError(f"tolerances.{k}", f"expected a number, got {v!r}") from None
        if not tol[k] > 0:
            raise ConfigError(f"tolerances.{k}", "must be positive")
    cfg.tolerances = tol

    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed", f"expected an integer, got {seed!r}")
    cfg.seed = seed

    out = raw.get("output") or {}
    cfg.output_path = out.get("path")
    default_fmt = "csv" if command in ("texture", "spectrum") else "json"
    cfg.output_format = out.get("format") or default_fmt
    if cfg.output_format not in ("json", "csv"):
        raise ConfigError("output.format", f"expected 'json' or 'csv', got {cfg.output_format!r}")
    if cfg.output_format == "csv" and command not in ("texture", "spectrum"):
        raise ConfigError("output.format", f"csv output is available for texture and spectrum, not {command}")

    opts = {}
    for k, v in (raw.get("options") or {}).items():
        kind = _OPTION_TYPES.get(k)
        if kind is None:
            raise ConfigError(f"options.{k}", f"unknown option; expected one of {sorted(_OPTION_TYPES)}")
        if v is None:
            continue
        if kind == "complex":
            opts[k] = encode_complex(_complex(v, f"options.{k}"))
        else:
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"options.{k}", f"expected an integer, got {v!r}")
            opts[k] = v
    if "sign" in opts and opts["sign"] not in (1, -1):
        raise ConfigError("options.sign", "expected +1 or -1")
    if "samples" in opts and opts["samples"] < 1:
        raise ConfigError("options.samples", "must be at least 1")
    cfg.options = opts

    try:
        cfg.model_spec()
    except SpinHelixError as exc:
        raise ConfigError("model", str(exc)) from None
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from None
    return cfg


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _exact_witness(cfg: RunConfig) -> dict | None:
    """Exact lattice point for rational eta input (``None`` when not applicable)."""
    if cfg.variant in ("xy_a", "xy_b", "open_chain_1d"):
        return None
    etas = cfg.eta if cfg.variant == "direction_dependent" else cfg.eta * len(cfg.dims)
    if not all(e.exact for e in etas):
        return None
    ps, qs = [], []
    for axis, (e, L) in enumerate(zip(etas, cfg.dims)):
        pt = e.lattice_point(L, has_tau=cfg.variant != "xxz")
        if pt is False:
            raise ConfigError("model.eta", f"L*eta = {L}*({e.to_json()}) along axis {axis} "
                                           "is not of the form 2p*tau + 2q with integers p, q")
        ps.append(pt[0])
        qs.append(pt[1])
    return {"p": ps, "q": qs}


def _cmd_couplings(cfg: RunConfig):
    spec = cfg.model_spec()
    etas = cfg.eta_values()
    out = {}
    axes = range(len(cfg.dims)) if cfg.variant == "direction_dependent" else [0]
    rows = []
    for a in axes:
        c = couplings_xxz(etas[0]) if cfg.variant == "xxz" else spec.couplings(a)
        raw_eta = spec.eta_for(a)
        rows.append({"jx": encode_complex(c.jx), "jy": encode_complex(c.jy), "jz": encode_complex(c.jz),
                     "eta": encode_complex(raw_eta),
                     "eta_canonical": encode_complex(canonical_eta(raw_eta, cfg.tau))})
    out = rows[0] if len(rows) == 1 else {"axes": rows}
    return out, True


def _cmd_identities(cfg: RunConfig):
    samples = cfg.options.get("samples", 100)
    rep = identity_suite(cfg.context(), samples, cfg.seed, cfg.tolerances["identity"])
    return rep.to_dict(), rep.passed


def _shs_state(cfg: RunConfig, spec: ModelSpec):
    if cfg.variant == "open_chain_1d":
        return open_chain_shs(spec), open_chain_energy(spec)
    state = build_shs(cfg.u, cfg.epsilon, spec)
    return state, shs_energy(spec)


def _cmd_verify_shs(cfg: RunConfig):
    spec = cfg.model_spec()
    witness = _exact_witness(cfg)
    state, energy = _shs_state(cfg, spec)
    tol = cfg.tolerances["eigenstate"]
    reports = [check_eigenstate(spec, state, energy, tol, name="shs")]
    if cfg.variant in ("xyz", "xxz", "long_range", "direction_dependent"):
        etas = cfg.eta_values()
        shifted = tuple(e + NEGATIVE_SHIFT for e in etas)
        bad = ModelSpec(spec.variant, spec.spin, spec.lattice,
                        shifted if cfg.variant == "direction_dependent" else shifted[0],
                        spec.ctx, spec.long_range_weights, spec.u0)
        bad_state = build_shs(cfg.u, cfg.epsilon, bad, check=False)
        ctrl = check_eigenstate(bad, bad_state, None, tol, name="negative_control")
        ctrl.passed = ctrl.residual > cfg.tolerances["negative_control"]
        ctrl.tolerance = cfg.tolerances["negative_control"]
        reports.append(ctrl)
    out = {"reports": [r.to_dict() for r in reports], "exact_witness": witness}
    return out, all(r.passed for r in reports)


def _cmd_texture(cfg: RunConfig):
    spec = cfg.model_spec()
    state, _ = _shs_state(cfg, spec)
    tex = texture(state, spec.spin)
    return {"coords": spec.lattice.site_coords.tolist(), "texture": tex.tolist()}, True


def _cmd_spectrum(cfg: RunConfig):
    spec = cfg.model_spec()
    H = dense_hamiltonian(spec)
    if np.allclose(H, H.conj().T, rtol=0, atol=1e-13 * max(1.0, np.abs(H).max())):
        evals = scipy.linalg.eigh(H, eigvals_only=True).astype(complex)
    else:
        evals = scipy.linalg.eigvals(H)
    evals = sorted((complex(e) for e in evals), key=lambda z: (round(z.real, 10), round(z.imag, 10)))
    out = {"eigenvalues": [encode_complex(e) for e in evals]}
    target = cfg.options.get("target")
    if target is None and cfg.variant != "open_chain_1d":
        try:
            target = encode_complex(shs_energy(spec))
        except SpinHelixError:
            target = None
    if target is not None:
        rep = degeneracy_scan(spec, _complex(target, "options.target"), [])
        out["target_energy"] = encode_complex(rep.target_energy)
        out["cluster_size"] = rep.cluster_size
    return out, True


def _cmd_entropy(cfg: RunConfig):
    if cfg.variant != "xxz":
        raise ConfigError("model.variant", "entropy checks use the xxz tower states")
    spec = cfg.model_spec()
    V = spec.lattice.volume
    ns = [cfg.options["n"]] if "n" in cfg.options else list(range(cfg.twice_s * V + 1))
    vas = [cfg.options["va"]] if "va" in cfg.options else list(range(1, V))
    for n in ns:
        if not 0 <= n <= cfg.twice_s * V:
            raise ConfigError("options.n", f"must lie in 0..{cfg.twice_s * V}")
    for va in vas:
        if not 1 <= va < V:
            raise ConfigError("options.va", f"must lie in 1..{V - 1}")
    reports = [check_entropy(spec, n, va, cfg.tolerances["entropy"]) for n in ns for va in vas]
    return {"reports": [r.to_dict() for r in reports]}, all(r.passed for r in reports)


def _cmd_divergence(cfg: RunConfig):
    spin = build_spin_rep(cfg.twice_s)
    ctx = cfg.context()
    eta = cfg.eta_values()[0]
    signs = [cfg.options["sign"]] if "sign" in cfg.options else [1, -1]
    samples = cfg.options.get("samples")
    if samples is None:
        points = [cfg.u]
    else:
        rng = np.random.default_rng(cfg.seed)
        h = 0.4 * cfg.tau.imag
        points = [complex(rng.uniform(-1, 1), rng.uniform(-h, h)) for _ in range(samples)]
    reports = [check_divergence(spin, eta, cfg.tau, u, sg, cfg.tolerances["divergence"], ctx)
               for u in points for sg in signs]
    return {"reports": [r.to_dict() for r in reports]}, all(r.passed for r in reports)


def _cmd_towers(cfg: RunConfig):
    if cfg.variant != "xxz":
        raise ConfigError("model.variant", "tower states exist for the xxz variant")
    spec = cfg.model_spec()
    witness = _exact_witness(cfg)
    d, V, ts = spec.lattice.d, spec.lattice.volume, cfg.twice_s
    signs = [tuple(1 if (m >> a) & 1 == 0 else -1 for a in range(d)) for m in range(2 ** d)]
    states = [tower_state(n, e, spec) for n in range(ts * V + 1) for e in signs]
    eta = cfg.eta_values()[0]
    # integer eta: both chiralities give the same towers (isotropic multiplet)
    xxx = eta.imag == 0 and eta.real == round(eta.real)
    predicted = ts * V + 1 if xxx else 2 ** d * (ts * V - 1) + 2
    rep = degeneracy_scan(spec, shs_energy(spec), states, predicted)
    ok = rep.span_dimension == predicted and rep.cluster_size >= rep.span_dimension and rep.states_in_cluster
    out = rep.to_dict()
    out["exact_witness"] = witness
    out["entropies"] = {str(n): tower_entropy(n, V // 2, ts, V) for n in range(ts * V + 1)} if V > 1 else {}
    return out, ok


_DISPATCH = {
    "couplings": _cmd_couplings,
    "identities": _cmd_identities,
    "verify-shs": _cmd_verify_shs,
    "texture": _cmd_texture,
    "spectrum": _cmd_spectrum,
    "entropy": _cmd_entropy,
    "divergence": _cmd_divergence,
    "towers": _cmd_towers,
}


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute a resolved config.  Returns ``(exit_code, document)``."""
    try:
        result, ok = _DISPATCH[cfg.command](cfg)
    except ConfigError:
        raise
    except SpinHelixError as exc:
        raise ConfigError("model", str(exc)) from None
    doc = {
        "config": cfg.to_dict(),
        "result": result,
        "passed": bool(ok),
        "metadata": {"timestamp": datetime.now(timezone.utc).isoformat(), "version": __version__},
    }
    return (0 if ok else 2), doc


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    s = f"{float(x):.12g}"
    return "0" if s == "-0" else s


def texture_csv_text(coords, tex) -> str:
    coords = np.asarray(coords)
    d = coords.shape[1] if coords.ndim == 2 else 1
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["site", *[f"n{a}" for a in range(d)], "sx", "sy", "sz"])
    for j, (c, t) in enumerate(zip(coords, tex)):
        w.writerow([j, *[int(x) for x in np.atleast_1d(c)], *[_fmt(v) for v in t]])
    return buf.getvalue()


def emit_texture_csv(state, spin, path, coords=None) -> Path:
    """Write per-site ``<Sx>, <Sy>, <Sz>`` of a product state to ``path`` as CSV."""
    tex = texture(state, spin)
    if coords is None:
        coords = np.arange(len(state.locals)).reshape(-1, 1)
    return _atomic_write(path, texture_csv_text(coords, tex))


def _spectrum_csv_text(evals) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "re", "im"])
    for i, (re_, im_) in enumerate(evals):
        w.writerow([i, _fmt(re_), _fmt(im_)])
    return buf.getvalue()


def _atomic_write(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def render(cfg: RunConfig, doc: dict) -> str:
    if cfg.output_format == "csv":
        res = doc["result"]
        if cfg.command == "texture":
            return texture_csv_text(res["coords"], res["texture"])
        return _spectrum_csv_text(res["eigenvalues"])
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def output_target(cfg: RunConfig) -> Path | None:
    if cfg.output_path:
        return Path(cfg.output_path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base:
        return Path(base) / f"{cfg.command}.{cfg.output_format}"
    return None


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _parse_dims(text: str):
    return [int(x) for x in re.split(r"[x,]", text) if x]


def _parse_weights(text: str):
    out = []
    for part in text.split(","):
        k, f = part.split(":")
        out.append([int(k), float(f)])
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--config", help="JSON config file; flags override its fields")
    g.add_argument("--variant", choices=VARIANTS)
    g.add_argument("--twice-s", type=int, help="2s (1 for spin-1/2)")
    g.add_argument("--dims", help="lattice lengths, e.g. 11 or 4x4")
    g.add_argument("--boundary", choices=("periodic", "open"))
    g.add_argument("--eta", help="e.g. 2/11, 1/3*tau, 1/2-tau or re,im; per axis separated by ';'")
    g.add_argument("--tau", help="re,im")
    g.add_argument("--long-range", help="k:F_k pairs, e.g. 1:1,2:0.5")
    g.add_argument("--u0", help="open-chain offset re,im")
    s = common.add_argument_group("state")
    s.add_argument("--u", help="re,im")
    s.add_argument("--epsilon", help="chirality per axis, e.g. --epsilon=1,-1")
    o = common.add_argument_group("run")
    o.add_argument("--seed", type=int)
    o.add_argument("--samples", type=int)
    o.add_argument("--n", type=int, help="magnon number")
    o.add_argument("--va", type=int, help="subsystem volume")
    o.add_argument("--sign", type=int, choices=(1, -1))
    o.add_argument("--target", help="target energy re,im")
    o.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
    o.add_argument("--output", "-o", help="output file (default: stdout or $%s)" % OUTPUT_DIR_ENV)
    o.add_argument("--format", choices=("json", "csv"))

    parser = argparse.ArgumentParser(prog="spinhelix", description="Spin-helix eigenstate construction and checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=_HELP[name])
    sub.add_parser("run", parents=[common], help="run the command named in --config")
    return parser


def _args_to_raw(args) -> dict:
    raw: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON in {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config", "expected a JSON object")
    if args.command != "run":
        raw["command"] = args.command
    model = dict(raw.get("model") or {})
    state = dict(raw.get("state") or {})
    try:
        if args.variant:
            model["variant"] = args.variant
        if args.twice_s is not None:
            model["twice_s"] = args.twice_s
        if args.dims:
            model["dims"] = _parse_dims(args.dims)
        if args.boundary:
            model["boundary"] = args.boundary
        if args.eta:
            parts = args.eta.split(";")
            model["eta"] = parts if len(parts) > 1 or model.get("variant") == "direction_dependent" else parts[0]
        if args.tau:
            model["tau"] = args.tau
        if args.long_range:
            model["long_range_weights"] = _parse_weights(args.long_range)
        if args.u0:
            model["u0"] = args.u0
        if args.u:
            state["u"] = args.u
        if args.epsilon:
            state["epsilon"] = [int(e) for e in args.epsilon.split(",")]
    except ValueError as exc:
        raise ConfigError("arguments", str(exc)) from None
    raw["model"], raw["state"] = model, state
    opts = dict(raw.get("options") or {})
    for k in ("samples", "n", "va", "sign", "target"):
        v = getattr(args, k)
        if v is not None:
            opts[k] = v
    raw["options"] = opts
    if args.seed is not None:
        raw["seed"] = args.seed
    tol = dict(raw.get("tolerances") or {})
    for item in args.tol:
        if "=" not in item:
            raise ConfigError("tolerances", f"expected NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        tol[k] = v
    raw["tolerances"] = tol
    out = dict(raw.get("output") or {})
    if args.output:
        out["path"] = args.output
    if args.format:
        out["format"] = args.format
    raw["output"] = out
    return raw


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(_args_to_raw(args))
        code, doc = run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = render(cfg, doc)
    target = output_target(cfg)
    try:
        if target is None:
            sys.stdout.write(text)
        else:
            _atomic_write(target, text)
            if cfg.output_format == "csv":
                # the resolved config still goes somewhere: next to the CSV
                meta = {k: doc[k] for k in ("config", "passed", "metadata")}
                _atomic_write(target.with_suffix(target.suffix + ".json"),
                              json.dumps(meta, indent=2, sort_keys=True) + "\n")
            print(f"wrote {target}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if code:
        print("error: one or more checks failed", file=sys.stderr)
    return code
