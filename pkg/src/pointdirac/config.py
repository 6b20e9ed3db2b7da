"""Run configuration: a plain ``key = value`` text format.

Lines starting with ``#`` are comments.  Lists are comma separated.  Spinors
are four Python complex literals (``0.5``, ``1+2j``).  Potential terms are
``component:power:coefficient`` triples with components numbered 1..4.

Keys (defaults in brackets)

  mass [1.0]                  Dirac mass m > 0
  profile [gaussian]          Fourier profile family (only ``gaussian``)
  amplitude [1.0], sigma [1.0]
  spinor [1, 0, 0, 0]         constant spinor c
  zeta0 [0.5, 0, 0, 0]        point charge
  potential                   U terms, e.g. ``1:1:1, 1:2:1, 2:1:1``
  a [0.0], b [1.0]            coercivity constants, U >= b|zeta|^2 - a
  blend_width                 cutoff bridge width (default: the threshold)
  h [1e-3], t_end [5.0]       time step and horizon
  window [1.0]                continuation window for the bound checks
  corrector_tol [1e-12], max_corrector [3]
  picard_window [0.02]        Picard cross-check window (0 disables)
  energy_stride [0.1]         spacing of energy samples
  residual_stride [1.0]       spacing of boundary-residual samples
  r_max [400.0]               radial truncation of the field quadrature
  energy_tol [1e-3], bound_tol [1e-6], residual_tol [1e-3]
  limit_tol [1e-4], mu_tol [1e-5], grad_tol [0.02], picard_tol [1e-6]
  verify []                   subset of mu, phi, dp, grad, residual
  verify_times [1.0]
  rho [0.01, ...], eps [0.2, ...]   limit grids
  fixture_tol [1e-10]         relative tolerance of ``--check``
  out_dir [out]
  deterministic [true]        no algorithm uses random numbers
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .dirac_algebra import as_spinor
from .free_field import GaussianProfile, RadialInitialData
from .kernels import KernelSet
from .nonlinearity import PotentialSpec, build_cutoff, lambda_threshold
from .zeta_solver import DelayRHSContext

__all__ = ["ConfigError", "RunConfig", "Scenario", "load_config", "parse_config", "dump_config"]

VERIFY_KINDS = ("mu", "phi", "dp", "grad", "residual")

# a zero-energy state has threshold 0; the cutoff needs a positive radius
_MIN_THRESHOLD = 1e-6


class ConfigError(ValueError):
    pass


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _spinor(text):
    vals = [complex(x.strip().replace(" ", "")) for x in text.split(",") if x.strip()]
    if len(vals) != 4:
        raise ConfigError(f"spinor needs 4 entries, got {len(vals)}")
    return tuple(vals)


def _terms(text):
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise ConfigError(f"potential term {item!r} is not component:power:coefficient")
        out.append((int(parts[0]), int(parts[1]), float(parts[2])))
    return tuple(out)


def _words(text):
    return tuple(w.strip() for w in text.split(",") if w.strip())


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _opt_float(text):
    t = text.strip().lower()
    return None if t in ("", "none", "auto") else float(t)


def _fmt_complex(z):
    z = complex(z)
    if z.imag == 0.0:
        return repr(z.real)
    return repr(z).strip("()")


_PARSERS = {
    float: float, int: int, str: str.strip, bool: _bool,
    "floats": _floats, "spinor": _spinor, "terms": _terms, "words": _words, "opt": _opt_float,
}


@dataclass(frozen=True)
class RunConfig:
    mass: float = 1.0
    profile: str = "gaussian"
    amplitude: float = 1.0
    sigma: float = 1.0
    spinor: tuple = field(default=(1, 0, 0, 0), metadata={"kind": "spinor"})
    zeta0: tuple = field(default=(0.5, 0, 0, 0), metadata={"kind": "spinor"})
    potential: tuple = field(default=((1, 1, 1.0), (1, 2, 1.0), (2, 1, 1.0), (3, 1, 1.0), (4, 1, 1.0)),
                             metadata={"kind": "terms"})
    a: float = 0.0
    b: float = 1.0
    blend_width: float | None = field(default=None, metadata={"kind": "opt"})
    h: float = 1e-3
    t_end: float = 5.0
    window: float = 1.0
    corrector_tol: float = 1e-12
    max_corrector: int = 3
    picard_window: float = 0.02
    energy_stride: float = 0.1
    residual_stride: float = 1.0
    r_max: float = 400.0
    energy_tol: float = 1e-3
    bound_tol: float = 1e-6
    residual_tol: float = 1e-3
    limit_tol: float = 1e-4
    mu_tol: float = 1e-5
    grad_tol: float = 0.02
    picard_tol: float = 1e-6
    verify: tuple = field(default=(), metadata={"kind": "words"})
    verify_times: tuple = field(default=(1.0,), metadata={"kind": "floats"})
    rho: tuple = field(default=(1e-2, 5e-3, 2.5e-3, 1.25e-3), metadata={"kind": "floats"})
    eps: tuple = field(default=(0.2, 0.1, 0.05, 0.025), metadata={"kind": "floats"})
    fixture_tol: float = 1e-10
    out_dir: str = "out"
    deterministic: bool = True

    def __post_init__(self):
        object.__setattr__(self, "spinor", tuple(complex(v) for v in self.spinor))
        object.__setattr__(self, "zeta0", tuple(complex(v) for v in self.zeta0))
        object.__setattr__(self, "potential", tuple((int(j), int(k), float(c)) for j, k, c in self.potential))
        for name in ("verify_times", "rho", "eps"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, "verify", tuple(self.verify))
        self.validate()

    def validate(self):
        if self.profile != "gaussian":
            raise ConfigError(f"unknown profile family {self.profile!r}")
        if not self.mass > 0:
            raise ConfigError("mass must be positive")
        if not self.sigma > 0:
            raise ConfigError("sigma must be positive")
        if not (self.t_end > 0 and self.h > 0):
            raise ConfigError("t_end and h must be positive")
        if abs(round(self.t_end / self.h) * self.h - self.t_end) > 1e-9 * self.t_end:
            raise ConfigError("t_end must be a multiple of h")
        for name in ("corrector_tol", "energy_tol", "bound_tol", "residual_tol", "limit_tol",
                     "mu_tol", "grad_tol", "picard_tol", "fixture_tol", "window",
                     "energy_stride", "residual_stride", "r_max"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.max_corrector < 1:
            raise ConfigError("max_corrector must be at least 1")
        if self.picard_window < 0:
            raise ConfigError("picard_window must be non-negative")
        bad = [v for v in self.verify if v not in VERIFY_KINDS]
        if bad:
            raise ConfigError(f"unknown verification toggles {bad}; choose from {VERIFY_KINDS}")
        if self.verify and any(not (0 < t <= self.t_end) for t in self.verify_times):
            raise ConfigError("verify_times must lie in (0, t_end]")
        if len(self.rho) < 2 or len(self.eps) < 2 or min(self.rho) <= 0 or min(self.eps) <= 0:
            raise ConfigError("rho and eps need at least two positive entries")
        if not self.potential:
            raise ConfigError("potential needs at least one term")

    def replace(self, **changes) -> "RunConfig":
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update(changes)
        return RunConfig(**vals)


_TYPES = {"float": float, "int": int, "str": str, "bool": bool}


def parse_config(text: str) -> RunConfig:
    known = {f.name: f for f in fields(RunConfig)}
    vals = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        f = known[key]
        kind = f.metadata.get("kind") or _TYPES[str(f.type).split(" ")[0]]
        try:
            vals[key] = _PARSERS[kind](value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    try:
        return RunConfig(**vals)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        kind = f.metadata.get("kind")
        if kind == "spinor":
            s = ", ".join(_fmt_complex(z) for z in v)
        elif kind == "terms":
            s = ", ".join(f"{j}:{k}:{c!r}" for j, k, c in v)
        elif kind in ("floats",):
            s = ", ".join(repr(x) for x in v)
        elif kind == "words":
            s = ", ".join(v)
        elif kind == "opt":
            s = "none" if v is None else repr(v)
        elif isinstance(v, bool):
            s = "true" if v else "false"
        else:
            s = repr(v) if isinstance(v, float) else str(v)
        lines.append(f"{f.name} = {s}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Scenario:
    """Objects derived from a config: data, potential, cutoff and solver context."""

    config: RunConfig
    data: RadialInitialData
    spec: PotentialSpec
    H0: float
    threshold: float
    cutoff: object
    ctx: DelayRHSContext

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "Scenario":
        data = RadialInitialData(GaussianProfile(cfg.amplitude, cfg.sigma), as_spinor(cfg.spinor),
                                 as_spinor(cfg.zeta0), cfg.mass)
        spec = PotentialSpec.from_terms(cfg.potential, cfg.a, cfg.b)
        H0 = data.free_energy() + spec.U(data.zeta0)
        lam = lambda_threshold(H0, cfg.a, cfg.b)
        cut = build_cutoff(spec, max(lam, _MIN_THRESHOLD), cfg.blend_width)
        kernels = KernelSet(cfg.mass, t_max=max(cfg.t_end, 1.0))
        ctx = DelayRHSContext(data, cut, kernels)
        return cls(cfg, data, spec, float(H0), float(lam), cut, ctx)

    def sample_times(self, stride: float) -> np.ndarray:
        """Node times 0, stride, ... up to t_end (always including t_end)."""
        h, T = self.config.h, self.config.t_end
        step = max(1, int(round(stride / h)))
        n_end = int(round(T / h))
        idx = list(range(0, n_end + 1, step))
        if idx[-1] != n_end:
            idx.append(n_end)
        return h * np.array(idx, dtype=float)
