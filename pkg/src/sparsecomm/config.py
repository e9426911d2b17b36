"""Config-file parsing: flat INI-style key/value sections.

Two section kinds are understood: [model] describes one generative model
(used by `generate`), [sweep] describes a benchmark grid. Numeric defaults
recorded here flow into output-file headers for provenance.
"""

import configparser
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .graph import DcsbmConfig, ThetaSpec

__all__ = ["Policy", "SweepConfig", "load_model_config", "load_sweep_config"]

POLICY_KINDS = ("fixed", "zeta_adaptive", "c_phi_minus_one", "bethe_hessian_direct")


@dataclass(frozen=True)
class Policy:
    """A rule for choosing the regularization of one clustering run."""

    kind: str
    tau: float = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"unknown policy kind {self.kind!r}")
        if self.kind == "fixed":
            if self.tau is None or self.tau < 0:
                raise ConfigError("fixed policy needs a nonnegative tau")
        elif self.tau is not None:
            raise ConfigError(f"policy {self.kind} takes no tau value")

    @staticmethod
    def parse(text):
        text = text.strip()
        if text.startswith("fixed:"):
            try:
                return Policy("fixed", float(text[len("fixed:"):]))
            except ValueError:
                raise ConfigError(f"bad fixed-tau policy {text!r}") from None
        return Policy(text)

    def __str__(self):
        if self.kind == "fixed":
            return f"fixed:{self.tau:g}"
        return self.kind


@dataclass(frozen=True)
class SweepConfig:
    """Benchmark grid: (c_in, c_out) pairs at constant expected degree c,
    crossed with regularization policies and seeds."""

    n: int
    k: int
    c: float
    c_in_values: tuple
    theta_spec: ThetaSpec
    policies: tuple
    seeds: int
    kmeans_restarts: int = 16
    zeta_rtol: float = 1e-3
    eig_tol: float = 1e-6

    def __post_init__(self):
        if self.n < 2 or self.k < 2:
            raise ConfigError("sweep needs n >= 2 and k >= 2")
        if self.c <= 0:
            raise ConfigError("sweep needs c > 0")
        if self.seeds < 1:
            raise ConfigError("sweep needs at least one seed")
        if not self.c_in_values:
            raise ConfigError("sweep needs at least one c_in value")
        if not self.policies:
            raise ConfigError("sweep needs at least one policy")
        for c_in in self.c_in_values:
            c_out = self.c_out(c_in)
            if c_out < 0:
                raise ConfigError(f"c_in={c_in} implies negative c_out at c={self.c}")
            if abs((c_in + (self.k - 1) * c_out) / self.k - self.c) > 1e-9:
                raise ConfigError("degree constraint violated")  # pragma: no cover

    def c_out(self, c_in):
        """Off-diagonal affinity keeping the expected degree at c."""
        return (self.k * self.c - c_in) / (self.k - 1)

    def point_config(self, c_in):
        return DcsbmConfig.planted(self.n, self.k, c_in, self.c_out(c_in), self.theta_spec)

    def provenance(self):
        """Flat key=value pairs recorded in output headers."""
        return {
            "n": self.n,
            "k": self.k,
            "c": f"{self.c:g}",
            "c_in": " ".join(f"{v:g}" for v in self.c_in_values),
            "theta": str(self.theta_spec),
            "policies": " ".join(str(p) for p in self.policies),
            "seeds": self.seeds,
            "kmeans_restarts": self.kmeans_restarts,
            "zeta_rtol": f"{self.zeta_rtol:g}",
            "eig_tol": f"{self.eig_tol:g}",
        }


def _read_ini(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    return parser


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _parse_affinity(section, k):
    if "affinity" in section:
        rows = [r for r in section["affinity"].split(";") if r.strip()]
        C = np.array([_floats(r) for r in rows])
        if C.shape != (k, k):
            raise ConfigError(f"affinity must be {k}x{k}, got {C.shape}")
        return C
    if "c_in" in section and "c_out" in section:
        C = np.full((k, k), float(section["c_out"]))
        np.fill_diagonal(C, float(section["c_in"]))
        return C
    raise ConfigError("model needs either 'affinity' or 'c_in'/'c_out'")


def load_model_config(path):
    """Read a [model] section into a DcsbmConfig."""
    parser = _read_ini(path)
    if "model" not in parser:
        raise ConfigError(f"{path} has no [model] section")
    sec = parser["model"]
    try:
        n = sec.getint("n")
        k = sec.getint("k", fallback=2)
    except ValueError as exc:
        raise ConfigError(f"bad integer in [model]: {exc}") from None
    if n is None:
        raise ConfigError("[model] needs n")
    C = _parse_affinity(sec, k)
    if "pi" in sec:
        pi = np.array(_floats(sec["pi"]))
    else:
        pi = np.full(k, 1.0 / k)
    theta = ThetaSpec.parse(sec.get("theta", "constant"))
    return DcsbmConfig(n=n, k=k, C=C, pi=pi, theta_spec=theta)


def load_sweep_config(path):
    """Read a [sweep] section into a SweepConfig."""
    parser = _read_ini(path)
    if "sweep" not in parser:
        raise ConfigError(f"{path} has no [sweep] section")
    sec = parser["sweep"]
    try:
        return SweepConfig(
            n=sec.getint("n"),
            k=sec.getint("k", fallback=2),
            c=sec.getfloat("c"),
            c_in_values=tuple(_floats(sec["c_in"])),
            theta_spec=ThetaSpec.parse(sec.get("theta", "constant")),
            policies=tuple(Policy.parse(p) for p in sec["policies"].split()),
            seeds=sec.getint("seeds", fallback=5),
            kmeans_restarts=sec.getint("kmeans_restarts", fallback=16),
            zeta_rtol=sec.getfloat("zeta_rtol", fallback=1e-3),
            eig_tol=sec.getfloat("eig_tol", fallback=1e-6),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad [sweep] section in {path}: {exc}") from None
