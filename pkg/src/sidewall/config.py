"""Run configuration: INI sections, validation of the parameter hierarchy,
and bit-exact round-trip (floats are written with ``repr``)."""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import asdict, dataclass, field, fields

from .dynamics import StepControl
from .grid import make_grid
from .initdata import PacketSpec
from .monitors import MonitorConfig
from .packets import ClusterParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridConfig:
    Nr: int = 256
    Nz: int = 512
    zPeriod: float = 1.0


@dataclass(frozen=True)
class PacketConfig:
    lambda0: float = 0.05
    deltaC: float = 0.1
    alpha: float = 1.0
    beta: float = math.nan  # nan: solve from the dominance clause
    cStar: float = 100.0
    safety: float = 2.0
    shape: str = "collar"
    slope: float = 1.0


@dataclass(frozen=True)
class ClusterConfig:
    lambda0: float = 0.0125
    delta0: float = 0.1
    mu: float = 0.5
    nu: float = 0.25
    kappa: float = 0.5
    Jstar: int = 2
    kStar: float = 0.02
    Nov: int = 2


@dataclass(frozen=True)
class AdmissibilityConfig:
    kappaCore: float = 0.5
    eta: float = 0.01
    delta: float = 0.05
    eps: float = 0.05


@dataclass(frozen=True)
class RunSection:
    T: float = 100.0
    cflTarget: float = 0.5
    strainTarget: float = 0.05
    dtMax: float = math.inf
    dtMin: float = 1e-8
    cadence: int = 1
    BCeiling: float = 100.0
    gradCeiling: float = math.inf
    maxSteps: int = 100000
    seed: int = 0
    scores: bool = True


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    csv: str = "series.csv"
    snapshots: bool = False


SECTIONS = {"grid": GridConfig, "packet": PacketConfig, "cluster": ClusterConfig,
            "admissibility": AdmissibilityConfig, "run": RunSection, "output": OutputConfig}


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    packet: PacketConfig = field(default_factory=PacketConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    admissibility: AdmissibilityConfig = field(default_factory=AdmissibilityConfig)
    run: RunSection = field(default_factory=RunSection)
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self):
        validate(self)

    # -- derived objects
    def make_grid(self):
        return make_grid(self.grid.Nr, self.grid.Nz, self.grid.zPeriod)

    def packet_spec(self) -> PacketSpec:
        p = self.packet
        return PacketSpec(alpha=p.alpha, beta=None if math.isnan(p.beta) else p.beta,
                          lam0=p.lambda0, delta_c=p.deltaC, c_star=p.cStar, shape=p.shape,
                          slope=p.slope, safety=p.safety)

    def cluster_params(self) -> ClusterParams:
        c = self.cluster
        return ClusterParams(lam0=c.lambda0, delta0=c.delta0, mu=c.mu, nu=c.nu,
                             kappa=c.kappa, j_star=c.Jstar, n_ov=c.Nov)

    def monitor_config(self) -> MonitorConfig:
        return MonitorConfig(lam0=self.packet.lambda0, delta_c=self.packet.deltaC,
                             cluster=self.cluster_params(), k_star=self.cluster.kStar,
                             kappa=self.admissibility.kappaCore, scores=self.run.scores)

    def step_control(self) -> StepControl:
        r = self.run
        return StepControl(cfl=r.cflTarget, strain_target=r.strainTarget, dt_max=r.dtMax,
                           dt_min=r.dtMin)

    def output_dir(self) -> str:
        return os.environ.get("SIDEWALL_OUTPUT_DIR", self.output.dir)

    # -- serialisation
    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        for name in SECTIONS:
            sec = getattr(self, name)
            cp[name] = {k: _fmt(v) for k, v in asdict(sec).items()}
        lines = []
        for name in SECTIONS:
            lines.append(f"[{name}]")
            lines += [f"{k} = {v}" for k, v in cp[name].items()]
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as e:
            raise ConfigError(f"malformed config: {e}") from None
        unknown = set(cp.sections()) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
        parts = {}
        for name, typ in SECTIONS.items():
            kw = {}
            if cp.has_section(name):
                known = {f.name: f.type for f in fields(typ)}
                for k, raw in cp[name].items():
                    if k not in known:
                        raise ConfigError(f"unknown key {name}.{k}")
                    kw[k] = _parse(raw, getattr(typ(), k), f"{name}.{k}")
            parts[name] = typ(**kw)
        return cls(**parts)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            return cls.from_ini(fh.read())

    def save(self, path: str):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_ini())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(raw: str, default, key: str):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {key} = {raw!r}") from None
    return raw


def validate(c: RunConfig):
    """Reject every violation of the parameter hierarchy, naming the constraint."""
    def need(ok, msg):
        if not ok:
            raise ConfigError(f"config violates {msg}")

    g, p, cl, ad, r = c.grid, c.packet, c.cluster, c.admissibility, c.run
    need(g.Nr >= 8, "grid.Nr >= 8")
    need(g.Nz >= 8 and g.Nz % 2 == 0, "grid.Nz >= 8 and even")
    need(g.zPeriod > 0, "grid.zPeriod > 0")
    need(0 < p.lambda0 <= 0.1, "0 < packet.lambda0 <= 0.1")
    need(0 < p.deltaC <= 0.25, "0 < packet.deltaC <= 0.25")
    need(p.alpha > 0, "packet.alpha > 0")
    need(math.isnan(p.beta) or p.beta >= 0, "packet.beta >= 0 (or nan to solve)")
    need(p.cStar > 0 and p.safety >= 1, "packet.cStar > 0 and packet.safety >= 1")
    need(p.shape in ("collar", "cone"), "packet.shape in {collar, cone}")
    need(0 < cl.nu < cl.mu < 1, "0 < nu < mu < 1")
    need(0 < cl.kappa < 1 + cl.mu, "0 < kappa < 1 + mu")
    need(cl.lambda0 > 0 and cl.delta0 > 0, "cluster.lambda0 > 0 and cluster.delta0 > 0")
    need(cl.Jstar >= 0 and cl.Nov >= 1, "cluster.Jstar >= 0 and cluster.Nov >= 1")
    need(cl.kStar > 0, "cluster.kStar > 0")
    need(0 < ad.kappaCore < 1, "0 < admissibility.kappaCore < 1")
    need(ad.eta > 0 and ad.delta > 0 and ad.eps > 0, "positive eta, delta, eps")
    need(r.T > 0 and r.cflTarget > 0 and r.strainTarget > 0, "positive T, cflTarget, strainTarget")
    need(r.dtMax > 0 and r.dtMin > 0, "positive dtMax, dtMin")
    need(r.cadence >= 1 and r.maxSteps >= 1, "run.cadence >= 1 and run.maxSteps >= 1")
    need(r.BCeiling > 1 and r.gradCeiling > 0, "run.BCeiling > 1 and run.gradCeiling > 0")
