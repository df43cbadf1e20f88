"""Score monitors evaluated along a run: one flat row per sample."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import SimState, StepReport, default_sample
from .packets import (ClusterParams, PacketError, anisotropy_and_shear, campanato_defect,
                      cluster_score, coherence_matrix, coherent_component, maximal_score,
                      tail_masses, upper_cone_min)

COLUMNS = ("step", "t", "dt", "sigma", "a", "b", "c", "lambda", "A", "B", "S", "M",
           "clusterScore", "Astar", "Bstar", "nStar", "epsCl", "Rratio", "Rmax", "shearMax",
           "tailRatio", "signMin", "gradUinf", "bIdent", "aIdent", "ABIdent", "divergence",
           "parityDrift")


@dataclass(frozen=True)
class MonitorConfig:
    lam0: float = 0.05
    delta_c: float = 0.1
    cluster: ClusterParams = ClusterParams(lam0=0.0125, delta0=0.1, mu=0.5, nu=0.25,
                                           kappa=0.5, j_star=2)
    k_star: float = 0.02
    kappa: float = 0.5
    tail_shells: int = 2
    scores: bool = True


class Monitor:
    """Callable ``(state, report) -> dict`` used as the ``monitors`` hook of ``run``."""

    def __init__(self, cfg: MonitorConfig = MonitorConfig()):
        self.cfg = cfg

    def __call__(self, s: SimState, rep: StepReport | None) -> dict:
        row = dict.fromkeys(COLUMNS, math.nan)
        row.update(default_sample(s, rep))
        if not self.cfg.scores:
            return row
        cfg = self.cfg
        G, Gam, v = s.G, s.Gamma, s.velocity
        row["M"] = maximal_score(G, cfg.delta_c, cfg.lam0)[0]
        cl = cluster_score(Gam, G, cfg.cluster.state(max(s.S, 0.0)))
        row["clusterScore"] = cl.score
        if cl.members:
            K = coherence_matrix(cl.members)
            comp = coherent_component(cl.members, K, cfg.k_star)
            row.update(Astar=comp.A_star, Bstar=comp.B_star, nStar=len(comp.subset))
            if s.trace.sigma != 0:
                row["epsCl"] = campanato_defect(v, s.trace.sigma, cl.state)
        else:
            row.update(Astar=0.0, Bstar=0.0, nStar=0)
        try:
            an = anisotropy_and_shear(Gam, v, s.lam, cfg.kappa)
            row.update(Rmax=an.R_max, shearMax=an.shear_max)
        except PacketError:
            pass
        try:
            row["tailRatio"] = tail_masses(G, s.lam, cfg.tail_shells).ratio
        except PacketError:
            pass
        gmax = float(np.max(np.abs(G.values)))
        row["signMin"] = upper_cone_min(G, s.lam, cfg.kappa) / gmax if gmax > 0 else 0.0
        return row
