"""Packet, cone, tail and cluster functionals near the wall stagnation point.

All integrals are taken in flattened coordinates ``(x, y) = (1 - r, z)``
with the kernel ``K0 = xy / (x^2 + y^2)^2`` evaluated analytically at the
quadrature nodes.  Fields are sampled off-grid by cubic interpolation.
Cone-shaped regions use Gauss-Legendre nodes in ``(x, s = y / x)``, where
``K0 dx dy = s / (x (1 + s^2)^2) dx ds``; squares and square annuli use
polar nodes, where ``K0 dx dy = cos(t) sin(t) / rho drho dt``.  Both forms
stay bounded for fields vanishing linearly at the wall point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .cutoffs import diagonal_window, dyadic_window
from .elliptic import MeridionalVelocity
from .grid import GridSpec, ScalarField, anisotropy_ratio, core_mask, dr2, dz4, wall_dz
from .interp import sample_flat
from .kernels import C0_EXACT, k0


class PacketError(ValueError):
    pass


# --------------------------------------------------------------------------
# geometric descriptors

@dataclass(frozen=True)
class ConicPacket:
    lam: float
    m: float
    M: float
    kappa: float = 0.5

    def __post_init__(self):
        if not (self.lam > 0 and 0 < self.m < self.M and 0 < self.kappa < 1):
            raise PacketError("conic packet needs lam > 0, 0 < m < M, 0 < kappa < 1")


@dataclass(frozen=True)
class DiagonalWindow:
    lam: float
    delta_c: float

    def __post_init__(self):
        if not self.lam > 0:
            raise PacketError("window scale must be positive")
        if not 0 < self.delta_c <= 0.25:
            raise PacketError("diagonal aperture must lie in (0, 0.25]")

    @property
    def inner(self) -> ConicPacket:
        """Cone on which the window is identically 1."""
        h = 0.5 * self.delta_c
        return ConicPacket(0.5 * self.lam, 1.0 - h, 1.0 + h)

    @property
    def enlarged(self) -> ConicPacket:
        """Cone containing the support of the window."""
        return ConicPacket(self.lam, 1.0 - self.delta_c, 1.0 + self.delta_c)


@dataclass(frozen=True)
class DyadicPacket:
    j: int
    m: float
    lam_j: float
    delta_nu: float

    def __post_init__(self):
        if not (self.j >= 0 and self.m > 0 and self.lam_j > 0 and self.delta_nu > 0):
            raise PacketError("dyadic packet needs j >= 0, m > 0, lam_j > 0, delta_nu > 0")

    @property
    def x_support(self) -> tuple[float, float]:
        return self.lam_j / math.sqrt(2.0), 2.0 * math.sqrt(2.0) * self.lam_j

    @property
    def s_support(self) -> tuple[float, float]:
        return max(self.m - 2.0 * self.delta_nu, 0.0), self.m + 2.0 * self.delta_nu

    @property
    def center(self) -> tuple[float, float]:
        xc = math.sqrt(2.0) * self.lam_j
        return xc, self.m * xc

    def window(self, x, s):
        return dyadic_window(x, s, self.lam_j, self.delta_nu, self.m)

    def in_plateau(self, x, y) -> np.ndarray:
        x = np.asarray(x, float)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.asarray(y, float) / x
        return (x >= self.lam_j) & (x <= 2 * self.lam_j) & (np.abs(s - self.m) <= self.delta_nu)


@dataclass(frozen=True)
class PacketAmplitudes:
    packet: DyadicPacket
    N: float
    a: float
    b: float
    A: float
    B: float
    g_min: float = 0.0


@dataclass(frozen=True)
class ClusterParams:
    """Parameters of the dyadic cluster lattice (validated hierarchy)."""

    lam0: float
    delta0: float
    mu: float
    nu: float
    kappa: float
    j_star: int
    n_ov: int = 2
    m_lo: float = 0.5
    m_hi: float = 2.0

    def __post_init__(self):
        if not 0 < self.nu < self.mu < 1:
            raise PacketError("cluster rates need 0 < nu < mu < 1")
        if not 0 < self.kappa < 1 + self.mu:
            raise PacketError("window growth needs 0 < kappa < 1 + mu")
        if not (self.lam0 > 0 and self.delta0 > 0 and self.j_star >= 0 and self.n_ov >= 1):
            raise PacketError("cluster needs lam0 > 0, delta0 > 0, j_star >= 0, n_ov >= 1")

    def state(self, S: float) -> "ClusterState":
        return ClusterState(
            S=S,
            lam_mu=self.lam0 * math.exp(-(1.0 + self.mu) * S),
            delta_nu=self.delta0 * math.exp(-self.nu * S),
            j_window=self.j_star + int(math.floor(self.kappa * S / math.log(2.0))),
            n_ov=self.n_ov, m_lo=self.m_lo, m_hi=self.m_hi,
        )


@dataclass(frozen=True)
class ClusterState:
    S: float
    lam_mu: float
    delta_nu: float
    j_window: int
    members: tuple = field(default=())
    n_ov: int = 2
    m_lo: float = 0.5
    m_hi: float = 2.0

    def lattice(self) -> list[DyadicPacket]:
        """Candidate packets: shells ``0..j_window`` times slopes ``m_lo + k delta_nu``."""
        n_m = int(math.floor((self.m_hi - self.m_lo) / self.delta_nu + 1e-9)) + 1
        slopes = self.m_lo + self.delta_nu * np.arange(n_m)
        return [DyadicPacket(j, float(m), self.lam_mu * 2.0**j, self.delta_nu)
                for j in range(self.j_window + 1) for m in slopes]


# --------------------------------------------------------------------------
# quadrature nodes

def _gl(n, a, b):
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * t + 0.5 * (b + a), 0.5 * (b - a) * w


def _count(extent, h, lo=16, hi=400):
    return int(min(hi, max(lo, math.ceil(4.0 * extent / h))))


def _cone_nodes(grid: GridSpec, x0, x1, s0, s1):
    """Nodes and weights of ``dx dy`` over ``{x0<x<x1, s0<y/x<s1}`` in (x, s)."""
    nx_ = _count(x1 - x0, min(grid.hr, grid.hz))
    ns = _count(x1 * (s1 - s0), grid.hz)
    xs, wx = _gl(nx_, x0, x1)
    ss, ws = _gl(ns, s0, s1)
    X, S = np.meshgrid(xs, ss, indexing="ij")
    W = np.outer(wx, ws) * X
    return X, S * X, W


def _ring_nodes(grid: GridSpec, lo, hi):
    """Polar nodes for the square annulus ``P_hi^+ minus P_lo^+`` in the first quadrant.

    Returns ``(x, y, w)`` with ``w`` the weight of ``dx dy``.
    """
    h = min(grid.hr, grid.hz)
    nt = _count(hi * math.pi / 2.0, h, lo=24)
    nr = _count(hi - lo, h, lo=24)
    xs, ys, ws = [], [], []
    for t0, t1 in ((0.0, math.pi / 4), (math.pi / 4, math.pi / 2)):
        th, wt = _gl(nt // 2 + 1, t0, t1)
        edge = np.cos(th) if t0 == 0.0 else np.sin(th)
        u, wu = np.polynomial.legendre.leggauss(nr)
        r0 = lo / edge
        r1 = hi / edge
        rho = 0.5 * (r1 - r0)[:, None] * u[None, :] + 0.5 * (r1 + r0)[:, None]
        w = (0.5 * (r1 - r0) * wt)[:, None] * wu[None, :] * rho
        xs.append(rho * np.cos(th)[:, None])
        ys.append(rho * np.sin(th)[:, None])
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ys), np.concatenate(ws)


def _require_resolved(grid: GridSpec, lam: float, what="packet"):
    need = 4.0 * max(grid.hr, grid.hz)
    if lam < need * (1 - 1e-12):
        raise PacketError(f"{what} at scale {lam:.4g} under-resolved: need scale >= {need:.4g} "
                          f"(4 cells) or a finer grid")
    if lam > 1.0 or lam > 0.5 * grid.z_period:
        raise PacketError(f"{what} at scale {lam:.4g} leaves the wall collar")


# --------------------------------------------------------------------------
# hyperbolic masses

def _ring_mass(G: ScalarField, lo: float, hi: float, weight5=False) -> float:
    x, y, w = _ring_nodes(G.grid, lo, hi)
    f = k0(x, y) * sample_flat(G, x, y) * w
    if weight5:
        f = f * (1.0 - x) ** 3
    return float(np.sum(f))


def hyperbolic_mass(G: ScalarField, lam: float) -> float:
    """``int_{(0,lam)^2} K0(x, y) G(1 - x, y) dx dy`` (upper half-packet)."""
    _require_resolved(G.grid, lam)
    return _ring_mass(G, 0.0, lam)


def conic_mass(G: ScalarField, P: ConicPacket) -> float:
    """Integral of ``K0 G`` over ``{0 < x < lam, m x < y < M x}``."""
    _require_resolved(G.grid, P.lam)
    X, Y, W = _cone_nodes(G.grid, 0.0, P.lam, P.m, P.M)
    return float(np.sum(k0(X, Y) * sample_flat(G, X, Y) * W))


def smooth_diag_mass(G: ScalarField, W: DiagonalWindow) -> float:
    """Integral of ``chi K0 G`` with the smooth narrow diagonal window ``chi``."""
    _require_resolved(G.grid, W.lam)
    X, Y, Wt = _cone_nodes(G.grid, 0.0, W.lam, 1.0 - W.delta_c, 1.0 + W.delta_c)
    chi = diagonal_window(X, Y, W.lam, W.delta_c)
    return float(np.sum(chi * k0(X, Y) * sample_flat(G, X, Y) * Wt))


def lambda_ladder(grid: GridSpec, lam_max: float) -> np.ndarray:
    """Geometric scale grid ``lam_max 2^{-k/4}`` down to 4 grid cells."""
    floor = 4.0 * max(grid.hr, grid.hz)
    if lam_max < floor:
        return np.array([])
    K = int(math.floor(4.0 * math.log2(lam_max / floor) + 1e-9))
    return lam_max * 2.0 ** (-np.arange(K + 1) / 4.0)


def maximal_score(G: ScalarField, delta_c: float, lam_max: float,
                  rel_tol: float = 0.05) -> tuple[float, float]:
    """Maximal narrow diagonal score over the scale ladder and its location.

    The score is the maximum of :func:`smooth_diag_mass` over the ladder.  For
    sign-coherent data the mass is nondecreasing in scale, so the reported
    scale is the smallest one whose mass lies within ``rel_tol`` of the
    maximum: the scale at which the mass is captured.
    """
    lams = lambda_ladder(G.grid, lam_max)
    if lams.size == 0:
        return 0.0, lam_max
    H = np.array([smooth_diag_mass(G, DiagonalWindow(l, delta_c)) for l in lams])
    best = float(H.max())
    if best <= 0.0:
        return max(best, 0.0), lam_max
    ok = np.nonzero(H >= (1.0 - rel_tol) * best)[0]
    return best, float(lams[ok.max()])


@dataclass(frozen=True)
class TailReport:
    shells: tuple
    tail: float
    H: float
    ratio: float


def tail_masses(G: ScalarField, lam: float, j_max: int) -> TailReport:
    """Shell masses ``|int_{A_j} K0 G dmu5|`` for ``A_j = P_{2^{j+1} lam} minus P_{2^j lam}``.

    The leading kernel stands in for the full cylinder kernel.  Shells and the
    local mass are both taken over the upper half, so the odd mirror cancels
    in the ratio.
    """
    _require_resolved(G.grid, lam)
    if 2.0 ** (j_max + 1) * lam > min(1.0, 0.5 * G.grid.z_period):
        raise PacketError("outer shell leaves the wall collar")
    shells = tuple(abs(_ring_mass(G, 2.0**j * lam, 2.0 ** (j + 1) * lam, weight5=True))
                   for j in range(1, j_max + 1))
    H = hyperbolic_mass(G, lam)
    tail = float(sum(shells))
    ratio = tail / abs(H) if H != 0 else (0.0 if tail == 0 else math.inf)
    return TailReport(shells, tail, H, ratio)


def upper_cone_min(G: ScalarField, lam: float, kappa: float = 1.0, margin: float = 0.0) -> float:
    """Minimum of ``G`` over grid nodes of the upper region ``{x + y <= kappa lam, y > 0}``."""
    X, Y = G.grid.flat_mesh()
    mask = (X + Y <= kappa * lam) & (Y > margin)
    return float(G.values[mask].min()) if mask.any() else 0.0


# --------------------------------------------------------------------------
# dyadic packets

def _packet_nodes(grid: GridSpec, P: DyadicPacket):
    x0, x1 = P.x_support
    s0, s1 = P.s_support
    X, Y, W = _cone_nodes(grid, x0, min(x1, 1.0), s0, s1)
    chi2 = P.window(X, Y / X) ** 2
    return X, Y, W, chi2


def packet_resolved(grid: GridSpec, P: DyadicPacket, min_nodes: int = 4) -> bool:
    """At least ``min_nodes`` grid cells across the support in both directions."""
    x0, x1 = P.x_support
    s0, s1 = P.s_support
    return (x1 - x0) / grid.hr >= min_nodes and x1 * (s1 - s0) / grid.hz >= min_nodes


def projected_amplitudes(Gamma: ScalarField, G: ScalarField, P: DyadicPacket,
                         check: bool = True) -> PacketAmplitudes:
    """Weighted least-squares slopes of ``G`` and ``Gamma`` against ``y`` under ``chi^2``."""
    if check and not packet_resolved(G.grid, P):
        raise PacketError(f"packet (j={P.j}, m={P.m:.3g}) under-resolved on this grid")
    X, Y, W, chi2 = _packet_nodes(G.grid, P)
    wy = Y * chi2 * W
    N = float(np.sum(Y * wy))
    if not N > 1e-300:
        raise PacketError("degenerate packet: zero projection norm")
    g = sample_flat(G, X, Y)
    a = float(np.sum(g * wy)) / N
    b = float(np.sum(sample_flat(Gamma, X, Y) * wy)) / N
    g_min = float(g[chi2 > 0].min()) if np.any(chi2 > 0) else 0.0
    return PacketAmplitudes(P, N, a, b, P.lam_j * a, math.sqrt(P.lam_j) * b, g_min)


# --------------------------------------------------------------------------
# bounded-overlap cluster selection

def _boxes(packets) -> np.ndarray:
    """Open support rectangles in ``(log2 x, s)``."""
    out = []
    for P in packets:
        x0, x1 = P.x_support
        s0, s1 = P.s_support
        out.append((math.log2(x0), math.log2(x1), s0, s1))
    return np.array(out, float).reshape(-1, 4)


def overlap_depth(boxes: np.ndarray) -> int:
    """Maximum number of open boxes sharing a point (attained at lower-left corners)."""
    if len(boxes) == 0:
        return 0
    best = 0
    for p in boxes[:, 0]:
        colx = (boxes[:, 0] <= p) & (p < boxes[:, 1])
        for q in boxes[colx, 2]:
            best = max(best, int(np.count_nonzero(colx & (boxes[:, 2] <= q) & (q < boxes[:, 3]))))
    return best


def select_cluster(scores, boxes: np.ndarray, n_ov: int = 2,
                   exhaustive_max: int = 16) -> tuple[float, tuple, bool]:
    """Maximise the summed score over families with overlap depth ``<= n_ov``.

    Exact branch-and-bound for up to ``exhaustive_max`` positive candidates,
    greedy by score otherwise.  Returns ``(score, indices, exact)``.
    """
    scores = np.asarray(scores, float)
    idx = [i for i in np.argsort(-scores, kind="stable") if scores[i] > 0]
    if not idx:
        return 0.0, (), True
    if overlap_depth(boxes[idx]) <= n_ov:
        return float(scores[idx].sum()), tuple(sorted(idx)), True

    if len(idx) > exhaustive_max:
        chosen = []
        for i in idx:
            if overlap_depth(boxes[chosen + [i]]) <= n_ov:
                chosen.append(i)
        return float(scores[chosen].sum()), tuple(sorted(chosen)), False

    suffix = np.concatenate([np.cumsum(scores[idx][::-1])[::-1], [0.0]])
    best = [0.0, ()]

    def dfs(k, chosen, total):
        if total > best[0] + 1e-15 or (abs(total - best[0]) <= 1e-15
                                        and tuple(sorted(chosen)) < best[1]):
            best[0], best[1] = total, tuple(sorted(chosen))
        if k == len(idx) or total + suffix[k] < best[0] - 1e-15:
            return
        i = idx[k]
        if overlap_depth(boxes[chosen + [i]]) <= n_ov:
            dfs(k + 1, chosen + [i], total + scores[i])
        dfs(k + 1, chosen, total)

    dfs(0, [], 0.0)
    return float(best[0]), best[1], True


def exhaustive_cluster(scores, boxes: np.ndarray, n_ov: int = 2) -> tuple[float, tuple]:
    """Brute force over every subset (test oracle; exponential)."""
    scores = np.asarray(scores, float)
    n = len(scores)
    best, arg = 0.0, ()
    for k in range(1, n + 1):
        for sub in itertools.combinations(range(n), k):
            tot = float(scores[list(sub)].sum())
            if tot > best + 1e-15 and overlap_depth(boxes[list(sub)]) <= n_ov:
                best, arg = tot, sub
    return best, arg


@dataclass(frozen=True)
class ClusterResult:
    score: float
    members: tuple
    candidates: tuple
    exact: bool
    state: ClusterState


def scan_packets(Gamma: ScalarField, G: ScalarField, C: ClusterState) -> list[PacketAmplitudes]:
    """Amplitudes of every resolved packet of the candidate lattice."""
    return [projected_amplitudes(Gamma, G, P, check=False)
            for P in C.lattice() if packet_resolved(G.grid, P)]


def cluster_score(Gamma: ScalarField, G: ScalarField, C: ClusterState,
                  sign_tol: float = 1e-2, exhaustive_max: int = 16) -> ClusterResult:
    """Bounded-overlap cluster score ``sum A_{j,m}`` over sign-coherent packets.

    A packet is sign-coherent when ``a > 0`` and ``G >= -tol`` on its support,
    with ``tol = sign_tol * max|G|``.
    """
    scanned = scan_packets(Gamma, G, C)
    tol = sign_tol * float(np.max(np.abs(G.values)))
    cands = tuple(p for p in scanned if p.a > 0 and p.g_min >= -tol)
    score, chosen, exact = select_cluster([p.A for p in cands],
                                          _boxes([p.packet for p in cands]),
                                          C.n_ov, exhaustive_max)
    members = tuple(cands[i] for i in chosen)
    state = ClusterState(C.S, C.lam_mu, C.delta_nu, C.j_window, members,
                         C.n_ov, C.m_lo, C.m_hi)
    return ClusterResult(score, members, cands, exact, state)


# --------------------------------------------------------------------------
# coherence and component selection

def coherence_matrix(members) -> np.ndarray:
    """Normalised pairwise compression coefficients.

    ``K_ij = C0 int [K0(x, y - y_i) + K0(x, y + y_i)] (y / lam_j) chi_j^2 dx dy``
    is the compression at the wall projection ``(0, y_i)`` of packet ``i``'s
    centre produced by a unit-slope odd source on packet ``j`` (the second
    term is its mirror half), so ``K_ij A_j`` is the compression generated by
    the G-score of packet ``j``.  Each factor is scale-free, hence ``K`` is
    invariant under a common rescaling of all packets.
    """
    packets = [m.packet if isinstance(m, PacketAmplitudes) else m for m in members]
    if not packets:
        raise PacketError("coherence matrix needs at least one packet")
    n = len(packets)
    K = np.empty((n, n))
    for j, Pj in enumerate(packets):
        x0, x1 = Pj.x_support
        s0, s1 = Pj.s_support
        xs, wx = _gl(64, x0, x1)
        ss, ws = _gl(64, s0, s1)
        X, S = np.meshgrid(xs, ss, indexing="ij")
        Y = S * X
        w = np.outer(wx, ws) * X * (Y / Pj.lam_j) * Pj.window(X, S) ** 2
        for i, Pi in enumerate(packets):
            yi = Pi.center[1]
            K[i, j] = C0_EXACT * float(np.sum((k0(X, Y - yi) + k0(X, Y + yi)) * w))
    return K


@dataclass(frozen=True)
class CoherentComponent:
    subset: tuple
    A_star: float
    B_star: float

    @property
    def paired(self) -> float:
        return self.A_star * self.B_star + self.B_star**2


def _component_value(A, B, sub):
    a = float(sum(A[i] for i in sub))
    b = math.sqrt(float(sum(B[i] ** 2 for i in sub)))
    return a * b + b * b, a, b


def coherent_component(members, K: np.ndarray, k_star: float,
                       exhaustive_max: int = 15) -> CoherentComponent:
    """Uniformly coherent subset maximising ``A_* B_* + B_*^2``.

    Feasible subsets are cliques of the graph whose nodes have ``K_ii >= k_star``
    and whose edges have ``K_ij, K_ji >= k_star``.  Up to ``exhaustive_max``
    members every clique is scored; beyond that only maximal cliques are,
    which is exact when all amplitudes are nonnegative.  Ties go to the
    lexicographically smallest index tuple.
    """
    if not k_star > 0:
        raise PacketError("k_star must be positive")
    A = [float(m.A) for m in members]
    B = [float(m.B) for m in members]
    n = len(A)
    K = np.asarray(K, float)
    g = nx.Graph()
    g.add_nodes_from(i for i in range(n) if K[i, i] >= k_star)
    g.add_edges_from((i, j) for i in g for j in g
                     if i < j and K[i, j] >= k_star and K[j, i] >= k_star)
    if g.number_of_nodes() == 0:
        return CoherentComponent((), 0.0, 0.0)
    cliques = nx.enumerate_all_cliques(g) if n <= exhaustive_max else nx.find_cliques(g)
    best = None
    for c in cliques:
        sub = tuple(sorted(c))
        val, a, b = _component_value(A, B, sub)
        key = (-val, sub)
        if best is None or key < best[0]:
            best = (key, sub, a, b)
    return CoherentComponent(best[1], best[2], best[3])


def exhaustive_component(members, K: np.ndarray, k_star: float) -> CoherentComponent:
    """Brute force over every subset (test oracle)."""
    A = [float(m.A) for m in members]
    B = [float(m.B) for m in members]
    n = len(A)
    best = None
    for k in range(1, n + 1):
        for sub in itertools.combinations(range(n), k):
            if all(K[i, j] >= k_star for i in sub for j in sub):
                val, a, b = _component_value(A, B, sub)
                if best is None or (-val, sub) < best[0]:
                    best = ((-val, sub), sub, a, b)
    if best is None:
        return CoherentComponent((), 0.0, 0.0)
    return CoherentComponent(best[1], best[2], best[3])


# --------------------------------------------------------------------------
# affine defect, anisotropy and shear

def campanato_defect(v: MeridionalVelocity, sigma: float, C: ClusterState | list) -> float:
    """``sup |u - L X| / (sigma |X|)`` over grid nodes in the cluster plateaus.

    ``L X = (sigma x, -sigma y)`` with flattened components
    ``u_x = -u^r`` and ``u_y = u^z``.
    """
    if sigma == 0:
        raise PacketError("affine model degenerate: sigma = 0")
    members = C.members if isinstance(C, ClusterState) else C
    packets = [m.packet if isinstance(m, PacketAmplitudes) else m for m in members]
    X, Y = v.grid.flat_mesh()
    mask = np.zeros(X.shape, bool)
    for P in packets:
        mask |= P.in_plateau(X, Y)
    if not mask.any():
        return 0.0
    x, y = X[mask], Y[mask]
    ux = -v.u_r.values[mask]
    uy = v.u_z.values[mask]
    dev = np.hypot(ux - sigma * x, uy + sigma * y)
    return float(np.max(dev / (abs(sigma) * np.hypot(x, y))))


@dataclass(frozen=True)
class AnisotropyShear:
    R_max: float
    shear_max: float
    sigma_ref: float


def anisotropy_and_shear(Gamma: ScalarField, v: MeridionalVelocity, lam: float,
                         kappa: float, floor: float = 1e-3) -> AnisotropyShear:
    """Radial-swirl ratio and axial shear ``|d_r u^z|`` over the inner core."""
    g = Gamma.grid
    mask = core_mask(g, lam, kappa)
    if not mask.any():
        raise PacketError("inner core contains no grid nodes")
    if not np.any(np.abs(dz4(Gamma.values, g.hz))[mask] > 0):
        raise PacketError("d_z Gamma vanishes on the inner core")
    R = anisotropy_ratio(Gamma, lam, kappa, floor)
    shear = float(np.max(np.abs(dr2(v.u_z.values, g.hr))[mask]))
    sigma = -wall_dz(v.u_z.values[-1], g)
    return AnisotropyShear(R, shear, sigma)

