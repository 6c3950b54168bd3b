"""Construction and validation of the two iterated function schemes.

``build_bowen_series`` realizes the 4-symbol scheme from the explicit
generator pair on the isometric-circle disks.  ``build_flow_adapted``
realizes the 6-symbol bipartite reflection scheme in the normalized family
whose disk centers are pinned at m_j = 2(j-1); its radii come from a damped
Newton solve of the three trace equations

    cosh(n_k * ell / 2) = ((m_i - m_j)^2 - r_i - r_j) / (2 sqrt(r_i r_j))

in log-radius coordinates.  Pinning the centers (rather than the disk left
endpoints) makes the pair separations (m_i - m_j)^2 the constants 4, 4, 16,
which is the normalization under which the symmetric family admits the
closed form r_1 = r_3 = 8 / (cosh(ell/2) + 1) exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import hypgeo
from .errors import (
    BelowLengthThreshold,
    IsometricCirclesOverlap,
    NewtonDivergence,
    NonpositiveLength,
    TriangleConditionViolated,
)
from .hypgeo import Disk, Moebius, compose, reflection_matrix, translation

FLOW_OFFSET = 6.0
EXTENDED_RADIUS = 1.2
_MAX_FLOW_RADIUS = 0.5


@dataclass(frozen=True)
class EdgeMap:
    """One IFS branch phi(u) = matrix(u) + offset, with its winding weight."""

    matrix: Moebius
    offset: float
    weight: int
    full: Moebius

    def __call__(self, u):
        return self.full(u)

    def derivative(self, u):
        return self.full.derivative(u)


@dataclass(frozen=True)
class IfsScheme:
    kind: str  # 'bowen' or 'flow'
    disks: tuple[Disk, ...]
    adjacency: np.ndarray  # 0/1, symbol_count x symbol_count, read-only
    edges: dict  # (i, j) 1-based -> EdgeMap
    lengths: tuple[float, float, float]
    n: tuple[int, int, int] | None = None
    ell: float | None = None
    kappa: tuple[float, float, float] | None = None
    offset: float = 0.0
    extended_radius: float | None = None

    @property
    def symbol_count(self) -> int:
        return len(self.disks)

    def successors(self, i: int) -> tuple[int, ...]:
        row = self.adjacency[i - 1]
        return tuple(j + 1 for j in range(self.symbol_count) if row[j])

    def edge(self, i: int, j: int) -> EdgeMap:
        return self.edges[(i, j)]


def _freeze(adj: np.ndarray) -> np.ndarray:
    adj = np.asarray(adj, dtype=np.int8)
    adj.flags.writeable = False
    return adj


def solve_generator_param(l1: float, l2: float, l3: float) -> float:
    """Parameter a > 1 that makes Tr(S1 S2^-1) = -2 cosh(l3/2)."""
    if min(l1, l2, l3) <= 0.0:
        raise NonpositiveLength(f"funnel lengths must be positive, got {(l1, l2, l3)}")
    rhs = 2.0 * (math.cosh(l1 / 2) * math.cosh(l2 / 2) + math.cosh(l3 / 2)) / (
        math.sinh(l1 / 2) * math.sinh(l2 / 2)
    )
    # a + 1/a = rhs with rhs > 2; take the root above 1
    return (rhs + math.sqrt(rhs * rhs - 4.0)) / 2.0


def generator_pair(l1: float, l2: float, l3: float) -> tuple[Moebius, Moebius]:
    a = solve_generator_param(l1, l2, l3)
    c1, s1 = math.cosh(l1 / 2), math.sinh(l1 / 2)
    c2, s2 = math.cosh(l2 / 2), math.sinh(l2 / 2)
    return Moebius(c1, s1, s1, c1), Moebius(c2, a * s2, s2 / a, c2)


def build_bowen_series(l1: float, l2: float, l3: float) -> IfsScheme:
    """4-symbol scheme on the generators' isometric circles.

    Symbols are S1, S2, S1^-1, S2^-1 in this order; the branch into symbol j
    is u -> S_j^-1 u, forbidden exactly when the source is the partner disk
    (|i - j| = 2).
    """
    S1, S2 = generator_pair(l1, l2, l3)
    gens = (S1, S2, S1.inverse(), S2.inverse())
    disks = tuple(Disk(-g.d / g.c, 1.0 / abs(g.c)) for g in gens)
    for i in range(4):
        for j in range(i + 1, 4):
            if hypgeo.disks_gap(disks[i], disks[j]) <= 0.0:
                raise IsometricCirclesOverlap(
                    f"isometric circles of symbols {i + 1} and {j + 1} are not disjoint "
                    f"for lengths {(l1, l2, l3)}"
                )
    adj = np.ones((4, 4), dtype=np.int8)
    for i in range(4):
        adj[i, (i + 2) % 4] = 0
    edges = {}
    for i in range(1, 5):
        for j in range(1, 5):
            if adj[i - 1, j - 1]:
                m = gens[j - 1].inverse()
                edges[(i, j)] = EdgeMap(matrix=m, offset=0.0, weight=0, full=m)
    return IfsScheme(
        kind="bowen",
        disks=disks,
        adjacency=_freeze(adj),
        edges=edges,
        lengths=(float(l1), float(l2), float(l3)),
    )


def _check_triangle(n) -> tuple[int, int, int]:
    n = tuple(int(v) for v in n)
    if len(n) != 3 or min(n) <= 0:
        raise TriangleConditionViolated(f"need three positive integers, got {n}")
    n1, n2, n3 = n
    if not (n1 + n2 > n3 and n2 + n3 > n1 and n1 + n3 > n2):
        raise TriangleConditionViolated(f"triangle condition violated for {n}")
    return n


def _log_cosh(y: float) -> float:
    return y - math.log(2.0) + math.log1p(math.exp(-2.0 * y))


_PAIRS = ((0, 1), (1, 2), (0, 2))  # disk pairs carrying n1, n2, n3
_CENTERS = (0.0, 2.0, 4.0)
_PAIR_SEP_SQ = (4.0, 4.0, 16.0)  # (m_i - m_j)^2 for the pinned centers


def _trace_residuals(x: np.ndarray, targets: np.ndarray):
    """Log-space residuals of the three trace equations, or None if invalid."""
    r = np.exp(x)
    F = np.empty(3)
    for k, (i, j) in enumerate(_PAIRS):
        num = _PAIR_SEP_SQ[k] - r[i] - r[j]
        if num <= 0.0:
            return None
        F[k] = math.log(num) - 0.5 * (x[i] + x[j]) - math.log(2.0) - targets[k]
    return F


def _trace_jacobian(x: np.ndarray) -> np.ndarray:
    r = np.exp(x)
    J = np.zeros((3, 3))
    for k, (i, j) in enumerate(_PAIRS):
        num = _PAIR_SEP_SQ[k] - r[i] - r[j]
        J[k, i] = -r[i] / num - 0.5
        J[k, j] = -r[j] / num - 0.5
    return J


def solve_flow_radii(n, ell: float) -> tuple[float, float, float]:
    """Radii of the normalized reflection scheme for X_{n1*ell, n2*ell, n3*ell}.

    Damped Newton in log-radius coordinates, seeded from the asymptotic decay
    rates; converges to relative residual 1e-14 on the trace equations.
    """
    n1, n2, n3 = _check_triangle(n)
    if ell <= 0.0:
        raise NonpositiveLength(f"ell must be positive, got {ell}")
    kappa = np.array([(n1 + n3 - n2) / 2.0, (n1 + n2 - n3) / 2.0, (n2 + n3 - n1) / 2.0])
    targets = np.array([_log_cosh(nk * ell / 2.0) for nk in (n1, n2, n3)])
    x = np.array([math.log(16.0), 0.0, math.log(16.0)]) - kappa * ell
    F = _trace_residuals(x, targets)
    if F is None:
        raise NewtonDivergence("initial guess outside the admissible region", tuple(np.exp(x)))
    tol = 1e-14 * (1.0 + np.abs(targets))
    for _ in range(100):
        if np.all(np.abs(F) < tol):
            r = np.exp(x)
            return float(r[0]), float(r[1]), float(r[2])
        step = np.linalg.solve(_trace_jacobian(x), -F)
        t = 1.0
        norm0 = np.linalg.norm(F)
        while True:
            F_new = _trace_residuals(x + t * step, targets)
            if F_new is not None and np.linalg.norm(F_new) < norm0:
                break
            t *= 0.5
            if t < 1e-14:
                raise NewtonDivergence("line search exhausted", tuple(np.exp(x)))
        x = x + t * step
        F = F_new
    raise NewtonDivergence("no convergence in 100 iterations", tuple(np.exp(x)))


_FLOW_WEIGHT_EDGES = {
    # paired half-windings around each funnel
    (1, 5): 0, (5, 1): 0, (4, 2): 0, (2, 4): 0,
    (2, 6): 1, (6, 2): 1, (5, 3): 1, (3, 5): 1,
    (3, 4): 2, (4, 3): 2, (6, 1): 2, (1, 6): 2,
}


def build_flow_adapted(n, ell: float, extended_radius: float = EXTENDED_RADIUS) -> IfsScheme:
    """6-symbol bipartite scheme with disk centers pinned at 2(j-1).

    Raises BelowLengthThreshold when the solved radii are too large for the
    pinned spacing (some r_j >= 0.5, disks or images not separated, or an
    extended disk hits a neighbor).
    """
    n1, n2, n3 = _check_triangle(n)
    r = solve_flow_radii(n, ell)
    if max(r) >= _MAX_FLOW_RADIUS:
        raise BelowLengthThreshold(
            f"solved radii {r} reach {max(r):.4g} >= {_MAX_FLOW_RADIUS}; increase ell"
        )
    centers = _CENTERS
    disks = tuple(Disk(centers[j], r[j]) for j in range(3)) + tuple(
        Disk(centers[j] + FLOW_OFFSET, r[j]) for j in range(3)
    )
    refl = tuple(reflection_matrix(centers[j], r[j]) for j in range(3))

    adj = np.zeros((6, 6), dtype=np.int8)
    for i in range(1, 4):
        for j in range(1, 4):
            if i != j:
                adj[i - 1, j + 2] = 1
                adj[j + 2, i - 1] = 1

    nvals = (n1, n2, n3)
    shift = translation(FLOW_OFFSET)
    edges = {}
    for (i, j), widx in _FLOW_WEIGHT_EDGES.items():
        if i <= 3:
            matrix = refl[j - 4]
            em = EdgeMap(matrix=matrix, offset=FLOW_OFFSET, weight=nvals[widx],
                         full=compose(shift, matrix))
        else:
            matrix = compose(refl[j - 1], translation(-FLOW_OFFSET))
            em = EdgeMap(matrix=matrix, offset=0.0, weight=nvals[widx], full=matrix)
        edges[(i, j)] = em

    scheme = IfsScheme(
        kind="flow",
        disks=disks,
        adjacency=_freeze(adj),
        edges=edges,
        lengths=(n1 * ell, n2 * ell, n3 * ell),
        n=(n1, n2, n3),
        ell=float(ell),
        kappa=((n1 + n3 - n2) / 2.0, (n1 + n2 - n3) / 2.0, (n2 + n3 - n1) / 2.0),
        offset=FLOW_OFFSET,
        extended_radius=float(extended_radius),
    )
    _check_flow_separation(scheme)
    return scheme


def edge_image_disks(s: IfsScheme) -> dict:
    """Exact image of each source disk, as (offset from target center, radius).

    Offsets are computed analytically relative to the target center, so they
    stay fully accurate even when images are smaller than one ulp of their
    absolute position (large kappa * ell).
    """
    out = {}
    for (i, j) in sorted(s.edges):
        em = s.edges[(i, j)]
        src = s.disks[i - 1]
        if s.kind == "flow":
            base = j - 4 if i <= 3 else j - 1
            pole = 2.0 * base
            r_b = s.disks[base].radius
            src_center = src.center - (0.0 if i <= 3 else FLOW_OFFSET)
            t = src_center - pole
            den = t * t - src.radius * src.radius
            out[(i, j)] = (r_b * t / den, r_b * src.radius / den)
        else:
            M = em.full
            pole = -M.d / M.c
            t = src.center - pole
            den = t * t - src.radius * src.radius
            B = -M.det * math.exp(-2.0 * M.log_scale) / (M.c * M.c)
            # M(inf) = a/c equals the stored target center bitwise here
            drift = M.a / M.c - s.disks[j - 1].center
            out[(i, j)] = (drift + B * t / den, abs(B) * src.radius / den)
    return out


def _image_pair_margin(s, images, e1, e2) -> float:
    """Conservative separation margin between two edge images."""
    (o1, r1), (o2, r2) = images[e1], images[e2]
    if e1[1] == e2[1]:
        return abs(o1 - o2) - (r1 + r2)
    gap = abs(s.disks[e1[1] - 1].center - s.disks[e2[1] - 1].center)
    return gap - (abs(o1) + r1) - (abs(o2) + r2)


def _check_flow_separation(s: IfsScheme):
    for i in range(6):
        for j in range(i + 1, 6):
            if hypgeo.disks_gap(s.disks[i], s.disks[j]) <= 0.0:
                raise BelowLengthThreshold(f"disks {i + 1} and {j + 1} are not disjoint")
    for j in range(6):
        for i in range(6):
            if i == j:
                continue
            gap = abs(s.disks[j].center - s.disks[i].center) - (
                s.extended_radius + s.disks[i].radius
            )
            if gap <= 0.0:
                raise BelowLengthThreshold(
                    f"extended disk {j + 1} (radius {s.extended_radius}) hits disk {i + 1}"
                )
    images = edge_image_disks(s)
    for (i, j), (off, rad) in images.items():
        if abs(off) + rad >= s.disks[j - 1].radius:
            raise BelowLengthThreshold(f"image of disk {i} does not sit inside disk {j}")
    keys = sorted(images)
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            if _image_pair_margin(s, images, keys[a], keys[b]) <= 0.0:
                raise BelowLengthThreshold(
                    f"images along edges {keys[a]} and {keys[b]} overlap"
                )


@dataclass
class SchemeReport:
    """Numerical certificates for the scheme axioms; margins > 0 mean pass."""

    disk_disjointness: list = field(default_factory=list)      # (i, j, margin)
    image_containment: list = field(default_factory=list)      # (i, j, margin)
    image_disjointness: list = field(default_factory=list)     # (edge, edge, margin)
    extended_clearance: list = field(default_factory=list)     # (j, i, margin)
    contraction_theta: float = math.inf
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def validate_scheme(s: IfsScheme, boundary_samples: int = 64) -> SchemeReport:
    """Check disjointness, image containment/separation and contraction.

    Containment margins are measured on ``boundary_samples`` points per edge;
    the contraction certificate samples |phi_w'| for all words of length 2.
    """
    rep = SchemeReport()
    N = s.symbol_count
    for i in range(N):
        for j in range(i + 1, N):
            margin = hypgeo.disks_gap(s.disks[i], s.disks[j])
            rep.disk_disjointness.append((i + 1, j + 1, margin))
            if margin <= 0.0:
                rep.failures.append(f"disks {i + 1},{j + 1} overlap (margin {margin:.3g})")

    theta = np.linspace(0.0, 2.0 * math.pi, boundary_samples, endpoint=False)
    boundary = {
        i: s.disks[i - 1].center + s.disks[i - 1].radius * np.exp(1j * theta)
        for i in range(1, N + 1)
    }

    for (i, j), em in sorted(s.edges.items()):
        tgt = s.disks[j - 1]
        if s.kind == "flow":
            # image points relative to the target center: r_b / (u - pole)
            base = j - 4 if i <= 3 else j - 1
            pole = 2.0 * base
            src = boundary[i] - (0.0 if i <= 3 else FLOW_OFFSET)
            rel = s.disks[base].radius / (src - pole)
        else:
            pts = (em.full.a * boundary[i] + em.full.b) / (em.full.c * boundary[i] + em.full.d)
            rel = pts - tgt.center
        margin = tgt.radius - float(np.max(np.abs(rel)))
        rep.image_containment.append((i, j, margin))
        if margin <= 0.0:
            rep.failures.append(f"image {i}->{j} escapes disk {j} (margin {margin:.3g})")

    img_disks = edge_image_disks(s)
    keys = sorted(img_disks)
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            margin = _image_pair_margin(s, img_disks, keys[a], keys[b])
            rep.image_disjointness.append((keys[a], keys[b], margin))
            if margin <= 0.0:
                rep.failures.append(f"images {keys[a]} and {keys[b]} overlap")

    if s.kind == "flow":
        for j in range(1, N + 1):
            for i in range(1, N + 1):
                if i == j:
                    continue
                margin = abs(s.disks[j - 1].center - s.disks[i - 1].center) - (
                    s.extended_radius + s.disks[i - 1].radius
                )
                rep.extended_clearance.append((j, i, margin))
                if margin <= 0.0:
                    rep.failures.append(f"extended disk {j} hits disk {i}")

    sup = 0.0
    for (i, k), em1 in sorted(s.edges.items()):
        mid = (em1.full.a * boundary[i] + em1.full.b) / (em1.full.c * boundary[i] + em1.full.d)
        d1 = em1.full.derivative(boundary[i])
        for j in s.successors(k):
            em2 = s.edge(k, j)
            d2 = em2.full.derivative(mid)
            sup = max(sup, float(np.max(np.abs(d1 * d2))))
    rep.contraction_theta = sup
    if not sup < 1.0:
        rep.failures.append(f"length-2 contraction certificate failed (theta {sup:.3g})")
    return rep


@dataclass
class AsymptoticTable:
    n: tuple[int, int, int]
    kappa: tuple[float, float, float]
    ells: tuple[float, ...]
    products: np.ndarray  # len(ells) x 3 of r_j(ell) * exp(kappa_j * ell)


def asymptotic_radii_table(n, ells) -> AsymptoticTable:
    """r_j(ell) * exp(kappa_j * ell) along a list of ells."""
    n1, n2, n3 = _check_triangle(n)
    kappa = ((n1 + n3 - n2) / 2.0, (n1 + n2 - n3) / 2.0, (n2 + n3 - n1) / 2.0)
    rows = []
    for ell in ells:
        r = solve_flow_radii(n, ell)
        rows.append([r[j] * math.exp(kappa[j] * ell) for j in range(3)])
    return AsymptoticTable(
        n=(n1, n2, n3), kappa=kappa, ells=tuple(float(e) for e in ells),
        products=np.array(rows),
    )


# -- JSON dump / load ---------------------------------------------------------

def _f17(x: float) -> str:
    return format(float(x) + 0.0, ".17g")  # + 0.0 canonicalizes negative zero


def scheme_to_json(s: IfsScheme) -> str:
    """Serialize with fixed 17-significant-digit decimals (bit-exact reload)."""
    parts = ['{\n  "kind": %s,' % json.dumps(s.kind)]
    parts.append('  "lengths": [%s],' % ", ".join(_f17(v) for v in s.lengths))
    parts.append('  "n": %s,' % (json.dumps(list(s.n)) if s.n else "null"))
    parts.append('  "ell": %s,' % (_f17(s.ell) if s.ell is not None else "null"))
    parts.append(
        '  "kappa": %s,'
        % ("[%s]" % ", ".join(_f17(v) for v in s.kappa) if s.kappa else "null")
    )
    disks = ", ".join(
        '{"center": %s, "radius": %s}' % (_f17(d.center), _f17(d.radius)) for d in s.disks
    )
    parts.append('  "disks": [%s],' % disks)
    parts.append('  "adjacency": %s,' % json.dumps(np.asarray(s.adjacency).flatten().tolist()))
    edge_rows = []
    for (i, j) in sorted(s.edges):
        em = s.edges[(i, j)]
        m = em.matrix
        edge_rows.append(
            '    {"from": %d, "to": %d, "matrix": [%s, %s, %s, %s], "det": %d, '
            '"offset": %s, "weight": %d}'
            % (i, j, _f17(m.a), _f17(m.b), _f17(m.c), _f17(m.d), m.det, _f17(em.offset), em.weight)
        )
    parts.append('  "edges": [\n%s\n  ]\n}' % ",\n".join(edge_rows))
    return "\n".join(parts)


def scheme_from_json(text: str) -> IfsScheme:
    meat = "\n".join(l for l in text.splitlines() if not l.startswith("#"))
    data = json.loads(meat)
    count = int(math.isqrt(len(data["adjacency"])))
    adj = _freeze(np.array(data["adjacency"], dtype=np.int8).reshape(count, count))
    disks = tuple(Disk(d["center"], d["radius"]) for d in data["disks"])
    edges = {}
    for row in data["edges"]:
        m = Moebius(*row["matrix"], det=row["det"])
        off = float(row["offset"])
        full = compose(translation(off), m) if off != 0.0 else m
        edges[(row["from"], row["to"])] = EdgeMap(
            matrix=m, offset=off, weight=int(row["weight"]), full=full
        )
    return IfsScheme(
        kind=data["kind"],
        disks=disks,
        adjacency=adj,
        edges=edges,
        lengths=tuple(data["lengths"]),
        n=tuple(data["n"]) if data["n"] else None,
        ell=data["ell"],
        kappa=tuple(data["kappa"]) if data["kappa"] else None,
        offset=FLOW_OFFSET if data["kind"] == "flow" else 0.0,
        extended_radius=EXTENDED_RADIUS if data["kind"] == "flow" else None,
    )
