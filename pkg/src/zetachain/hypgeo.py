"""Real Moebius-matrix algebra and hyperbolic trigonometry on the half plane.

All isometries are 2x2 real matrices with determinant +1 or -1 acting on the
extended complex plane.  Translation lengths are always extracted from traces
through the log-form arccosh, never from complex powers of derivatives, so no
branch choices ever enter.  Matrix entries are renormalized once they exceed
1e150 in magnitude; the log of the accumulated factor is carried along so
trace-derived lengths stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    DisksOverlap,
    FixedPointAtInfinity,
    NegativeDeterminant,
    NonpositiveRadius,
    NonpositiveSide,
    NotHyperbolic,
)

_RENORM_THRESHOLD = 1e150
_PARABOLIC_TOL = 1e-12


@dataclass(frozen=True)
class Moebius:
    """A real matrix [[a, b], [c, d]] with unit determinant up to sign.

    ``det`` is the exact sign (+1 or -1).  ``log_scale`` is the log of the
    factor the stored entries were divided by; the represented matrix is
    exp(log_scale) * [[a, b], [c, d]].  The Moebius action itself does not
    see the scale.
    """

    a: float
    b: float
    c: float
    d: float
    det: int = 1
    log_scale: float = 0.0

    def __post_init__(self):
        if self.det not in (-1, 1):
            raise NegativeDeterminant(f"det must be +1 or -1, got {self.det}")
        stored_det = self.a * self.d - self.b * self.c
        target = self.det * math.exp(-2.0 * self.log_scale)
        tol = 1e-12 * max(abs(target), abs(self.a * self.d), abs(self.b * self.c))
        if abs(stored_det - target) > tol:
            raise ValueError(
                f"entries are not unit-determinant: ad-bc={stored_det!r}, expected {target!r}"
            )

    def trace_stored(self) -> float:
        return self.a + self.d

    def log_abs_trace(self) -> float:
        """log of |trace| of the represented matrix; -inf for traceless."""
        t = abs(self.a + self.d)
        if t == 0.0:
            return -math.inf
        return math.log(t) + self.log_scale

    def __call__(self, u):
        """Apply the transformation to a real or complex point (scale-free)."""
        return (self.a * u + self.b) / (self.c * u + self.d)

    def derivative(self, u):
        """Derivative of the action at u: det / (cu+d)^2 in represented units."""
        den = self.c * u + self.d
        return self.det * math.exp(-2.0 * self.log_scale) / (den * den)

    def inverse(self) -> "Moebius":
        s = float(self.det)
        return Moebius(s * self.d, -s * self.b, -s * self.c, s * self.a,
                       det=self.det, log_scale=self.log_scale)


IDENTITY = Moebius(1.0, 0.0, 0.0, 1.0)


def moebius(a: float, b: float, c: float, d: float) -> Moebius:
    """Build a Moebius matrix from raw entries, normalizing |det| to one."""
    raw = a * d - b * c
    if raw == 0.0:
        raise ValueError("singular matrix")
    s = math.sqrt(abs(raw))
    return Moebius(a / s, b / s, c / s, d / s, det=1 if raw > 0 else -1)


def translation(offset: float) -> Moebius:
    return Moebius(1.0, float(offset), 0.0, 1.0)


def compose(m: Moebius, n: Moebius) -> Moebius:
    """Matrix product m*n with determinant signs multiplied.

    Entries are rescaled by the largest absolute entry once it passes 1e150,
    with the log of the factor tracked in ``log_scale``.
    """
    a = m.a * n.a + m.b * n.c
    b = m.a * n.b + m.b * n.d
    c = m.c * n.a + m.d * n.c
    d = m.c * n.b + m.d * n.d
    log_scale = m.log_scale + n.log_scale
    peak = max(abs(a), abs(b), abs(c), abs(d))
    if peak > _RENORM_THRESHOLD:
        a, b, c, d = a / peak, b / peak, c / peak, d / peak
        log_scale += math.log(peak)
    return Moebius(a, b, c, d, det=m.det * n.det, log_scale=log_scale)


def classify(m: Moebius) -> str:
    """One of 'hyperbolic', 'parabolic', 'elliptic' for a det +1 matrix."""
    if m.det != 1:
        raise NegativeDeterminant("classification is undefined for det -1 matrices")
    log_tr = m.log_abs_trace()
    if log_tr > 10 * math.log(10):
        return "hyperbolic"
    abs_tr = math.exp(log_tr) if log_tr > -math.inf else 0.0
    if abs_tr > 2.0 + _PARABOLIC_TOL:
        return "hyperbolic"
    if abs(abs_tr - 2.0) <= _PARABOLIC_TOL:
        return "parabolic"
    return "elliptic"


def _arccosh_half_trace(m: Moebius) -> float:
    """arccosh(|tr|/2) computed through logs, safe for huge traces."""
    t = abs(m.trace_stored()) / 2.0
    ls = m.log_scale
    log_t = math.log(t) + ls
    if log_t > 20 * math.log(10):
        # arccosh(x) = log(2x) + O(x^-2); error below 1e-40 here
        return math.log(2.0) + log_t
    x = math.exp(log_t)
    # (x-1) explicitly to keep precision near the parabolic boundary
    return math.log(x + math.sqrt((x - 1.0) * (x + 1.0)))


def displacement_length(m: Moebius) -> float:
    """Translation length 2*arccosh(|tr|/2) of a hyperbolic det +1 matrix."""
    if classify(m) != "hyperbolic":
        raise NotHyperbolic("displacement length requires a hyperbolic matrix")
    return 2.0 * _arccosh_half_trace(m)


def fixed_point_attracting(m: Moebius) -> tuple[float, float]:
    """Attracting boundary fixed point and the (positive) derivative there.

    The derivative equals exp(-displacement_length(m)).
    """
    if classify(m) != "hyperbolic":
        raise NotHyperbolic("fixed points on the boundary require a hyperbolic matrix")
    if m.c == 0.0:
        raise FixedPointAtInfinity("c = 0: one fixed point sits at infinity")
    # c x^2 + (d-a) x - b = 0, solved in the citardauq-stable form
    A, B, C = m.c, m.d - m.a, -m.b
    disc = B * B - 4.0 * A * C
    if disc <= 0.0:
        raise NotHyperbolic("fixed-point discriminant not positive")
    sq = math.sqrt(disc)
    q = -0.5 * (B + math.copysign(sq, B)) if B != 0.0 else -0.5 * sq
    x1 = q / A
    x2 = C / q
    roots = (x1, x2)
    # attracting <=> |derivative| < 1; compare in logs to dodge over/underflow
    logd = []
    for x in roots:
        den = abs(m.c * x + m.d)
        logd.append(-2.0 * (math.log(den) + m.log_scale) if den > 0 else math.inf)
    i = 0 if logd[0] < logd[1] else 1
    return roots[i], math.exp(logd[i])


def reflection_matrix(center: float, radius: float) -> Moebius:
    """Orientation-reversing involution acting as u -> radius/(u-center) + center.

    Its fixed circle meets the real axis at center +- sqrt(radius); det is -1.
    """
    if radius <= 0.0:
        raise NonpositiveRadius(f"radius must be positive, got {radius}")
    s = math.sqrt(radius)
    mm = float(center)
    return Moebius(mm / s, (radius - mm * mm) / s, 1.0 / s, -mm / s, det=-1)


@dataclass(frozen=True)
class Disk:
    """Euclidean disk with real center; its boundary circle is orthogonal to R."""

    center: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise NonpositiveRadius(f"disk radius must be positive, got {self.radius}")

    @property
    def left(self) -> float:
        return self.center - self.radius

    @property
    def right(self) -> float:
        return self.center + self.radius


def disks_gap(d1: Disk, d2: Disk) -> float:
    """Signed gap between closures; positive iff the closures are disjoint."""
    return abs(d1.center - d2.center) - (d1.radius + d2.radius)


def circle_distance(c1: Disk, c2: Disk) -> float:
    """Hyperbolic distance between the geodesics over two disjoint circles."""
    if disks_gap(c1, c2) <= 0.0:
        raise DisksOverlap("circle closures intersect; distance is degenerate")
    arg = ((c1.center - c2.center) ** 2 - c1.radius ** 2 - c2.radius ** 2) / (
        2.0 * c1.radius * c2.radius
    )
    return math.acosh(arg)


def disk_image(m: Moebius, d: Disk) -> tuple[complex, float]:
    """Exact image (center, radius) of a disk under a Moebius map.

    The pole of the map must lie outside the closed disk.
    """
    if m.c == 0.0:
        lam = m.a / m.d
        return complex(lam * d.center + m.b / m.d), abs(lam) * d.radius
    pole = -m.d / m.c
    t = d.center - pole
    den = t * t - d.radius * d.radius
    if den <= 0.0:
        raise ValueError("pole of the map lies inside the disk")
    # m(u) = A + B/(u - pole) with B = -det * e^{-2 ls} / c^2
    A = m.a / m.c
    B = -m.det * math.exp(-2.0 * m.log_scale) / (m.c * m.c)
    return complex(A + B * t / den), abs(B) * d.radius / den


def hexagon_right_angled(alpha: float, beta: float, gamma: float) -> tuple[float, float, float]:
    """Remaining sides (A, B, C) of the right-angled hexagon a, C, b, A, g, B.

    Uses cosh B = (cosh a cosh b + cosh g) / (sinh a sinh b) and its two
    cyclic permutations.
    """
    for v in (alpha, beta, gamma):
        if v <= 0.0:
            raise NonpositiveSide(f"hexagon sides must be positive, got {v}")
    ca, cb, cg = math.cosh(alpha), math.cosh(beta), math.cosh(gamma)
    sa, sb, sg = math.sinh(alpha), math.sinh(beta), math.sinh(gamma)
    B = math.acosh((ca * cb + cg) / (sa * sb))
    C = math.acosh((cb * cg + ca) / (sb * sg))
    A = math.acosh((cg * ca + cb) / (sg * sa))
    return A, B, C
