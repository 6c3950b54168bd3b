"""Zeros of the truncated zeta in rectangular windows of the s-plane.

Roots are found by Newton iteration from a grid of seeds, deduplicated,
closed under conjugation, and optionally re-verified by an argument-principle
contour count.  All evaluations go through one fixed truncation order per
run, so results are reproducible for identical settings.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContourTooCloseToZero,
    NonIntegerResult,
    NoSignChange,
)
from .symdyn import OrbitDatabase
from .zeta import default_order, evaluate, evaluate_many


@dataclass(frozen=True)
class Window:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"degenerate window {self}")

    def contains(self, s: complex, pad: float = 0.0) -> bool:
        return (
            self.re_min - pad <= s.real <= self.re_max + pad
            and self.im_min - pad <= s.imag <= self.im_max + pad
        )

    def scaled(self, factor: float) -> "Window":
        return Window(
            self.re_min * factor, self.re_max * factor,
            self.im_min * factor, self.im_max * factor,
        )

    def expanded(self, by) -> "Window":
        """Outward expansion; `by` is a scalar or (left, right, bottom, top)."""
        if np.isscalar(by):
            by = (by, by, by, by)
        return Window(
            self.re_min - by[0], self.re_max + by[1],
            self.im_min - by[2], self.im_max + by[3],
        )

    def as_tuple(self):
        return (self.re_min, self.re_max, self.im_min, self.im_max)


@dataclass
class RootOptions:
    order: int | None = None
    adaptive: bool = True
    grid_h: float | None = None      # default min(0.1, 0.5 / ell)
    newton_tol: float = 1e-12
    max_iter: int = 50
    accept_tol: float = 1e-10
    dedupe_radius: float = 1e-8
    seed_margin: float = 2.0         # in units of grid_h
    verify: bool = True
    z: complex = 1.0
    threads: int = 1


@dataclass(frozen=True)
class ResonanceEntry:
    s: complex
    residual: float
    newton_iters: int
    verified: bool
    # the zeta function also vanishes at the nonpositive integers for
    # non-spectral reasons; such roots are reported but flagged
    possibly_topological: bool = False


def _near_nonpositive_integer(s: complex, radius: float = 1e-2) -> bool:
    m = round(s.real)
    return m <= 0 and abs(s - m) < radius


@dataclass
class ResonanceSet:
    entries: list
    window: Window
    settings: dict
    seed_failures: list = field(default_factory=list)

    def positions(self):
        return [e.s for e in self.entries]


def _effective_ell(db: OrbitDatabase) -> float:
    if db.meta.get("ell"):
        return float(db.meta["ell"])
    return float(max(db.meta.get("lengths", (1.0,))))


def _resolve_order(db, order, adaptive, probes, z):
    if order is not None:
        return order
    if not adaptive:
        return default_order(db)
    best = default_order(db)
    for s in probes:
        best = max(best, evaluate(db, s, z, adaptive=True).order)
    return best


def find_resonances(db: OrbitDatabase, w: Window, opts: RootOptions | None = None) -> ResonanceSet:
    """Newton search over a seed grid covering `w` with a 2h margin.

    Accepted roots lie inside the window with |F| below the acceptance
    tolerance; the set is deduplicated, conjugate-closed, and (optionally)
    each root is re-verified by a contour count on a radius-1e-4 circle.
    """
    opts = opts or RootOptions()
    h = opts.grid_h if opts.grid_h is not None else min(0.1, 0.5 / _effective_ell(db))
    probes = [
        complex(w.re_min, w.im_min), complex(w.re_max, w.im_max),
        complex(w.re_min, w.im_max), complex(w.re_max, w.im_min),
        complex(0.5 * (w.re_min + w.re_max), 0.5 * (w.im_min + w.im_max)),
    ]
    order = _resolve_order(db, opts.order, opts.adaptive, probes, opts.z)

    pad = opts.seed_margin * h
    res = np.arange(w.re_min - pad, w.re_max + pad + 0.5 * h, h)
    ims = np.arange(w.im_min - pad, w.im_max + pad + 0.5 * h, h)
    seeds = [complex(a, b) for a in res for b in ims]

    center = complex(0.5 * (w.re_min + w.re_max), 0.5 * (w.im_min + w.im_max))
    escape = 2.0 * abs(complex(w.re_max - w.re_min, w.im_max - w.im_min)) + 1.0

    def newton_block(block):
        """Vectorized Newton over one seed block; per-seed trajectories are
        independent elementwise ops, so blocking does not change results."""
        cur = np.array(block, dtype=complex)
        n_seeds = len(cur)
        state = np.zeros(n_seeds, dtype=np.int8)  # 0 running, 1 conv, 2 fail, 3 dv0
        iters = np.zeros(n_seeds, dtype=np.int64)
        for it in range(1, opts.max_iter + 1):
            idx = np.nonzero(state == 0)[0]
            if idx.size == 0:
                break
            vals, derivs = evaluate_many(db, cur[idx], opts.z, n_max=order)
            bad = ~(np.isfinite(vals) & np.isfinite(derivs))
            dv0 = (derivs == 0) & ~bad
            state[idx[bad]] = 2
            state[idx[dv0]] = 3
            ok = ~(bad | dv0)
            step = np.zeros_like(vals)
            step[ok] = vals[ok] / derivs[ok]
            cur[idx[ok]] -= step[ok]
            conv = ok & (np.abs(step) < opts.newton_tol)
            state[idx[conv]] = 1
            iters[idx[conv]] = it
            gone = ok & ~conv & (np.abs(cur[idx] - center) > escape)
            state[idx[gone]] = 2
        return cur, state, iters

    if opts.threads > 1 and len(seeds) > opts.threads:
        blocks = np.array_split(np.array(seeds, dtype=complex), opts.threads)
        with ThreadPoolExecutor(max_workers=opts.threads) as ex:
            parts = list(ex.map(newton_block, [b.tolist() for b in blocks]))
        cur = np.concatenate([p[0] for p in parts])
        state = np.concatenate([p[1] for p in parts])
        iters = np.concatenate([p[2] for p in parts])
    else:
        cur, state, iters = newton_block(seeds)

    failures = [
        (seeds[i], "derivative vanished") for i in np.nonzero(state == 3)[0]
    ]
    candidates = []
    conv_idx = np.nonzero(state == 1)[0]
    inside = [i for i in conv_idx if w.contains(complex(cur[i]))]
    if inside:
        resids, _ = evaluate_many(db, cur[inside], opts.z, n_max=order)
        for i, resid in zip(inside, np.abs(resids)):
            if resid < opts.accept_tol:
                candidates.append((complex(cur[i]), float(resid), int(iters[i])))

    candidates.sort(key=lambda t: (t[0].real, t[0].imag, t[1]))
    kept = []
    for s, resid, iters in candidates:
        dup = None
        for k, (s2, resid2, _) in enumerate(kept):
            if abs(s - s2) < opts.dedupe_radius:
                dup = k
                break
        if dup is None:
            kept.append((s, resid, iters))
        elif resid < kept[dup][1]:
            kept[dup] = (s, resid, iters)

    # conjugate closure: the coefficients are real, so roots pair up
    extra = []
    for s, resid, iters in kept:
        sc = s.conjugate()
        if abs(s.imag) > opts.dedupe_radius and w.contains(sc):
            if all(abs(sc - s2) >= opts.dedupe_radius for s2, _, _ in kept + extra):
                resid_c = abs(evaluate(db, sc, opts.z, n_max=order, check_partition=False).value)
                extra.append((sc, resid_c, iters))
    kept += extra
    kept.sort(key=lambda t: (t[0].real, t[0].imag))

    entries = []
    for s, resid, iters in kept:
        verified = False
        if opts.verify:
            try:
                verified = count_zeros_contour(db, s, 1e-4, order=order, z=opts.z) >= 1
            except (ContourTooCloseToZero, NonIntegerResult):
                verified = False
        entries.append(ResonanceEntry(s=s, residual=resid, newton_iters=iters,
                                      verified=verified,
                                      possibly_topological=_near_nonpositive_integer(s)))
    settings = {
        "order": order,
        "grid_h": h,
        "newton_tol": opts.newton_tol,
        "accept_tol": opts.accept_tol,
        "dedupe_radius": opts.dedupe_radius,
        "z": opts.z,
        "verify": opts.verify,
    }
    return ResonanceSet(entries=entries, window=w, settings=settings,
                        seed_failures=failures)


def count_zeros_contour(
    db: OrbitDatabase, center: complex, radius: float,
    order: int | None = None, z: complex = 1.0,
) -> int:
    """(1/2 pi i) * contour integral of F'/F over a circle, rounded.

    Trapezoid nodes double from 256 until two successive roundings agree and
    the raw value sits within 0.05 of that integer.
    """
    order = order if order is not None else default_order(db)
    prev_round = None
    nodes = 256
    while nodes <= 8192:
        theta = np.linspace(0.0, 2.0 * math.pi, nodes, endpoint=False)
        ring = center + radius * np.exp(1j * theta)
        vals, deriv = evaluate_many(db, ring, z, n_max=order)
        if not np.all(np.isfinite(vals)) or not np.all(np.isfinite(deriv)):
            raise NonIntegerResult(f"non-finite zeta values on the contour at {center}")
        if float(np.min(np.abs(vals))) <= 1e-8:
            raise ContourTooCloseToZero(
                f"|F| dips to {np.min(np.abs(vals)):.3g} on the contour at {center}"
            )
        raw = float(np.mean(deriv / vals * (ring - center)).real)
        rounded = round(raw)
        if prev_round is not None and rounded == prev_round and abs(raw - rounded) < 0.05:
            if rounded < 0:
                raise NonIntegerResult(f"negative winding {rounded} around {center}")
            return int(rounded)
        prev_round = rounded
        nodes *= 2
    raise NonIntegerResult(f"contour count failed to settle around {center}")


def find_delta(db: OrbitDatabase, order: int | None = None, scan_step: float = 0.002) -> float:
    """Largest real zero of F on (0, 1], by sign-change bisection plus Newton."""
    order = order if order is not None else default_order(db)

    def f(x: float) -> float:
        return evaluate(db, complex(x, 0.0), 1.0, n_max=order, check_partition=False).value.real

    grid = np.arange(1.0, 1e-4, -scan_step)
    scan_vals = evaluate_many(db, grid.astype(complex), 1.0, n_max=order)[0].real
    prev_x, prev_v = None, None
    for x, v in zip(grid, scan_vals):
        x, v = float(x), float(v)
        if prev_v is not None and (v == 0.0 or (prev_v > 0) != (v > 0)):
            lo, hi = float(x), prev_x
            flo = v
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                fm = f(mid)
                if (fm > 0) == (flo > 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
                if hi - lo < 1e-13:
                    break
            s = 0.5 * (lo + hi)
            for _ in range(50):
                r = evaluate(db, complex(s, 0.0), 1.0, n_max=order, check_partition=False)
                if r.s_derivative.real == 0:
                    break
                step = r.value.real / r.s_derivative.real
                s -= step
                if abs(step) < 1e-12:
                    break
            return float(s)
        prev_x, prev_v = float(x), v
    raise NoSignChange(
        "no sign change of the truncated zeta on (0, 1]; "
        "the truncation order may be too low for this geometry"
    )
