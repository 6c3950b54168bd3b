"""Symbolic dynamics over a scheme's adjacency.

Closed words are enumerated per word length (number of transitions), reduced
to cyclic classes, and compiled into an orbit database of (length, weight)
records.  Lengths always come from traces of the composed word matrices, so
V_w(u_w) / (1 - phi_w'(u_w)) later reduces exactly to
z^{n_w} e^{-s l_w} / (1 - e^{-l_w}) without any complex-power branch choice.

The compile path is vectorized: word symbol rows are packed into 3-bit
integer keys, so cyclic reduction (canonical rotation, period, class size)
runs on whole length buckets at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, NotClosed, NotHyperbolic, WrongKind
from .hypgeo import compose, displacement_length
from .schemes import IfsScheme

ENUMERATION_CAP = 20


@dataclass(frozen=True)
class Word:
    """Symbol path w_0..w_n; its length is the number of transitions n."""

    symbols: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.symbols) - 1

    @property
    def closed(self) -> bool:
        return self.symbols[0] == self.symbols[-1]

    def shifted_left(self) -> "Word":
        w = self.symbols
        return Word(w[1:] + (w[1],))

    def repeated(self, k: int) -> "Word":
        cyc = self.symbols[:-1]
        return Word(cyc * k + (self.symbols[0],))


@dataclass(frozen=True)
class OrbitRecord:
    word_length: int
    length: float       # geodesic length l_w
    weight: int         # winding weight n_w
    prime: bool
    class_size: int     # number of distinct cyclic shifts
    rep_index: int      # k with w = v^k for prime v


@dataclass(frozen=True)
class LengthBucket:
    n: int
    lengths: np.ndarray      # per cyclic class
    weights: np.ndarray
    class_sizes: np.ndarray
    primes: np.ndarray       # bool
    rep_indices: np.ndarray
    word_count: int          # total closed words = trace(A^n)

    @property
    def amplitudes(self) -> np.ndarray:
        """class_size / (1 - e^{-l}); cached since it is s,z-independent."""
        cached = getattr(self, "_amplitudes", None)
        if cached is None:
            cached = self.class_sizes / (-np.expm1(-self.lengths))
            object.__setattr__(self, "_amplitudes", cached)
        return cached

    def records(self):
        for i in range(len(self.lengths)):
            yield OrbitRecord(
                word_length=self.n,
                length=float(self.lengths[i]),
                weight=int(self.weights[i]),
                prime=bool(self.primes[i]),
                class_size=int(self.class_sizes[i]),
                rep_index=int(self.rep_indices[i]),
            )


@dataclass(frozen=True)
class OrbitDatabase:
    kind: str
    n_max: int
    buckets: dict            # word length -> LengthBucket (missing if empty)
    meta: dict               # scheme provenance: kind, lengths, n, ell

    def bucket(self, n: int) -> LengthBucket | None:
        return self.buckets.get(n)

    def records(self):
        for n in sorted(self.buckets):
            yield from self.buckets[n].records()

    def csv_rows(self):
        for r in self.records():
            yield (r.word_length, r.length, r.weight, r.class_size, r.prime, r.rep_index)

    def record_stream(self) -> bytes:
        lines = ["word_length,l_w,weight,class_size,prime,rep_index"]
        for n, l, w, cs, p, k in self.csv_rows():
            lines.append(f"{n},{format(l, '.17g')},{w},{cs},{int(p)},{k}")
        return ("\n".join(lines) + "\n").encode()


def enumerate_closed(s: IfsScheme, n: int, cap: int = ENUMERATION_CAP) -> list[Word]:
    """All adjacency-valid closed words of length n, in lexicographic order."""
    if not 1 <= n <= cap:
        raise CapExceeded(f"word length {n} outside 1..{cap}")
    adj = np.asarray(s.adjacency)
    succ = {i: s.successors(i) for i in range(1, s.symbol_count + 1)}
    out = []

    def walk(path):
        if len(path) == n:
            if adj[path[-1] - 1, path[0] - 1]:
                out.append(Word(tuple(path) + (path[0],)))
            return
        for j in succ[path[-1]]:
            path.append(j)
            walk(path)
            path.pop()

    for start in range(1, s.symbol_count + 1):
        walk([start])
    return out


def _word_cycle_period(cycle: tuple[int, ...]) -> int:
    n = len(cycle)
    for p in range(1, n):
        if n % p == 0 and cycle[p:] + cycle[:p] == cycle:
            return p
    return n


def orbit_record(s: IfsScheme, w: Word) -> OrbitRecord:
    """Length, weight and cyclic-class data of one closed word."""
    if not w.closed:
        raise NotClosed(f"word {w.symbols} does not return to its start symbol")
    adj = np.asarray(s.adjacency)
    mat = None
    wsum = 0
    for a, b in zip(w.symbols, w.symbols[1:]):
        if not adj[a - 1, b - 1]:
            raise ValueError(f"transition {a}->{b} is not allowed by the adjacency")
        em = s.edge(a, b)
        mat = em.full if mat is None else compose(em.full, mat)
        wsum += em.weight
    length = displacement_length(mat)
    if wsum % 2 != 0:
        raise NotHyperbolic(f"odd edge-weight sum {wsum} on a closed word; broken scheme")
    cycle = w.symbols[:-1]
    p = _word_cycle_period(cycle)
    return OrbitRecord(
        word_length=w.length,
        length=length,
        weight=wsum // 2,
        prime=(p == w.length),
        class_size=p,
        rep_index=w.length // p,
    )


# -- vectorized closed-word compilation ----------------------------------------


def _edge_arrays(s: IfsScheme):
    mats, weights = {}, {}
    for (i, j), em in s.edges.items():
        f = em.full
        mats[(i, j)] = np.array([[f.a, f.b], [f.c, f.d]])
        weights[(i, j)] = em.weight
    return mats, weights


def _closed_word_block(s: IfsScheme, n: int):
    """(symbols (M, n), lengths (M,), weights (M,)) over all closed words."""
    N = s.symbol_count
    mats, wts = _edge_arrays(s)
    syms = np.arange(1, N + 1, dtype=np.int8).reshape(-1, 1)
    prod = np.broadcast_to(np.eye(2), (N, 2, 2)).copy()
    logsc = np.zeros(N)
    wsum = np.zeros(N, dtype=np.int64)

    adj = np.asarray(s.adjacency)
    for step in range(n):
        last = syms[:, -1]
        final = step == n - 1
        pieces, mat_pieces, log_pieces, w_pieces = [], [], [], []
        for i in range(1, N + 1):
            sel = np.nonzero(last == i)[0]
            if sel.size == 0:
                continue
            for j in s.successors(i):
                if final:
                    keep = sel[syms[sel, 0] == j]
                    if keep.size == 0:
                        continue
                    mat_pieces.append(np.einsum("ab,nbc->nac", mats[(i, j)], prod[keep]))
                    log_pieces.append(logsc[keep])
                    w_pieces.append(wsum[keep] + wts[(i, j)])
                    pieces.append(syms[keep])
                else:
                    mat_pieces.append(np.einsum("ab,nbc->nac", mats[(i, j)], prod[sel]))
                    log_pieces.append(logsc[sel])
                    w_pieces.append(wsum[sel] + wts[(i, j)])
                    pieces.append(
                        np.concatenate(
                            [syms[sel], np.full((sel.size, 1), j, dtype=np.int8)], axis=1
                        )
                    )
        if not pieces:
            return (np.empty((0, n), dtype=np.int8), np.empty(0), np.empty(0, dtype=np.int64))
        syms = np.concatenate(pieces)
        prod = np.concatenate(mat_pieces)
        logsc = np.concatenate(log_pieces)
        wsum = np.concatenate(w_pieces)
        peak = np.abs(prod).reshape(len(prod), 4).max(axis=1)
        big = peak > 1e100
        if np.any(big):
            prod[big] /= peak[big, None, None]
            logsc[big] += np.log(peak[big])

    tr_half = np.abs(prod[:, 0, 0] + prod[:, 1, 1]) / 2.0
    if np.any(tr_half <= 0.0):
        raise NotHyperbolic("traceless word matrix encountered")
    log_t = np.log(tr_half) + logsc
    x = np.exp(np.minimum(log_t, 46.0))
    under = (x - 1.0) * (x + 1.0)
    if np.any((log_t <= 46.0) & (under <= 0.0)):
        raise NotHyperbolic("non-hyperbolic word matrix encountered; broken scheme")
    lengths = np.where(
        log_t > 46.0,
        2.0 * (math.log(2.0) + log_t),
        2.0 * np.log(x + np.sqrt(np.maximum(under, 0.0))),
    )
    if np.any(wsum % 2 != 0):
        raise NotHyperbolic("odd edge-weight sum on a closed word; broken scheme")
    return syms, lengths, wsum // 2


def _rotation_keys(syms: np.ndarray) -> np.ndarray:
    """3-bit-packed keys of all rotations; shape (n, M)."""
    M, n = syms.shape
    sy = syms.astype(np.uint64)
    keys = np.zeros((n, M), dtype=np.uint64)
    for r in range(n):
        k = np.zeros(M, dtype=np.uint64)
        for t in range(n):
            k = (k << np.uint64(3)) | sy[:, (r + t) % n]
        keys[r] = k
    return keys


def _reduce_to_classes(syms, lengths, weights):
    """Group rotations; returns per-class arrays sorted by (l, w, key)."""
    M, n = syms.shape
    if M == 0:
        return None
    keys = _rotation_keys(syms)
    canon = keys.min(axis=0)
    period = np.full(M, n, dtype=np.int64)
    divisors = [p for p in range(1, n) if n % p == 0]
    for p in reversed(divisors):
        period[keys[p] == keys[0]] = p
    uniq, first, counts = np.unique(canon, return_index=True, return_counts=True)
    cls_len = lengths[first]
    cls_w = weights[first]
    cls_p = period[first]
    if not np.array_equal(counts, cls_p):
        raise RuntimeError("cyclic class sizes disagree with rotation periods")
    order = np.lexsort((uniq, cls_w, cls_len))
    return (
        cls_len[order],
        cls_w[order],
        cls_p[order],
        (cls_p[order] == n),
        n // cls_p[order],
        int(M),
    )


def _adjacency_power_trace(adj: np.ndarray, n: int) -> int:
    a = np.asarray(adj, dtype=np.int64)
    p = np.eye(len(a), dtype=np.int64)
    for _ in range(n):
        p = p @ a
    return int(np.trace(p))


def compile_database(s: IfsScheme, n_max: int, cap: int = ENUMERATION_CAP) -> OrbitDatabase:
    """One OrbitRecord per cyclic class for every word length up to n_max.

    Per-length totals are checked against trace(A^n) exactly; records are
    sorted by (word_length, l_w, weight, canonical key) so that summation
    order, and therefore every downstream zeta value, is reproducible bit
    for bit.
    """
    if n_max > cap:
        raise CapExceeded(f"n_max {n_max} exceeds enumeration cap {cap}")
    buckets = {}
    for n in range(1, n_max + 1):
        syms, lengths, weights = _closed_word_block(s, n)
        expected = _adjacency_power_trace(s.adjacency, n)
        if len(syms) != expected:
            raise RuntimeError(
                f"closed-word count {len(syms)} at length {n} disagrees with trace(A^n)={expected}"
            )
        reduced = _reduce_to_classes(syms, lengths, weights)
        if reduced is None:
            continue
        cls_len, cls_w, cls_sz, cls_prime, cls_rep, word_count = reduced
        if int(cls_sz.sum()) != expected:
            raise RuntimeError("class sizes do not add up to the closed-word count")
        buckets[n] = LengthBucket(
            n=n,
            lengths=cls_len,
            weights=cls_w,
            class_sizes=cls_sz,
            primes=cls_prime,
            rep_indices=cls_rep,
            word_count=word_count,
        )
    meta = {
        "kind": s.kind,
        "lengths": tuple(s.lengths),
        "n": tuple(s.n) if s.n else None,
        "ell": s.ell,
    }
    return OrbitDatabase(kind=s.kind, n_max=n_max, buckets=buckets, meta=meta)


def class_census(s: IfsScheme, n: int, cap: int = ENUMERATION_CAP) -> dict[int, int]:
    """Closed-word counts (not classes) of length n per total winding weight."""
    if s.kind != "flow":
        raise WrongKind("the weight census is defined for flow-adapted schemes only")
    if n > cap:
        raise CapExceeded(f"word length {n} exceeds enumeration cap {cap}")
    _, _, weights = _closed_word_block(s, n)
    out = {}
    for w in weights:
        out[int(w)] = out.get(int(w), 0) + 1
    return out


@dataclass(frozen=True)
class SpectrumEntry:
    length: float
    weight: int | None
    count: int


def length_spectrum(s: IfsScheme, l_max: float, cap: int = ENUMERATION_CAP):
    """Primitive geodesic lengths up to l_max with oriented multiplicities.

    Word lengths are extended until two consecutive lengths produce nothing
    below l_max; entries with equal weight and lengths within
    1e-9 * (1 + l) are aggregated, never deduplicated further.
    """
    raw = []
    prev_min = -math.inf
    n = 0
    while True:
        n += 1
        if n > cap:
            raise CapExceeded(
                f"length spectrum up to {l_max} needs word lengths beyond the cap {cap}"
            )
        syms, lengths, weights = _closed_word_block(s, n)
        reduced = _reduce_to_classes(syms, lengths, weights)
        cur_min = math.inf
        if reduced is not None:
            cls_len, cls_w, _, cls_prime, _, _ = reduced
            cur_min = float(cls_len.min())
            sel = cls_prime & (cls_len <= l_max)
            for l, w in zip(cls_len[sel], cls_w[sel]):
                raw.append((float(l), int(w)))
        if prev_min > l_max and cur_min > l_max:
            break
        prev_min = cur_min

    raw.sort()
    entries = []
    for l, w in raw:
        if (
            entries
            and entries[-1].weight == (w if s.kind == "flow" else None)
            and abs(entries[-1].length - l) <= 1e-9 * (1.0 + l)
        ):
            last = entries[-1]
            entries[-1] = SpectrumEntry(last.length, last.weight, last.count + 1)
        else:
            entries.append(SpectrumEntry(l, w if s.kind == "flow" else None, 1))
    return entries
