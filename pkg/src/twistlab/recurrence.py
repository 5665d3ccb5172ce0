"""Exact region algebra on tori and twisted multiple recurrence on Kronecker systems.

Z^N acts on T^M by a.x = x - tau(a).  Regions are finite unions of
pairwise disjoint boxes whose edges are arcs with exact endpoints, so
translates, intersections and Haar measures are computed exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .bohr import BohrSetSpec, count_window, rational_spectrum_check
from .matgroup import GeneratorSystem, ball
from .reals import Coord, TorusPoint, fixed_of, format_real, mod1, normalize

Interval = tuple   # (lo, hi) with 0 <= lo < hi <= 1


def _norm_interval(lo: Coord, hi: Coord) -> list:
    """Pieces of the arc [lo, hi) reduced into [0, 1); requires 0 < hi - lo <= 1."""
    length = normalize(hi - lo)
    if length >= 1:
        return [(Fraction(0), Fraction(1))]
    s = mod1(lo)
    e = normalize(s + length)
    if e <= 1:
        return [(s, e)]
    return [(s, Fraction(1)), (Fraction(0), normalize(e - 1))]


@dataclass(frozen=True)
class Region:
    """Finite union of disjoint boxes in T^M; each box is a tuple of intervals."""

    dim: int
    boxes: tuple

    @classmethod
    def from_arcs(cls, arcs) -> "Region":
        per_coord = [_norm_interval(normalize(a.center - a.radius), normalize(a.center + a.radius))
                     for a in arcs]
        boxes = [()]
        for pieces in per_coord:
            boxes = [b + (iv,) for b in boxes for iv in pieces]
        return cls(len(arcs), tuple(boxes))

    @classmethod
    def from_intervals(cls, intervals: Sequence[tuple]) -> "Region":
        """Product of arcs [lo, hi) given by endpoints, one per coordinate."""
        per_coord = [_norm_interval(normalize(lo), normalize(hi)) for lo, hi in intervals]
        boxes = [()]
        for pieces in per_coord:
            boxes = [b + (iv,) for b in boxes for iv in pieces]
        return cls(len(intervals), tuple(boxes))

    @classmethod
    def empty(cls, dim: int) -> "Region":
        return cls(dim, ())

    def measure(self) -> Coord:
        total = Fraction(0)
        for box in self.boxes:
            vol = Fraction(1)
            for lo, hi in box:
                vol = normalize(vol * normalize(hi - lo)) if isinstance(vol, Fraction) \
                    else normalize(normalize(hi - lo) * vol)
            total = normalize(total + vol)
        return total

    def canonical(self) -> list:
        """Boxes sorted, for comparing regions built in different orders."""
        return sorted(self.boxes, key=lambda b: tuple(float(x) for iv in b for x in iv))

    def contains(self, x: TorusPoint) -> bool:
        return any(all(lo <= c < hi for c, (lo, hi) in zip(x.coords, box)) for box in self.boxes)

    def describe(self) -> list:
        return [[(format_real(lo), format_real(hi)) for lo, hi in box] for box in self.boxes]


def region_translate(R: Region, t: TorusPoint) -> Region:
    """R + t mod 1, splitting intervals that wrap."""
    if t.dim != R.dim:
        raise ValueError(f"translating a region in T^{R.dim} by a point of T^{t.dim}")
    out = []
    for box in R.boxes:
        pieces = [_norm_interval(normalize(lo + s), normalize(hi + s))
                  for (lo, hi), s in zip(box, t.coords)]
        acc = [()]
        for p in pieces:
            acc = [b + (iv,) for b in acc for iv in p]
        out.extend(acc)
    return Region(R.dim, tuple(out))


def _meet(iv1, iv2):
    lo = iv1[0] if iv1[0] >= iv2[0] else iv2[0]
    hi = iv1[1] if iv1[1] <= iv2[1] else iv2[1]
    return (lo, hi) if lo < hi else None


def region_intersect(R1: Region, R2: Region) -> Region:
    if R1.dim != R2.dim:
        raise ValueError("regions live on tori of different dimension")
    out = []
    for b1 in R1.boxes:
        for b2 in R2.boxes:
            box = []
            for iv1, iv2 in zip(b1, b2):
                m = _meet(iv1, iv2)
                if m is None:
                    break
                box.append(m)
            else:
                out.append(tuple(box))
    return Region(R1.dim, tuple(out))


def intersect_translates(U: Region, shifts: Sequence[TorusPoint]) -> Region:
    """The intersection over t of U - t (all of U when no shifts are given)."""
    out = None
    for t in shifts:
        piece = region_translate(U, TorusPoint(tuple(normalize(-c) for c in t.coords)))
        out = piece if out is None else region_intersect(out, piece)
    return U if out is None else out


# twisted recurrence --------------------------------------------------------------

def torus_distance(x: TorusPoint, bits: int = 128) -> int:
    """max over coordinates of the distance to 0, in units of 2**-bits (approximate)."""
    mod = 1 << bits
    out = 0
    for c in x.coords:
        v, _ = fixed_of(c, bits)
        v %= mod
        out = max(out, min(v, mod - v))
    return out


@dataclass
class RecurrenceResult:
    words: list                  # one generator word per a_j
    shifts: list                 # tau(gamma_j a_j)
    achieved: Coord              # exact measure of the intersection of (gamma_j a_j).U
    u_measure: Coord
    m: int
    eps: Fraction
    L: int
    best_L: int
    spectrum: str
    history: list = field(default_factory=list)   # (L', achieved as float)

    @property
    def bound(self) -> float:
        return float(self.u_measure) ** self.m - float(self.eps)

    @property
    def success(self) -> bool:
        return float(self.achieved) >= self.bound


def _word_key(word, order):
    return (len(word), tuple(order[x] for x in word))


def twisted_recurrence_search(spec: BohrSetSpec, a_list: Sequence[Sequence[int]],
                              gens: GeneratorSystem, L: int, eps=Fraction(1, 100),
                              spectrum_H: int = 20) -> RecurrenceResult:
    """Pick gamma_j in the ball of radius L' <= L with tau(gamma_j a_j) nearest 0.

    For every L' the greedy choice is scored by the exact measure of the
    intersection of U - tau(gamma_j a_j); the best L' is kept, so the result
    never gets worse as L grows.  Ties go to the shortlex-smallest word.
    """
    system = spec.system
    if gens.dim != system.N:
        raise ValueError(f"{gens.dim}x{gens.dim} generators acting on Z^{system.N}")
    a_list = [tuple(int(x) for x in a) for a in a_list]
    if not a_list:
        raise ValueError("need at least one vector a_j")
    eps = normalize(eps)
    spectrum = str(rational_spectrum_check(system, spectrum_H))
    U = Region.from_arcs(spec.arcs)
    nu = U.measure()
    order = {lab: i for i, lab in enumerate(gens.labels)}
    B = ball(gens, L)
    # best element per (j, radius), swept in increasing word length
    elements = sorted(B.words.items(), key=lambda kv: _word_key(kv[1], order))
    best = [None] * len(a_list)
    result = None
    history = []
    idx = 0
    for radius in range(L + 1):
        while idx < len(elements) and len(elements[idx][1]) <= radius:
            g, word = elements[idx]
            idx += 1
            for j, a in enumerate(a_list):
                t = system.image(g @ a)
                key = (torus_distance(t), _word_key(word, order))
                if best[j] is None or key < best[j][0]:
                    best[j] = (key, word, t)
        shifts = [b[2] for b in best]
        achieved = intersect_translates(U, shifts).measure()
        history.append((radius, float(achieved)))
        if result is None or achieved > result.achieved:
            result = RecurrenceResult([b[1] for b in best], shifts, achieved, nu,
                                      len(a_list), eps, L, radius, spectrum)
    result.history = history
    return result


def recompute_measure(spec: BohrSetSpec, gens: GeneratorSystem, a_list, words) -> Coord:
    """Independent recomputation of the achieved measure from the recorded words."""
    shifts = [spec.system.image(gens.word(w) @ tuple(a)) for a, w in zip(a_list, words)]
    return intersect_translates(Region.from_arcs(spec.arcs), shifts).measure()


# correspondence principle ---------------------------------------------------------

@dataclass
class CrosscheckReport:
    n: int
    shifts: list                 # integer vectors c_j
    count: int
    boundary: int
    ratio: Fraction
    exact: Coord
    slack: float
    warning: str = ""

    @property
    def gap(self) -> float:
        return abs(float(self.ratio) - float(self.exact))

    @property
    def ok(self) -> bool:
        return self.gap <= self.slack


def correspondence_crosscheck(spec: BohrSetSpec, shifts: Sequence[Sequence[int]], n: int,
                              slack: float = 0.02) -> CrosscheckReport:
    """Window density of the intersection of E - c_j against the exact measure.

    The count tests a + c_j in E directly for every a in [-n, n]^N, so it is
    independent of the region algebra used for the exact side.
    """
    if n <= 0:
        raise ValueError("window radius n must be positive")
    shifts = [tuple(int(x) for x in c) for c in shifts]
    N = spec.N
    lo, hi = (-n,) * N, (n,) * N
    count, boundary = count_window(spec, lo, hi, shifts or None)
    images = [spec.system.image(c) for c in shifts]
    exact = intersect_translates(Region.from_arcs(spec.arcs), images).measure()
    warning = ""
    if n < 1000:
        slack = max(slack, 10.0 / n)
        warning = f"n = {n} is small; slack widened to {slack:.3g}"
    return CrosscheckReport(n, shifts, count, boundary,
                            Fraction(count, (2 * n + 1) ** N), exact, slack, warning)


__all__ = [
    "Region", "region_translate", "region_intersect", "intersect_translates", "torus_distance",
    "RecurrenceResult", "twisted_recurrence_search", "recompute_measure", "CrosscheckReport",
    "correspondence_crosscheck",
]
