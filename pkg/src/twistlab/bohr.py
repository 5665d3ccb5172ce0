"""Kronecker systems, Bohr sets and window densities.

A Kronecker system is a homomorphism tau: Z^N -> T^M given by an M x N
matrix of torus coordinates; a Bohr set is tau^-1(U) for a box U of open
arcs.  Membership is decided with an explicit error bound: points whose
image lies within that bound of an arc endpoint are reported as
``BOUNDARY`` rather than guessed, and every search treats them as absent.

Window scans run on 64-bit fixed-point images (exact wrap-around
arithmetic mod 1) and re-check any point near an endpoint at full
precision, so the result always agrees with :func:`member`.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .reals import (DEFAULT_BITS, GOLDEN, ONE, SQRT2M1, Coord, HPReal, TorusPoint,
                    fixed_of, format_real, lin_comb, mod1, normalize)

_U64 = 1 << 64


class Status(enum.Enum):
    IN = "in"
    OUT = "out"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class Membership:
    status: Status
    delta: float = 0.0   # numeric uncertainty when status is BOUNDARY

    def __bool__(self):
        return self.status is Status.IN


IN = Membership(Status.IN)
OUT = Membership(Status.OUT)


@dataclass(frozen=True)
class KroneckerSystem:
    """tau(a) = tau_matrix @ a mod 1, with tau given as M rows of N coordinates."""

    tau: tuple

    def __post_init__(self):
        rows = tuple(tuple(normalize(x) for x in row) for row in self.tau)
        if not rows or len({len(r) for r in rows}) != 1 or not rows[0]:
            raise ValueError("tau must be a non-empty rectangular M x N array")
        object.__setattr__(self, "tau", rows)

    @property
    def M(self) -> int:
        return len(self.tau)

    @property
    def N(self) -> int:
        return len(self.tau[0])

    def image(self, a: Sequence[int]) -> TorusPoint:
        if len(a) != self.N:
            raise ValueError(f"vector of length {len(a)} for tau on Z^{self.N}")
        return TorusPoint(tuple(lin_comb(a, row) for row in self.tau))

    def column(self, i: int) -> TorusPoint:
        return TorusPoint(tuple(row[i] for row in self.tau))

    def is_exact_row(self, r: int) -> bool:
        return all(isinstance(x, Fraction) for x in self.tau[r])

    def fixed(self, bits: int) -> list:
        """Per entry (value mod 2**bits, error) in units of 2**-bits."""
        mod = 1 << bits
        return [[(v % mod, e) for v, e in (fixed_of(x, bits) for x in row)]
                for row in self.tau]

    def describe(self) -> list:
        return [[format_real(x) for x in row] for row in self.tau]


@dataclass(frozen=True)
class Arc:
    """Open arc {x : dist(x, center) < radius} on R/Z, 0 < radius < 1/2."""

    center: Coord
    radius: Coord

    def __post_init__(self):
        c, r = mod1(self.center), normalize(self.radius)
        if not (0 < r < Fraction(1, 2)):
            raise ValueError(f"arc radius must lie in (0, 1/2), got {format_real(r)}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    @classmethod
    def interval(cls, lo, hi) -> "Arc":
        lo, hi = normalize(lo), normalize(hi)
        return cls(normalize((lo + hi) * Fraction(1, 2)), normalize((hi - lo) * Fraction(1, 2)))

    @property
    def length(self) -> Coord:
        return normalize(2 * self.radius)

    def distance_to_zero(self) -> Coord:
        c = self.center
        return c if c <= Fraction(1, 2) else normalize(1 - c)

    @property
    def contains_zero(self) -> bool:
        return self.distance_to_zero() < self.radius

    def __str__(self):
        return f"({format_real(self.center)} +- {format_real(self.radius)})"


class WindowSet:
    """Interface shared by every set source used in density and pattern searches."""

    N: int

    def contains(self, a: Sequence[int]) -> bool:
        raise NotImplementedError

    def members(self, lo: Sequence[int], hi: Sequence[int]) -> list:
        return [p for p in box_points(lo, hi) if self.contains(p)]

    def count(self, lo: Sequence[int], hi: Sequence[int]) -> tuple[int, int]:
        """(members, undecided boundary points) in the box lo..hi."""
        return len(self.members(lo, hi)), 0

    def limit_claim(self):
        return None

    def axis_members(self, lo: Sequence[int], hi: Sequence[int]) -> list | None:
        """Per-coordinate member lists when the set is a product of subsets of Z."""
        return None


def box_points(lo: Sequence[int], hi: Sequence[int]) -> Iterable[tuple]:
    return itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi)))


@dataclass(frozen=True)
class BohrSetSpec(WindowSet):
    """E = tau^-1(U) for U a product of open arcs, one per torus coordinate."""

    system: KroneckerSystem
    arcs: tuple
    bits: int = DEFAULT_BITS
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))
        if len(self.arcs) != self.system.M:
            raise ValueError(f"{len(self.arcs)} arcs for a torus of dimension {self.system.M}")

    @property
    def N(self) -> int:
        return self.system.N

    @property
    def contains_zero(self) -> bool:
        return all(arc.contains_zero for arc in self.arcs)

    def limit_claim(self) -> Coord:
        """Haar measure of the box, which is the density of E."""
        out = Fraction(1)
        for arc in self.arcs:
            out = normalize(out * arc.length) if isinstance(arc.length, Fraction) \
                else normalize(arc.length * out)
        return out

    def _fixed(self):
        hit = self._cache.get("fixed")
        if hit is None:
            mod = 1 << self.bits
            centers = [(v % mod, e) for v, e in (fixed_of(a.center, self.bits) for a in self.arcs)]
            hit = (self.system.fixed(self.bits), centers)
            self._cache["fixed"] = hit
        return hit

    def member(self, a: Sequence[int]) -> Membership:
        return member(self, a)

    def contains(self, a: Sequence[int]) -> bool:
        return member(self, a).status is Status.IN

    def members(self, lo, hi) -> list:
        return enumerate_members(self, lo, hi)[0]

    def count(self, lo, hi) -> tuple[int, int]:
        return count_window(self, lo, hi)

    def factors(self) -> list | None:
        """1-dimensional Bohr sets whose product is this one, if tau is a permuted diagonal."""
        hit = self._cache.get("factors", False)
        if hit is not False:
            return hit
        out = None
        if self.system.M == self.N:
            out = [None] * self.N
            for row, arc in zip(self.system.tau, self.arcs):
                nz = [i for i, x in enumerate(row) if x != 0]
                if len(nz) != 1 or out[nz[0]] is not None:
                    out = None
                    break
                out[nz[0]] = BohrSetSpec(KroneckerSystem(((row[nz[0]],),)), (arc,), self.bits)
        self._cache["factors"] = out
        return out

    def axis_members(self, lo, hi):
        fs = self.factors()
        if fs is None:
            return None
        return [[p[0] for p in f.members((a,), (b,))] for f, a, b in zip(fs, lo, hi)]


def member(spec: BohrSetSpec, a: Sequence[int]) -> Membership:
    """Classify a as IN, OUT or BOUNDARY(delta) of tau^-1(U)."""
    a = tuple(int(x) for x in a)
    if len(a) != spec.N:
        raise ValueError(f"point of length {len(a)} for a Bohr set in Z^{spec.N}")
    tau_fixed, centers = spec._fixed()
    mod = 1 << spec.bits
    worst = IN
    for r, arc in enumerate(spec.arcs):
        if spec.system.is_exact_row(r) and isinstance(arc.center, Fraction) \
                and isinstance(arc.radius, Fraction):
            y = mod1(lin_comb(a, spec.system.tau[r]) - arc.center)
            if min(y, 1 - y) >= arc.radius:
                return OUT
            continue
        v = sum(x * fv for x, (fv, _) in zip(a, tau_fixed[r])) - centers[r][0]
        err = sum(abs(x) * fe for x, (_, fe) in zip(a, tau_fixed[r])) + centers[r][1]
        z = v % mod
        d = min(z, mod - z)
        R = arc.radius * mod if isinstance(arc.radius, Fraction) else None
        if R is None:
            rv, re = arc.radius.fixed(spec.bits)
            lo_r, hi_r = rv - re, rv + re
        else:
            lo_r = hi_r = R
        if d + err < lo_r:
            continue
        if d - err >= hi_r:
            return OUT
        delta = (err + (hi_r - lo_r)) / mod
        if worst.status is not Status.BOUNDARY or delta > worst.delta:
            worst = Membership(Status.BOUNDARY, float(delta))
    return worst


# vectorised window scans -------------------------------------------------------

class _Scanner:
    """Classify whole rows of a window with 64-bit fixed-point images."""

    def __init__(self, spec: BohrSetSpec, lo, hi, shifts):
        self.spec = spec
        self.lo, self.hi = tuple(lo), tuple(hi)
        self.shifts = [tuple(int(x) for x in s) for s in shifts]
        M = spec.system.M
        f64 = spec.system.fixed(64)
        cen = [fixed_of(a.center, 64) for a in spec.arcs]
        self.T = [[v for v, _ in row] for row in f64]
        self.Terr = [[e for _, e in row] for row in f64]
        reach = [max(abs(a), abs(b)) for a, b in zip(self.lo, self.hi)]
        self.rows = []
        for r in range(M):
            arc = spec.arcs[r]
            rlo_v, rlo_e = fixed_of(arc.radius, 64)
            for s in self.shifts:
                shift = (sum(c * t for c, t in zip(s, self.T[r])) - cen[r][0]) % _U64
                err = sum((m + abs(c)) * e for m, c, e in zip(reach, s, self.Terr[r])) \
                    + cen[r][1] + rlo_e + 2
                # dist <= inner -> surely inside; dist >= outer -> surely outside
                inner = rlo_v - err - 1
                outer = rlo_v + err + 1
                self.rows.append((r, np.uint64(shift), max(inner, 0), outer))
        self.last = np.arange(self.lo[-1], self.hi[-1] + 1, dtype=np.int64).astype(np.uint64)

    def blocks(self, block: int = 256):
        """Yield (prefix points, in_mask, undecided_mask) per block of rows."""
        N = self.spec.N
        if any(b < a for a, b in zip(self.lo, self.hi)):
            return
        if N == 1:
            prefixes = [()]
        else:
            prefixes = list(box_points(self.lo[:-1], self.hi[:-1]))
        last_terms = [self.last * np.uint64(self.T[r][N - 1]) for r in range(self.spec.system.M)]
        for start in range(0, len(prefixes), block):
            chunk = prefixes[start:start + block]
            base = [np.array([sum(p * t for p, t in zip(pre, self.T[r][:-1])) % _U64
                              for pre in chunk], dtype=np.uint64)
                    for r in range(self.spec.system.M)]
            inside = np.ones((len(chunk), len(self.last)), dtype=bool)
            undecided = np.zeros_like(inside)
            for r, shift, inner, outer in self.rows:
                z = base[r][:, None] + last_terms[r][None, :] + shift
                dist = np.minimum(z, np.uint64(0) - z)
                sure_in = dist <= np.uint64(inner)
                maybe = ~sure_in & (dist < np.uint64(min(outer, _U64 - 1)))
                undecided |= maybe & inside
                inside &= sure_in | maybe
            undecided &= inside
            inside &= ~undecided
            yield chunk, inside, undecided

    def resolve(self, point) -> Membership:
        worst = IN
        for s in self.shifts:
            m = member(self.spec, tuple(p + c for p, c in zip(point, s)))
            if m.status is Status.OUT:
                return OUT
            if m.status is Status.BOUNDARY:
                worst = m
        return worst


def _points(chunk, mask, last_lo) -> list:
    rows, cols = np.nonzero(mask)
    return [tuple(chunk[r]) + (int(c) + last_lo,) for r, c in zip(rows, cols)]


def enumerate_members(spec: BohrSetSpec, lo: Sequence[int], hi: Sequence[int],
                      shifts: Sequence[Sequence[int]] | None = None) -> tuple[list, list]:
    """IN points of the box lo..hi in lexicographic order, and BOUNDARY points.

    With ``shifts`` the condition is a + c in E for every c (an intersection
    of translates E - c).
    """
    shifts = shifts or [(0,) * spec.N]
    sc = _Scanner(spec, lo, hi, shifts)
    members, boundary = [], []
    for chunk, inside, undecided in sc.blocks():
        found = _points(chunk, inside, sc.lo[-1])
        if undecided.any():
            for p in _points(chunk, undecided, sc.lo[-1]):
                m = sc.resolve(p)
                if m.status is Status.IN:
                    found.append(p)
                elif m.status is Status.BOUNDARY:
                    boundary.append(p)
            found.sort()
        members.extend(found)
    return members, boundary


def count_window(spec: BohrSetSpec, lo: Sequence[int], hi: Sequence[int],
                 shifts: Sequence[Sequence[int]] | None = None) -> tuple[int, int]:
    shifts = shifts or [(0,) * spec.N]
    sc = _Scanner(spec, lo, hi, shifts)
    count = undecided_total = 0
    for chunk, inside, undecided in sc.blocks():
        count += int(inside.sum())
        if undecided.any():
            for p in _points(chunk, undecided, sc.lo[-1]):
                m = sc.resolve(p)
                if m.status is Status.IN:
                    count += 1
                elif m.status is Status.BOUNDARY:
                    undecided_total += 1
    return count, undecided_total


# other set sources -------------------------------------------------------------

@dataclass(frozen=True)
class FullSet(WindowSet):
    N: int

    def contains(self, a):
        return True

    def members(self, lo, hi):
        return list(box_points(lo, hi))

    def count(self, lo, hi):
        return math.prod(max(0, b - a + 1) for a, b in zip(lo, hi)), 0

    def limit_claim(self):
        return Fraction(1)

    def axis_members(self, lo, hi):
        return [list(range(a, b + 1)) for a, b in zip(lo, hi)]


@dataclass(frozen=True)
class ProgressionSet(WindowSet):
    """Product of arithmetic progressions a_i = r_i mod m_i."""

    moduli: tuple
    residues: tuple

    @property
    def N(self):
        return len(self.moduli)

    def contains(self, a):
        return all((x - r) % m == 0 for x, r, m in zip(a, self.residues, self.moduli))

    def members(self, lo, hi):
        return list(itertools.product(*self.axis_members(lo, hi)))

    def axis_members(self, lo, hi):
        return [[x for x in range(a, b + 1) if (x - r) % m == 0]
                for a, b, r, m in zip(lo, hi, self.residues, self.moduli)]

    def count(self, lo, hi):
        n = 1
        for a, b, r, m in zip(lo, hi, self.residues, self.moduli):
            n *= max(0, (b - r) // m - (a - 1 - r) // m)
        return n, 0

    def limit_claim(self):
        return Fraction(1, math.prod(self.moduli))


@dataclass(frozen=True)
class ExplicitSet(WindowSet):
    points: frozenset

    @classmethod
    def of(cls, points) -> "ExplicitSet":
        return cls(frozenset(tuple(int(x) for x in p) for p in points))

    @property
    def N(self):
        return len(next(iter(self.points))) if self.points else 0

    def contains(self, a):
        return tuple(a) in self.points

    def members(self, lo, hi):
        return sorted(p for p in self.points
                      if all(a <= x <= b for x, a, b in zip(p, lo, hi)))


@dataclass(frozen=True)
class BernoulliSet(WindowSet):
    """Each point of the box lo..hi kept independently with probability p."""

    p: float
    lo: tuple
    hi: tuple
    seed: int
    _mask: np.ndarray = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        shape = tuple(b - a + 1 for a, b in zip(self.lo, self.hi))
        rng = np.random.default_rng(self.seed)
        object.__setattr__(self, "_mask", rng.random(shape) < self.p)

    @property
    def N(self):
        return len(self.lo)

    def contains(self, a):
        if not all(x <= y <= z for x, y, z in zip(self.lo, a, self.hi)):
            return False
        return bool(self._mask[tuple(y - x for x, y in zip(self.lo, a))])

    def members(self, lo, hi):
        lo2 = [max(a, b) for a, b in zip(lo, self.lo)]
        hi2 = [min(a, b) for a, b in zip(hi, self.hi)]
        if any(b < a for a, b in zip(lo2, hi2)):
            return []
        sl = tuple(slice(a - o, b - o + 1) for a, b, o in zip(lo2, hi2, self.lo))
        idx = np.argwhere(self._mask[sl])
        return [tuple(int(i) + a for i, a in zip(row, lo2)) for row in idx]


# density -----------------------------------------------------------------------

@dataclass
class DensityReport:
    n: int
    best_offset: tuple
    count: int
    ratio: Fraction
    limit_claim: Coord | None = None
    boundary: int = 0
    per_offset: list = field(default_factory=list)

    @property
    def window_size(self) -> int:
        return (2 * self.n + 1) ** len(self.best_offset)

    def gap(self) -> float | None:
        return None if self.limit_claim is None else abs(float(self.ratio) - float(self.limit_claim))


def banach_density_estimate(source: WindowSet, n: int,
                            offsets: Sequence[Sequence[int]] | None = None) -> DensityReport:
    """max over offsets t of |E cap (F_n + t)| / |F_n|, F_n = [-n, n]^N."""
    if n <= 0:
        raise ValueError("window radius n must be positive")
    offsets = [tuple(o) for o in (offsets or [(0,) * source.N])]
    best = None
    rows = []
    for off in offsets:
        lo = tuple(o - n for o in off)
        hi = tuple(o + n for o in off)
        c, b = source.count(lo, hi)
        rows.append((off, c, b))
        if best is None or c > best[1]:
            best = (off, c, b)
    off, c, b = best
    return DensityReport(n, off, c, Fraction(c, (2 * n + 1) ** source.N),
                         source.limit_claim(), b, rows)


# constructions -----------------------------------------------------------------

def product_bohr(specs: Sequence[BohrSetSpec]) -> BohrSetSpec:
    """Block-diagonal tau and concatenated arcs: E_1 x ... x E_k."""
    if not specs:
        raise ValueError("product of zero Bohr sets")
    Ntot = sum(s.N for s in specs)
    rows, arcs, col = [], [], 0
    for s in specs:
        for row in s.system.tau:
            rows.append([Fraction(0)] * col + list(row) + [Fraction(0)] * (Ntot - col - s.N))
        arcs.extend(s.arcs)
        col += s.N
    return BohrSetSpec(KroneckerSystem(tuple(map(tuple, rows))), tuple(arcs),
                       bits=max(s.bits for s in specs))


def difference_inclusion_witness(spec: BohrSetSpec) -> BohrSetSpec:
    """A Bohr_0 set C with C - C inside spec: arcs centred at 0, half the clearance."""
    if not spec.contains_zero:
        raise ValueError("difference witness needs a Bohr set whose box contains 0")
    arcs = tuple(Arc(Fraction(0), normalize((arc.radius - arc.distance_to_zero()) * Fraction(1, 2)))
                 for arc in spec.arcs)
    return BohrSetSpec(spec.system, arcs, spec.bits)


@dataclass
class SpectrumResult:
    trivial: bool
    H: int
    eta: tuple | None = None
    m: int | None = None

    def __str__(self):
        if self.trivial:
            return f"Trivial (no rational character with |eta|, m <= {self.H})"
        return f"NontrivialWitness(eta={self.eta}, m={self.m})"


def _eta_grid(M: int, H: int) -> np.ndarray:
    axes = np.arange(-H, H + 1, dtype=np.int64)
    grid = np.stack(np.meshgrid(*([axes] * M), indexing="ij"), axis=-1).reshape(-1, M)
    nz = grid != 0
    first = np.argmax(nz, axis=1)
    lead = grid[np.arange(len(grid)), first]
    grid = grid[nz.any(axis=1) & (lead > 0)]
    norm = np.abs(grid).max(axis=1)
    order = np.lexsort(tuple(grid[:, k] for k in range(M - 1, -1, -1)) + (norm,))
    return grid[order]


def rational_spectrum_check(system: KroneckerSystem, H: int,
                            max_grid: int = 20_000_000) -> SpectrumResult:
    """Scan eta in Z^M, 0 < |eta|_inf <= H, for m <= H with m * tau^T eta = 0 mod 1.

    tau^T eta is rational exactly when its irrational part cancels, which
    is decided on the symbolic coefficients; the scan is then exact.
    """
    if H < 1:
        raise ValueError("H must be >= 1")
    M = system.M
    if (2 * H + 1) ** M > max_grid:
        raise ValueError(f"scan of (2H+1)^M = {(2 * H + 1) ** M} vectors exceeds {max_grid}")
    entries = [[x if isinstance(x, HPReal) else HPReal.rational(x) for x in row]
               for row in system.tau]
    keys = sorted({k for row in entries for x in row for k in x.terms if k != ONE})
    den = 1
    for row in entries:
        for x in row:
            for c in x.terms.values():
                den = den * c.denominator // math.gcd(den, c.denominator)
    irr = np.array([[int(x.terms.get(k, 0) * den) for i, x in enumerate(row) for k in keys]
                    for row in entries], dtype=np.int64).reshape(M, -1)
    rat = np.array([[int(x.rational_part * den) for x in row] for row in entries],
                   dtype=np.int64)
    grid = _eta_grid(M, H)
    ok = np.all(grid @ irr == 0, axis=1) if irr.shape[1] else np.ones(len(grid), bool)
    cand = grid[ok]
    if len(cand):
        r = np.mod(cand @ rat, den)
        g = np.gcd.reduce(np.concatenate([r, np.full((len(r), 1), den)], axis=1), axis=1)
        m = den // g
        hit = np.nonzero(m <= H)[0]
        if len(hit):
            k = hit[0]
            return SpectrumResult(False, H, tuple(int(e) for e in cand[k]), int(m[k]))
    return SpectrumResult(True, H)


# shipped examples --------------------------------------------------------------

def golden_bohr(radius=Fraction(3, 20)) -> BohrSetSpec:
    """{a : |a * (sqrt5 - 1)/2 mod 1| < radius} in Z."""
    return BohrSetSpec(KroneckerSystem(((GOLDEN,),)), (Arc(Fraction(0), radius),))


def golden_cube(radius=Fraction(3, 20)) -> BohrSetSpec:
    g = golden_bohr(radius)
    return product_bohr([g, g, g])


def kronecker_demo(radius=Fraction(3, 20)) -> BohrSetSpec:
    """tau(a1, a2) = a1 * golden + a2 * (sqrt2 - 1) on T^1."""
    return BohrSetSpec(KroneckerSystem(((GOLDEN, SQRT2M1),)), (Arc(Fraction(0), radius),))
