"""Invariant maps on Z^N and witness searches for their values on dense sets.

An invariant map Psi sends integer vectors to values that are constant on
orbits of a matrix group acting through a representation: indefinite
quadratic forms (orthogonal groups), characteristic polynomials and their
Galois labels on traceless matrices (conjugation), and determinants on
symmetric matrices (A -> g A g^T).

The searches look for k and b such that every Psi(k f), f in F, is
attained as Psi(e - b) with e in a set E, inside finite windows.  A bounded
search that fails is reported as such, never as a counterexample.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bohr import BohrSetSpec, FullSet, WindowSet, rational_spectrum_check
from .matgroup import GeneratorSystem, LatticeMatrix, RepresentationSpec, sl_matrix, sym_matrix


class IncompatibleRepresentation(ValueError):
    pass


# invariant maps ----------------------------------------------------------------

class InvariantMap:
    N: int
    name: str

    def __call__(self, v: Sequence[int]):
        if len(v) != self.N:
            raise ValueError(f"{self.name} takes vectors of length {self.N}, got {len(v)}")
        return self._eval(tuple(int(x) for x in v))

    def _eval(self, v):
        raise NotImplementedError

    def eval_many(self, pts: np.ndarray) -> list:
        return [self._eval(tuple(int(x) for x in p)) for p in pts]

    def scaled(self, value, k: int):
        """Psi(k v) predicted from Psi(v)."""
        raise NotImplementedError

    def compatible(self, rep: RepresentationSpec) -> bool:
        raise NotImplementedError

    def default_rep(self) -> RepresentationSpec:
        raise NotImplementedError

    def split(self):
        """(n, f, g) with Psi(v) = f(v[:n]) + g(v[n:]) on int64 rows, or None."""
        return None


@dataclass(frozen=True)
class QuadraticForm(InvariantMap):
    """sum mu_i x_i^2 - sum lam_j y_j^2 on Z^(p+q)."""

    mu: tuple
    lam: tuple

    def __post_init__(self):
        if not self.mu or any(c <= 0 for c in self.mu + self.lam):
            raise ValueError("quadratic form coefficients must be positive integers")

    @property
    def N(self):
        return len(self.mu) + len(self.lam)

    @property
    def name(self):
        return f"Q({len(self.mu)},{len(self.lam)})"

    @property
    def signed(self) -> tuple:
        return tuple(self.mu) + tuple(-c for c in self.lam)

    def _eval(self, v):
        return sum(c * x * x for c, x in zip(self.signed, v))

    def eval_many(self, pts):
        return (pts.astype(object) ** 2 @ np.array(self.signed, dtype=object)).tolist()

    def scaled(self, value, k):
        return k * k * value

    def compatible(self, rep):
        return rep.variant == "form" and tuple(rep.form) == self.signed

    def default_rep(self):
        return RepresentationSpec.for_form(self.signed)

    def split(self):
        n = (self.N + 1) // 2
        c = np.array(self.signed, dtype=np.int64)
        return (n, lambda x: (x * x) @ c[:n], lambda y: (y * y) @ c[n:])


def charpoly(a: Sequence[Sequence[int]]) -> tuple:
    """Coefficients (1, c_1, ..., c_d) of det(tI - a), by Faddeev-LeVerrier."""
    d = len(a)
    if d == 2:
        return (1, -(a[0][0] + a[1][1]), a[0][0] * a[1][1] - a[0][1] * a[1][0])
    A = LatticeMatrix(a)
    coeffs = [1]
    Mk = LatticeMatrix.identity(d)
    for k in range(1, d + 1):
        AM = A @ Mk
        c = -AM.trace() // k        # exact: Newton identities over Z
        coeffs.append(c)
        Mk = LatticeMatrix([[AM[i, j] + (c if i == j else 0) for j in range(d)]
                            for i in range(d)])
    return tuple(coeffs)


def _charpoly3(v) -> tuple:
    m = sl_matrix(3, v)
    minors = (m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
              + m[1][1] * m[2][2] - m[1][2] * m[2][1])
    det = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
           - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
           + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
    return (1, 0, minors, -det)


@dataclass(frozen=True)
class CharPoly(InvariantMap):
    """a -> det(tI - a) on traceless d x d matrices in sl_d coordinates."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be >= 2")

    @property
    def N(self):
        return self.d * self.d - 1

    @property
    def name(self):
        return f"CharPoly({self.d})"

    def _eval(self, v):
        if self.d == 3:
            return _charpoly3(v)
        return charpoly(sl_matrix(self.d, v))

    def scaled(self, value, k):
        return tuple(c * k ** i for i, c in enumerate(value))

    def compatible(self, rep):
        return rep.variant == "adjoint" and rep.d == self.d

    def default_rep(self):
        return RepresentationSpec("adjoint", self.d)


@dataclass(frozen=True)
class Determinant(InvariantMap):
    """A -> det A on symmetric d x d matrices in Sym_d coordinates."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be >= 2")

    @property
    def N(self):
        return self.d * (self.d + 1) // 2

    @property
    def name(self):
        return f"Det({self.d})"

    def _eval(self, v):
        if self.d == 2:
            return v[0] * v[1] - v[2] * v[2]
        return LatticeMatrix(sym_matrix(self.d, v)).det()

    def eval_many(self, pts):
        if self.d == 2:
            p = pts.astype(object)
            return (p[:, 0] * p[:, 1] - p[:, 2] ** 2).tolist()
        return super().eval_many(pts)

    def scaled(self, value, k):
        return k ** self.d * value

    def compatible(self, rep):
        return rep.variant == "symsquare" and rep.d == self.d

    def default_rep(self):
        return RepresentationSpec("symsquare", self.d)

    def split(self):
        if self.d != 2:
            return None
        return (2, lambda x: x[:, 0] * x[:, 1], lambda y: -y[:, 0] * y[:, 0])


# Galois labels -----------------------------------------------------------------

@dataclass(frozen=True, order=True)
class GaloisLabel:
    """Galois group of a degree 2 or 3 polynomial over Q.

    Reducible polynomials carry their factor-degree pattern instead of a
    group name, e.g. ``Reducible(1+2)``.
    """

    kind: str
    pattern: str = ""

    def __str__(self):
        return f"Reducible({self.pattern})" if self.kind == "Reducible" else self.kind


C2, C3, S3 = GaloisLabel("C2"), GaloisLabel("C3"), GaloisLabel("S3")


def _is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def _divisors(n: int) -> list:
    n = abs(n)
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def galois_label(poly: Sequence[int]) -> GaloisLabel:
    """Label of a monic integer polynomial given as (1, c_1, ..., c_d), d in {2, 3}."""
    poly = tuple(int(c) for c in poly)
    d = len(poly) - 1
    if d not in (2, 3) or poly[0] != 1:
        raise ValueError(f"expected a monic polynomial of degree 2 or 3, got {poly}")
    if d == 2:
        _, b, c = poly
        return GaloisLabel("Reducible", "1+1") if _is_square(b * b - 4 * c) else C2
    _, a, b, c = poly
    roots = [0] if c == 0 else [s * r for r in _divisors(c) for s in (1, -1)]
    for r in roots:
        if r ** 3 + a * r * r + b * r + c == 0:
            # t^3 + a t^2 + b t + c = (t - r)(t^2 + (a + r) t + (b + r(a + r)))
            p1, p0 = a + r, b + r * (a + r)
            return GaloisLabel("Reducible", "1+1+1" if _is_square(p1 * p1 - 4 * p0) else "1+2")
    disc = a * a * b * b - 4 * b ** 3 - 4 * a ** 3 * c - 27 * c * c + 18 * a * b * c
    return C3 if _is_square(disc) else S3


@dataclass(frozen=True)
class GaloisLabelMap(InvariantMap):
    """a -> Galois label of det(tI - a) on sl_d, d in {2, 3}."""

    d: int

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError("Galois labels are computed for d = 2 and d = 3 only")

    @property
    def N(self):
        return self.d * self.d - 1

    @property
    def name(self):
        return f"Galois({self.d})"

    def _eval(self, v):
        return galois_label(CharPoly(self.d)._eval(v))

    def scaled(self, value, k):
        return value

    def compatible(self, rep):
        return rep.variant == "adjoint" and rep.d == self.d

    def default_rep(self):
        return RepresentationSpec("adjoint", self.d)


def realizable_labels(d: int) -> list:
    """Labels attained by traceless integer matrices (companion examples ship in tests)."""
    if d == 2:
        return [GaloisLabel("Reducible", "1+1"), C2]
    if d == 3:
        return [GaloisLabel("Reducible", "1+1+1"), GaloisLabel("Reducible", "1+2"), C3, S3]
    raise ValueError("d must be 2 or 3")


def parse_psi(text: str) -> InvariantMap:
    """'Q(1,1;1)', 'charpoly(3)', 'galois(3)', 'det(2)' (case-insensitive)."""
    s = text.replace(" ", "").lower()
    head, _, rest = s.partition("(")
    if not rest.endswith(")"):
        raise ValueError(f"cannot parse invariant map {text!r}")
    args = rest[:-1]
    if head in ("q", "quadratic"):
        mu, _, lam = args.partition(";")
        return QuadraticForm(tuple(int(x) for x in mu.split(",") if x),
                             tuple(int(x) for x in lam.split(",") if x))
    table = {"charpoly": CharPoly, "galois": GaloisLabelMap, "det": Determinant,
             "determinant": Determinant}
    if head not in table:
        raise ValueError(f"unknown invariant map {head!r}")
    return table[head](int(args))


# invariance ---------------------------------------------------------------------

def apply_rep(rep: RepresentationSpec, g: LatticeMatrix, v: Sequence[int]) -> tuple:
    return rep.image(g) @ tuple(v)


@dataclass
class InvarianceReport:
    psi: str
    rep: str
    checks: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def psi_invariance_check(psi: InvariantMap, gens: GeneratorSystem, rep: RepresentationSpec,
                         samples: int = 100, seed: int = 0, max_word: int = 6,
                         height: int = 9) -> InvarianceReport:
    """Psi(rho(w) v) == Psi(v) for sampled words w and vectors v, exactly."""
    if not psi.compatible(rep):
        raise IncompatibleRepresentation(f"{psi.name} is not paired with {rep.variant}({rep.d})")
    if rep.d != gens.dim:
        raise IncompatibleRepresentation(f"{rep.variant}({rep.d}) with {gens.dim}x{gens.dim} generators")
    rng = random.Random(seed)
    report = InvarianceReport(psi.name, f"{rep.variant}({rep.d})", 0)
    for _ in range(samples):
        word = gens.random_word(rng, rng.randint(0, max_word))
        v = tuple(rng.randint(-height, height) for _ in range(psi.N))
        w = rep.image(gens.word(word)) @ v
        report.checks += 1
        if psi(w) != psi(v):
            report.violations.append({"word": word, "v": v, "before": psi(v), "after": psi(w)})
    return report


def scaling_check(psi: InvariantMap, v: Sequence[int], k: int) -> bool:
    return psi(tuple(k * x for x in v)) == psi.scaled(psi(v), k)


# representation of integers by u^2 + v^2 - w^2 ---------------------------------

def represent_q3(n: int) -> tuple:
    """(u, v, w) with u^2 + v^2 - w^2 = n, from consecutive-square differences."""
    n = int(n)
    if n % 2:
        out = ((n + 1) // 2, 0, abs((n - 1) // 2))
    else:
        out = (n // 2, 1, abs((n - 2) // 2))
    assert out[0] ** 2 + out[1] ** 2 - out[2] ** 2 == n
    return out


def lift_F(F: Sequence[int]) -> list:
    """One preimage per element of F under u^2 + v^2 - w^2 (sorted, distinct)."""
    return [represent_q3(n) for n in sorted(set(int(x) for x in F))]


# witness searches ---------------------------------------------------------------

MAX_SEARCH_POINTS = 30_000_000


class SearchTooLarge(RuntimeError):
    pass


def _spiral_sorted(pts: np.ndarray) -> np.ndarray:
    """Rows ordered by max-norm, then lexicographically."""
    if len(pts) == 0:
        return pts
    keys = tuple(pts[:, k] for k in range(pts.shape[1] - 1, -1, -1)) + (np.abs(pts).max(axis=1),)
    return pts[np.lexsort(keys)]


def _grid(axes: Sequence[Sequence[int]]) -> np.ndarray:
    size = math.prod(len(a) for a in axes)
    if size > MAX_SEARCH_POINTS:
        raise SearchTooLarge(f"{size} points exceed the search limit {MAX_SEARCH_POINTS}")
    if not axes:
        return np.zeros((1, 0), dtype=np.int64)
    mesh = np.meshgrid(*[np.asarray(a, dtype=np.int64) for a in axes], indexing="ij")
    return _spiral_sorted(np.stack([m.ravel() for m in mesh], axis=1))


def _split_search(psi: InvariantMap, axes, targets) -> dict:
    """Meet in the middle on Psi = f(first coords) + g(rest) over a product of axes."""
    n, f, g = psi.split()
    A, B = _grid(axes[:n]), _grid(axes[n:])
    if len(A) == 0 or len(B) == 0:
        return {}
    va, vb = f(A), g(B)
    order = np.argsort(va, kind="stable")
    sa = va[order]
    out = {}
    for t in targets:
        need = t - vb
        pos = np.searchsorted(sa, need)
        ok = sa[np.minimum(pos, len(sa) - 1)] == need
        if ok.any():
            j = int(np.argmax(ok))
            out[t] = tuple(int(x) for x in A[order[pos[j]]]) + tuple(int(x) for x in B[j])
    return out


def _find_values(psi: InvariantMap, targets, axes=None, points=None) -> dict:
    """target -> point of the candidate set with Psi(point) = target (small points first)."""
    targets = list(targets)
    if axes is not None and psi.split() is not None \
            and all(isinstance(t, int) for t in targets):
        return _split_search(psi, axes, targets)
    if axes is not None:
        pts = _grid(axes)
    else:
        pts = _spiral_sorted(np.array(points, dtype=np.int64).reshape(len(points), psi.N))
    wanted = set(targets)
    out = {}
    for p, val in zip(pts, psi.eval_many(pts)):
        if val in wanted and val not in out:
            out[val] = tuple(int(x) for x in p)
            if len(out) == len(wanted):
                break
    return out


def _shifted(E: WindowSet, window: tuple, b: Sequence[int]):
    """Candidates e - b for e in E inside the window, as axes or as a point list."""
    lo, hi = window
    axes = E.axis_members(lo, hi)
    if axes is not None:
        return [[x - c for x in ax] for ax, c in zip(axes, b)], None
    volume = math.prod(max(0, y - x + 1) for x, y in zip(lo, hi))
    if volume > MAX_SEARCH_POINTS:
        raise SearchTooLarge(f"window of {volume} points exceeds the search limit")
    return None, [tuple(x - c for x, c in zip(e, b)) for e in E.members(lo, hi)]


@dataclass
class WitnessReport:
    """Certificate that Psi(kF) lies in Psi(E - b), or the best partial cover."""

    psi: str
    k: int | None
    b: tuple | None
    targets: dict                 # f -> Psi(k f)
    witnesses: dict               # f -> e in E with Psi(e - b) = Psi(k f)
    b_window: tuple
    e_window: tuple
    k_max: int
    b_tried: int = 0
    success: bool = False

    @property
    def missing(self) -> list:
        return [f for f in self.targets if f not in self.witnesses]

    @property
    def exhaustive(self) -> bool:
        """True when the windows were fully searched without success."""
        return not self.success

    @property
    def certifies(self) -> str:
        if not self.success:
            return "none"
        if self.k == 1 and not any(self.b):
            return "k=1, b=0"
        return f"k={self.k}, b={self.b}"

    def verify(self, psi: InvariantMap, E: WindowSet) -> bool:
        if self.b is None:
            return not self.witnesses
        if not E.contains(self.b):
            return False
        for f, e in self.witnesses.items():
            if not E.contains(e):
                return False
            if psi(tuple(x - y for x, y in zip(e, self.b))) != psi(tuple(self.k * x for x in f)):
                return False
        return True

    def frontier(self) -> str:
        return (f"k <= {self.k_max}, b in {self.b_window} ({self.b_tried} members tried), "
                f"e in {self.e_window}")

    def table(self) -> list:
        return [{"f": f, "target": self.targets[f], "e": self.witnesses.get(f)}
                for f in self.targets]


def twisted_pattern_search(psi: InvariantMap, E: WindowSet, F: Sequence[Sequence[int]],
                           k_max: int, b_window: tuple, e_window: tuple) -> WitnessReport:
    """First (k, b) with Psi(kF) in Psi(E - b): k ascending, b lexicographic.

    Windows are (lo, hi) corner pairs.  Each witness e is the member of the
    e-window nearest b in max-norm, ties broken lexicographically.
    """
    F = [tuple(int(x) for x in f) for f in F]
    b_members = E.members(*b_window)
    best = None
    tried = 0
    for k in range(1, k_max + 1):
        targets = {f: psi(tuple(k * x for x in f)) for f in F}
        for b in b_members:
            tried += 1
            axes, points = _shifted(E, e_window, b)
            hits = _find_values(psi, set(targets.values()), axes, points)
            found = {f: tuple(x + c for x, c in zip(hits[t], b))
                     for f, t in targets.items() if t in hits}
            if best is None or len(found) > len(best.witnesses):
                best = WitnessReport(psi.name, k, b, targets, found, b_window, e_window, k_max)
            if len(found) == len(F):
                best.success = True
                best.b_tried = tried
                return best
    if best is None:
        best = WitnessReport(psi.name, None, None,
                             {f: psi(f) for f in F}, {}, b_window, e_window, k_max)
    best.b_tried = tried
    return best


@dataclass
class SurjectivityReport:
    psi: str
    witnesses: dict          # target -> point, or None when unresolved
    radii: list
    spectrum: str = ""
    stopped: str = ""        # why the window stopped growing, if it did

    @property
    def unresolved(self) -> list:
        return [t for t, w in self.witnesses.items() if w is None]

    @property
    def resolved(self) -> bool:
        return not self.unresolved


def bohr_surjectivity_check(psi: InvariantMap, spec: WindowSet, targets: Sequence,
                            r0: int = 4, max_steps: int = 10,
                            spectrum_H: int = 20) -> SurjectivityReport:
    """Find v in E with Psi(v) = y for each target y in windows [-r, r]^N, r = r0 * 2^i."""
    if isinstance(spec, BohrSetSpec):
        if not spec.contains_zero:
            raise ValueError("surjectivity check needs a Bohr set whose box contains 0")
        spectrum = str(rational_spectrum_check(spec.system, spectrum_H))
    else:
        spectrum = "not a Bohr set"
    pending = list(dict.fromkeys(targets))
    out = {t: None for t in pending}
    report = SurjectivityReport(psi.name, out, [], spectrum)
    zero = (0,) * psi.N
    for i in range(max_steps + 1):
        if not pending:
            break
        r = r0 * 2 ** i
        try:
            axes, points = _shifted(spec, ((-r,) * psi.N, (r,) * psi.N), zero)
            hits = _find_values(psi, pending, axes, points)
        except SearchTooLarge as exc:
            report.stopped = str(exc)
            break
        report.radii.append(r)
        for t in hits:
            out[t] = hits[t]
        pending = [t for t in pending if out[t] is None]
    return report


@dataclass
class CoverageReport:
    psi: str
    k: int
    covered: dict            # a -> (e1, e2) with Psi(e1 - e2) = Psi(k a)
    unresolved: list
    search_window: tuple

    @property
    def ok(self) -> bool:
        return not self.unresolved


def difference_pattern_check(psi: InvariantMap, E: WindowSet, k: int,
                             points: Sequence[Sequence[int]], search_window: tuple) -> CoverageReport:
    """Psi(k a) in Psi(E - E), using differences of members inside the search window."""
    axes = E.axis_members(*search_window)
    if axes is not None:
        # the difference set of a product is the product of the axis difference sets
        pairs = []
        for ax in axes:
            pd = {}
            for x in ax:
                for y in ax:
                    pd.setdefault(x - y, (x, y))
            pairs.append(pd)
        diff_axes = [sorted(pd) for pd in pairs]

        def lift(d):
            return (tuple(pd[c][0] for pd, c in zip(pairs, d)),
                    tuple(pd[c][1] for pd, c in zip(pairs, d)))
        source = {"axes": diff_axes}
    else:
        members = E.members(*search_window)
        diffs = {}
        for e1 in members:
            for e2 in members:
                diffs.setdefault(tuple(x - y for x, y in zip(e1, e2)), (e1, e2))

        def lift(d):
            return diffs[d]
        source = {"points": sorted(diffs)}
    wanted = {}
    for a in points:
        a = tuple(int(x) for x in a)
        wanted[a] = psi(tuple(k * x for x in a))
    hits = _find_values(psi, set(wanted.values()), **source)
    covered = {a: lift(hits[t]) for a, t in wanted.items() if t in hits}
    unresolved = [a for a in wanted if a not in covered]
    return CoverageReport(psi.name, k, covered, unresolved, search_window)


@dataclass
class GaloisTranslateReport:
    d: int
    b: tuple | None
    found: dict              # label -> witness e
    expected: list
    b_tried: int

    @property
    def complete(self) -> bool:
        return all(lab in self.found for lab in self.expected)

    @property
    def missing(self) -> list:
        return [lab for lab in self.expected if lab not in self.found]


def galois_translate_check(d: int, E: WindowSet | None, b_window: tuple, e_window: tuple
                           ) -> GaloisTranslateReport:
    """Search b in E so that every realizable label occurs among Gal(charpoly(e - b))."""
    psi = GaloisLabelMap(d)
    E = E or FullSet(psi.N)
    expected = realizable_labels(d)
    best = None
    tried = 0
    for b in E.members(*b_window):
        tried += 1
        axes, points = _shifted(E, e_window, b)
        hits = _find_values(psi, expected, axes, points)
        found = {lab: tuple(x + c for x, c in zip(v, b)) for lab, v in hits.items()}
        rep = GaloisTranslateReport(d, b, found, expected, tried)
        if rep.complete:
            return rep
        if best is None or len(rep.found) > len(best.found):
            best = rep
    if best is None:
        best = GaloisTranslateReport(d, None, {}, expected, 0)
    best.b_tried = tried
    return best


def window(lo: int, hi: int, n: int) -> tuple:
    """Cube corner pair for [lo, hi]^n."""
    return ((lo,) * n, (hi,) * n)


__all__ = [
    "IncompatibleRepresentation", "InvariantMap", "QuadraticForm", "CharPoly", "Determinant",
    "GaloisLabel", "GaloisLabelMap", "C2", "C3", "S3", "charpoly", "galois_label",
    "realizable_labels", "parse_psi", "apply_rep", "InvarianceReport", "psi_invariance_check",
    "scaling_check", "represent_q3", "lift_F", "SearchTooLarge", "WitnessReport",
    "twisted_pattern_search", "SurjectivityReport", "bohr_surjectivity_check", "CoverageReport",
    "difference_pattern_check", "GaloisTranslateReport", "galois_translate_check", "window",
]
