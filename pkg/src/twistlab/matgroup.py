"""Integer matrix groups, their linear representations and dual actions.

Everything here is exact: matrices have Python integer entries, vectors
handed to span computations are fractions, and characters of Z^N are
``TorusPoint`` values acted on by x -> (g^-1)^T x mod 1.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .reals import TorusPoint, lin_comb


class NotInvertibleError(ValueError):
    """Matrix is not invertible over Z."""


class OrbitCapExceeded(RuntimeError):
    """Orbit enumeration hit its size cap before closing."""

    def __init__(self, cap: int, explored: int):
        super().__init__(f"orbit did not close within cap={cap} ({explored} points found)")
        self.cap = cap
        self.explored = explored


class LatticeMatrix:
    """Square matrix with arbitrary-precision integer entries."""

    __slots__ = ("rows", "dim", "_hash", "_inv")

    def __init__(self, rows: Iterable[Iterable[int]]):
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("LatticeMatrix needs a non-empty square array")
        self.rows = rows
        self.dim = n
        self._hash = None
        self._inv = None

    @classmethod
    def identity(cls, n: int) -> "LatticeMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    def __eq__(self, other):
        return isinstance(other, LatticeMatrix) and self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.rows)
        return self._hash

    def __repr__(self):
        return f"LatticeMatrix({[list(r) for r in self.rows]})"

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other):
        if isinstance(other, LatticeMatrix):
            cols = list(zip(*other.rows))
            return LatticeMatrix([[sum(a * b for a, b in zip(r, c)) for c in cols]
                                  for r in self.rows])
        return tuple(sum(a * b for a, b in zip(r, other)) for r in self.rows)

    def __neg__(self):
        return LatticeMatrix([[-x for x in r] for r in self.rows])

    @property
    def T(self) -> "LatticeMatrix":
        return LatticeMatrix(zip(*self.rows))

    def mod(self, m: int) -> "LatticeMatrix":
        return LatticeMatrix([[x % m for x in r] for r in self.rows])

    def trace(self) -> int:
        return sum(self.rows[i][i] for i in range(self.dim))

    def det(self) -> int:
        """Bareiss fraction-free determinant."""
        a = [list(r) for r in self.rows]
        n, sign, prev = self.dim, 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k]), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def inverse(self) -> "LatticeMatrix":
        if self._inv is None:
            inv = rational_inverse([[Fraction(x) for x in r] for r in self.rows])
            if inv is None or any(x.denominator != 1 for r in inv for x in r):
                raise NotInvertibleError(f"{self!r} is not invertible over Z")
            self._inv = LatticeMatrix([[int(x) for x in r] for r in inv])
            self._inv._inv = self
        return self._inv

    def is_unimodular(self) -> bool:
        return self.det() in (1, -1)

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.rows]


def rational_inverse(a: Sequence[Sequence[Fraction]]):
    """Gauss-Jordan inverse over Q; None if singular."""
    n = len(a)
    m = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[n:] for row in m]


# generator systems -----------------------------------------------------------

def _inverse_label(label: str) -> str:
    return label[:-3] if label.endswith("^-1") else label + "^-1"


@dataclass(frozen=True)
class GeneratorSystem:
    """Labelled generators closed under inversion.

    ``inverse[label]`` is the label of the inverse generator; an involution
    is paired with itself.
    """

    name: str
    labels: tuple
    matrices: Mapping[str, LatticeMatrix]
    inverse: Mapping[str, str]
    form: tuple | None = None

    def __post_init__(self):
        dims = {g.dim for g in self.matrices.values()}
        if len(dims) != 1:
            raise ValueError(f"generators of mixed dimension {sorted(dims)}")
        for lab in self.labels:
            g = self.matrices[lab]
            h = self.matrices[self.inverse[lab]]
            if g @ h != LatticeMatrix.identity(g.dim):
                raise ValueError(f"{lab} and {self.inverse[lab]} are not inverse")

    @classmethod
    def from_matrices(cls, name: str, gens: Mapping[str, Sequence[Sequence[int]]],
                      inverses: Mapping[str, str] | None = None,
                      form: Sequence[int] | None = None) -> "GeneratorSystem":
        """Build a system, adding ``X^-1`` generators for any unpaired label."""
        mats = {lab: m if isinstance(m, LatticeMatrix) else LatticeMatrix(m)
                for lab, m in gens.items()}
        inv = dict(inverses or {})
        for a, b in list(inv.items()):
            inv.setdefault(b, a)
        labels = []
        for lab, g in list(mats.items()):
            if lab not in labels:
                labels.append(lab)
            if lab in inv:
                if inv[lab] not in labels and inv[lab] in mats:
                    labels.append(inv[lab])
                continue
            gi = g.inverse()
            if gi == g:
                inv[lab] = lab
                continue
            other = _inverse_label(lab)
            mats[other] = gi
            inv[lab], inv[other] = other, lab
            labels.append(other)
        missing = [lab for lab in labels if inv.get(lab) not in mats]
        if missing:
            raise ValueError(f"inverse labels not defined for {missing}")
        return cls(name, tuple(labels), mats, inv, tuple(form) if form else None)

    @property
    def dim(self) -> int:
        return next(iter(self.matrices.values())).dim

    def word(self, labels: Sequence[str]) -> LatticeMatrix:
        """Product of the generators named in ``labels``, left to right."""
        out = LatticeMatrix.identity(self.dim)
        for lab in labels:
            out = out @ self.matrices[lab]
        return out

    def random_word(self, rng: random.Random, length: int) -> tuple:
        return tuple(rng.choice(self.labels) for _ in range(length))


def sl2z() -> GeneratorSystem:
    return GeneratorSystem.from_matrices(
        "SL2(Z)", {"S": [[0, -1], [1, 0]], "T": [[1, 1], [0, 1]]})


def sl3z() -> GeneratorSystem:
    gens = {}
    for i, j in itertools.permutations(range(3), 2):
        m = [[int(r == c) for c in range(3)] for r in range(3)]
        m[i][j] = 1
        gens[f"E{i + 1}{j + 1}"] = m
    return GeneratorSystem.from_matrices("SL3(Z)", gens)


def berggren() -> GeneratorSystem:
    """The three Berggren matrices; they preserve x^2 + y^2 - z^2."""
    return GeneratorSystem.from_matrices(
        "Berggren",
        {"A": [[1, -2, 2], [2, -1, 2], [2, -2, 3]],
         "B": [[1, 2, 2], [2, 1, 2], [2, 2, 3]],
         "C": [[-1, 2, 2], [-2, 1, 2], [-2, 2, 3]]},
        form=(1, 1, -1))


SHIPPED_GROUPS = {"sl2z": sl2z, "sl3z": sl3z, "berggren": berggren}


# coordinates on sl_d and Sym_d ----------------------------------------------

def sl_basis(d: int) -> list[LatticeMatrix]:
    """e11 - e(i+1)(i+1) for i < d, then off-diagonal e_ij row-major."""
    out = []
    for i in range(1, d):
        m = [[0] * d for _ in range(d)]
        m[0][0], m[i][i] = 1, -1
        out.append(LatticeMatrix(m))
    for i in range(d):
        for j in range(d):
            if i != j:
                m = [[0] * d for _ in range(d)]
                m[i][j] = 1
                out.append(LatticeMatrix(m))
    return out


def sl_coords(a) -> tuple:
    rows = a.rows if isinstance(a, LatticeMatrix) else a
    d = len(rows)
    if sum(rows[i][i] for i in range(d)) != 0:
        raise ValueError("matrix is not traceless")
    diag = [-rows[i][i] for i in range(1, d)]
    off = [rows[i][j] for i in range(d) for j in range(d) if i != j]
    return tuple(diag + off)


def sl_matrix(d: int, v: Sequence) -> list[list]:
    if len(v) != d * d - 1:
        raise ValueError(f"sl_{d} coordinates have length {d * d - 1}, got {len(v)}")
    m = [[0] * d for _ in range(d)]
    for i in range(1, d):
        m[i][i] = -v[i - 1]
    m[0][0] = sum(v[: d - 1])
    it = iter(v[d - 1:])
    for i in range(d):
        for j in range(d):
            if i != j:
                m[i][j] = next(it)
    return m


def sym_coords(a) -> tuple:
    rows = a.rows if isinstance(a, LatticeMatrix) else a
    d = len(rows)
    if any(rows[i][j] != rows[j][i] for i in range(d) for j in range(d)):
        raise ValueError("matrix is not symmetric")
    return tuple([rows[i][i] for i in range(d)]
                 + [rows[i][j] for i in range(d) for j in range(i + 1, d)])


def sym_matrix(d: int, v: Sequence) -> list[list]:
    if len(v) != d * (d + 1) // 2:
        raise ValueError(f"Sym_{d} coordinates have length {d * (d + 1) // 2}, got {len(v)}")
    m = [[0] * d for _ in range(d)]
    for i in range(d):
        m[i][i] = v[i]
    it = iter(v[d:])
    for i in range(d):
        for j in range(i + 1, d):
            m[i][j] = m[j][i] = next(it)
    return m


def _check_invertible(g: LatticeMatrix):
    if not g.is_unimodular():
        raise NotInvertibleError(f"{g!r} has determinant {g.det()}, not +-1")


def adjoint_matrix(g: LatticeMatrix) -> LatticeMatrix:
    """Matrix of v -> g v g^-1 on traceless coordinates."""
    _check_invertible(g)
    gi = g.inverse()
    cols = [sl_coords(g @ b @ gi) for b in sl_basis(g.dim)]
    return LatticeMatrix(zip(*cols))


def symsquare_matrix(g: LatticeMatrix) -> LatticeMatrix:
    """Matrix of A -> g A g^T on symmetric coordinates."""
    _check_invertible(g)
    d = g.dim
    gt = g.T
    cols = []
    for k in range(d * (d + 1) // 2):
        e = [0] * (d * (d + 1) // 2)
        e[k] = 1
        cols.append(sym_coords(g @ LatticeMatrix(sym_matrix(d, e)) @ gt))
    return LatticeMatrix(zip(*cols))


def check_form_preserved(g: LatticeMatrix, form: Sequence[int]) -> bool:
    """True iff g^T G g = G for G = diag(form)."""
    if len(form) != g.dim:
        raise ValueError(f"form of length {len(form)} for a {g.dim}x{g.dim} matrix")
    G = LatticeMatrix([[form[i] if i == j else 0 for j in range(g.dim)]
                       for i in range(g.dim)])
    return g.T @ G @ g == G


@dataclass(frozen=True)
class RepresentationSpec:
    """One of: standard(N), adjoint(d), symsquare(d), form(coefficients).

    For ``form`` the coefficients are the signed diagonal
    (mu_1..mu_p, -lambda_1..-lambda_q) and the action is the standard one,
    restricted to generators that preserve it.
    """

    variant: str
    d: int
    form: tuple | None = None

    def __post_init__(self):
        if self.variant not in ("standard", "adjoint", "symsquare", "form"):
            raise ValueError(f"unknown representation variant {self.variant!r}")
        if self.variant == "form" and (self.form is None or len(self.form) != self.d):
            raise ValueError("form representation needs d signed coefficients")

    @classmethod
    def for_form(cls, form: Sequence[int]) -> "RepresentationSpec":
        return cls("form", len(form), tuple(form))

    @property
    def dim(self) -> int:
        return {"standard": self.d, "form": self.d, "adjoint": self.d ** 2 - 1,
                "symsquare": self.d * (self.d + 1) // 2}[self.variant]

    @property
    def basis_order(self) -> list[str]:
        if self.variant == "adjoint":
            diag = [f"e11-e{i + 1}{i + 1}" for i in range(1, self.d)]
            return diag + [f"e{i + 1}{j + 1}" for i in range(self.d)
                           for j in range(self.d) if i != j]
        if self.variant == "symsquare":
            return [f"a{i + 1}{i + 1}" for i in range(self.d)] + [
                f"a{i + 1}{j + 1}" for i in range(self.d) for j in range(i + 1, self.d)]
        return [f"x{i + 1}" for i in range(self.d)]

    def image(self, g: LatticeMatrix) -> LatticeMatrix:
        if g.dim != self.d:
            raise ValueError(f"{self.variant}({self.d}) applied to a {g.dim}x{g.dim} matrix")
        if self.variant == "adjoint":
            return adjoint_matrix(g)
        if self.variant == "symsquare":
            return symsquare_matrix(g)
        if self.variant == "form" and not check_form_preserved(g, self.form):
            raise ValueError(f"{g!r} does not preserve the form {self.form}")
        return g

    def images(self, gens: GeneratorSystem) -> dict:
        return {lab: self.image(gens.matrices[lab]) for lab in gens.labels}


# balls in the Cayley graph ---------------------------------------------------

@dataclass
class Ball:
    """Distinct group elements of word length <= radius, with shortlex words."""

    radius: int
    words: dict = field(default_factory=dict)   # LatticeMatrix -> tuple of labels
    sizes: list = field(default_factory=list)   # |ball(r)| for r = 0..radius
    truncated: bool = False
    cap: int | None = None

    def __len__(self):
        return len(self.words)

    def elements(self) -> list:
        return list(self.words)

    def report(self) -> str:
        state = f"TRUNCATED at cap {self.cap}" if self.truncated else "complete"
        return f"ball radius {self.radius}: {len(self)} elements ({state}); growth {self.sizes}"


def ball(gens: GeneratorSystem, L: int, cap: int = 1_000_000) -> Ball:
    """All distinct products of at most L generators (breadth first)."""
    if L < 0:
        raise ValueError("word length must be >= 0")
    e = LatticeMatrix.identity(gens.dim)
    out = Ball(radius=L, words={e: ()}, sizes=[1], cap=cap)
    frontier = [e]
    for _ in range(L):
        nxt = []
        for g in frontier:
            w = out.words[g]
            for lab in gens.labels:
                h = g @ gens.matrices[lab]
                if h in out.words:
                    continue
                if len(out.words) >= cap:
                    out.truncated = True
                    out.sizes.append(len(out.words))
                    return out
                out.words[h] = w + (lab,)
                nxt.append(h)
        frontier = nxt
        out.sizes.append(len(out.words))
    return out


# span closure and irreducibility ----------------------------------------------

def _reduce(v: list, basis: list, pivots: list) -> list:
    v = list(v)
    for b, p in zip(basis, pivots):
        if v[p] != 0:
            f = v[p]
            v = [x - f * y for x, y in zip(v, b)]
    return v


def span_closure(rep: RepresentationSpec, gens: GeneratorSystem,
                 v: Sequence) -> tuple[int, list]:
    """Dimension and echelon basis of the smallest invariant subspace containing v."""
    v = [Fraction(x) for x in v]
    if len(v) != rep.dim:
        raise ValueError(f"vector of length {len(v)} for representation of dim {rep.dim}")
    if not any(v):
        raise ValueError("span closure of the zero vector is not defined")
    images = list(rep.images(gens).values())
    basis, pivots = [], []
    queue = deque([v])
    while queue and len(basis) < rep.dim:
        w = _reduce(queue.popleft(), basis, pivots)
        p = next((i for i, x in enumerate(w) if x != 0), None)
        if p is None:
            continue
        w = [x / w[p] for x in w]
        # keep the basis fully reduced so pivot columns stay unit vectors
        for k, b in enumerate(basis):
            if b[p] != 0:
                f = b[p]
                basis[k] = [x - f * y for x, y in zip(b, w)]
        basis.append(w)
        pivots.append(p)
        for m in images:
            queue.append(list(m @ w))
    order = sorted(range(len(basis)), key=lambda k: pivots[k])
    return len(basis), [basis[k] for k in order]


@dataclass
class IrreducibilityReport:
    rep: RepresentationSpec
    group: str
    dims: list
    vectors: list

    @property
    def full(self) -> bool:
        return all(d == self.rep.dim for d in self.dims)

    @property
    def verdict(self) -> str:
        return ("certified irreducible-on-samples" if self.full
                else "invariant subspace found")

    def summary(self) -> str:
        return (f"{self.rep.variant}({self.rep.d}) over {self.group}: "
                f"dims {self.dims} of {self.rep.dim} -> {self.verdict}")


def random_rational_vector(rng: random.Random, n: int, height: int = 9) -> list:
    while True:
        v = [Fraction(rng.randint(-height, height), rng.randint(1, 5)) for _ in range(n)]
        if any(v):
            return v


def irreducibility_certificate(rep: RepresentationSpec, gens: GeneratorSystem,
                               trials: int = 20, seed: int = 0) -> IrreducibilityReport:
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = random.Random(seed)
    vecs, dims = [], []
    for _ in range(trials):
        v = random_rational_vector(rng, rep.dim)
        vecs.append(v)
        dims.append(span_closure(rep, gens, v)[0])
    return IrreducibilityReport(rep, gens.name, dims, vecs)


# dual action on characters -------------------------------------------------

def dual_apply(g: LatticeMatrix, x: TorusPoint) -> TorusPoint:
    """gamma^* chi: x -> (g^-1)^T x mod 1, so chi'(a) = chi(g^-1 a)."""
    if x.dim != g.dim:
        raise ValueError(f"{g.dim}x{g.dim} matrix acting on T^{x.dim}")
    gi = g.inverse()
    cols = list(zip(*gi.rows))          # rows of (g^-1)^T
    return TorusPoint(tuple(lin_comb(c, x.coords) for c in cols))


@dataclass
class OrbitTable:
    """Finite orbit of a character; index = [Gamma : Gamma_chi]."""

    points: list
    coset_reps: list   # word w with dual_apply(product(w), chi) = point

    @property
    def index(self) -> int:
        return len(self.points)

    def is_closed(self, gens: GeneratorSystem) -> bool:
        pts = set(self.points)
        return all(dual_apply(gens.matrices[lab], p) in pts
                   for p in self.points for lab in gens.labels)


def character_stabilizer_index(gens: GeneratorSystem, chi: TorusPoint,
                               cap: int = 100_000) -> OrbitTable:
    """Breadth-first orbit of chi under the dual action."""
    start = TorusPoint(chi.coords)
    seen = {start: ()}
    order = [start]
    queue = deque([start])
    while queue:
        p = queue.popleft()
        w = seen[p]
        for lab in gens.labels:
            q = dual_apply(gens.matrices[lab], p)
            if q not in seen:
                if len(seen) >= cap:
                    raise OrbitCapExceeded(cap, len(seen))
                seen[q] = (lab,) + w
                order.append(q)
                queue.append(q)
    return OrbitTable(order, [seen[p] for p in order])

