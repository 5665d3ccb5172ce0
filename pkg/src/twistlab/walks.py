"""Random walks on integer matrix groups and their Cesaro averages on characters.

The quantity of interest is

    S_n(chi, a) = (1/n) sum_{j=1..n} sum_gamma mu^{*j}(gamma) chi(gamma a)

computed exactly from sparse convolution powers, or estimated by sampling
paths.  ``bq_limit_predict`` gives the limit predicted by the
equidistribution dichotomy: zero for irrational characters, the average of
chi over the finite dual orbit for rational ones.
"""

from __future__ import annotations

import cmath
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .matgroup import (GeneratorSystem, LatticeMatrix, OrbitTable,
                       character_stabilizer_index)
from .reals import (DEFAULT_BITS, RationalityTagError, TorusPoint, lcm_all,
                    lin_comb)

DEFAULT_PRUNE = Fraction(1, 10 ** 9)
DEFAULT_ATOM_CAP = 10 ** 6


class AtomCapExceeded(RuntimeError):
    def __init__(self, j: int, atoms: int, cap: int):
        super().__init__(
            f"convolution power {j} has {atoms} atoms > cap {cap}; "
            "use Monte Carlo mode (mc_cesaro) or raise the prune threshold")
        self.j, self.atoms, self.cap = j, atoms, cap


@dataclass(frozen=True)
class WalkMeasure:
    """Finitely supported probability on generator labels."""

    weights: Mapping[str, Fraction]

    def __post_init__(self):
        w = {k: Fraction(v) for k, v in self.weights.items()}
        if any(v <= 0 for v in w.values()):
            raise ValueError("walk weights must be positive")
        if sum(w.values()) != 1:
            raise ValueError(f"walk weights sum to {sum(w.values())}, not 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, gens: GeneratorSystem) -> "WalkMeasure":
        return cls({lab: Fraction(1, len(gens.labels)) for lab in gens.labels})

    def check_support(self, gens: GeneratorSystem) -> None:
        unknown = set(self.weights) - set(gens.labels)
        if unknown:
            raise ValueError(f"weights on unknown generators {sorted(unknown)}")
        open_pairs = [lab for lab in self.weights if gens.inverse[lab] not in self.weights]
        if open_pairs:
            raise ValueError(f"support is not inverse-closed: {open_pairs}")

    @property
    def labels(self) -> list:
        return list(self.weights)

    def probabilities(self) -> np.ndarray:
        return np.array([float(v) for v in self.weights.values()])


@dataclass
class ConvolutionState:
    """mu^{*j} as a sparse map matrix -> weight, plus mass pruned so far.

    With ``modulus`` set, atoms are matrices reduced mod that integer.
    """

    j: int
    atoms: dict
    dropped_mass: Fraction = Fraction(0)
    modulus: int | None = None

    @classmethod
    def initial(cls, dim: int, modulus: int | None = None) -> "ConvolutionState":
        return cls(0, {LatticeMatrix.identity(dim): Fraction(1)}, Fraction(0), modulus)

    def total_mass(self) -> Fraction:
        return sum(self.atoms.values(), Fraction(0)) + self.dropped_mass


def convolve_step(state: ConvolutionState, mu: WalkMeasure, gens: GeneratorSystem,
                  prune: Fraction = DEFAULT_PRUNE,
                  atom_cap: int = DEFAULT_ATOM_CAP) -> ConvolutionState:
    """mu^{*(j+1)}(gamma g) += mu^{*j}(gamma) mu(g); small atoms go to dropped_mass."""
    m = state.modulus
    steps = []
    for lab, w in mu.weights.items():
        g = gens.matrices[lab]
        steps.append((g.mod(m) if m else g, w))
    new: dict = {}
    for atom, w in state.atoms.items():
        for g, wg in steps:
            h = atom @ g
            if m:
                h = h.mod(m)
            new[h] = new.get(h, 0) + w * wg
        if len(new) > atom_cap:
            raise AtomCapExceeded(state.j + 1, len(new), atom_cap)
    dropped = state.dropped_mass
    kept = {}
    for h, w in new.items():
        if w < prune:
            dropped += w
        else:
            kept[h] = w
    return ConvolutionState(state.j + 1, kept, dropped, m)


@dataclass
class CesaroEstimate:
    n: int
    value: complex
    mode: str                       # "exact" or "montecarlo"
    stderr: float | None = None
    samples: int | None = None
    seed: int | None = None
    dropped_mass: float = 0.0       # exact mode: bound on |value - S_n|
    phase_error: float = 0.0        # max precision error of a single phase

    @property
    def provenance(self) -> str:
        if self.mode == "montecarlo":
            return "montecarlo"
        return "exact" if self.phase_error == 0 else "precision"


def _char_exact(chi: TorusPoint, v: Sequence[int]) -> complex:
    p = chi.pair(v)
    return cmath.exp(2j * math.pi * float(p))


def exact_cesaro(chi: TorusPoint, a: Sequence[int], mu: WalkMeasure,
                 gens: GeneratorSystem, n: int, prune: Fraction = DEFAULT_PRUNE,
                 atom_cap: int = DEFAULT_ATOM_CAP,
                 bits: int = DEFAULT_BITS) -> CesaroEstimate:
    """S_n from exact convolution powers.

    For a rational chi of order m, chi(gamma a) only depends on gamma mod m,
    so the convolution runs in GL_N(Z/m) and nothing is pruned in practice.
    """
    if n < 1:
        raise ValueError("n must be positive")
    mu.check_support(gens)
    a = tuple(int(x) for x in a)
    if len(a) != gens.dim or chi.dim != gens.dim:
        raise ValueError("dimension mismatch between chi, a and the group")
    modulus = chi.denominator if chi.is_rational else None
    if modulus == 1 or not any(a):
        return CesaroEstimate(n, complex(chi.character(a)), "exact")
    state = ConvolutionState.initial(gens.dim, modulus)
    total = 0j
    dropped_sum = Fraction(0)
    phase_err = 0.0
    cache: dict = {}
    for _ in range(n):
        state = convolve_step(state, mu, gens, prune, atom_cap)
        s = 0j
        for g, w in state.atoms.items():
            v = g @ a
            if modulus:
                v = tuple(x % modulus for x in v)
            c = cache.get(v)
            if c is None:
                if modulus:
                    c = _char_exact(chi, v)
                else:
                    ph, err = chi.phase(v, bits)
                    phase_err = max(phase_err, err)
                    c = cmath.exp(2j * math.pi * ph)
                cache[v] = c
            s += float(w) * c
        total += s
        dropped_sum += state.dropped_mass
    return CesaroEstimate(n, total / n, "exact",
                          dropped_mass=float(dropped_sum / n), phase_error=phase_err)


def _fixed_dual(chi: TorusPoint, bits: int):
    """Character as integers mod M: (x_i * M, M) with M the exact modulus or 2**bits."""
    if chi.is_rational:
        m = chi.denominator
        return [int(c * m) for c in chi.coords], m, 0
    vals, errs = chi.fixed(bits)
    mod = 1 << bits
    return [v % mod for v in vals], mod, max(errs)


def _mc_chunk(args):
    (chi, a, probs, transposes, norms, n, seed, start, stop, bits) = args
    y0, mod, err0 = _fixed_dual(chi, bits)
    exact = chi.is_rational
    scale = 2 * math.pi / mod
    k = len(probs)
    means = []
    max_log_err = -math.inf
    for s in range(start, stop):
        rng = np.random.default_rng([seed, s])
        choice = rng.choice(k, size=n, p=probs)
        y = list(y0)
        log_err = math.log2(err0 * sum(abs(x) for x in a)) if err0 else -math.inf
        acc_re = acc_im = 0.0
        for idx in choice:
            gt = transposes[idx]
            # y <- gamma^T y: then <y_j, a> = <x, gamma_1 ... gamma_j a>
            y = [sum(r * yy for r, yy in zip(row, y)) % mod for row in gt]
            ph = sum(yy * aa for yy, aa in zip(y, a)) % mod
            if exact:
                theta = ph * scale
            else:
                theta = (ph >> (bits - 60)) * (2 * math.pi / (1 << 60))
                log_err += norms[idx]
            acc_re += math.cos(theta)
            acc_im += math.sin(theta)
        if log_err > max_log_err:
            max_log_err = log_err
        means.append(complex(acc_re / n, acc_im / n))
    return means, max_log_err


def mc_cesaro(chi: TorusPoint, a: Sequence[int], mu: WalkMeasure,
              gens: GeneratorSystem, n: int, samples: int, seed: int,
              bits: int = DEFAULT_BITS, workers: int = 1) -> CesaroEstimate:
    """Monte Carlo S_n: mean over sampled paths of the path's Cesaro average.

    Sample ``s`` draws its path from ``numpy.random.default_rng([seed, s])``,
    so results do not depend on ``workers``.
    """
    if samples < 1 or n < 1:
        raise ValueError("samples and n must be positive")
    mu.check_support(gens)
    a = tuple(int(x) for x in a)
    if len(a) != gens.dim or chi.dim != gens.dim:
        raise ValueError("dimension mismatch between chi, a and the group")
    if chi.is_rational and chi.denominator == 1:
        return CesaroEstimate(n, 1 + 0j, "montecarlo", stderr=0.0, samples=samples, seed=seed)
    labels = mu.labels
    transposes = [gens.matrices[lab].T.rows for lab in labels]
    norms = [math.log2(max(sum(abs(x) for x in row) for row in gens.matrices[lab].T.rows))
             for lab in labels]
    probs = mu.probabilities()
    bounds = np.linspace(0, samples, max(1, workers) + 1).astype(int)
    jobs = [(chi, a, probs, transposes, norms, n, seed, int(lo), int(hi), bits)
            for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_mc_chunk, jobs))
    else:
        parts = [_mc_chunk(j) for j in jobs]
    means = np.array([m for p, _ in parts for m in p])
    log_err = max(le for _, le in parts)
    mean = complex(means.mean())
    stderr = float(np.sqrt(np.mean(np.abs(means - mean) ** 2) / max(samples - 1, 1))) \
        if samples > 1 else float("nan")
    phase_err = 0.0 if chi.is_rational else 2.0 ** (log_err - bits) + 2.0 ** -59
    return CesaroEstimate(n, mean, "montecarlo", stderr=stderr, samples=samples,
                          seed=seed, phase_error=phase_err)


# limits predicted by the equidistribution dichotomy ---------------------------

@dataclass
class BQPrediction:
    kind: str                    # "zero" or "orbit"
    value: complex
    index: int | None = None     # [Gamma : Gamma_chi] for rational chi
    phases: Counter = field(default_factory=Counter)

    def exact_value(self):
        """The limit as an exact Fraction when it is real and rational."""
        if self.kind == "zero":
            return Fraction(0)
        # sum of roots of unity of order dividing 4 are Gaussian integers
        if not all((4 * p).denominator == 1 for p in self.phases):
            return None
        re = im = 0
        for p, c in self.phases.items():
            unit = [(1, 0), (0, 1), (-1, 0), (0, -1)][int(4 * p) % 4]
            re += c * unit[0]
            im += c * unit[1]
        return Fraction(re, self.index) if im == 0 else None


def bq_limit_predict(chi: TorusPoint, a: Sequence[int], gens: GeneratorSystem,
                     cap: int = 100_000) -> BQPrediction:
    """Zero for irrational chi; the orbit average of chi(a) for rational chi."""
    if not isinstance(chi, TorusPoint):
        raise RationalityTagError("chi must be a TorusPoint with tagged coordinates")
    if not chi.is_rational:
        return BQPrediction("zero", 0j)
    orbit: OrbitTable = character_stabilizer_index(gens, chi, cap)
    phases = Counter(p.pair(a) for p in orbit.points)
    total = sum(c * cmath.exp(2j * math.pi * float(p)) for p, c in phases.items())
    return BQPrediction("orbit", total / orbit.index, orbit.index, phases)


def choose_k(points: Sequence[TorusPoint]) -> int:
    """Least k with chi(k a) = 1 for every listed rational chi and every a."""
    return lcm_all(p.denominator for p in points)


# Q_a on trigonometric polynomials of a Kronecker system -------------------------

@dataclass
class TrigPolynomial:
    """f(x) = sum_eta c_eta exp(2 pi i <eta, x>) on T^M."""

    dim: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for eta, c in self.terms.items():
            eta = tuple(int(e) for e in eta)
            if len(eta) != self.dim:
                raise ValueError(f"frequency {eta} is not in Z^{self.dim}")
            if c != 0:
                clean[eta] = clean.get(eta, 0) + complex(c)
        self.terms = {k: v for k, v in clean.items() if v != 0}

    @property
    def mean(self) -> complex:
        return self.terms.get((0,) * self.dim, 0j)

    def __add__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return TrigPolynomial(self.dim, t)

    def __call__(self, x: Sequence[float]) -> complex:
        return sum(c * cmath.exp(2j * math.pi * sum(e * xi for e, xi in zip(eta, x)))
                   for eta, c in self.terms.items())


class UndecidableFrequencies(ValueError):
    def __init__(self, etas):
        super().__init__(f"rationality of tau^T eta undecidable for {etas}")
        self.etas = etas


def qa_kronecker(f: TrigPolynomial, a: Sequence[int], system, gens: GeneratorSystem,
                 cap: int = 100_000) -> TrigPolynomial:
    """Apply the limit operator Q_a termwise.

    The frequency eta is an eigenvector of the Koopman representation with
    character x_eta = tau^T eta, so Q_a multiplies its coefficient by the
    predicted Cesaro limit for (x_eta, a).
    """
    if not any(a):
        raise ValueError("Q_a is only defined here for a != 0")
    if f.dim != system.M:
        raise ValueError(f"polynomial on T^{f.dim} for a system into T^{system.M}")
    out, bad = {}, []
    for eta, c in f.terms.items():
        try:
            x = TorusPoint(tuple(lin_comb(eta, [system.tau[r][i] for r in range(system.M)])
                                 for i in range(system.N)))
        except RationalityTagError:
            bad.append(eta)
            continue
        pred = bq_limit_predict(x, a, gens, cap)
        if pred.kind == "orbit" and abs(pred.value) > 1e-12:
            out[eta] = c * pred.value
    if bad:
        raise UndecidableFrequencies(bad)
    return TrigPolynomial(f.dim, out)


__all__ = [
    "AtomCapExceeded", "WalkMeasure", "ConvolutionState", "convolve_step",
    "CesaroEstimate", "exact_cesaro", "mc_cesaro", "BQPrediction",
    "bq_limit_predict", "choose_k", "TrigPolynomial", "qa_kronecker",
    "UndecidableFrequencies",
]
