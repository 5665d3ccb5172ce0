"""Experiment runners: one function per experiment kind.

Each runner returns a :class:`Result` holding a deterministic JSON payload,
CSV rows, and an exit status (``OK``, ``VIOLATION`` when an invariant
check fails, ``UNRESOLVED`` when a bounded search ran out of budget).
Every reported number carries a provenance tag: ``exact``,
``precision`` (with an error bound) or ``montecarlo`` (with a standard
error).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import bohr as bohr_mod
from .config import (ConfigError, ExperimentConfig, Section, bohr_ref, group_ref, load_walk,
                     representation, set_source, torus_point, window)
from .matgroup import LatticeMatrix, irreducibility_certificate
from .patterns import (GaloisLabelMap, bohr_surjectivity_check, difference_pattern_check,
                       galois_label, galois_translate_check, lift_F, parse_psi,
                       twisted_pattern_search)
from .reals import HPReal, format_real
from .recurrence import correspondence_crosscheck, recompute_measure, twisted_recurrence_search
from .walks import AtomCapExceeded, bq_limit_predict, exact_cesaro, mc_cesaro

OK, VIOLATION, CONFIG_ERROR, UNRESOLVED = 0, 1, 2, 3


@dataclass
class Result:
    kind: str
    status: int = OK
    payload: dict = field(default_factory=dict)
    header: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    lines: list = field(default_factory=list)      # human-readable summary
    provenance: dict = field(default_factory=dict)  # operation -> tag

    def fail(self, message: str, status: int = VIOLATION):
        # an invariant violation outranks an inconclusive search
        if status == VIOLATION or self.status == OK:
            self.status = status
        self.lines.append(("VIOLATION: " if status == VIOLATION else "UNRESOLVED: ") + message)


def jsonable(x):
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, str) else k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, HPReal):
        return format_real(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, LatticeMatrix):
        return x.to_list()
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    return str(x)


def tagged(value, provenance: str, **extra) -> dict:
    return {"value": jsonable(value), "provenance": provenance, **jsonable(extra)}


# equidistribution ---------------------------------------------------------------

def run_equidistribution(cfg: ExperimentConfig, workers: int = 1) -> Result:
    sec = cfg.section
    sec.check_keys({"kind", "name", "seed", "precision_bits", "group", "walk", "chi", "a", "n"})
    gens = group_ref(sec)
    walk = sec.sub("walk", {})
    mu = load_walk(walk, gens)
    chi = torus_point(sec, "chi")
    a = tuple(sec.ints("a"))
    ns = sec.get("n", (int, list))
    ns = [ns] if isinstance(ns, int) else ns
    mode = walk.get("mode", str, "exact")
    if mode not in ("exact", "montecarlo", "both"):
        raise ConfigError(f"{walk.where('mode')} must be exact, montecarlo or both")
    if len(a) != gens.dim or chi.dim != gens.dim:
        raise ConfigError(f"{sec.path}: chi and a must have length {gens.dim}")
    res = Result("equidistribution")
    res.header = ["n", "mode", "re", "im", "stderr", "dropped_mass", "phase_error", "provenance"]
    pred = bq_limit_predict(chi, a, gens)
    exact_limit = pred.exact_value()
    res.payload["prediction"] = tagged(pred.value, "exact",
                                       kind=pred.kind, index=pred.index,
                                       exact=exact_limit)
    res.rows.append(["limit", pred.kind, pred.value.real, pred.value.imag, "", 0, 0,
                     "exact"])
    estimates = []
    for n in ns:
        runs = []
        if mode in ("exact", "both"):
            try:
                runs.append(exact_cesaro(chi, a, mu, gens, n,
                                         prune=walk.fraction("prune", Fraction(1, 10 ** 9)),
                                         atom_cap=walk.get("atom_cap", int, 10 ** 6),
                                         bits=cfg.bits))
            except AtomCapExceeded as exc:
                res.fail(f"n={n}: {exc}", UNRESOLVED)
        if mode in ("montecarlo", "both"):
            runs.append(mc_cesaro(chi, a, mu, gens, n, walk.get("samples", int, 1000),
                                  cfg.seed, bits=cfg.bits, workers=workers))
        for est in runs:
            slack = est.dropped_mass + est.phase_error + 1e-9
            if abs(est.value) > 1 + slack:
                res.fail(f"|S_{n}| = {abs(est.value)} exceeds 1 + {slack}")
            res.rows.append([n, est.mode, est.value.real, est.value.imag,
                             "" if est.stderr is None else est.stderr,
                             est.dropped_mass, est.phase_error, est.provenance])
            estimates.append(tagged(est.value, est.provenance, n=n, mode=est.mode,
                                    stderr=est.stderr, dropped_mass=est.dropped_mass,
                                    phase_error=est.phase_error, samples=est.samples,
                                    seed=est.seed))
            res.provenance[f"S_{n}/{est.mode}"] = est.provenance
            res.lines.append(f"S_{n} [{est.mode}] = {est.value.real:+.6f}{est.value.imag:+.6f}i"
                             + (f"  stderr {est.stderr:.2e}" if est.stderr is not None else
                                f"  dropped {est.dropped_mass:.1e}"))
    res.payload["estimates"] = estimates
    res.payload["chi"] = [format_real(c) for c in chi.coords]
    res.payload["a"] = list(a)
    res.lines.insert(0, f"predicted limit: {pred.kind} {pred.value.real:+.6f}{pred.value.imag:+.6f}i"
                     + (f" (orbit index {pred.index})" if pred.index else ""))
    res.provenance["prediction"] = "exact"
    return res


# irreducibility ------------------------------------------------------------------

def run_irreducibility(cfg: ExperimentConfig, workers: int = 1) -> Result:
    sec = cfg.section
    sec.check_keys({"kind", "name", "seed", "precision_bits", "group", "representation", "trials"})
    gens = group_ref(sec)
    rep = representation(sec.sub("representation"))
    if rep.d != gens.dim:
        raise ConfigError(f"{sec.where('representation')}: d = {rep.d} but the group is "
                          f"{gens.dim}x{gens.dim}")
    res = Result("irreducibility")
    try:
        images = rep.images(gens)
    except ValueError as exc:
        raise ConfigError(f"{sec.where('representation')}: {exc}") from None
    ident = LatticeMatrix.identity(rep.dim)
    for lab in gens.labels:
        if images[lab] @ images[gens.inverse[lab]] != ident:
            res.fail(f"rho({lab}) rho({gens.inverse[lab]}) is not the identity")
    report = irreducibility_certificate(rep, gens, sec.get("trials", int, 20), cfg.seed or 0)
    res.header = ["trial", "span_dim", "rep_dim", "full", "provenance"]
    res.rows = [[i, d, rep.dim, d == rep.dim, "exact"] for i, d in enumerate(report.dims)]
    res.payload = {"group": gens.name, "representation": f"{rep.variant}({rep.d})",
                   "basis": rep.basis_order, "dims": report.dims, "verdict": report.verdict}
    res.lines.append(report.summary())
    res.provenance["span_closure"] = "exact"
    return res


# Bohr sets -----------------------------------------------------------------------

def run_bohr(cfg: ExperimentConfig, workers: int = 1) -> Result:
    sec = cfg.section
    sec.check_keys({"kind", "name", "seed", "precision_bits", "bohr", "window", "spectrum_H",
                    "difference_window"})
    spec = bohr_ref(sec, bits=cfg.bits)
    res = Result("bohr-density")
    lo, hi = window(sec, "window", spec.N)
    members, boundary = bohr_mod.enumerate_members(spec, lo, hi)
    res.header = [f"a{i + 1}" for i in range(spec.N)] + ["status", "provenance"]
    res.rows = [list(p) + ["in", "precision"] for p in members] + \
               [list(p) + ["boundary", "precision"] for p in boundary]
    spectrum = bohr_mod.rational_spectrum_check(spec.system, sec.get("spectrum_H", int, 20))
    res.payload = {"tau": spec.system.describe(), "arcs": [str(a) for a in spec.arcs],
                   "contains_zero": spec.contains_zero,
                   "measure": tagged(spec.limit_claim(), "exact"),
                   "window": [list(lo), list(hi)], "members": len(members),
                   "boundary": [list(p) for p in boundary], "spectrum": str(spectrum)}
    res.lines += [f"{len(members)} members, {len(boundary)} boundary points in window",
                  f"rational spectrum: {spectrum}"]
    if sec.has("difference_window") and spec.contains_zero:
        C = bohr_mod.difference_inclusion_witness(spec)
        dlo, dhi = window(sec, "difference_window", spec.N)
        cm = bohr_mod.enumerate_members(C, dlo, dhi)[0]
        bad = [(c1, c2) for c1 in cm for c2 in cm
               if bohr_mod.member(spec, tuple(x - y for x, y in zip(c1, c2))).status
               is bohr_mod.Status.OUT]
        res.payload["difference_witness"] = {"arcs": [str(a) for a in C.arcs],
                                             "members": len(cm), "violations": jsonable(bad[:10])}
        res.lines.append(f"C - C inside B on window: {len(cm)} members of C, "
                         f"{len(bad)} violations")
        if bad:
            res.fail(f"{len(bad)} differences of C fall outside B")
    res.provenance["member"] = "precision"
    return res


def run_density(cfg: ExperimentConfig, workers: int = 1) -> Result:
    sec = cfg.section
    sec.check_keys({"kind", "name", "seed", "precision_bits", "E", "n", "offsets"})
    source = set_source(sec.sub("E"), bits=cfg.bits)
    ns = sec.get("n", (int, list))
    ns = [ns] if isinstance(ns, int) else ns
    offsets = sec.get("offsets", list, None)
    res = Result("bohr-density")
    res.header = ["n", "best_offset", "count", "window_size", "ratio", "limit_claim", "gap",
                  "boundary", "provenance"]
    reports = []
    for n in ns:
        try:
            r = bohr_mod.banach_density_estimate(source, n, offsets)
        except ValueError as exc:
            raise ConfigError(f"{sec.where('n')}: {exc}") from None
        if not 0 <= r.ratio <= 1:
            res.fail(f"window ratio {r.ratio} outside [0, 1]")
        lim = "" if r.limit_claim is None else float(r.limit_claim)
        gap = r.gap()
        res.rows.append([n, " ".join(map(str, r.best_offset)), r.count, r.window_size,
                         float(r.ratio), lim, "" if gap is None else gap, r.boundary, "exact"])
        reports.append({"n": n, "best_offset": list(r.best_offset), "count": r.count,
                        "ratio": tagged(r.ratio, "exact"),
                        "limit_claim": None if r.limit_claim is None
                        else tagged(r.limit_claim, "exact"),
                        "boundary": r.boundary})
        res.lines.append(f"n={n}: ratio {float(r.ratio):.6f}"
                         + ("" if r.limit_claim is None else f" vs limit {float(r.limit_claim):.6f}"))
    res.payload = {"reports": reports}
    res.provenance["count"] = "exact"
    return res


# patterns ------------------------------------------------------------------------

def _psi(sec: Section):
    try:
        return parse_psi(sec.get("psi", str))
    except ValueError as exc:
        raise ConfigError(f"{sec.where('psi')}: {exc}") from None


def run_pattern(cfg: ExperimentConfig, workers: int = 1) -> Result:
    sec = cfg.section
    sec.check_keys({"kind", "name", "seed", "precision_bits", "psi", "E", "F", "F_lift", "k_max",
                    "b_window", "e_window", "difference"})
    psi = _psi(sec)
    E = set_source(sec.sub("E"), psi.N, cfg.bits)
    if sec.has("F_lift"):
        F = lift_F(sec.ints("F_lift"))
    else:
        F = [tuple(f) for f in sec.get("F", list)]
    if any(len(f) != psi.N for f in F):
        raise ConfigError(f"{sec.where('F')}: every element must have length {psi.N}")
    rep = twisted_pattern_search(psi, E, F, sec.get("k_max", int, 1),
                                 window(sec, "b_window", psi.N), window(sec, "e_window", psi.N))
    res = Result("pattern")
    res.header = ["f", "target", "witness_e", "b", "k", "provenance"]
    res.rows = [[" ".join(map(str, r["f"])), r["target"],
                 "" if r["e"] is None else " ".join(map(str, r["e"])),
                 " ".join(map(str, rep.b or ())), rep.k, "exact"] for r in rep.table()]
    res.payload = {"psi": psi.name, "k": rep.k, "b": rep.b, "success": rep.success,
                   "certifies": rep.certifies, "witnesses": jsonable(rep.table()),
                   "frontier": rep.frontier()}
    if not rep.verify(psi, E):
        res.fail("a witness failed re-verification")
    if rep.success:
        res.lines.append(f"{psi.name}: Psi(kF) in Psi(E - b) with {rep.certifies}")
    else:
        res.fail(f"no (k, b) found; best cover {len(rep.witnesses)}/{len(F)}; searched "
                 + rep.frontier(), UNRESOLVED)
    if sec.has("difference"):
        d = sec.sub("difference")
        pts = lift_F(d.ints("values")) if d.has("values") else [tuple(p) for p in d.get("points", list)]
        k = d.get("k", int, rep.k or 1)
        cov = difference_pattern_check(psi, E, k, pts, window(d, "window", psi.N))
        res.payload["difference"] = {"k": k, "covered": len(cov.covered),
                                     "unresolved": jsonable(cov.unresolved)}
        res.lines.append(f"Psi(k a) in Psi(E - E): {len(cov.covered)}/{len(pts)} covered")
        for a, (e1, e2) in cov.covered.items():
            if psi(tuple(x - y for x, y in zip(e1, e2))) != psi(tuple(k * x for x in a)):
                res.fail(f"difference witness for {a} does not verify")
        if cov.unresolved:
            res.fail(f"{len(cov.unresolved)} difference targets unresolved", UNRESOLVED)
    res.provenance["psi"] = "exact"
    return res


def run_surjectivity(cfg: ExperimentConfig, workers: int = 1) -> Result:
    sec = cfg.section
    sec.check_keys({"kind", "name", "seed", "precision_bits", "psi", "E", "targets", "r0",
                    "max_steps"})
    psi = _psi(sec)
    E = set_source(sec.sub("E"), psi.N, cfg.bits)
    lo, hi = sec.ints("targets")
    try:
        rep = bohr_surjectivity_check(psi, E, range(lo, hi + 1), sec.get("r0", int, 4),
                                      sec.get("max_steps", int, 10))
    except ValueError as exc:
        raise ConfigError(f"{sec.path}: {exc}") from None
    res = Result("surjectivity")
    res.header = ["target"] + [f"v{i + 1}" for i in range(psi.N)] + ["psi", "provenance"]
    for t, w in rep.witnesses.items():
        if w is None:
            res.rows.append([t] + [""] * psi.N + ["", "unresolved"])
            continue
        val = psi(w)
        res.rows.append([t] + list(w) + [val, "exact"])
        if val != t or not E.contains(w):
            res.fail(f"witness {w} for {t} does not verify")
    res.payload = {"psi": psi.name, "spectrum": rep.spectrum, "radii": rep.radii,
                   "witnesses": jsonable(rep.witnesses), "unresolved": rep.unresolved,
                   "stopped": rep.stopped}
    res.lines.append(f"{psi.name}: {len(rep.witnesses) - len(rep.unresolved)}/"
                     f"{len(rep.witnesses)} targets witnessed, radii {rep.radii}")
    res.lines.append(f"rational spectrum: {rep.spectrum}")
    if rep.unresolved:
        res.fail(f"targets {rep.unresolved} unresolved at radius {rep.radii[-1] if rep.radii else 0}",
                 UNRESOLVED)
    res.provenance["psi"] = "exact"
    res.provenance["membership"] = "precision"
    return res


# recurrence ----------------------------------------------------------------------

def run_recurrence(cfg: ExperimentConfig, workers: int = 1) -> Result:
    sec = cfg.section
    sec.check_keys({"kind", "name", "seed", "precision_bits", "bohr", "group", "a", "L", "eps",
                    "n", "slack"})
    spec = bohr_ref(sec, bits=cfg.bits)
    gens = group_ref(sec)
    a_list = [tuple(a) for a in sec.get("a", list)]
    if not a_list or any(len(a) != spec.N for a in a_list):
        raise ConfigError(f"{sec.where('a')}: need vectors of length {spec.N}")
    eps = sec.fraction("eps", Fraction(1, 100))
    try:
        r = twisted_recurrence_search(spec, a_list, gens, sec.get("L", int), eps)
    except ValueError as exc:
        raise ConfigError(f"{sec.path}: {exc}") from None
    res = Result("recurrence")
    prov = "exact" if isinstance(r.achieved, Fraction) else "exact-symbolic"
    res.header = ["j", "a", "word", "gamma_a", "shift", "provenance"]
    shifts = []
    for j, (a, w, t) in enumerate(zip(a_list, r.words, r.shifts)):
        ga = gens.word(w) @ a
        shifts.append(ga)
        res.rows.append([j + 1, " ".join(map(str, a)), ".".join(w) or "e",
                         " ".join(map(str, ga)), " ".join(format_real(c) for c in t.coords),
                         prov])
    again = recompute_measure(spec, gens, a_list, r.words)
    if again != r.achieved:
        res.fail("recomputed measure differs from the reported value")
    res.payload = {"words": [list(w) for w in r.words], "gamma_a": jsonable(shifts),
                   "achieved": tagged(r.achieved, prov, approx=float(r.achieved)),
                   "nu_U": tagged(r.u_measure, "exact"), "m": r.m, "eps": str(eps),
                   "bound": r.bound, "success": r.success, "best_L": r.best_L,
                   "spectrum": r.spectrum, "history": r.history}
    res.lines.append(f"achieved {float(r.achieved):.6f} vs bound {r.bound:.6f} "
                     f"(best at L'={r.best_L})")
    if not r.success:
        res.fail(f"best measure {float(r.achieved):.6f} below {r.bound:.6f} at L={r.L}",
                 UNRESOLVED)
    if sec.has("n"):
        cc = correspondence_crosscheck(spec, shifts, sec.get("n", int),
                                       float(sec.fraction("slack", Fraction(1, 50))))
        res.payload["crosscheck"] = {"n": cc.n, "count": cc.count, "boundary": cc.boundary,
                                     "ratio": tagged(cc.ratio, "exact"),
                                     "exact": tagged(cc.exact, prov), "gap": cc.gap,
                                     "slack": cc.slack, "warning": cc.warning}
        res.lines.append(f"window density {float(cc.ratio):.6f} vs exact {float(cc.exact):.6f}"
                         + (f" ({cc.warning})" if cc.warning else ""))
        if not cc.ok:
            res.fail(f"window density off by {cc.gap:.4f} > {cc.slack}")
    res.provenance["measure"] = prov
    return res


# Galois labels -------------------------------------------------------------------

def run_galois(cfg: ExperimentConfig, workers: int = 1) -> Result:
    sec = cfg.section
    sec.check_keys({"kind", "name", "seed", "precision_bits", "d", "E", "b_window", "e_window",
                    "polys"})
    d = sec.get("d", int)
    if d not in (2, 3):
        raise ConfigError(f"{sec.where('d')} must be 2 or 3")
    N = GaloisLabelMap(d).N
    E = set_source(sec.sub("E"), N, cfg.bits) if sec.has("E") else None
    res = Result("galois")
    res.header = ["label", "witness", "b", "provenance"]
    polys = []
    for p in sec.get("polys", list, []):
        try:
            polys.append({"poly": p, "label": str(galois_label(p))})
        except ValueError as exc:
            raise ConfigError(f"{sec.where('polys')}: {exc}") from None
    rep = galois_translate_check(d, E, window(sec, "b_window", N), window(sec, "e_window", N))
    for lab in rep.expected:
        w = rep.found.get(lab)
        res.rows.append([str(lab), "" if w is None else " ".join(map(str, w)),
                         " ".join(map(str, rep.b or ())), "exact"])
    res.payload = {"d": d, "b": rep.b, "found": {str(k): v for k, v in rep.found.items()},
                   "missing": [str(x) for x in rep.missing], "polys": polys,
                   "b_tried": rep.b_tried}
    res.lines += [f"{p['poly']} -> {p['label']}" for p in polys]
    res.lines.append(f"labels found for b = {rep.b}: "
                     + ", ".join(str(k) for k in sorted(rep.found)))
    if not rep.complete:
        res.fail(f"labels {[str(x) for x in rep.missing]} not found", UNRESOLVED)
    res.provenance["labels"] = "exact"
    return res


RUNNERS: dict[str, tuple[str, Callable]] = {
    "equidist": ("equidistribution", run_equidistribution),
    "irred": ("irreducibility", run_irreducibility),
    "bohr": ("bohr-density", run_bohr),
    "density": ("bohr-density", run_density),
    "pattern": ("pattern", run_pattern),
    "surject": ("surjectivity", run_surjectivity),
    "recur": ("recurrence", run_recurrence),
    "galois": ("galois", run_galois),
}
