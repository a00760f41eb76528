"""Property suites over instance corpora and the aggregated report."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .algebra import adjoint, basis, is_positive, operator_norm
from .errors import NoSeparation, SearchInconclusive
from .instances import InstanceSpec, generate_instance
from .localization import (
    CheckResult,
    closure_characterization_check,
    comparison_bound_check,
    gns_tensor_check,
    intersection_localization_check,
    isometry_check,
    localized_image_dim_check,
    localize,
    mesland_check,
    null_intersection_check,
    semi_inner_convexity_check,
)
from .module import (
    Submodule,
    cauchy_schwarz_gap,
    is_orthogonally_complemented,
    module_inner,
    module_norm,
    orthogonal_complement,
    riesz_representation,
)
from .separation import (
    DEFAULT_BUDGET,
    MIN_DISTANCE,
    CERTIFICATE_TOL,
    find_separating_vector_state,
    hahn_banach_witness,
    separating_state_faithful,
)
from .states import convex_combine, decompose_into_vector_states, evaluate, gns, vector_state

SUITES = ("axioms", "localization", "closure", "intersection", "mesland", "gns-tensor",
          "separation", "vector-states")

# what each check verifies, stated as the property itself
ANCHORS = {
    "c-star-identity": "||a* a|| = ||a||^2",
    "inner-product-axioms": "<x,x> >= 0, <x,y>* = <y,x>, <x,y a> = <x,y> a",
    "cauchy-schwarz": "<x,y><y,x> <= ||y||^2 <x,x>",
    "submodule-closure": "span(L) closed under right action",
    "double-complement": "L = (L^perp)^perp",
    "complemented": "E = L + L^perp",
    "riesz": "A-linear tau = <y, .>",
    "semi-inner-convexity": "sum l_i s(z_i-x0) >= s(sum l_i z_i - x0)",
    "polarization": "(iota x, iota y)_omega = omega<x,y>",
    "null-intersection": "N_omega = intersection of N_omega_j",
    "comparison-bound": "||phi_j|| <= lambda_j^(-1/2), phi_j iota_omega = iota_omega_j",
    "psi-isometry": "Psi* Psi = I",
    "monotone-dimension": "dim E_omega <= sum dim E_omega_j",
    "localized-image-dim": "L_omega unitarily equivalent to closure of iota_omega(L)",
    "closure": "closure of iota_omega(L) = joint-image preimage under (phi_j)",
    "closure-sigma": "closure characterization for truncated sigma-convex omega",
    "intersection": "(H cap K)_omega = H_omega cap K_omega",
    "intersection-sigma": "(H cap K)_omega = H_omega cap K_omega, sigma-convex omega",
    "mesland": "(L_omega)^perp = (L^perp)_omega",
    "gns": "pi_omega *-homomorphic, <pi(a) xi, pi(b) xi> = omega(a* b)",
    "gns-tensor": "E (x)_A H_pi isomorphic to E_omega",
    "separation-faithful": "faithful state separates x0 from L",
    "separation-vector": "a vector state separates x0 from L",
    "separation-hahn-banach": "sum lambda_j tau_j<x0 - l, y_j> = 1 and positive part separates",
    "vector-decomposition": "state = sum mu_j <. eta_j, eta_j>",
    "vector-state": "omega_h(v) = <v h, h>",
}


def _fmt(x):
    """Six significant digits; keeps reports stable under last-bit rounding noise."""
    x = float(x)
    if not np.isfinite(x):
        return str(x)
    return float(f"{x:.6e}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    if isinstance(obj, str) or obj is None:
        return obj
    return str(obj)


@dataclass
class CheckReport:
    suite: str
    records: list = field(default_factory=list)
    instances: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def failures(self):
        return [r for r in self.records if r["verdict"] == "fail"]

    @property
    def inconclusive(self):
        return [r for r in self.records if r["verdict"] == "inconclusive"]

    @property
    def hypothesis_failures(self):
        return [r for r in self.records if r["verdict"] == "hypothesis-failure"]

    @property
    def verdict(self):
        if self.failures:
            return "fail"
        if self.inconclusive:
            return "inconclusive"
        return "pass"

    @property
    def exit_code(self):
        return {"pass": 0, "fail": 1, "inconclusive": 2}[self.verdict]

    def by_check(self):
        out = {}
        for r in self.records:
            s = out.setdefault(r["name"], {"count": 0, "pass": 0, "fail": 0, "inconclusive": 0,
                                           "hypothesis-failure": 0, "max_residual": 0.0})
            s["count"] += 1
            s[r["verdict"]] += 1
            if r["verdict"] in ("pass", "fail") and isinstance(r["residual"], float):
                s["max_residual"] = max(s["max_residual"], r["residual"])
        return out

    def to_json(self, timings=False):
        records = self.records if timings else [
            {k: v for k, v in r.items() if k != "runtime_s"} for r in self.records
        ]
        return {
            "schema": "cstarloc.report/1",
            "suite": self.suite,
            **self.meta,
            "summary": {
                "instances": self.instances,
                "checks": len(self.records),
                "failures": len(self.failures),
                "inconclusive": len(self.inconclusive),
                "hypothesis_failures": len(self.hypothesis_failures),
                "verdict": self.verdict,
                "by_check": self.by_check(),
            },
            "failures": [{"name": r["name"], "instance": r["instance"]} for r in self.failures],
            "records": records,
        }


def _record(inst, result, runtime):
    return {
        "name": result.name,
        "anchor": ANCHORS.get(result.name, ""),
        "instance": inst.digest,
        "seed": inst.seed,
        "verdict": result.verdict,
        "residual": _fmt(result.residual),
        "tolerance": result.tolerance,
        "tail_bound": _fmt(result.tail_bound),
        "details": _jsonable(result.details),
        "runtime_s": round(runtime, 6),
    }


def _rng(inst, salt):
    return np.random.default_rng([inst.seed, salt])


# -- individual suites: each yields CheckResult objects ---------------------------------

def _axioms(inst):
    A, E = inst.algebra, inst.module
    rng = _rng(inst, 1)
    worst = 0.0
    for _ in range(5):
        a = A.random_element(rng)
        na = operator_norm(a)
        worst = max(worst, abs(operator_norm(adjoint(a) @ a) - na ** 2) / (1 + na ** 2))
    yield CheckResult.compare("c-star-identity", worst, 1e-10)

    worst = 0.0
    for _ in range(5):
        x, y = E.random_element(rng), E.random_element(rng)
        a = A.random_element(rng)
        xx = module_inner(x, x)
        scale = 1 + module_norm(x) * module_norm(y) * (1 + operator_norm(a))
        herm = max(np.max(np.abs(b1 - b2.conj().T)) for b1, b2 in
                   zip(module_inner(x, y).blocks, module_inner(y, x).blocks))
        lin = max(np.max(np.abs(b1 - b2)) for b1, b2 in
                  zip(module_inner(x, y @ a).blocks, (module_inner(x, y) @ a).blocks))
        pos = 0.0 if is_positive(xx, 1e-10) else 1.0
        worst = max(worst, herm / scale, lin / scale, pos)
    yield CheckResult.compare("inner-product-axioms", worst, 1e-10)

    worst = 0.0
    for _ in range(5):
        x, y = E.random_element(rng), E.random_element(rng)
        gap = cauchy_schwarz_gap(x, y)
        worst = max(worst, -gap / (1 + module_norm(x) ** 2 * module_norm(y) ** 2))
    yield CheckResult.compare("cauchy-schwarz", worst, 1e-10)

    subs = [s for s in (inst.L, inst.H, inst.K) if isinstance(s, Submodule)]
    yield CheckResult.compare("submodule-closure", max((s.closure_residual() for s in subs), default=0.0), 1e-9)
    worst, complemented = 0.0, True
    for s in subs:
        perp = orthogonal_complement(s)
        worst = max(worst, linalg.subspace_distance(s.cbasis, orthogonal_complement(perp).cbasis))
        complemented &= is_orthogonally_complemented(s)
    yield CheckResult.compare("double-complement", worst, linalg.SUBSPACE_TOL)
    yield CheckResult("complemented", "pass" if complemented else "fail", 0.0 if complemented else 1.0, 0.0)

    y0 = E.random_element(rng)
    y = riesz_representation(E, [module_inner(y0, e) for e in E.basis()])
    yield CheckResult.compare("riesz", float(np.max(np.abs(y.vec - y0.vec))), 1e-9)

    worst = 0.0
    for _ in range(3):
        m = int(rng.integers(1, 4))
        z = [E.random_element(rng) for _ in range(m)]
        raw = rng.uniform(0.1, 1.0, size=m)
        res = semi_inner_convexity_check(
            [E.random_element(rng) for _ in range(2)], z, E.random_element(rng), list(raw / raw.sum())
        )
        worst = max(worst, res.residual)
    yield CheckResult.compare("semi-inner-convexity", worst, 1e-9)


def _localization(inst):
    E, decomp = inst.module, inst.decomposition
    loc = localize(E, decomp)
    worst = max([loc.polarization_residual()] + [localize(E, p).polarization_residual() for p in decomp.parts])
    yield CheckResult.compare("polarization", worst, 1e-9, dim=loc.dim, null_dim=loc.null_dim)
    yield null_intersection_check(E, decomp)
    yield null_intersection_check(E, inst.sigma_decomposition)
    yield comparison_bound_check(loc)
    iso = isometry_check(loc)
    yield iso
    yield CheckResult("monotone-dimension", "pass" if iso.details["monotone"] else "fail",
                      float(max(0, iso.details["source_dim"] - iso.details["sum_part_dims"])), 0.0,
                      details={"dim": iso.details["source_dim"], "sum": iso.details["sum_part_dims"]})
    sigma_loc = localize(E, inst.sigma_decomposition)
    yield isometry_check(sigma_loc, accept_truncation=True)
    for sub in (inst.L, inst.H, inst.K):
        if sub is not None:
            yield localized_image_dim_check(loc, sub)


def _closure(inst):
    E = inst.module
    for sub in (inst.L, inst.H, inst.K):
        if sub is not None:
            yield closure_characterization_check(localize(E, inst.decomposition), sub)
    res = closure_characterization_check(localize(E, inst.sigma_decomposition), inst.L)
    yield CheckResult(  # same check, labelled for the truncated countable combination
        "closure-sigma", res.verdict, res.residual, res.tolerance, res.tail_bound, res.details)


def _intersection(inst):
    if inst.H is None or inst.K is None:
        return
    yield intersection_localization_check(inst.H, inst.K, inst.decomposition)
    res = intersection_localization_check(inst.H, inst.K, inst.sigma_decomposition)
    yield CheckResult("intersection-sigma", res.verdict, res.residual, res.tolerance, res.tail_bound, res.details)


def _mesland(inst):
    E = inst.module
    subs = [s for s in (inst.L, inst.H, inst.K) if isinstance(s, Submodule)]
    states = list(inst.probe_states) + list(inst.decomposition.parts) + [convex_combine(inst.decomposition)]
    for s in subs:
        worst, fails = 0.0, 0
        perp = orthogonal_complement(s)
        for omega in states:
            res = mesland_check(E, s, omega, perp)
            worst = max(worst, res.residual)
            fails += not res
        yield CheckResult("mesland", "pass" if fails == 0 else "fail", worst, linalg.SUBSPACE_TOL,
                          details={"states": len(states), "failures": fails, "submodule_dim": s.dim})


def _gns_tensor(inst):
    E = inst.module
    omegas = [convex_combine(inst.decomposition)] + list(inst.decomposition.parts)
    worst_hom, worst_cyc, dims = 0.0, 0.0, []
    for omega in omegas:
        rep = gns(omega)
        worst_hom = max(worst_hom, rep.homomorphism_residual())
        worst_cyc = max(worst_cyc, rep.cyclic_residual())
        dims.append(rep.dim)
    yield CheckResult.compare("gns", max(worst_hom, worst_cyc), 1e-9, homomorphism=worst_hom,
                              cyclic=worst_cyc, dims=dims)
    for omega in omegas:
        yield gns_tensor_check(E, omega)


def _separation(inst, budget=DEFAULT_BUDGET):
    E, L, x0 = inst.module, inst.L, inst.x0
    try:
        w = separating_state_faithful(E, L, x0)
    except NoSeparation as exc:
        yield CheckResult("separation-faithful", "fail", 0.0, MIN_DISTANCE, details={"error": str(exc)})
        return
    again = w.recertify()
    ok = w.distance > MIN_DISTANCE and abs(again - w.distance) <= 1e-9
    yield CheckResult("separation-faithful", "pass" if ok else "fail", abs(again - w.distance), 1e-9,
                      details={"distance": w.distance, "ambient_distance": w.details["ambient_distance"]})
    try:
        v = find_separating_vector_state(E, L, x0, budget=budget, seed=inst.seed)
        again = v.recertify()
        ok = v.distance > MIN_DISTANCE and abs(again - v.distance) <= 1e-9
        yield CheckResult("separation-vector", "pass" if ok else "fail", abs(again - v.distance), 1e-9,
                          details={"distance": v.distance, "kind": v.kind,
                                   "evaluations": v.details.get("evaluations")})
    except SearchInconclusive as exc:
        yield CheckResult("separation-vector", "inconclusive", exc.best_distance, MIN_DISTANCE,
                          details={"best_distance": exc.best_distance, "evaluations": exc.evaluations})
    cert, hb = hahn_banach_witness(E, L, x0, seed=inst.seed)
    resid = hb.details["identity_residual"]
    certified = hb.details["path"] == "positive-part"
    ok = hb.is_sound() and (not certified or resid <= CERTIFICATE_TOL)
    yield CheckResult("separation-hahn-banach", "pass" if ok else "fail", resid, CERTIFICATE_TOL,
                      details={"path": hb.details["path"], "distance": hb.distance, "pairs": len(cert.pairs)})


def _vector_states(inst):
    A = inst.algebra
    states = list(inst.decomposition.parts) + list(inst.probe_states) + [convex_combine(inst.decomposition)]
    units = basis(A)
    worst = 0.0
    for omega in states:
        dec = decompose_into_vector_states(omega)
        back = convex_combine(dec, truncated=True)
        worst = max(worst, max(abs(evaluate(omega, e) - evaluate(back, e)) for e in units))
    yield CheckResult.compare("vector-decomposition", worst, 1e-9, states=len(states))
    rng = _rng(inst, 7)
    worst = 0.0
    for _ in range(10):
        h = rng.standard_normal(A.hilbert_dim) + 1j * rng.standard_normal(A.hilbert_dim)
        h /= np.linalg.norm(h)
        omega = vector_state(A, h)
        v = A.random_element(rng)
        vh = np.concatenate([blk @ h[o:o + d] for blk, o, d in zip(v.blocks, A.hilbert_offsets, A.block_dims)])
        worst = max(worst, abs(evaluate(omega, v) - np.vdot(h, vh)))
    yield CheckResult.compare("vector-state", worst, 1e-10)


RUNNERS = {
    "axioms": _axioms,
    "localization": _localization,
    "closure": _closure,
    "intersection": _intersection,
    "mesland": _mesland,
    "gns-tensor": _gns_tensor,
    "separation": _separation,
    "vector-states": _vector_states,
}


def _suite_names(suite):
    if suite == "all":
        return list(SUITES)
    if suite not in RUNNERS:
        raise ValueError(f"unknown suite {suite!r}; choose from {list(SUITES) + ['all']}")
    return [suite]


def run_instance(suite, inst, budget=DEFAULT_BUDGET):
    records = []
    for name in _suite_names(suite):
        runner = RUNNERS[name]
        gen = runner(inst, budget) if name == "separation" else runner(inst)
        t0 = time.perf_counter()
        for result in gen:
            t1 = time.perf_counter()
            records.append(_record(inst, result, t1 - t0))
            t0 = time.perf_counter()
    return records


def _run_seeded(args):
    suite, seed, profile, budget = args
    return run_instance(suite, generate_instance(seed, profile), budget)


def run_suite(suite, corpus, budget=DEFAULT_BUDGET):
    """Run a named suite (or ``"all"``) over a list of InstanceSpec objects."""
    _suite_names(suite)
    report = CheckReport(suite)
    for inst in corpus:
        report.records.extend(run_instance(suite, inst, budget))
        report.instances += 1
    return report


def verify(suite, seed, count, profile="default", budget=DEFAULT_BUDGET, jobs=1):
    """Generate `count` instances with seeds ``seed, seed+1, ...`` and run `suite` on them."""
    _suite_names(suite)
    report = CheckReport(suite, meta={"seed": seed, "count": count, "profile": str(profile),
                                      "budget": budget})
    if profile == "c2-example":
        report.records.extend(run_instance(suite, generate_instance(seed, profile), budget))
        report.instances = 1
        return report
    tasks = [(suite, seed + i, profile, budget) for i in range(count)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_seeded, tasks, chunksize=4))
    else:
        chunks = [_run_seeded(t) for t in tasks]
    for chunk in chunks:
        report.records.extend(chunk)
    report.instances = count
    return report


def example_c2():
    """Facts of the two-point golden fixture, each with the value it must take.

    Returns ``(facts, ok)``; `facts` maps a name to ``{"value", "expected", "ok"}``.
    """
    from .instances import c2_example
    from .localization import componentwise_set, localized_complement, localized_submodule

    inst = c2_example()
    E, L, decomp = inst.module, inst.L, inst.decomposition
    loc = localize(E, decomp)
    parts = [localize(E, p) for p in decomp.parts]
    x = inst.x0
    norm_sq = float(np.vdot(loc.iota(x), loc.iota(x)).real)
    perp = localized_complement(loc, L)
    in_perp = linalg.residual_norm(loc.iota(x), perp) <= 1e-12
    image = localized_submodule(loc, L)
    comp = componentwise_set(loc, L)
    facts = {
        "dim_E_omega": (loc.dim, 2),
        "dim_E_omega_parts": ([p.dim for p in parts], [1, 1]),
        "null_dim": (loc.null_dim, 0),
        "norm_sq_iota_p1_minus_p2": (norm_sq, 1.0),
        "parts_image_is_whole": ([localized_submodule(p, L).shape[1] == p.dim for p in parts], [True, True]),
        "complement_contains_p1_minus_p2": (bool(in_perp), True),
        "closure_dim": (image.shape[1], 1),
        "componentwise_dim": (comp.shape[1], 2),
    }
    out, ok = {}, True
    for name, (value, expected) in facts.items():
        good = abs(value - expected) <= 1e-12 if isinstance(value, float) else value == expected
        ok &= good
        out[name] = {"value": _jsonable(value), "expected": _jsonable(expected), "ok": good}
    return out, ok
