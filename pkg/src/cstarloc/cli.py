"""Command-line entry point: ``cstarloc verify | example | separate | gns | generate``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import serialization as ser
from .errors import CStarLocError, NoSeparation, SearchInconclusive
from .instances import InstanceSpec, generate_instance, load_profile
from .localization import gns_tensor_localization, localize
from .separation import (
    DEFAULT_BUDGET,
    find_separating_vector_state,
    hahn_banach_witness,
    separating_state_faithful,
)
from .states import convex_combine, gns
from .suites import SUITES, example_c2, verify

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3
DEFAULT_COUNT = 100

log = logging.getLogger("cstarloc")


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_verify(args):
    profile = load_profile(args.profile)
    report = verify(args.suite, args.seed, args.count, profile, budget=args.budget, jobs=args.jobs)
    _write(ser.dumps(report.to_json(timings=args.timings)), args.out)
    summary = report.to_json()["summary"]
    log.info("%s: %d instances, %d checks, %d failures, %d inconclusive, %d hypothesis failures -> %s",
             args.suite, summary["instances"], summary["checks"], summary["failures"],
             summary["inconclusive"], summary["hypothesis_failures"], summary["verdict"])
    return report.exit_code


def _cmd_example(args):
    facts, ok = example_c2()
    _write(ser.dumps({"example": args.name, "facts": facts, "verdict": "pass" if ok else "fail"}), args.out)
    return EXIT_PASS if ok else EXIT_FAIL


def _witness_json(inst, witness, method, cert=None):
    out = {
        "schema": "cstarloc.witness/1",
        "instance": inst.digest,
        "method": method,
        "kind": witness.kind,
        "distance": witness.distance,
        "density": ser.encode_blocks(witness.state.density),
        "seed": witness.seed,
        "details": {k: v for k, v in witness.details.items()},
    }
    if cert is not None:
        out["certificate"] = {
            "pairs": [
                {"lambda": lam, "density": ser.encode_blocks(dens), "y": ser.encode_module_element(y)}
                for lam, dens, y in cert.pairs
            ],
        }
    return out


def _cmd_separate(args):
    inst = InstanceSpec.load(args.instance)
    E, L, x0 = inst.module, inst.L, inst.x0
    cert = None
    try:
        if args.method == "faithful":
            w = separating_state_faithful(E, L, x0)
        elif args.method == "hahn-banach":
            cert, w = hahn_banach_witness(E, L, x0, seed=inst.seed)
        else:
            try:
                w = find_separating_vector_state(E, L, x0, budget=args.budget, seed=inst.seed)
            except SearchInconclusive as exc:
                if args.method == "vector":
                    log.warning("%s (best distance %.3e, %d evaluations)",
                                exc, exc.best_distance, exc.evaluations)
                    return EXIT_INCONCLUSIVE
                log.info("vector search inconclusive; falling back to the faithful state")
                w = separating_state_faithful(E, L, x0)
    except NoSeparation as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    doc = _witness_json(inst, w, args.method, cert)
    ser.validate(doc, ser.WITNESS_SCHEMA)
    _write(ser.dumps(doc), args.out)
    return EXIT_PASS if w.is_sound() else EXIT_FAIL


def _cmd_gns(args):
    inst = InstanceSpec.load(args.instance)
    E = inst.module
    omegas = [("omega", convex_combine(inst.decomposition))]
    omegas += [(f"part-{j}", p) for j, p in enumerate(inst.decomposition.parts)]
    rows, ok = [], True
    for label, omega in omegas:
        rep = gns(omega)
        t = gns_tensor_localization(E, omega)
        resid = max(t.unitarity_residual(), t.intertwining_residual(), t.inner_product_residual())
        good = t.dim == localize(E, omega).dim and resid <= 1e-8
        ok &= good
        rows.append({
            "functional": label,
            "gns_dim": rep.dim,
            "homomorphism_residual": rep.homomorphism_residual(),
            "cyclic_residual": rep.cyclic_residual(),
            "tensor_dim": t.dim,
            "localized_dim": t.localized.dim,
            "unitary_residual": resid,
            "balancing_residual": t.balancing_residual,
            "ok": good,
        })
    doc = {"instance": inst.digest, "gns": rows, "verdict": "pass" if ok else "fail"}
    _write(ser.dumps(doc), args.out)
    return EXIT_PASS if ok else EXIT_FAIL


def _cmd_generate(args):
    inst = generate_instance(args.seed, load_profile(args.profile))
    _write(inst.dumps(), args.out)
    return EXIT_PASS


def build_parser():
    p = argparse.ArgumentParser(prog="cstarloc", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a property suite over seeded random instances")
    v.add_argument("--suite", default="all", choices=list(SUITES) + ["all"])
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--count", type=int, default=DEFAULT_COUNT)
    v.add_argument("--profile", default="default",
                   help="small | default | large | c2-example, or a JSON profile file")
    v.add_argument("--out", help="report path (default: stdout)")
    v.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="vector-state search evaluations")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--timings", action="store_true", help="include per-check runtimes in the report")
    v.set_defaults(func=_cmd_verify)

    e = sub.add_parser("example", help="check the golden fixture")
    e.add_argument("name", choices=["c2"])
    e.add_argument("--out")
    e.set_defaults(func=_cmd_example)

    s = sub.add_parser("separate", help="find a separating state for an instance file")
    s.add_argument("--instance", required=True)
    s.add_argument("--out")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.add_argument("--method", default="auto", choices=["auto", "vector", "hahn-banach", "faithful"])
    s.set_defaults(func=_cmd_separate)

    g = sub.add_parser("gns", help="GNS representation and tensor-product localization")
    g.add_argument("--instance", required=True)
    g.add_argument("--out")
    g.set_defaults(func=_cmd_gns)

    gen = sub.add_parser("generate", help="write a seeded random instance")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--profile", default="default")
    gen.add_argument("--out")
    gen.set_defaults(func=_cmd_generate)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; here 2 means inconclusive
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_PASS
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "count", 0) < 0 or getattr(args, "budget", 1) < 1 or getattr(args, "jobs", 1) < 1:
        log.error("count must be >= 0, budget and jobs >= 1")
        return EXIT_INPUT
    try:
        return args.func(args)
    except CStarLocError as exc:
        # bad files, bad profiles and invalid densities all surface here
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
