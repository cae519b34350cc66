"""Command-line front end.

    coeffalg analyze spec.json [--out report.json] [--tol T] [--seed S]
    coeffalg witness spec.json [--levels N] [--seed S] [--out report.json] [--tol T]

Exit codes: 0 ran (verdicts are in the report), 2 malformed spec,
3 internal numerical error, 4 no complete transfer operator (witness only).
``CSTAR_TOL`` in the environment sets the default eq_tol.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from dataclasses import replace
from typing import Optional

from . import __version__
from .algebra import Tolerance
from .errors import CStarError, InternalConsistencyError, NoCompleteTransfer, NumericalInstabilityError, \
    RejectedInput, ResidualOverflow
from .maps import verify_star_endomorphism, verify_transfer_pair
from .specio import SCHEMA_VERSION, ParsedSpec, SpecError, dumps, element_to_json, map_to_spec, parse_spec
from .transfer import (check_complete, check_hereditary, check_nondegenerate, check_partial_automorphism,
                       find_complete_transfer, kernel_image_decomposition)
from .witness import (build_truncated_representation, check_isometry_corollary, verify_coefficient_relations,
                      verify_lemma_adjointness)

EXIT_OK, EXIT_SPEC, EXIT_NUMERICAL, EXIT_NO_COMPLETE = 0, 2, 3, 4


def _header(command: str, spec: ParsedSpec, digest: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "input_sha256": digest,
        "instance": {"name": spec.name, "blocks": list(spec.algebra.block_dims), "dim": spec.algebra.dim},
        "tolerance": {"eq_tol": spec.tolerance.eq_tol, "rank_tol": spec.tolerance.rank_tol},
        "seed": spec.seed,
        "samples": spec.samples,
    }


def _certificate_json(cert) -> dict:
    return {
        "P": element_to_json(cert.P),
        "P_blocks": list(cert.support),
        "delta_star": map_to_spec(cert.delta_star),
        "residuals": cert.residuals,
        "trivial": cert.trivial,
    }


def run_analyze(spec: ParsedSpec, digest: str) -> tuple[dict, int]:
    tol, seed, samples = spec.tolerance, spec.seed, spec.samples
    delta, ds = spec.delta, spec.delta_star
    report = _header("analyze", spec, digest)
    checks: dict = {}
    summary: dict = {"endomorphism": False, "transfer_supplied": ds is not None}
    report["checks"], report["summary"] = checks, summary

    endo = verify_star_endomorphism(delta, tol)
    checks["star_endomorphism"] = endo.to_dict()
    summary["endomorphism"] = endo.verdict
    if not endo.verdict:
        return report, EXIT_OK

    if ds is not None:
        pair = verify_transfer_pair(delta, ds, tol, samples, seed)
        checks["transfer_pair"] = pair.to_dict()
        summary["transfer_pair"] = pair.verdict
        if pair.verdict:
            nd = check_nondegenerate(delta, ds, tol, samples, seed)
            comp = check_complete(delta, ds, tol, samples, seed)
            checks["nondegenerate"] = nd.to_dict()
            checks["supplied_complete"] = comp.to_dict()
            summary["nondegenerate"] = nd.verdict
            summary["supplied_complete"] = comp.verdict
            if nd.verdict:
                checks["kernel_image"] = _kernel_image(delta, ds, tol, samples, seed)

    her = check_hereditary(delta, tol)
    checks["hereditary"] = her.to_dict()
    summary["hereditary"] = her.verdict

    try:
        cert = find_complete_transfer(delta, tol, samples, seed)
    except NoCompleteTransfer as exc:
        checks["complete_transfer"] = {"found": False, "reason": exc.reason, "detail": exc.detail}
        summary.update(complete=False, coefficient_algebra=False, no_complete_reason=exc.reason, P=None)
        summary.setdefault("nondegenerate", None)
        return report, EXIT_OK

    checks["complete_transfer"] = {"found": True, **_certificate_json(cert)}
    summary.update(complete=True, coefficient_algebra=True, P=element_to_json(cert.P),
                   P_blocks=list(cert.support))
    # a complete transfer operator is non-degenerate
    summary.setdefault("nondegenerate", True)
    if ds is None:
        checks["kernel_image"] = _kernel_image(delta, cert.delta_star, tol, samples, seed)
    pa = check_partial_automorphism(delta, cert, tol)
    checks["partial_automorphism"] = pa.to_dict()
    summary["partial_automorphism"] = pa.verdict if pa.applicable else None
    return report, EXIT_OK


def _kernel_image(delta, ds, tol, samples, seed) -> dict:
    try:
        ker, img = kernel_image_decomposition(delta, ds, tol, samples, seed)
    except RejectedInput as exc:
        return {"ok": False, "error": str(exc)}
    return {"ok": True, "kernel_blocks": list(ker.block_support), "image_blocks": list(img.block_support)}


def run_witness(spec: ParsedSpec, digest: str, levels: int) -> tuple[dict, int]:
    tol, seed, samples = spec.tolerance, spec.seed, spec.samples
    delta, ds = spec.delta, spec.delta_star
    report = _header("witness", spec, digest)
    report["window"] = levels

    endo = verify_star_endomorphism(delta, tol)
    if not endo.verdict:
        report["error"] = {"kind": "not an endomorphism", "failed": endo.failed(tol.eq_tol)}
        return report, EXIT_NO_COMPLETE
    try:
        cert = find_complete_transfer(delta, tol, samples, seed)
    except NoCompleteTransfer as exc:
        report["error"] = {"kind": "no complete transfer operator", "reason": exc.reason, "detail": exc.detail}
        return report, EXIT_NO_COMPLETE

    source = "constructed"
    transfer = cert.delta_star
    if ds is not None:
        pair = verify_transfer_pair(delta, ds, tol, samples, seed)
        if pair.verdict and check_complete(delta, ds, tol, samples, seed).verdict:
            source, transfer = "supplied", ds
        else:
            source = "constructed (supplied transfer is not complete)"
    report["transfer_source"] = source
    report["certificate"] = _certificate_json(cert)

    rep = build_truncated_representation(spec.algebra, delta, transfer, spec.functional, levels, tol,
                                         samples, seed)
    lemma = verify_lemma_adjointness(rep, tol)
    rel = verify_coefficient_relations(rep, tol=tol)
    iso = check_isometry_corollary(delta, cert, rep, tol)
    report["representation"] = {
        "level_dims": [[n, d] for n, d in rep.level_dims.items()],
        "total_dim": rep.total_dim,
        "interior_levels": [rep.interior_levels.start, rep.interior_levels.stop - 1],
        "functionals": len(rep.functionals),
    }
    report["checks"] = {
        "lemma_adjointness": lemma.to_dict(),
        "coefficient_relations": rel.to_dict(),
        "isometry_corollary": iso.to_dict(),
    }
    report["summary"] = {
        "max_relation_residual": rel.max_residual,
        "max_lemma_residual": lemma.max_residual,
        "pi_faithful": rel.info["pi_faithful"],
        "isometry": iso.info["isometry"],
        "all_passed": lemma.verdict and rel.verdict and iso.verdict,
    }
    return report, EXIT_OK


def _env_tol() -> Optional[float]:
    val = os.environ.get("CSTAR_TOL")
    if val is None or val == "":
        return None
    try:
        tol = float(val)
    except ValueError:
        raise SpecError(f"CSTAR_TOL={val!r} is not a number")
    if not tol > 0:
        raise SpecError("CSTAR_TOL must be positive")
    return tol


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coeffalg", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("spec", help="instance spec (JSON)")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--tol", type=float, help="override eq_tol")
        p.add_argument("--seed", type=int, help="override the spec's positivity-sampling seed")

    common(sub.add_parser("analyze", help="run the transfer-operator analysis"))
    w = sub.add_parser("witness", help="build and verify the truncated representation")
    common(w)
    w.add_argument("--levels", type=int, help="window N (levels -N..N); default from spec or 4")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.spec, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        print(f"error: cannot read spec: {exc}", file=sys.stderr)
        return EXIT_SPEC
    digest = hashlib.sha256(data).hexdigest()
    try:
        spec = parse_spec(data.decode("utf-8"), _env_tol())
        if args.tol is not None:
            if not args.tol > 0:
                raise SpecError("--tol must be positive")
            spec = replace(spec, tolerance=Tolerance(args.tol, spec.tolerance.rank_tol))
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
        if args.command == "witness":
            levels = args.levels if args.levels is not None else spec.window
            if levels < 1:
                raise SpecError("--levels must be >= 1")
            report, code = run_witness(spec, digest, levels)
        else:
            report, code = run_analyze(spec, digest)
    except (SpecError, UnicodeDecodeError) as exc:
        print(f"error: malformed spec: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (InternalConsistencyError, NumericalInstabilityError, ResidualOverflow, CStarError) as exc:
        print(f"error: internal numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    text = dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_NO_COMPLETE:
        err = report.get("error", {})
        print(f"error: {err.get('kind')}: {err.get('reason', err.get('failed'))}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
