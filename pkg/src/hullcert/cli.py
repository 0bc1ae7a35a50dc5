"""Command-line front end.

Exit codes: 0 Holds/Certified, 1 Fails/Refuted, 2 Indeterminate,
3 usage or precondition error, 4 oracle disagreement (a certified hull
produced a failing sample).
"""

from __future__ import annotations

import argparse
import json
import sys

from hullcert import classes, hull, snr
from hullcert.classes import ClassSpec, Status
from hullcert.errors import HullCertError, OracleDisagreement
from hullcert.hull import CertStatus, IntervalHull
from hullcert.matcore import (
    MINOR_CAP,
    Tolerance,
    matrix_from_json,
    require_square,
)

EXIT_OK, EXIT_FAIL, EXIT_UNDECIDED, EXIT_USAGE, EXIT_ORACLE = 0, 1, 2, 3, 4

_VERDICT_EXIT = {Status.HOLDS: EXIT_OK, Status.FAILS: EXIT_FAIL,
                 Status.INDETERMINATE: EXIT_UNDECIDED}
_CERT_EXIT = {CertStatus.CERTIFIED: EXIT_OK, CertStatus.REFUTED: EXIT_FAIL,
              CertStatus.INDETERMINATE: EXIT_UNDECIDED}

CLASS_LABELS = {
    "p": "P-matrix",
    "n": "N-matrix",
    "n2": "N-matrix of the second category",
    "n1": "N-matrix of the first category w.r.t. J",
    "ap": "almost P-matrix",
    "ap2": "almost P-matrix of the second category",
    "ap1": "almost P-matrix of the first category w.r.t. J",
    "sp": "semipositive",
    "msp": "minimally semipositive",
}


class UsageError(Exception):
    pass


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON ({exc})") from None


def _fmt_matrix(M) -> str:
    return "[" + ", ".join("[" + ", ".join(f"{v:.12g}" for v in row) + "]" for row in M) + "]"


def _fmt_witness(w) -> str:
    if not w:
        return ""
    parts = []
    for key, val in classes._witness_json(w).items():
        if isinstance(val, dict):
            val = f"{val['status']}({_fmt_witness_json(val.get('witness'))})"
        elif isinstance(val, float):
            val = f"{val:.12g}"
        elif isinstance(val, list):
            val = "[" + ", ".join(f"{v:.12g}" if isinstance(v, float) else str(v)
                                  for v in val) + "]"
        parts.append(f"{key}={val}")
    return ", ".join(parts)


def _fmt_witness_json(wj) -> str:
    if not wj:
        return ""
    return ", ".join(f"{k}={v}" for k, v in wj.items())


def _spec(text: str, n: int, square: bool) -> ClassSpec:
    spec = ClassSpec.parse(text)
    if spec.needs_square and not square:
        raise UsageError(f"class {spec} needs a square matrix")
    return spec.validate(n)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def _classify_one(M, spec: ClassSpec, tol, max_n):
    verdict = spec.predicate(tol, max_n)(M)
    lines = [f"{CLASS_LABELS[spec.kind]} [{spec}]: {verdict.status.value}"]
    if verdict.witness and not verdict.holds:
        lines.append(f"  witness: {_fmt_witness(verdict.witness)}")
    payload = {"matrix_shape": list(M.shape), "class": str(spec), **verdict.to_json()}
    return _VERDICT_EXIT[verdict.status], lines, payload


def _category_text(fn, M, tol, max_n):
    try:
        return str(fn(M, tol, max_n)), None
    except HullCertError as exc:
        return f"n/a ({type(exc).__name__})", type(exc).__name__


def _classify_auto(M, tol, max_n):
    rows, payload = [], {"matrix_shape": list(M.shape), "results": {}}
    square = M.shape[0] == M.shape[1]
    undecided = False

    def add(key, verdict=None, note=None):
        nonlocal undecided
        label = CLASS_LABELS[key]
        if verdict is None:
            rows.append(f"{label:<40} {note}")
            payload["results"][key] = {"status": None, "note": note}
            return
        if verdict.status is Status.INDETERMINATE:
            undecided = True
        text = verdict.status.value + (f"  ({note})" if note else "")
        rows.append(f"{label:<40} {text}")
        payload["results"][key] = {**verdict.to_json(), "note": note}

    if square:
        n = M.shape[0]
        add("p", classes.is_p_matrix(M, tol, max_n))
        nv = classes.is_n_matrix(M, tol, max_n)
        cat = _category_text(classes.n_category, M, tol, max_n)[0] if nv.holds else None
        add("n", nv, cat)
        if n >= 2:
            av = classes.is_almost_p(M, tol, max_n)
            cat = _category_text(classes.almost_p_category, M, tol, max_n)[0] if av.holds else None
            add("ap", av, cat)
        else:
            add("ap", note="n/a (needs n >= 2)")
    else:
        for key in ("p", "n", "ap"):
            add(key, note="n/a (not square)")
    add("sp", classes.is_semipositive(M, tol))
    add("msp", classes.is_minimally_semipositive(M, tol))
    return (EXIT_UNDECIDED if undecided else EXIT_OK), rows, payload


def cmd_classify(args, tol):
    M = matrix_from_json(_load_json(args.matrix))
    if args.cls is None:
        return _classify_auto(M, tol, args.max_n or MINOR_CAP)
    spec = _spec(args.cls, M.shape[1], M.shape[0] == M.shape[1])
    return _classify_one(M, spec, tol, args.max_n or MINOR_CAP)


def _cert_lines(cert: hull.Certificate):
    lines = [f"class: {cert.target_class} ({CLASS_LABELS[cert.target_class.kind]})",
             f"status: {cert.status.value}",
             f"tested ({len(cert.tested)}): {' '.join(cert.tested)}"]
    if cert.failing_test:
        lines.append(f"failing test: {cert.failing_test}")
    if cert.refuting_member is not None:
        lines.append(f"refuting member: {_fmt_matrix(cert.refuting_member)}")
    if cert.verdict is not None and not cert.verdict.holds:
        lines.append(f"witness: {_fmt_witness(cert.verdict.witness)}")
    if cert.feasible_x is not None:
        lines.append("uniform x: [" + ", ".join(f"{v:.12g}" for v in cert.feasible_x) + "]")
    return lines


def _load_hull(path):
    return IntervalHull.from_json(_load_json(path))


def cmd_certify(args, tol):
    h = _load_hull(args.hull)
    spec = _spec(args.cls, h.n, h.is_square)
    cert = hull.certify(h, spec, tol, args.max_n or hull.CERTIFY_CAP)
    return _CERT_EXIT[cert.status], _cert_lines(cert), cert.to_json()


def cmd_sample_validate(args, tol):
    h = _load_hull(args.hull)
    spec = _spec(args.cls, h.n, h.is_square)
    report = hull.sample_validate(h, spec, args.k, args.seed, tol,
                                  args.max_n or hull.CERTIFY_CAP)
    lines = _cert_lines(report.certificate) + [
        f"samples: {report.samples} (seed {args.seed})",
        f"passed: {report.passed}  failed: {report.failed}  undecided: {report.undecided}",
        f"agreement: {'yes' if report.agreement else 'no'}",
    ]
    return _CERT_EXIT[report.certificate.status], lines, report.to_json()


def cmd_snr_verify(args, tol):
    M = matrix_from_json(_load_json(args.matrix))
    require_square(M)
    spec = _spec(args.cls, M.shape[0], True)
    report = snr.verify_snr_theorem(M, spec, args.trials, args.seed, tol)
    lines = [f"class: {spec}", f"trials: {report.trials} (seed {args.seed})",
             f"witnesses: {report.witnesses}", f"violations: {len(report.violations)}"]
    if report.null_condition is not None:
        lines.append(f"null-space condition: {'holds' if report.null_condition else 'fails'}")
        lines.append(f"open-cone condition: {'holds' if report.cone_condition else 'fails'}")
    for v in report.violations:
        lines.append(f"  violation: {v['reason']}" + (f" x={v['x']}" if "x" in v else ""))
    return (EXIT_OK if report.ok else EXIT_FAIL), lines, report.to_json()


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="write the full JSON report to PATH")
    common.add_argument("--tol-abs", type=float, default=1e-9, metavar="F")
    common.add_argument("--tol-rel", type=float, default=1e-9, metavar="F")
    common.add_argument("--max-n", type=int, default=None, metavar="CAP",
                        help="dimension cap (default 16 for classify, 12 for certification)")

    parser = argparse.ArgumentParser(
        prog="hullcert",
        description="Matrix-class membership and interval-hull certification.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="test one matrix")
    p.add_argument("matrix")
    p.add_argument("cls", nargs="?", metavar="CLASS",
                   help="p | n2 | n1:J | ap2 | ap1:J | sp | msp (omit for all)")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("certify", parents=[common], help="certify an interval hull")
    p.add_argument("hull")
    p.add_argument("cls", metavar="CLASS")
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("sample-validate", parents=[common],
                       help="certify, then check seeded hull samples")
    p.add_argument("hull")
    p.add_argument("cls", metavar="CLASS")
    p.add_argument("--k", type=int, default=1000, metavar="COUNT")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(fn=cmd_sample_validate)

    p = sub.add_parser("snr-verify", parents=[common],
                       help="probe the sign non-reversal characterization")
    p.add_argument("matrix")
    p.add_argument("cls", metavar="CLASS")
    p.add_argument("--trials", type=int, default=10_000, metavar="COUNT")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(fn=cmd_snr_verify)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if getattr(args, "seed", 0) is not None and getattr(args, "seed", 0) < 0:
        print("error: --seed must be a nonnegative integer", file=stderr)
        return EXIT_USAGE
    try:
        tol = Tolerance(args.tol_abs, args.tol_rel)
        code, lines, payload = args.fn(args, tol)
    except OracleDisagreement as exc:
        print(f"error: oracle disagreement: {exc}", file=stderr)
        return EXIT_ORACLE
    except (UsageError, HullCertError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    for line in lines:
        print(line, file=stdout)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
