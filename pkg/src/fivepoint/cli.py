"""Command line front end.

Exit codes: 0 pass, 1 mathematical failure (LSS violated, verification
failed, classification mismatch), 2 input error, 3 LSS holds but no
construction applies.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import classify as cl
from .comparison import TAU_LSS, lss_all, tense_structure
from .embed import embed
from .embed.certificates import CertificateError, DoubledPolytopeCert, dumps as dump_cert, load as load_cert
from .embed.errors import EmbedError, LssFails, NotConstructive
from .metric import MetricError, from_json
from .verify import FAMILIES, BadParams, OracleFailure, sample_metric, verify_certificate

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NOT_CONSTRUCTIVE = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read(source: str) -> str:
    """Text of a path, of stdin for ``-``, or inline JSON."""
    if source.lstrip().startswith("{"):
        return source
    if source == "-":
        return sys.stdin.read()
    try:
        return Path(source).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc.strerror or exc}") from exc


def _load_metric(source: str):
    try:
        return from_json(_read(source))
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {source[:40]}: {exc}") from exc
    except MetricError as exc:
        raise InputError(f"invalid metric: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid metric: {exc}") from exc


def _load_cert(source: str):
    try:
        return load_cert(_read(source))
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {source[:40]}: {exc}") from exc
    except (CertificateError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid certificate: {exc}") from exc


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _fmt_vec(v) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in v) + ")"


def _no_dot(args):
    if args.format == "dot":
        raise InputError(f"--format dot is only available for classify, not {args.command}")


# ---------------------------------------------------------------------------
# subcommands; each returns (exit code, output text)


def cmd_check(args) -> tuple[int, str]:
    _no_dot(args)
    m = _load_metric(args.metric)
    tol = TAU_LSS if args.tol is None else args.tol
    summary = lss_all(m, tol=tol)
    code = EXIT_OK if summary.holds else EXIT_FAIL
    if args.format == "json":
        return code, _json(summary.to_json())
    lines = [f"{len(summary.reports)} LSS inequalities checked at tol {tol:g}"]
    w = summary.witness
    if w is None:
        lines.append("all hold")
    else:
        lines.append(f"FAILS: center {w.center}, others {''.join(w.others)}, "
                     f"minimum {w.min_value:.6g} at lambda {_fmt_vec(w.argmin)}")
    return code, "\n".join(lines) + "\n"


def cmd_tense(args) -> tuple[int, str]:
    _no_dot(args)
    m = _load_metric(args.metric)
    ts = tense_structure(m)
    triples = [t for t in ts.triples if not t.degenerate]
    match = cl.match_configuration(m.labels, triples)
    if args.format == "json":
        out = ts.to_json()
        out["configuration"] = match.to_json()
        return EXIT_OK, _json(out)
    lines = [f"triples ({len(ts.triples)}): " + " ".join(sorted(t.word() for t in ts.triples)),
             f"4-point arrays ({len(ts.quads)}): " + " ".join(sorted(q.word() for q in ts.quads)),
             f"5-point arrays ({len(ts.quints)}): " + " ".join(sorted(q.word() for q in ts.quints)),
             f"configuration: {match.kind}"]
    if match.order:
        lines.append("cyclic order: " + " ".join(match.order))
    if match.shared:
        lines.append("shared center: " + ", ".join(f"{k}={v}" for k, v in match.shared.items()))
    return EXIT_OK, "\n".join(lines) + "\n"


def cmd_classify(args) -> tuple[int, str]:
    tree = cl.search_configurations()
    rows = cl.compare_with_table(tree)
    found = sorted(cl.canonical_key(n.config) for n in tree.terminals)
    expected = sorted(cl.canonical_key(c) for c in cl.lemma_configurations())
    ok = len(tree.nodes) == len(rows) and found == expected and all(r.agrees for r in rows)
    code = EXIT_OK if ok else EXIT_FAIL
    if args.format == "dot":
        return code, tree.to_dot()
    if args.format == "json":
        out = tree.to_json()
        out["terminal_configurations"] = [list(k) for k in found]
        out["table_rows"] = [{"row": r.row, "node": r.node, "agrees": r.agrees, "counts": r.counts_machine}
                             for r in rows]
        out["matches_fixture"] = ok
        return code, _json(out)
    lines = [f"{len(tree.nodes)} configurations, {len(tree.terminals)} terminal"]
    for n in tree.terminals:
        lines.append("  terminal: " + " ".join(sorted(str(t) for t in n.config)))
    bad = [r.row for r in rows if not r.agrees]
    lines.append("table rows agree" if not bad else "table rows disagree: " + ", ".join(map(str, bad)))
    return code, "\n".join(lines) + "\n"


def cmd_embed(args) -> tuple[int, str]:
    _no_dot(args)
    m = _load_metric(args.metric)
    tol = 1e-6 if args.tol is None else args.tol
    try:
        cert = embed(m, seed=args.seed, tol=tol)
    except LssFails as exc:
        return EXIT_FAIL, (_json({"error": "LssFails", "witness": exc.report.to_json()})
                           if args.format == "json" else f"LSS fails: {exc}\n")
    except NotConstructive as exc:
        return EXIT_NOT_CONSTRUCTIVE, (_json({"error": "NotConstructive", "attempts": str(exc)})
                                       if args.format == "json" else f"not constructive: {exc}\n")
    if args.off:
        if not isinstance(cert, DoubledPolytopeCert):
            raise InputError("--off needs a doubled-polytope certificate")
        Path(args.off).write_text(cert.to_off())
    if args.format == "json":
        return EXIT_OK, dump_cert(cert, indent=2, sort_keys=True) + "\n"
    rep = verify_certificate(m, cert, tol)
    return EXIT_OK, f"{cert.kind} certificate, max relative error {rep.max_rel:.3g}\n"


def cmd_verify(args) -> tuple[int, str]:
    _no_dot(args)
    m = _load_metric(args.metric)
    cert = _load_cert(args.certificate)
    tol = 1e-6 if args.tol is None else args.tol
    try:
        rep = verify_certificate(m, cert, tol)
    except OracleFailure as exc:
        raise InputError(f"certificate does not fit the metric: {exc}") from exc
    code = EXIT_OK if rep.passed else EXIT_FAIL
    if args.format == "json":
        return code, _json(rep.to_json())
    w = rep.worst
    lines = [f"{cert.kind}: {'PASS' if rep.passed else 'FAIL'} at tol {tol:g}",
             f"max relative error {rep.max_rel:.3g}" + (f" at {w['a']}{w['b']}" if w else "")]
    lines += [f"  failed check {n}: {v:.3g}" for n, v, ok in rep.checks if not ok]
    return code, "\n".join(lines) + "\n"


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def cmd_sample(args) -> tuple[int, str]:
    _no_dot(args)
    if args.count < 0:
        raise InputError("--count must be nonnegative")
    params = _parse_params(args.param)
    try:
        metrics = [sample_metric(args.family, params, seed=args.seed + i) for i in range(args.count)]
    except BadParams as exc:
        raise InputError(str(exc)) from exc
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        for i, m in enumerate(metrics):
            (out / f"{args.family}_{args.seed + i:05d}.json").write_text(_json(m.to_json()))
        args.output = None  # files written; nothing else to emit
        return EXIT_OK, "" if args.format == "json" else f"wrote {len(metrics)} metrics to {out}\n"
    if args.format == "json":
        return EXIT_OK, "".join(json.dumps(m.to_json(), sort_keys=True) + "\n" for m in metrics)
    return EXIT_OK, "".join(f"{args.family} seed {args.seed + i}: diameter {m.diameter:.6g}\n"
                            for i, m in enumerate(metrics))


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None,
                        help="tolerance (check: LSS slack relative to diameter^2, default 1e-9; "
                             "embed/verify: relative distance error, default 1e-6)")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--format", choices=("json", "text", "dot"), default="text")
    common.add_argument("--output", "-o", default=None,
                        help="write the result to this file (sample: a directory of metric files)")

    p = argparse.ArgumentParser(prog="fivepoint", description="Toolkit for 5-point metric spaces.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("check", parents=[common], help="check all LSS inequalities")
    s.add_argument("metric", help="metric JSON: a path, '-' for stdin, or inline JSON")
    s.set_defaults(func=cmd_check)
    s = sub.add_parser("tense", parents=[common], help="list tense sets and the configuration class")
    s.add_argument("metric")
    s.set_defaults(func=cmd_tense)
    s = sub.add_parser("classify", parents=[common], help="search P/Y-free triple configurations")
    s.set_defaults(func=cmd_classify)
    s = sub.add_parser("embed", parents=[common], help="build and self-verify an embedding certificate")
    s.add_argument("metric")
    s.add_argument("--off", default=None, help="also write the polytope V as an OFF mesh")
    s.set_defaults(func=cmd_embed)
    s = sub.add_parser("verify", parents=[common], help="verify a certificate against a metric")
    s.add_argument("metric")
    s.add_argument("certificate")
    s.set_defaults(func=cmd_verify)
    s = sub.add_parser("sample", parents=[common], help="sample metrics from a nonnegatively curved space")
    s.add_argument("family", choices=FAMILIES)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--param", action="append", help="family parameter key=value (value parsed as JSON)")
    s.set_defaults(func=cmd_sample)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        code, text = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EmbedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
