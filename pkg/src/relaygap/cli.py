"""Command-line front end: channel files in, JSON/CSV reports out.

Four subcommands cover the workflow:

* ``terms``     — single-hop capacity quantities of a channel,
* ``vertices``  — corner points of the outer / uplink / downlink regions,
* ``certify``   — per-vertex half-bit gap certificates (file or ensemble),
* ``sweep``     — plot-ready CSV of certificates along a parameter sweep.

Numbers are printed with 12 significant digits everywhere, infinities as the
string ``"inf"``; CSV uses '.' decimals, ',' separators, and a mandatory
header row.  Exit codes: 0 success / all certificates pass, 1 a certificate
failed, 2 bad input (the message names the offending field).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bounds import downlink_polytope, outer_bound, uplink_polytope
from .certifier import (
    MonteCarloConfig,
    MonteCarloReport,
    Theorem1Report,
    monte_carlo,
    verify_theorem1,
)
from .downlink import classify_case
from .effective import canonicalize
from .model import (
    CapacityTerms,
    GapCertificate,
    InternalConsistencyError,
    SystemParams,
    ValidationError,
    capacity_terms,
)
from .polytope import HalfspaceSystem, enumerate_vertices, maximal_vertices

_CHANNEL_KEYS = ("h", "g", "P", "sigma2", "sigmaR2", "PR")


# ---------------------------------------------------------------------------
# number / JSON / CSV rendering
# ---------------------------------------------------------------------------


def _jnum(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if math.isnan(x):
        raise InternalConsistencyError("NaN leaked into a report")
    return format(x, ".12g")


def _csv_num(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".12g")


def _is_scalar(v) -> bool:
    return not isinstance(v, (dict, list, tuple))


def _render(node, indent: int = 0) -> str:
    """Deterministic pretty JSON: dicts multiline, scalar lists inline."""
    pad = "  " * indent
    if isinstance(node, dict):
        if not node:
            return "{}"
        parts = [
            f'{pad}  {json.dumps(str(k))}: {_render(v, indent + 1)}'
            for k, v in node.items()
        ]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(node, (list, tuple)):
        items = list(node)
        if not items:
            return "[]"
        if all(_is_scalar(v) for v in items):
            return "[" + ", ".join(_render(v) for v in items) + "]"
        parts = [f"{pad}  " + _render(v, indent + 1) for v in items]
        return "[\n" + ",\n".join(parts) + f"\n{pad}]"
    if isinstance(node, bool):
        return "true" if node else "false"
    if node is None:
        return "null"
    if isinstance(node, float):
        return _jnum(node)
    if isinstance(node, int):
        return str(node)
    if isinstance(node, str):
        return json.dumps(node)
    raise InternalConsistencyError(f"cannot render {type(node).__name__} into a report")


# ---------------------------------------------------------------------------
# channel file parsing
# ---------------------------------------------------------------------------


def _coerce_number(value, field: str) -> float:
    if isinstance(value, bool):
        raise ValidationError(f"field {field!r} must be a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if value == "inf":
        return math.inf
    raise ValidationError(f'field {field!r} must be a number or "inf", got {value!r}')


def parse_channel(obj) -> SystemParams:
    """Turn a decoded channel-file JSON object into validated SystemParams."""
    if not isinstance(obj, dict):
        raise ValidationError("channel file must contain a JSON object")
    for key in _CHANNEL_KEYS:
        if key not in obj:
            raise ValidationError(f"channel file is missing field {key!r}")
    unknown = sorted(set(obj) - set(_CHANNEL_KEYS))
    if unknown:
        raise ValidationError(f"channel file has unknown field {unknown[0]!r}")
    vecs: Dict[str, Tuple[float, ...]] = {}
    for key in ("h", "g", "P", "sigma2"):
        raw = obj[key]
        if not isinstance(raw, list) or len(raw) != 4:
            raise ValidationError(f"field {key!r} must be an array of exactly 4 numbers")
        vecs[key] = tuple(_coerce_number(v, f"{key}[{i + 1}]") for i, v in enumerate(raw))
    return SystemParams(
        h=vecs["h"],
        g=vecs["g"],
        P=vecs["P"],
        sigma2=vecs["sigma2"],
        sigmaR2=_coerce_number(obj["sigmaR2"], "sigmaR2"),
        PR=_coerce_number(obj["PR"], "PR"),
    )


def _load_channel(path: str) -> SystemParams:
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"channel file is not valid JSON: {exc}") from exc
    return parse_channel(obj)


# ---------------------------------------------------------------------------
# report documents
# ---------------------------------------------------------------------------


def _channel_doc(p: SystemParams) -> dict:
    return {
        "h": list(p.h),
        "g": list(p.g),
        "P": list(p.P),
        "sigma2": list(p.sigma2),
        "sigmaR2": p.sigmaR2,
        "PR": p.PR,
    }


def _terms_doc(terms: CapacityTerms) -> dict:
    return {
        "C": list(terms.C),
        "D": list(terms.D),
        "Cpair": {f"{i}{j}": terms.Cpair[(i, j)] for (i, j) in sorted(terms.Cpair)},
        "sigmaBar2": list(terms.sigma_bar2),
    }


def _cert_doc(cert: GapCertificate) -> dict:
    return {
        "link": cert.link,
        "label": cert.vertex_label,
        "subcase": cert.subcase,
        "target": list(cert.target),
        "achieved": list(cert.achieved),
        "slack": list(cert.slack),
        "pass": cert.passed,
    }


def _theorem_doc(params: SystemParams, report: Theorem1Report) -> dict:
    return {
        "channel": _channel_doc(params),
        "orderings": [
            {
                "rateOrder": list(rep.rate_order),
                "perm": list(rep.perm),
                "uplink": [_cert_doc(c) for c in rep.uplink],
                "downlink": [_cert_doc(c) for c in rep.downlink],
            }
            for rep in report.orderings
        ],
        "combined": [_cert_doc(c) for c in report.combined],
        "pass": report.passed,
    }


def _mc_doc(report: MonteCarloReport) -> dict:
    cfg = report.config
    return {
        "config": {
            "trials": cfg.trials,
            "seed": cfg.seed,
            "gainRange": list(cfg.gain_range),
            "powerRange": list(cfg.power_range),
            "noiseRange": list(cfg.noise_range),
        },
        "trials": report.trials,
        "failures": report.failures,
        "pass": report.passed,
        "maxSlack": {
            "uplink": report.max_slack["uplink"],
            "downlink": report.max_slack["downlink"],
            "combined": report.max_slack["combined"],
        },
        "worst": {
            "link": report.worst.link,
            "label": report.worst.vertex_label,
            "slack": report.worst.slack,
            "channel": _channel_doc(report.worst.channel),
        },
        "subcaseCounts": dict(report.subcase_counts),
    }


def _vertices_doc(system: HalfspaceSystem) -> List[dict]:
    vset = enumerate_vertices(system)
    maximal = maximal_vertices(vset)
    docs = []
    for vertex, tight in zip(vset.vertices, vset.tight_sets):
        docs.append(
            {
                "rates": list(vertex),
                "tight": [int(i) for i in tight],
                "maximal": vertex in maximal,
            }
        )
    return docs


_CERT_HEADER = (
    ["ordering", "link", "label", "subcase"]
    + [f"target{i}" for i in range(1, 5)]
    + [f"achieved{i}" for i in range(1, 5)]
    + [f"slack{i}" for i in range(1, 5)]
    + ["pass"]
)


def _cert_rows(report: Theorem1Report) -> List[Tuple[str, GapCertificate]]:
    """Flatten a theorem report into (ordering tag, certificate) rows."""
    rows: List[Tuple[str, GapCertificate]] = []
    for rep in report.orderings:
        tag = f"{rep.rate_order[0]}-{rep.rate_order[1]}"
        for cert in (*rep.uplink, *rep.downlink):
            rows.append((tag, cert))
    for cert in report.combined:
        rows.append(("", cert))
    return rows


def _cert_csv_row(tag: str, cert: GapCertificate) -> List[str]:
    return [
        tag,
        cert.link,
        cert.vertex_label,
        cert.subcase,
        *(_csv_num(v) for v in cert.target),
        *(_csv_num(v) for v in cert.achieved),
        *(_csv_num(v) for v in cert.slack),
        "true" if cert.passed else "false",
    ]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_terms(args: argparse.Namespace) -> int:
    params = _load_channel(args.channel)
    print(_render(_terms_doc(capacity_terms(params))))
    return 0


def cmd_vertices(args: argparse.Namespace) -> int:
    params = _load_channel(args.channel)
    doc: dict
    if args.link == "outer":
        system = outer_bound(capacity_terms(params))
        doc = {"link": "outer"}
    else:
        eff = canonicalize(params)
        terms = capacity_terms(eff.params)
        if args.link == "uplink":
            system = uplink_polytope(terms)
            doc = {"link": "uplink", "rateOrder": [1, 3], "perm": list(eff.perm)}
        else:
            case = classify_case(terms.sigma_bar2)
            system = downlink_polytope(case, terms)
            doc = {
                "link": "downlink",
                "rateOrder": [1, 3],
                "perm": list(eff.perm),
                "case": case.value,
            }
    doc["vertices"] = _vertices_doc(system)
    print(_render(doc))
    return 0


def cmd_certify(args: argparse.Namespace) -> int:
    if (args.channel is None) == (args.random is None):
        raise ValidationError("certify needs a channel file or --random TRIALS SEED (not both)")

    if args.random is not None:
        if args.format == "csv":
            raise ValidationError("--format csv is only available for channel-file certification")
        trials, seed = args.random
        report = monte_carlo(MonteCarloConfig(trials=trials, seed=seed))
        print(_render(_mc_doc(report)))
        return 0 if report.passed else 1

    params = _load_channel(args.channel)
    report = verify_theorem1(params)
    if args.format == "json":
        print(_render(_theorem_doc(params, report)))
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(_CERT_HEADER)
        for tag, cert in _cert_rows(report):
            writer.writerow(_cert_csv_row(tag, cert))
    return 0 if report.passed else 1


def cmd_sweep(args: argparse.Namespace) -> int:
    params = _load_channel(args.channel)
    if args.steps < 1:
        raise ValidationError(f"--steps must be >= 1, got {args.steps}")
    if args.steps == 1:
        values = [float(args.start)]
    else:
        values = [float(v) for v in np.linspace(args.start, args.stop, args.steps)]

    writer = csv.writer(sys.stdout, lineterminator="\n")
    header = (
        ["param", "value"]
        + _CERT_HEADER[:4]
        + [f"C{i}" for i in range(1, 5)]
        + [f"D{i}" for i in range(1, 5)]
        + _CERT_HEADER[4:]
    )
    writer.writerow(header)
    for value in values:
        swept = dataclasses.replace(params, **{args.param: value})
        terms = capacity_terms(swept)
        report = verify_theorem1(swept)
        prefix = [args.param, _csv_num(value)]
        mids = [_csv_num(v) for v in (*terms.C, *terms.D)]
        for tag, cert in _cert_rows(report):
            row = _cert_csv_row(tag, cert)
            writer.writerow(prefix + row[:4] + mids + row[4:])
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaygap",
        description=(
            "Capacity outer bounds, transceiver synthesis, and half-bit gap "
            "certification for the Gaussian two-pair two-way relay channel."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("terms", help="print single-hop capacity terms")
    t.add_argument("channel", help="channel JSON file path, or - for stdin")
    t.set_defaults(func=cmd_terms)

    v = sub.add_parser("vertices", help="print region vertices with tight rows")
    v.add_argument("channel", help="channel JSON file path, or - for stdin")
    v.add_argument(
        "--link",
        choices=("outer", "uplink", "downlink"),
        required=True,
        help="which region to enumerate (per-link regions use the canonical frame)",
    )
    v.set_defaults(func=cmd_vertices)

    c = sub.add_parser("certify", help="run half-bit gap certificates")
    c.add_argument("channel", nargs="?", help="channel JSON file path, or - for stdin")
    c.add_argument(
        "--random",
        nargs=2,
        type=int,
        metavar=("TRIALS", "SEED"),
        help="certify a seeded random ensemble instead of a channel file",
    )
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.set_defaults(func=cmd_certify)

    s = sub.add_parser("sweep", help="CSV of certificates along a parameter sweep")
    s.add_argument("channel", help="channel JSON file path, or - for stdin")
    s.add_argument("--param", choices=("PR", "sigmaR2"), required=True)
    s.add_argument("--from", dest="start", type=float, required=True)
    s.add_argument("--to", dest="stop", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.set_defaults(func=cmd_sweep)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
