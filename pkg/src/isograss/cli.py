"""Command-line surface: catalogs, classification, counting, pavings,
resolutions, fibers, the experimental closure poset, verification suites,
and export to JSON / DOT / CSV.

Reports are deterministic JSON documents: fixed field order, no
timestamps.  Exit codes: 0 all checks pass, 1 a check failed, 2 usage or
input error, 3 enumeration budget refused.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .linalg import DEFAULT_BUDGET, BudgetExceeded, span
from .orbits import DOUBLEPRIME0, PRIME0
from .paving import build_paving
from .polynomials import IntPolynomial
from .sumspace import (
    MultiLabel,
    SpecParseError,
    build_sum_space,
    canonical_representative,
    component_group_order_multi,
    enumerate_multilabels,
    multilabel_of,
    orbit_dim_multi,
    orbit_point_counts,
)
from .towers import resolution_tower, tower_fiber, tower_points
from .verify import SUITE_NAMES, closure_relation, run_suite

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class CliError(Exception):
    pass


def label_to_json(label: MultiLabel) -> dict:
    return {"k": list(label.ks), "r": list(label.rs)}


def label_from_json(d: dict) -> MultiLabel:
    return MultiLabel(tuple(d["k"]), tuple(d["r"]))


def parse_label_arg(text: str) -> MultiLabel:
    """Parse "1:0,1:0p" into a MultiLabel."""
    ks, rs = [], []
    for i, part in enumerate(text.split(",")):
        if ":" not in part:
            raise CliError(f"label component {i}: expected k:r, got {part!r}")
        kstr, rstr = part.split(":", 1)
        try:
            ks.append(int(kstr))
        except ValueError:
            raise CliError(f"label component {i}: bad dimension {kstr!r}") from None
        if rstr in (PRIME0, DOUBLEPRIME0):
            rs.append(rstr)
        else:
            try:
                rs.append(int(rstr))
            except ValueError:
                raise CliError(f"label component {i}: bad rank {rstr!r}") from None
    return MultiLabel(tuple(ks), tuple(rs))


def parse_rows_arg(text: str, width: int, p: int):
    rows = []
    for i, part in enumerate(text.split(";")):
        entries = part.split(",")
        if len(entries) != width:
            raise CliError(f"row {i}: expected {width} entries, got {len(entries)}")
        try:
            rows.append([int(x) % p for x in entries])
        except ValueError as e:
            raise CliError(f"row {i}: {e}") from None
    return np.array(rows, dtype=np.int64)


def bundle(command: str, invocation: dict, results, checks) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "invocation": {"command": command, **invocation},
        "results": results,
        "checks": checks,
    }


def poly_json(poly: IntPolynomial):
    return list(poly.coeffs)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_labels(space_spec: str, k: int, primes=(), budget=DEFAULT_BUDGET, workers=1) -> dict:
    """Catalog of all labels for Gr_k with dims, component orders, counts.

    An out-of-range k yields a valid empty catalog.
    """
    ref = build_sum_space(space_spec, primes[0] if primes else 3)
    labels = enumerate_multilabels(ref, k) if 0 <= k <= ref.n else []
    counts_by_p = {}
    if labels:
        for p in primes:
            space = build_sum_space(space_spec, p)
            counts_by_p[p] = orbit_point_counts(space, k, budget=budget, workers=workers)
    rows = []
    for label in labels:
        row = {
            "label": label_to_json(label),
            "pretty": str(label),
            "dim": orbit_dim_multi(ref, label),
            "component_group_order": component_group_order_multi(ref, label),
        }
        if primes:
            row["counts"] = {str(p): counts_by_p[p].get(label, 0) for p in primes}
        rows.append(row)
    return bundle(
        "labels",
        {"space": space_spec, "k": k, "primes": list(primes)},
        rows,
        [],
    )


def cmd_classify(space_spec: str, rows_text: str, prime: int) -> dict:
    space = build_sum_space(space_spec, prime)
    rows = parse_rows_arg(rows_text, space.n, prime)
    h = span(rows, space.n, prime)
    if h.dim != rows.shape[0]:
        raise CliError(
            f"rows are dependent: {rows.shape[0]} rows span a {h.dim}-dimensional space"
        )
    label = multilabel_of(space, h)
    factors = []
    for i, f in enumerate(space.factors):
        pr = space.project_factor(h, i)
        from .bilinear import radical

        rad = radical(f, pr)
        detail = {
            "factor": i + 1,
            "k": pr.dim,
            "r": label.rs[i],
            "radical_dim": rad.dim,
        }
        if label.rs[i] in (PRIME0, DOUBLEPRIME0):
            from .linalg import subspace_intersect

            detail["witness_intersection"] = subspace_intersect(pr, f.witness).dim
        factors.append(detail)
    results = [
        {
            "label": label_to_json(label),
            "pretty": str(label),
            "dim": orbit_dim_multi(space, label),
            "factors": factors,
        }
    ]
    return bundle("classify", {"space": space_spec, "prime": prime, "rows": rows_text}, results, [])


def cmd_count(space_spec: str, k: int, primes, budget=DEFAULT_BUDGET, workers=1) -> dict:
    rows = []
    ref = build_sum_space(space_spec, 3)
    labels = enumerate_multilabels(ref, k) if 0 <= k <= ref.n else []
    for label in labels:
        entry = {"label": label_to_json(label), "pretty": str(label), "counts": {}}
        rows.append(entry)
    for p in primes if labels else ():
        space = build_sum_space(space_spec, p)
        counts = orbit_point_counts(space, k, budget=budget, workers=workers)
        for entry in rows:
            lab = label_from_json(entry["label"])
            entry["counts"][str(p)] = counts.get(lab, 0)
    return bundle(
        "count", {"space": space_spec, "k": k, "primes": list(primes)}, rows, []
    )


def cmd_paving(space_spec: str, k: int, prime: int = 3) -> dict:
    space = build_sum_space(space_spec, prime)
    if space.m != 1:
        raise CliError("paving applies to a single-factor space")
    paving = build_paving(space.factors[0], k)
    rows = [
        {"piece": pc.piece_id, "affine_dim": pc.affine_dim}
        for pc in paving.pieces
    ]
    return bundle(
        "paving",
        {"space": space_spec, "k": k, "prime": prime},
        rows,
        [
            {
                "name": "count polynomial",
                "passed": True,
                "details": str(paving.count_polynomial()),
                "repro": "",
            }
        ],
    )


def cmd_resolve(space_spec: str, label: MultiLabel, prime: int = 3, budget=DEFAULT_BUDGET) -> dict:
    space = build_sum_space(space_spec, prime)
    tower = resolution_tower(space, label)
    layers = [
        {"kind": layer.kind, "params": list(layer.params), "count": poly_json(layer.count)}
        for layer in tower.layers
    ]
    poly = tower.count_polynomial()
    points = tower_points(space, label, budget=budget)
    ok = len(points) == poly(prime)
    results = [
        {
            "label": label_to_json(label),
            "layers": layers,
            "count_polynomial": poly_json(poly),
            "points_at_prime": len(points),
        }
    ]
    checks = [
        {
            "name": f"tower count at q={prime}",
            "passed": ok,
            "details": f"{len(points)} points vs symbolic {poly(prime)}",
            "repro": f"isograss resolve --space {space_spec} --label "
            + ",".join(f"{a}:{b}" for a, b in zip(label.ks, label.rs)),
        }
    ]
    return bundle("resolve", {"space": space_spec, "prime": prime}, results, checks)


def cmd_fibers(
    space_spec: str,
    label: MultiLabel,
    target_label: MultiLabel | None = None,
    primes=(3, 5),
    budget=DEFAULT_BUDGET,
) -> dict:
    results = []
    for p in primes:
        space = build_sum_space(space_spec, p)
        sub = target_label if target_label is not None else label
        rep = canonical_representative(space, sub)
        fiber = tower_fiber(space, label, rep, budget=budget)
        results.append(
            {
                "prime": p,
                "target_label": label_to_json(sub),
                "fiber_size": len(fiber),
                "invariants": sorted({fp.invariants for fp in fiber.points}),
            }
        )
    return bundle(
        "fibers",
        {"space": space_spec, "label": label_to_json(label), "primes": list(primes)},
        results,
        [],
    )


def _transitive_reduction(labels, rel):
    """Covering edges of the closure partial order (edges point upward)."""
    edges = []
    for top in labels:
        below = rel[top] - {top}
        for mid in below:
            if any(mid in rel[other] and other in below and other != mid for other in below):
                continue
            edges.append((mid, top))
    return edges


def cmd_closure(space_spec: str, k: int, prime: int = 3, budget=DEFAULT_BUDGET) -> dict:
    rel = closure_relation(space_spec, k, prime, budget)
    labels = sorted(rel, key=MultiLabel.sort_key)
    edges = _transitive_reduction(labels, rel)
    results = [
        {
            "nodes": [label_to_json(lab) for lab in labels],
            "pretty": [str(lab) for lab in labels],
            "edges": [
                {"lower": label_to_json(a), "upper": label_to_json(b)} for a, b in edges
            ],
            "note": "experimental closure order from finite-field images",
        }
    ]
    return bundle("closure", {"space": space_spec, "k": k, "prime": prime}, results, [])


def cmd_verify(space_spec, k, primes, suite: str, budget=DEFAULT_BUDGET, workers=1) -> dict:
    from .verify import GRID_SPACES

    specs = (space_spec,) if space_spec else GRID_SPACES
    results = run_suite(
        suite, specs, primes or None, budget=budget, workers=workers, only_k=k
    )
    checks = [
        {"name": r.name, "passed": r.passed, "details": r.details, "repro": r.repro}
        for r in results
    ]
    return bundle(
        "verify",
        {
            "space": space_spec or "grid",
            "k": k,
            "primes": list(primes) if primes else [],
            "suite": suite,
        },
        [],
        checks,
    )


def cmd_export(report: dict, fmt: str) -> str:
    """Render a report as json, dot (closure posets) or csv (catalogs)."""
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    if fmt == "dot":
        return _to_dot(report)
    if fmt == "csv":
        return _to_csv(report)
    raise CliError(f"unknown format {fmt!r}")


def _pretty_label_json(d: dict) -> str:
    return str(MultiLabel(tuple(d["k"]), tuple(d["r"])))


def _to_dot(report: dict) -> str:
    results = report.get("results", [])
    if not results or "nodes" not in results[0]:
        raise CliError("dot export needs a closure report")
    data = results[0]
    lines = ["digraph closure {", "  rankdir=BT;"]
    names = {}
    for idx, node in enumerate(data["nodes"]):
        names[json.dumps(node, sort_keys=True)] = f"n{idx}"
        lines.append(f'  n{idx} [label="{_pretty_label_json(node)}"];')
    for edge in data["edges"]:
        a = names[json.dumps(edge["lower"], sort_keys=True)]
        b = names[json.dumps(edge["upper"], sort_keys=True)]
        lines.append(f"  {a} -> {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _to_csv(report: dict) -> str:
    results = report.get("results", [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["label", "dim", "component_group_order"]
    primes = sorted(
        {p for row in results for p in row.get("counts", {})}, key=int
    )
    writer.writerow(header + [f"count_q{p}" for p in primes])
    for row in results:
        if "label" not in row:
            continue
        base = [
            row.get("pretty", _pretty_label_json(row["label"])),
            row.get("dim", ""),
            row.get("component_group_order", ""),
        ]
        counts = row.get("counts", {})
        writer.writerow(base + [counts.get(p, "") for p in primes])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _parse_primes(text: str):
    try:
        return tuple(int(x) for x in text.split(",") if x)
    except ValueError:
        raise CliError(f"bad prime list {text!r}") from None


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isograss",
        description="Orbit strata of Grassmannians over odd prime fields",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, space=True, k=False, primes=False):
        if space:
            sp.add_argument("--space", required=True, help="factor list, e.g. Sp2+O3")
        if k:
            sp.add_argument("--k", type=int, required=True)
        if primes:
            sp.add_argument("--primes", default="", help="comma-separated, e.g. 3,5")
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--format", default="json", choices=("json", "dot", "csv"))
        sp.add_argument("--out", default=None)

    sp = sub.add_parser("labels", help="label catalog for Gr_k")
    add_common(sp, k=True, primes=True)

    sp = sub.add_parser("classify", help="label of a subspace given by basis rows")
    add_common(sp)
    sp.add_argument("--rows", required=True, help="semicolon-separated rows, e.g. 1,0,1,0")
    sp.add_argument("--prime", type=int, required=True)

    sp = sub.add_parser("count", help="orbit point counts per prime")
    add_common(sp, k=True, primes=True)

    sp = sub.add_parser("paving", help="affine paving of the isotropic Grassmannian")
    add_common(sp, k=True)
    sp.add_argument("--prime", type=int, default=3)

    sp = sub.add_parser("resolve", help="resolution tower for a label")
    add_common(sp)
    sp.add_argument("--label", required=True, help="per-factor k:r list, e.g. 1:0,1:0p")
    sp.add_argument("--prime", type=int, default=3)

    sp = sub.add_parser("fibers", help="resolution fiber over a stratum representative")
    add_common(sp, primes=True)
    sp.add_argument("--label", required=True)
    sp.add_argument("--target-label", default=None)

    sp = sub.add_parser("closure", help="experimental closure poset")
    add_common(sp, k=True)
    sp.add_argument("--prime", type=int, default=3)

    sp = sub.add_parser("verify", help="run a property suite")
    sp.add_argument("--space", default=None)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--primes", default="")
    sp.add_argument("--suite", default="all", choices=SUITE_NAMES + ("all",))
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--format", default="json", choices=("json",))
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("export", help="re-render a JSON report")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--format", default="json", choices=("json", "dot", "csv"))
    sp.add_argument("--out", default=None)
    return parser


def _emit(report: dict, fmt: str, out: str | None) -> None:
    text = cmd_export(report, fmt)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "labels":
            report = cmd_labels(
                args.space, args.k, _parse_primes(args.primes), args.budget, args.workers
            )
        elif args.command == "classify":
            report = cmd_classify(args.space, args.rows, args.prime)
        elif args.command == "count":
            report = cmd_count(
                args.space, args.k, _parse_primes(args.primes), args.budget, args.workers
            )
        elif args.command == "paving":
            report = cmd_paving(args.space, args.k, args.prime)
        elif args.command == "resolve":
            report = cmd_resolve(
                args.space, parse_label_arg(args.label), args.prime, args.budget
            )
        elif args.command == "fibers":
            target = parse_label_arg(args.target_label) if args.target_label else None
            report = cmd_fibers(
                args.space,
                parse_label_arg(args.label),
                target,
                _parse_primes(args.primes) or (3, 5),
                args.budget,
            )
        elif args.command == "closure":
            report = cmd_closure(args.space, args.k, args.prime, args.budget)
        elif args.command == "verify":
            report = cmd_verify(
                args.space,
                args.k,
                _parse_primes(args.primes),
                args.suite,
                args.budget,
                args.workers,
            )
        elif args.command == "export":
            with open(args.infile) as fh:
                report = json.load(fh)
            _emit(report, args.format, args.out)
            return EXIT_OK
        else:  # pragma: no cover
            raise CliError(f"unknown command {args.command}")
    except BudgetExceeded as e:
        print(f"budget refused: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (CliError, SpecParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    _emit(report, args.format, args.out)
    failed = [c for c in report.get("checks", []) if not c.get("passed", True)]
    return EXIT_CHECK_FAILED if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
