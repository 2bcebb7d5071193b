"""Command line front end: every subcommand runs one bundle of exact checks
and emits a single deterministic structured report.

Reports are JSON documents with sorted keys: a command echo, an input digest,
a results tree, and a list of named assertions.  The process exits 0 exactly
when every assertion passed.  Identical invocations produce byte-identical
output; timing is only included on request (it breaks determinism).
"""

from __future__ import annotations

import argparse
import enum
import hashlib
import json
import sys
import time
from dataclasses import asdict, is_dataclass
from fractions import Fraction

from . import analytic, cosets, lparam, satake, slope, tree
from .linalg import Matrix
from .poly import Poly


def jsonable(x):
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return "inf" if x == float("inf") else x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, Poly):
        return [str(c) for c in x.coeffs]
    if isinstance(x, Matrix):
        return [[str(c) for c in row] for row in x.rows]
    if is_dataclass(x) and not isinstance(x, type):
        return jsonable(asdict(x))
    if isinstance(x, dict):
        return {_key(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted((jsonable(v) for v in x), key=repr)
    return str(x)


def _key(k):
    if isinstance(k, str):
        return k
    if isinstance(k, tuple):
        return ",".join(str(v) for v in k)
    return str(k)


def digest(payload: str) -> str:
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


class Report:
    def __init__(self, command: str, inputs: dict):
        self.command = command
        self.inputs = inputs
        self.results = {}
        self.assertions = []

    def put(self, key, value):
        self.results[key] = jsonable(value)

    def check(self, name, passed, detail=None):
        entry = {"name": name, "passed": bool(passed)}
        if detail is not None:
            entry["detail"] = jsonable(detail)
        self.assertions.append(entry)

    @property
    def passed(self):
        return all(a["passed"] for a in self.assertions)

    def document(self, timing=None):
        doc = {
            "command": self.command,
            "inputs": jsonable(self.inputs),
            "results": self.results,
            "assertions": self.assertions,
            "passed": self.passed,
        }
        if timing is not None:
            doc["timing_ms"] = timing
        return doc

    def render(self, fmt="json", timing=None):
        doc = self.document(timing)
        if fmt == "json":
            return json.dumps(doc, sort_keys=True, indent=2) + "\n"
        lines = [f"== {self.command} =="]
        for key in sorted(self.results):
            lines.append(f"  {key}: {json.dumps(self.results[key], sort_keys=True)}")
        for a in self.assertions:
            tag = "PASS" if a["passed"] else "FAIL"
            lines.append(f"{tag}  {a['name']}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def parse_diag(spec: str, l: int):
    """Comma list of diagonal entries; tokens may use the letter l, e.g. l^2."""
    entries = []
    for tok in spec.split(","):
        tok = tok.strip()
        if tok.startswith("l^"):
            entries.append(Fraction(l) ** int(tok[2:]))
        elif tok == "l":
            entries.append(Fraction(l))
        else:
            entries.append(Fraction(tok))
    n = len(entries)
    m = Matrix.zeros(n, n)
    for i, x in enumerate(entries):
        m.rows[i][i] = x
    return m


def parse_matrix(spec: str) -> Matrix:
    rows = [[Fraction(x) for x in row.split(",")] for row in spec.split(";")]
    return Matrix(rows)


def parse_poly(spec: str) -> Poly:
    return Poly([Fraction(x) for x in spec.split(",")])


# --- subcommand bodies -------------------------------------------------------


def cmd_tree_verify(args):
    rep = Report("tree verify", {"l": args.l, "radius": args.radius})
    ball = tree.TreeBall(args.l, args.radius, vertex_budget=args.budget)
    rep.put("shell_counts", ball.shell_counts())
    rep.put("vertices", ball.size)
    rep.check(
        "shell_counts_follow_growth_law",
        ball.shell_counts() == tree.expected_shell_counts(args.l, args.radius),
    )
    comp = tree.verify_composition(ball)
    rep.put("composition_checked_deltas", comp["checked_deltas"])
    rep.check("composition_identity", comp["ok"], comp["violations"][:3])
    mirror = tree.verify_mirror_composition(ball)
    rep.put("mirror_checked_deltas", mirror["checked_deltas"])
    rep.check("mirror_identity", mirror["ok"], mirror["violations"][:3])
    return rep


def _load_graph_file(path):
    with open(path) as fh:
        text = fh.read()
    return cosets.load_graph(text), digest(text)


def cmd_graph_analyze(args):
    g, text_digest = _load_graph_file(args.path)
    rep = Report("graph analyze", {"path_digest": text_digest, "prime": args.prime})
    rep.put("l", g.l)
    rep.put("v0", g.n0)
    rep.put("v1", g.n1)
    rep.put("edges", g.nedges)
    rep.put("components", g.n_components)
    block = cosets.level_matrix(g)
    rep.check("level_matrix_blocks", block.report["ok"], block.report)
    _, _, dims = cosets.old_new_decomposition(g)
    rep.put("old_dim", dims["old"])
    rep.put("new_dim", dims["new"])
    rep.check("old_new_direct_sum", dims["direct_sum"] and dims["orthogonal"])
    ker = cosets.kernel_eigenvalue_check(g)
    rep.put("composite_kernel_dim", ker["kernel_dim"])
    rep.check("kernel_walk_eigenvalue", ker["ok"])
    det = cosets.det_identity_check(g)
    rep.put("det_lhs", det["lhs"])
    rep.check("det_identity", det["ok"])
    if args.prime:
        ihara = cosets.ihara_kernel_test(g, args.prime)
        rep.put("ihara_kernel_dim", ihara["kernel_dim"])
        rep.check("ihara_kernel_abelian", ihara["ok"])
        search = cosets.level_raising_search(
            g, args.prime, cosets.AuxOperatorFamily.empty(g)
        )
        rep.put("walk_spectrum", search["integer_walk_eigenvalues"])
        rep.put("congruent_eigenvalues", search["congruent_integer_eigenvalues"])
        rep.put("raising_candidates", search["candidates"])
    return rep


def cmd_graph_congruence(args):
    g, text_digest = _load_graph_file(args.path)
    rep = Report("graph congruence", {"path_digest": text_digest})
    data = cosets.congruence_module(g)
    for key in (
        "torsion_invariants",
        "old_lattice_rank",
        "coker_free_rank",
        "gamma_ranks",
        "q01_free_rank",
        "q12_invariants",
        "q23_invariants",
    ):
        rep.put(key, data[key])
    rep.check("gamma_chain_containments", data["containments_ok"])
    return rep


def cmd_graph_levelraise(args):
    g, text_digest = _load_graph_file(args.path)
    inputs = {"path_digest": text_digest, "prime": args.prime, "aux": args.aux}
    rep = Report("graph levelraise", inputs)
    lab = None
    if args.labels:
        with open(args.labels) as fh:
            lab = cosets.load_labeling(fh.read(), g)
        lab.validate(g)
    if args.aux == "auto":
        perms = cosets.find_automorphisms(g, limit=args.aux_limit + 1)
        fam = cosets.AuxOperatorFamily.from_automorphisms(g, perms[1:])
    else:
        fam = cosets.AuxOperatorFamily.empty(g)
    rep.put("aux_members", len(fam.members))
    search = cosets.level_raising_search(g, args.prime, fam, lab)
    for key in (
        "target_eigenvalue_mod_p",
        "eigenspace_dim",
        "new_space_dim",
        "integer_walk_eigenvalues",
        "congruent_integer_eigenvalues",
        "candidates",
    ):
        rep.put(key, search[key])
    rep.check("raised_candidates_found_in_new_space", search["prediction_confirmed"])
    return rep


def cmd_satake_classify(args):
    s = satake.SatakeParam(parse_fraction(args.alpha), args.l)
    rep = Report("satake classify", {"alpha": str(s.alpha), "l": args.l})
    cls = satake.classify_principal_series(s)
    lam = satake.spherical_eigenvalue(s)
    rep.put("classification", cls)
    rep.put("eigenvalue", lam)
    steinberg = cls is satake.PrincipalSeries.CHARACTER_PLUS_STEINBERG
    rep.check(
        "classification_consistent_with_raising",
        steinberg == satake.level_raising_condition(lam, args.l),
    )
    return rep


def cmd_satake_eig(args):
    s = satake.SatakeParam(parse_fraction(args.alpha), args.l)
    rep = Report("satake eig", {"alpha": str(s.alpha), "l": args.l})
    lam = satake.spherical_eigenvalue(s)
    rep.put("eigenvalue", lam)
    rep.put("degree", satake.deg_inert_Tl(args.l))
    rep.check("symmetric_under_inversion", lam == satake.spherical_eigenvalue(
        satake.SatakeParam(1 / s.alpha, args.l)
    ))
    return rep


def cmd_satake_ve_check(args):
    es = satake.SplitEigensystem(
        args.q, parse_fraction(args.t1), parse_fraction(args.t2), parse_fraction(args.t3)
    )
    psi = parse_fraction(args.psi)
    rep = Report(
        "satake ve-check",
        {"q": args.q, "psi": str(psi), "t": [args.t1, args.t2, args.t3]},
    )
    verdict = satake.very_eisenstein_check(es, psi)
    rep.put("very_eisenstein", verdict)
    rep.check("pattern_evaluated", True)
    return rep


def cmd_moduli_components(args):
    s = parse_diag(args.diag, args.l)
    rep = Report("moduli components", {"diag": args.diag, "l": args.l, "group": args.group})
    comps = lparam.components_through(s, args.l)
    rep.put("partitions", sorted(comps, reverse=True))
    rep.put("degenerate", lparam.is_degenerate_satake(s, args.l))
    witnesses = lparam.stratum_witnesses(s, args.l)
    rep.put(
        "witnesses",
        {
            "|".join(map(str, part)): (None if w is None else w)
            for part, w in witnesses.items()
        },
    )
    rep.check(
        "every_partition_witnessed",
        all(w is not None and w["verified"] for w in witnesses.values()),
    )
    nontrivial = any(len(p) < s.nrows for p in comps)
    rep.check("degeneracy_matches_components", nontrivial == lparam.is_degenerate_satake(s, args.l))
    return rep


def cmd_moduli_witness(args):
    s = parse_diag(args.diag, args.l)
    n = s.nrows
    N = Matrix.zeros(n, n)
    for pair in args.nilpotent.split(";"):
        i, j = (int(x) for x in pair.split(","))
        N.rows[i][j] = Fraction(1)
    rep = Report(
        "moduli witness",
        {"diag": args.diag, "l": args.l, "nilpotent": args.nilpotent},
    )
    w = lparam.degeneration_witness(s, N, args.l)
    rep.put("mu", list(w.mu))
    rep.put("jordan_type", lparam.jordan_partition(N))
    rep.check("scaling_verified", w.scaling_verified)
    rep.check("path_on_stratum", w.path_on_stratum)
    return rep


def cmd_moduli_pgl2(args):
    rep = Report("moduli pgl2", {"l": args.l})
    data = lparam.pgl2_check(args.l)
    rep.put("solution_dimension", data["solution_dimension"])
    rep.put("gl2_contrast_dimension", data["gl2_contrast_dimension"])
    rep.check("not_intersection_point", data["not_intersection_point"])
    return rep


def _matrix_input(args):
    if getattr(args, "matrix_file", None):
        with open(args.matrix_file) as fh:
            spec = fh.read().strip()
        return parse_matrix(spec), {"matrix_file_digest": digest(spec)}
    if not args.entries:
        raise ValueError("provide --entries or --matrix-file")
    return parse_matrix(args.entries), {"entries": args.entries}


def cmd_slope_series(args):
    U, src = _matrix_input(args)
    rep = Report("slope series", {**src, "p": args.p})
    P = slope.fredholm_series(U)
    np = slope.newton_polygon(P, args.p)
    rep.put("series", P)
    rep.put("polygon_vertices", np.vertices)
    rep.put("polygon_slopes", np.slopes())
    rep.check("constant_term_one", P(Fraction(0)) == 1)
    return rep


def cmd_slope_polygon(args):
    P = parse_poly(args.poly)
    rep = Report("slope polygon", {"poly": args.poly, "p": args.p})
    np = slope.newton_polygon(P, args.p)
    rep.put("vertices", np.vertices)
    rep.put("slopes", np.slopes())
    rep.check("slopes_weakly_increasing", np.slopes() == sorted(np.slopes()))
    return rep


def cmd_slope_factor(args):
    P = parse_poly(args.poly)
    h = parse_fraction(args.h)
    rep = Report(
        "slope factor",
        {"poly": args.poly, "p": args.p, "h": str(h), "precision": args.precision},
    )
    fact = slope.slope_factorization(P, h, args.p, args.precision)
    rep.put("Q", fact.Q)
    rep.put("S", fact.S)
    rep.put("m", fact.m)
    rep.put("exact", fact.exact)
    residual = fact.residual_valuation(P)
    rep.check(
        "product_matches",
        residual == float("inf") or residual >= args.precision,
        str(residual),
    )
    return rep


def cmd_slope_decompose(args):
    U, src = _matrix_input(args)
    h = parse_fraction(args.h)
    rep = Report(
        "slope decompose",
        {**src, "p": args.p, "h": str(h), "precision": args.precision},
    )
    dec = slope.slope_decomposition(U, h, args.p, args.precision)
    rep.put("q_part_dim", len(dec.q_part_basis))
    rep.put("complement_dim", len(dec.complement_basis))
    rep.put("Q", dec.factorization.Q)
    rep.put("S", dec.factorization.S)
    rep.put(
        "polygon_vertices",
        slope.newton_polygon(slope.fredholm_series(U), args.p).vertices,
    )
    for name, ok in dec.report.items():
        if name != "ok":
            rep.check(name, ok)
    return rep


def cmd_analytic_ihara(args):
    rep = Report(
        "analytic ihara",
        {"p": args.p, "m": args.m, "degree": args.degree, "delta": args.delta},
    )
    delta = parse_fraction(args.delta)
    table = {}
    for d in range(args.degree + 1):
        model = analytic.make_model(args.p, args.m, d, budget=args.budget)
        table[d] = analytic.ihara_rank_test(model, delta)
    rep.put("balls", analytic.make_model(args.p, args.m, 1, budget=args.budget).n_balls)
    rep.put("rank_table", table)
    rep.check("full_rank_at_every_degree", all(table.values()))
    return rep


def cmd_analytic_weight(args):
    rep = Report(
        "analytic weight",
        {
            "p": args.p,
            "level": args.level,
            "chi": [args.chi1, args.chi2, args.chi3],
        },
    )
    chis = []
    for spec in (args.chi1, args.chi2, args.chi3):
        exps = tuple(int(x) for x in spec.split(",")) if spec else ()
        chis.append(analytic.Character(args.p, args.level, exps))
    w = analytic.Weight(*chis)
    central = analytic.central_weight_test(w)
    rep.put("central", central)
    rep.put("rigidity", analytic.torus_rigidity_check(w))
    witness = analytic.torus_rigidity_witness(w)
    rep.put("rigidity_witness", witness)
    rep.check("rigidity_holds", analytic.torus_rigidity_check(w))
    rep.check("witness_iff_noncentral_pair", (witness is None) == (w.chi1 == w.chi2))
    return rep


# --- argument wiring ---------------------------------------------------------


def build_parser():
    top = argparse.ArgumentParser(prog="u3local", description=__doc__)
    top.add_argument("--seed", type=int, default=0, help="seed echoed into reports")
    top.add_argument("--budget", type=int, default=2_000_000, help="size budget")
    top.add_argument("--format", choices=("json", "table"), default="json")
    top.add_argument("--timing", action="store_true", help="include elapsed ms (breaks determinism)")
    sub = top.add_subparsers(dest="group", required=True)

    tr = sub.add_parser("tree").add_subparsers(dest="cmd", required=True)
    v = tr.add_parser("verify")
    v.add_argument("--l", type=int, required=True)
    v.add_argument("--radius", type=int, required=True)
    v.set_defaults(run=cmd_tree_verify)

    gr = sub.add_parser("graph").add_subparsers(dest="cmd", required=True)
    a = gr.add_parser("analyze")
    a.add_argument("path")
    a.add_argument("--prime", type=int)
    a.set_defaults(run=cmd_graph_analyze)
    c = gr.add_parser("congruence")
    c.add_argument("path")
    c.set_defaults(run=cmd_graph_congruence)
    r = gr.add_parser("levelraise")
    r.add_argument("path")
    r.add_argument("--prime", type=int, required=True)
    r.add_argument("--labels")
    r.add_argument("--aux", choices=("auto", "none"), default="auto")
    r.add_argument("--aux-limit", type=int, default=3)
    r.set_defaults(run=cmd_graph_levelraise)

    sa = sub.add_parser("satake").add_subparsers(dest="cmd", required=True)
    cl = sa.add_parser("classify")
    cl.add_argument("--alpha", required=True)
    cl.add_argument("--l", type=int, required=True)
    cl.set_defaults(run=cmd_satake_classify)
    ei = sa.add_parser("eig")
    ei.add_argument("--alpha", required=True)
    ei.add_argument("--l", type=int, required=True)
    ei.set_defaults(run=cmd_satake_eig)
    ve = sa.add_parser("ve-check")
    ve.add_argument("--q", type=int, required=True)
    ve.add_argument("--psi", required=True)
    ve.add_argument("--t1", required=True)
    ve.add_argument("--t2", required=True)
    ve.add_argument("--t3", required=True)
    ve.set_defaults(run=cmd_satake_ve_check)

    mo = sub.add_parser("moduli").add_subparsers(dest="cmd", required=True)
    co = mo.add_parser("components")
    co.add_argument("--diag", required=True)
    co.add_argument("--l", type=int, required=True)
    co.add_argument("--group", default="gl3")
    co.set_defaults(run=cmd_moduli_components)
    wi = mo.add_parser("witness")
    wi.add_argument("--diag", required=True)
    wi.add_argument("--l", type=int, required=True)
    wi.add_argument("--nilpotent", required=True, help="support pairs like '0,1;1,2'")
    wi.set_defaults(run=cmd_moduli_witness)
    pg = mo.add_parser("pgl2")
    pg.add_argument("--l", type=int, required=True)
    pg.set_defaults(run=cmd_moduli_pgl2)

    sl = sub.add_parser("slope").add_subparsers(dest="cmd", required=True)
    se = sl.add_parser("series")
    se.add_argument("--entries", help="rows 'a,b;c,d'")
    se.add_argument("--matrix-file", help="file holding the same row format")
    se.add_argument("--p", type=int, required=True)
    se.set_defaults(run=cmd_slope_series)
    po = sl.add_parser("polygon")
    po.add_argument("--poly", required=True, help="coefficients 'a0,a1,...'")
    po.add_argument("--p", type=int, required=True)
    po.set_defaults(run=cmd_slope_polygon)
    fa = sl.add_parser("factor")
    fa.add_argument("--poly", required=True)
    fa.add_argument("--p", type=int, required=True)
    fa.add_argument("--h", required=True)
    fa.add_argument("--precision", type=int, default=20)
    fa.set_defaults(run=cmd_slope_factor)
    de = sl.add_parser("decompose")
    de.add_argument("--entries")
    de.add_argument("--matrix-file")
    de.add_argument("--p", type=int, required=True)
    de.add_argument("--h", required=True)
    de.add_argument("--precision", type=int, default=20)
    de.set_defaults(run=cmd_slope_decompose)

    an = sub.add_parser("analytic").add_subparsers(dest="cmd", required=True)
    ih = an.add_parser("ihara")
    ih.add_argument("--p", type=int, required=True)
    ih.add_argument("--m", type=int, required=True)
    ih.add_argument("--degree", type=int, required=True)
    ih.add_argument("--delta", default="1")
    ih.set_defaults(run=cmd_analytic_ihara)
    we = an.add_parser("weight")
    we.add_argument("--p", type=int, required=True)
    we.add_argument("--level", type=int, required=True)
    we.add_argument("--chi1", default="")
    we.add_argument("--chi2", default="")
    we.add_argument("--chi3", default="")
    we.set_defaults(run=cmd_analytic_weight)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.monotonic()
    try:
        report = args.run(args)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report.inputs.setdefault("seed", args.seed)
    elapsed = int((time.monotonic() - t0) * 1000) if args.timing else None
    sys.stdout.write(report.render(args.format, elapsed))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
