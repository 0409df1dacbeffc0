"""Batch driver: ``dtwall <command> --config cfg.json --out result.json [--format json|tsv]``.

Exit status is 0 when every check of the command passes, 1 when a check
fails and 2 for configuration errors (schema violations, bad values,
exceeded enumeration budgets).
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from itertools import product
from math import comb, factorial

import jsonschema

from .lattice import ClassVector, ConfigError, LatticeConfig, Window
from .series import MonoidSeries, SeriesError, log_series, macmahon
from .stability import (ChargePath, GaussRational, PathError, XiCharge, chamber_classify,
                        find_walls)
from .toycat import BoundError, Quiver, QuiverRep, SubrepLattice, WeakStabilityFn, all_reps
from .wallcross import (BudgetError, ChargeOracle, InvariantTable, LinearGerm,
                        WallGerm, XiGerm, binomial_collapse, default_n_table, dt_closed_form,
                        dtpt_check, gamma0_window_classes, kirchhoff_tree_weight,
                        limit_coeffs, nhat_closed_form, nondecr_surjections, path_transport,
                        s_limit_closed_form, surjection_identity_check, transform, tree_weight,
                        trees, uex_closed_form)

COMMANDS = ("macmahon", "nhat", "coeffs", "transform", "walls", "transport", "dtpt-check",
            "hn", "identities")

DEFAULT_BUDGETS = {"max_l": 10, "max_trees": 8 ** 6, "max_terms": 2_000_000,
                   "max_subrep_dim": 6, "max_index_count": 5000}

G = GaussRational


class ConfigProblem(ValueError):
    pass


def load_schema() -> dict:
    return json.loads(resources.files("dtwall").joinpath("config.schema.json").read_text())


def _q(x) -> str:
    return str(Fraction(x))


def _rat(pair) -> Fraction:
    return Fraction(pair[0], pair[1])


def _gauss(pair) -> GaussRational:
    return G(_rat(pair[0]), _rat(pair[1]))


def _class(row) -> ClassVector:
    return ClassVector(row[0], tuple(row[1]), row[2])


def _charge(d) -> XiCharge:
    return XiCharge(_gauss(d["z0"]), tuple(_rat(w) for w in d["omega"]), _gauss(d["z1"]))


class Run:
    """Parsed configuration shared by every command."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        lat = cfg.get("lattice", {})
        rank = lat.get("curve_rank", 0)
        table = {tuple(b): m for b, m in lat["m_table"]} if "m_table" in lat else None
        slope = _rat(lat["m_slope"]) if "m_slope" in lat else Fraction(0)
        self.lattice = LatticeConfig(rank, lat.get("chi_X", 0), table, slope)
        win = cfg.get("window", {"k_cut": 6})
        beta_cut = tuple(win.get("beta_cut", [0] * rank))
        self.window = Window(win["k_cut"], beta_cut, self.lattice)
        self.budgets = dict(DEFAULT_BUDGETS, **cfg.get("budgets", {}))
        size = len(self.window.indices("T")) + len(self.window.indices("S"))
        if size > self.budgets["max_index_count"]:
            raise BudgetError(f"window retains {size} indices, above max_index_count")
        self.mode = cfg.get("mode", "euler")
        self.chi = cfg.get("chi", self.lattice.chi_X)

    def series(self, key: str, mode: str, default=None) -> MonoidSeries:
        if key not in self.cfg:
            return default
        coeffs = {}
        for n, beta, num, den in self.cfg[key]:
            idx = (n, tuple(beta))
            coeffs[idx] = coeffs.get(idx, 0) + Fraction(num, den)
        return MonoidSeries(self.window, coeffs, mode)


# default inputs


def default_germs(curve_rank: int) -> list[WallGerm]:
    """A hook germ and two-step germs with off-wall rank-zero classes above and below ``O_X``."""
    germs = [WallGerm(XiGerm(XiCharge(G(-1, 1), (Fraction(1),) * curve_rank, G(-1, 1)),
                             dz0=G(-1, -1)), curve_rank)]
    if curve_rank >= 1:
        for off in (G(-3, 2), G(-1, 3)):
            c = [G(-2, 4)] + [off] * (curve_rank - 1)
            germs.append(WallGerm(LinearGerm(G(-1, 2), c, G(-1, 2), dz1=G(1, 1)), curve_rank))
    return germs


def default_pool(curve_rank: int) -> list[ClassVector]:
    z = (0,) * curve_rank
    pool = [ClassVector(0, z, 1), ClassVector(-1, z, 1), ClassVector(-1, z, 0),
            ClassVector(-2, z, 0)]
    if curve_rank >= 1:
        e0 = tuple(-1 if j == 0 else 0 for j in range(curve_rank))
        pool.append(ClassVector(0, e0, 0))
    if curve_rank >= 2:
        e1 = tuple(-1 if j == 1 else 0 for j in range(curve_rank))
        pool += [ClassVector(0, e1, 0), ClassVector(-1, e1, 0)]
    return pool


def _germ_from(cfg: dict, curve_rank: int) -> WallGerm:
    if cfg["kind"] == "xi":
        zero = [[0, 1], [0, 1]]
        fam = XiGerm(_charge(cfg["base"]), _gauss(cfg.get("dz0", zero)),
                     _gauss(cfg.get("dz1", zero)), tuple(_rat(x) for x in cfg.get("domega", [])))
    else:
        zero = [[0, 1], [0, 1]]
        fam = LinearGerm(_gauss(cfg["a"]), [_gauss(c) for c in cfg["c"]], _gauss(cfg["z1"]),
                         _gauss(cfg.get("da", zero)), [_gauss(c) for c in cfg.get("dc", [])],
                         _gauss(cfg.get("dz1", zero)))
    return WallGerm(fam, curve_rank)


def default_path(curve_rank: int) -> ChargePath:
    """From the PT chamber to the DT chamber through one wall."""
    om = (Fraction(1),) * curve_rank
    return ChargePath([XiCharge(G(-2, 1), om, G(-1, 1)), XiCharge(G(-1, 2), om, G(-1, 1))])


def default_pt(window: Window) -> MonoidSeries:
    """``1`` plus deterministic curve terms ``(n + 2|beta|) / (|beta| + 1)``."""
    zero = window.config.zero_curve
    coeffs = {(0, zero): 1}
    for n, beta in window.indices("S"):
        if any(beta):
            coeffs[(n, beta)] = Fraction(n + 2 * sum(beta) + 1, sum(beta) + 1)
    return MonoidSeries(window, coeffs, "S")


# commands


def cmd_macmahon(run: Run):
    sign = run.cfg.get("sign", 1)
    m = macmahon(sign, run.chi, run.window)
    report = {"anchor": "MacMahon function power M(sign x)^chi", "sign": sign, "chi": run.chi,
              "series": m.to_json(), "ok": True}
    return report, m


def cmd_nhat(run: Run):
    n_max = run.cfg.get("n_max", run.window.t_cut - 1)
    if n_max >= run.window.t_cut:
        raise ConfigProblem("n_max must be below the T-window cut")
    sign = 1 if run.mode == "euler" else -1
    logm = log_series(macmahon(sign, run.chi, run.window))
    zero = run.window.config.zero_curve
    rows, ok = [], True
    for n in range(1, n_max + 1):
        nh = nhat_closed_form(n, run.chi, run.mode)
        w = n if run.mode == "euler" or n % 2 else -n
        match = logm[(n, zero)] == w * nh
        ok &= match
        rows.append({"n": n, "nhat": _q(nh), "log_coeff": _q(logm[(n, zero)]), "match": match})
    return {"anchor": "degree-zero invariants from the log of the MacMahon power",
            "mode": run.mode, "chi": run.chi, "rows": rows, "ok": ok}, rows


def _shape_sequences(pool, germ: WallGerm, l_max: int):
    for l in range(1, l_max + 1):
        for vs in product(pool, repeat=l):
            ranks = [v.r for v in vs]
            if all(germ.in_W(v) for v in vs):
                yield vs
            elif ranks.count(1) == 1 and all(germ.family.in_gamma0(v) for v in vs if v.r == 0):
                yield vs


def cmd_coeffs(run: Run):
    l_max = run.cfg.get("l_max", 5)
    if l_max > run.budgets["max_l"]:
        raise BudgetError("l_max exceeds max_l")
    rank = run.lattice.curve_rank
    germs = [_germ_from(run.cfg["germ"], rank)] if "germ" in run.cfg else default_germs(rank)
    pool = [_class(c) for c in run.cfg["pool"]] if "pool" in run.cfg else default_pool(rank)
    rows, ok, checked = [], True, 0
    for gi, germ in enumerate(germs):
        usable = [v for v in pool if v.r == 1 or germ.family.in_gamma0(v)]
        germ.validate(usable)
        for vs in _shape_sequences(usable, germ, l_max):
            s, u = limit_coeffs(vs, germ)
            s_exp = s_limit_closed_form(vs, germ)
            u_exp = uex_closed_form(vs, germ)
            good = s == s_exp and u == u_exp
            checked += 1
            if not good:
                ok = False
                rows.append({"germ": gi, "classes": [v.to_list() for v in vs], "S": s,
                             "S_expected": s_exp, "U": _q(u),
                             "U_expected": None if u_exp is None else _q(u_exp)})
    return {"anchor": "limit coefficients S and U at a DT/PT wall", "checked": checked,
            "mismatches": rows, "ok": ok}, rows


def _default_table(run: Run, germ: WallGerm) -> InvariantTable:
    """Synthetic invariants: wall classes get ``1/n``-type values, rank-one classes ``(n + 1)/(|beta| + 2)``."""
    w = run.window
    entries = {}
    for n, beta in w.indices("T"):
        v = ClassVector.from_nb(n, beta, 0)
        if (n or any(beta)) and germ.family.in_gamma0(v) and germ.in_W(v):
            entries[v] = Fraction(1, n + sum(beta) + 1)
    for n, beta in w.indices("S"):
        entries[ClassVector.from_nb(n, beta, 1)] = Fraction(n + 1, sum(beta) + 2)
    return InvariantTable(run.mode, entries)


def cmd_transform(run: Run):
    rank = run.lattice.curve_rank
    w = run.window
    germ = None
    if "tau" in run.cfg or "tau_prime" in run.cfg:
        if "tau" not in run.cfg or "tau_prime" not in run.cfg:
            raise ConfigProblem("tau and tau_prime must be given together")
        tau, tau_p = ChargeOracle(_charge(run.cfg["tau"])), ChargeOracle(_charge(run.cfg["tau_prime"]))
        sigma = ChargeOracle(_charge(run.cfg["sigma"])) if "sigma" in run.cfg else None
    else:
        germ = _germ_from(run.cfg["germ"], rank) if "germ" in run.cfg else default_germs(rank)[0]
        tau, tau_p, sigma = germ.plus, germ.minus, germ.base
    if "table" in run.cfg:
        J = InvariantTable.from_json(run.cfg["table"], rank)
    elif germ is not None:
        J = _default_table(run, germ)
    else:
        raise ConfigProblem("an invariant table is required with explicit tau / tau_prime")
    if germ is not None:
        germ.validate(J.support())
    targets = ([_class(t) for t in run.cfg["targets"]] if "targets" in run.cfg
               else [ClassVector.from_nb(n, b, 1) for n, b in w.indices("S")])
    tree_sum = run.cfg.get("tree_sum", "auto")
    rows, ok = [], True
    n_hat = dt_plus = None
    if germ is not None:
        sign = 1 if J.mode == "euler" else -1
        n_hat = {v.nb: sign * a for v, a in J.entries.items() if v.r == 0 and germ.in_W(v)}
        dt_plus = {v.nb: sign * a for v, a in J.entries.items() if v.r == 1}
    for v in targets:
        val = transform(J, v, tau, tau_p, w, sigma=sigma, tree_sum=tree_sum,
                        max_l=run.budgets["max_l"], max_terms=run.budgets["max_terms"],
                        max_trees=run.budgets["max_trees"])
        row = {"target": v.to_list(), "value": _q(val)}
        if germ is not None and v.r == 1:
            sign = 1 if J.mode == "euler" else -1
            closed = dt_closed_form(n_hat, dt_plus, v.n, v.curve, J.mode,
                                    n_floor=w.m_min)
            row["closed_form"] = _q(closed)
            row["match"] = sign * val == closed
            ok &= row["match"]
        rows.append(row)
    return {"anchor": "tree-sum transformation of invariants", "mode": J.mode,
            "tree_sum": tree_sum, "rows": rows, "ok": ok}, rows


def _path(run: Run) -> ChargePath:
    if "path" in run.cfg:
        return ChargePath([_charge(k) for k in run.cfg["path"]])
    return default_path(run.lattice.curve_rank)


def _chamber_constant(path: ChargePath, crossings) -> bool:
    """Sample the chamber just inside every stretch between consecutive crossings."""
    cuts = [Fraction(0)]
    for c in crossings:
        lo, hi = c.time.t_bracket
        cuts += [lo, hi]
    cuts.append(Fraction(1))
    stretches = [(cuts[i], cuts[i + 1]) for i in range(0, len(cuts), 2)]
    for a, b in stretches:
        samples = [a + (b - a) * Fraction(k, 8) for k in range(1, 8)]
        if a == 0:
            samples.insert(0, a)
        if b == 1:
            samples.append(b)
        kinds = {chamber_classify(path.at(t)) for t in samples}
        if len(kinds) != 1:
            return False
    return True


def check_walls(path: ChargePath, classes) -> dict:
    fwd = find_walls(path, classes)
    back = find_walls(path.reversed(), classes)
    flipped = [c.epsilon for c in fwd] == [-c.epsilon for c in reversed(back)]
    brackets = all(
        f.time.t_bracket == tuple(sorted((1 - x for x in r.time.t_bracket)))
        for f, r in zip(fwd, reversed(back))) if len(fwd) == len(back) else False
    constant = _chamber_constant(path, fwd)
    return {"crossings": fwd, "reversal_flips_sign": flipped and len(fwd) == len(back),
            "reversal_same_times": brackets, "chamber_constant": constant,
            "ok": flipped and len(fwd) == len(back) and brackets and constant}


def cmd_walls(run: Run):
    path = _path(run)
    classes = ([_class(c) for c in run.cfg["classes"]] if "classes" in run.cfg
               else gamma0_window_classes(run.window))
    res = check_walls(path, classes)
    rows = [c.to_json() for c in res["crossings"]]
    return {"anchor": "DT/PT wall crossings along a path", "crossings": rows,
            "reversal_flips_sign": res["reversal_flips_sign"],
            "reversal_same_times": res["reversal_same_times"],
            "chamber_constant": res["chamber_constant"], "ok": res["ok"]}, rows


def _n_table(run: Run):
    if "n_table" in run.cfg:
        return {(n, tuple(b)): Fraction(p, q) for n, b, p, q in run.cfg["n_table"]}
    return default_n_table(run.chi, run.mode, run.window)


def cmd_transport(run: Run):
    w = run.window
    series = run.series("series", "S", MonoidSeries.one(w, "S"))
    out, out0, crossings = path_transport(series, _path(run), _n_table(run), run.mode, w,
                                          MonoidSeries.one(w))
    report = {"anchor": "generating series carried along a path", "mode": run.mode,
              "crossings": [c.to_json() for c in crossings], "series": out.to_json(),
              "series0": out0.to_json(), "ok": True}
    return report, out


def cmd_dtpt(run: Run):
    w = run.window
    pt = run.series("pt", "S", None) or default_pt(w)
    path = _path(run) if "path" in run.cfg else None
    n_table = _n_table(run) if "n_table" in run.cfg else None
    rep = dtpt_check(pt, run.chi, run.mode, n_table, path)
    report = {"anchor": "reduced DT series equals the PT series", "mode": rep["mode"],
              "chi": rep["chi"], "first_mismatch": rep["first_mismatch"],
              "degree_zero_matches_macmahon": rep["degree_zero_matches_macmahon"],
              "crossings": rep["crossings"], "dt": rep["dt"].to_json(),
              "dt0": rep["dt0"].to_json(), "reduced": rep["reduced"].to_json(), "ok": rep["ok"]}
    return report, rep["reduced"]


def hn_report(L: SubrepLattice) -> dict:
    chain = L.greedy_hn()
    factors = L.factors(chain)
    semistable = all(L.semistable(a, b) for a, b in zip(chain, chain[1:]))
    decreasing = all(L.Z.compare(x, y).value > 0 for x, y in zip(factors, factors[1:]))
    found = L.all_hn()
    multisets = {tuple(sorted(L.factors(c))) for c in found}
    unique = multisets == {tuple(sorted(factors))}
    return {"factors": [list(f) for f in factors], "semistable": semistable,
            "decreasing": decreasing, "filtrations_found": len(found), "unique_classes": unique,
            "ok": semistable and decreasing and unique}


def cmd_hn(run: Run):
    q = run.cfg.get("quiver", {"vertex_count": 2, "arrows": [[0, 1]]})
    quiver = Quiver(q["vertex_count"], tuple(map(tuple, q["arrows"])))
    p = run.cfg.get("p", 2)
    st = run.cfg.get("stability", {"directions": [[[-1, 1], [1, 1]], [[0, 1], [1, 1]]]})
    Z = WeakStabilityFn(tuple(_gauss(u) for u in st["directions"]),
                        tuple(st["levels"]) if "levels" in st else None)
    if len(Z.directions) != quiver.vertex_count:
        raise ConfigProblem("one stability direction per vertex is required")
    bound = run.budgets["max_subrep_dim"]
    if "reps" in run.cfg:
        reps = [QuiverRep.from_flat(quiver, r["dims"], r["maps"], p) for r in run.cfg["reps"]]
    else:
        top = run.cfg.get("all_reps_max_dim", 3)
        if top > bound:
            raise BudgetError("all_reps_max_dim exceeds max_subrep_dim")
        reps = list(all_reps(quiver, top, p))
    rows, ok = [], True
    for M in reps:
        if M.total_dim > bound:
            raise BudgetError(f"representation of dimension {M.total_dim} exceeds max_subrep_dim")
        rep = hn_report(SubrepLattice(M, Z, bound))
        rep["dims"] = list(M.dims)
        rep["maps"] = [[list(r) for r in m] for m in M.maps]
        ok &= rep["ok"]
        rows.append(rep)
    return {"anchor": "Harder-Narasimhan filtrations of quiver representations",
            "rows": rows, "ok": ok}, rows


def cmd_identities(run: Run):
    l_max = run.cfg.get("l_max", 7)
    c_max = run.cfg.get("collapse_l_max", 12)
    rows, ok = [], True

    def add(name, l, got, want):
        nonlocal ok
        match = got == want
        ok &= match
        rows.append({"identity": name, "l": l, "value": _q(got), "expected": _q(want),
                     "match": match})

    for l in range(1, l_max + 1):
        add("surjection sum", l, surjection_identity_check(l), Fraction(1, factorial(l)))
        for lp in range(1, l + 1):
            add(f"surjection count into {lp}", l, len(nondecr_surjections(l, lp)),
                comb(l - 1, lp - 1))
    for l in range(1, c_max + 1):
        add("binomial collapse", l, binomial_collapse(l), Fraction(1, factorial(l - 1)))
    for l in range(1, min(l_max, 8) + 1):
        add("tree count", l, len(trees(l)), l ** (l - 2) if l >= 2 else 1)
    for l in range(2, min(l_max, 8) + 1):
        vs = [ClassVector(-i, (), 1 if i == 1 else 0) for i in range(1, l + 1)]
        add("tree sum against Kirchhoff", l, tree_weight(vs), kirchhoff_tree_weight(vs))
    return {"anchor": "combinatorial identities of the transformation coefficients",
            "rows": rows, "ok": ok}, rows


HANDLERS = {"macmahon": cmd_macmahon, "nhat": cmd_nhat, "coeffs": cmd_coeffs,
            "transform": cmd_transform, "walls": cmd_walls, "transport": cmd_transport,
            "dtpt-check": cmd_dtpt, "hn": cmd_hn, "identities": cmd_identities}


# output


def _jsonable(x):
    if isinstance(x, Fraction):
        return _q(x)
    if isinstance(x, MonoidSeries):
        return x.to_json()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _tsv_rows(rows) -> str:
    if isinstance(rows, MonoidSeries):
        return rows.to_tsv()
    if not rows:
        return ""
    keys = sorted({k for r in rows for k in r})
    lines = ["\t".join(keys)]
    for r in rows:
        lines.append("\t".join(json.dumps(_jsonable(r.get(k)), sort_keys=True)
                               if isinstance(r.get(k), (list, dict)) else str(r.get(k, ""))
                               for k in keys))
    return "\n".join(lines) + "\n"


def run(command: str, config_path: str, output_path: str, fmt: str = "json") -> int:
    if command not in HANDLERS:
        print(f"unknown command {command!r}", file=sys.stderr)
        return 2
    try:
        with open(config_path) as fh:
            cfg = json.load(fh)
        jsonschema.validate(cfg, load_schema())
        state = Run(cfg)
        report, table = HANDLERS[command](state)
    except (OSError, json.JSONDecodeError, jsonschema.ValidationError, ConfigError,
            ConfigProblem, BudgetError, BoundError, PathError, SeriesError, ValueError) as exc:
        msg = exc.message if isinstance(exc, jsonschema.ValidationError) else str(exc)
        print(f"config error: {msg}", file=sys.stderr)
        return 2
    report = {"command": command, **report}
    if fmt == "tsv":
        text = _tsv_rows(table)
    else:
        text = json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"
    with open(output_path, "w") as fh:
        fh.write(text)
    return 0 if report["ok"] else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dtwall", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--format", choices=("json", "tsv"), default="json")
    args = parser.parse_args(argv)
    return run(args.command, args.config, args.out, args.format)


if __name__ == "__main__":
    sys.exit(main())
