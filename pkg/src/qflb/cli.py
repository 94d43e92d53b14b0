"""Command-line front end.

Exit codes: 0 every selected check passed, 1 some check failed, 2 bad input.
JSON output is canonical (sorted keys) and carries no timing, so identical
invocations produce identical bytes.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import catalog
from .algebra import (Algebra, characteristic_sequence, is_nilpotent, leibniz_residual,
                      natural_grading, series)
from .derivations import (TABLE1, check_table1_row, derivation_space, family_diag_coords,
                          nil_independent_rank)
from .exactla import Inconsistent, Matrix, format_scalar, parse_scalar
from .extensions import (ExtensionProblem, nilradical_subspace, quadratic_residuals, solve_extension,
                         verify_solvable_extension)
from .invariants import distinguish, invariant_profile

DEFAULT_SWEEP = (6, 7, 8, 9, 10)
CHECKS = ("leibniz", "nilpotent", "solvable", "grading", "nilradical", "char")


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# input resolution


def _scalar(text: str) -> Fraction:
    try:
        return parse_scalar(text)
    except (ValueError, ZeroDivisionError) as e:
        raise InputError(f"bad scalar {text!r}: {e}") from None


def _params(pairs: Sequence[str]) -> Dict[str, Fraction]:
    out = {}
    for p in pairs or ():
        if "=" not in p:
            raise InputError(f"--param expects key=value, got {p!r}")
        k, v = p.split("=", 1)
        out[k.strip()] = _scalar(v.strip())
    return out


class Source:
    """A resolved algebra plus what is known about where it came from."""

    def __init__(self, alg: Algebra, label: str, kind: str, family: Optional[str] = None,
                 descriptor: Optional[dict] = None):
        self.alg = alg
        self.label = label
        self.kind = kind            # nilpotent | solvable | file
        self.family = family        # L, G, mu1, mu2 or None
        self.descriptor = descriptor or {}

    def digest(self) -> str:
        return hashlib.sha256(self.alg.to_json().encode()).hexdigest()[:16]


def resolve_family(name: str, n: Optional[int], alpha, beta, gamma, params) -> Source:
    if n is None:
        raise InputError("--n is required with --family")
    a = _scalar(alpha) if alpha is not None else Fraction(0)
    b = _scalar(beta) if beta is not None else Fraction(0)
    g = _scalar(gamma) if gamma is not None else Fraction(0)
    desc = {"family": name, "n": n}
    if name in ("mu1", "mu2"):
        alg = catalog.build(catalog.FamilySpec(name, n))
        return Source(alg, f"{name}_{n}", "nilpotent", name, desc)
    if name in ("L", "G"):
        alg = catalog.build(catalog.FamilySpec(name, n, (a, b, g)))
        desc.update(alpha=format_scalar(a), beta=format_scalar(b), gamma=format_scalar(g))
        return Source(alg, alg.name, "nilpotent", name, desc)
    try:
        code, k = catalog.parse_solvable_tag(name)
    except catalog.CatalogError:
        code = None
    if code is not None:
        alg = catalog.build_solvable(catalog.FamilySpec(name, n, (), params))
        desc["params"] = {k: format_scalar(v) for k, v in sorted(params.items())}
        return Source(alg, alg.name, "solvable", None, desc)
    spec = catalog.alias(name, beta=b, gamma=g)
    alg = catalog.build(catalog.FamilySpec(spec.tag, n, spec.params))
    desc.update(resolved=spec.tag, params=[format_scalar(p) for p in spec.params])
    return Source(alg, f"{name}_{n}", "nilpotent", spec.tag, desc)


def resolve_file(path: str) -> Source:
    try:
        with open(path, encoding="utf-8") as fh:
            alg = Algebra.from_json(fh.read())
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except (ValueError, KeyError, TypeError) as e:
        raise InputError(f"{path}: not an algebra JSON document ({e})") from None
    return Source(alg, os.path.basename(path), "file", None, {"file": os.path.basename(path)})


def resolve(args, family=None, file=None) -> Source:
    family = family if family is not None else getattr(args, "family", None)
    file = file if file is not None else getattr(args, "file", None)
    if bool(family) == bool(file):
        raise InputError("give exactly one of --family or --file")
    if file:
        return resolve_file(file)
    return resolve_family(family, args.n, args.alpha, args.beta, args.gamma, _params(args.param))


def seed_of(args) -> int:
    env = os.environ.get("QFLB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"QFLB_SEED must be an integer, got {env!r}") from None
    return args.seed


# ---------------------------------------------------------------------------
# output


def emit(args, payload: dict, text: str) -> None:
    out = json.dumps(payload, sort_keys=True, indent=2) + "\n" if args.format == "json" else text + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def run_report(command: str, inputs: Dict[str, str], checks: Dict[str, str], extra=None) -> dict:
    status = "pass" if all(v == "pass" for v in checks.values()) else "fail"
    report = {"command": command, "inputs": inputs, "checks": checks, "status": status}
    if extra:
        report.update(extra)
    return report


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def _check_text(label: str, checks: Dict[str, str], details: Dict[str, str]) -> str:
    lines = [label]
    for k in sorted(checks):
        note = f"  ({details[k]})" if details.get(k) else ""
        lines.append(f"  {k:<11} {checks[k]}{note}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# commands


def cmd_catalog(args) -> int:
    if args.list:
        listing = {
            "nilpotent": ["mu1", "mu2", "L", "G"],
            "aliases": list(catalog.ALIAS_NAMES),
            "solvable": catalog.solvable_tags(),
        }
        text = "\n".join(f"{k}: {', '.join(v)}" for k, v in listing.items())
        emit(args, listing, text)
        return 0
    src = resolve(args)
    payload = {"source": src.descriptor, "algebra": src.alg.to_dict()}
    emit(args, payload, "\n".join([src.label] + src.alg.describe()))
    return 0


def _default_checks(src: Source) -> List[str]:
    if src.kind == "solvable":
        return ["leibniz", "solvable", "nilradical"]
    if src.kind == "nilpotent":
        return ["leibniz", "nilpotent", "grading", "char"]
    return ["leibniz"]


def _expected_char(src: Source) -> Optional[Tuple[int, ...]]:
    n = src.alg.dim
    if src.family in ("mu1", "mu2"):
        return (n - 2, 1, 1)
    if src.family in ("L", "G"):
        return (n - 2, 2)
    return None


def verify_checks(src: Source, names: Sequence[str]) -> Tuple[Dict[str, str], Dict[str, str]]:
    alg = src.alg
    checks, details = {}, {}
    for name in names:
        if name == "leibniz":
            rep = leibniz_residual(alg)
            checks[name] = _status(rep.ok)
            if not rep.ok:
                details[name] = rep.summary()
        elif name == "nilpotent":
            checks[name] = _status(is_nilpotent(alg))
            details[name] = "lower central " + str(series(alg).lower_central)
        elif name == "solvable":
            prof = series(alg)
            checks[name] = _status(prof.solvable)
            details[name] = f"derived {prof.derived}; nilpotent={prof.nilpotent}"
        elif name == "grading":
            if not is_nilpotent(alg):
                checks[name], details[name] = "fail", "not nilpotent"
            else:
                g = natural_grading(alg)
                checks[name] = _status(g.is_naturally_graded)
                details[name] = f"layers {g.layer_dims}"
        elif name == "nilradical":
            try:
                rep = verify_solvable_extension(alg, nilradical_subspace(alg))
            except ValueError as e:
                checks[name], details[name] = "fail", str(e)
            else:
                checks[name] = _status(rep.ok)
                details[name] = ", ".join(f"{k}={v}" for k, v in sorted(rep.as_dict().items())
                                          if not v) or "all flags true"
        elif name == "char":
            try:
                c = characteristic_sequence(alg, alg.basis_vector(0))
            except ValueError as e:
                checks[name], details[name] = "fail", str(e)
            else:
                want = _expected_char(src)
                checks[name] = _status(want is None or c == want)
                details[name] = f"C(e1)={c}" + (f", expected {want}" if want else "")
    return checks, details


def cmd_verify(args) -> int:
    src = resolve(args)
    names = _default_checks(src)
    if args.checks:
        names = [c.strip() for c in args.checks.split(",") if c.strip()]
        bad = [c for c in names if c not in CHECKS]
        if bad:
            raise InputError(f"unknown checks {bad}; choose from {', '.join(CHECKS)}")
    checks, details = verify_checks(src, names)
    report = run_report("verify", {src.label: src.digest()}, checks,
                        {"source": src.descriptor, "details": details})
    emit(args, report, _check_text(src.label, checks, details))
    return 0 if report["status"] == "pass" else 1


def _matrix_strings(m: Matrix) -> List[List[str]]:
    return [[format_scalar(c) for c in row] for row in m.rows]


def cmd_der(args) -> int:
    src = resolve(args)
    der = derivation_space(src.alg)
    payload = {"source": src.descriptor, "dim_der": der.dim,
               "basis": [_matrix_strings(d) for d in der.basis()]}
    text = [f"{src.label}: dim Der = {der.dim}"]
    if src.family in ("L", "G"):
        rank = nil_independent_rank(src.alg, family_diag_coords(src.family, src.alg.dim), der)
        payload["rank_diag"] = rank
        text.append(f"rank of diagonal projection = {rank}")
    emit(args, payload, "\n".join(text))
    return 0


def _load_matrix(path: str, n: int) -> Matrix:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except ValueError as e:
        raise InputError(f"{path}: invalid JSON ({e})") from None
    rows = data.get("matrix", data) if isinstance(data, dict) else data
    if not (isinstance(rows, list) and len(rows) == n and all(isinstance(r, list) and len(r) == n for r in rows)):
        raise InputError(f"{path}: expected an {n}x{n} matrix (rows of scalar strings)")
    return Matrix([[_scalar(str(c)) for c in r] for r in rows], n)


def cmd_extend(args) -> int:
    src = resolve(args)
    n = src.alg.dim
    d = _load_matrix(args.derivation, n)
    seed_idx = []
    for tok in (args.ann_r or "").split(","):
        if tok.strip():
            i = int(tok)
            if not 1 <= i <= n:
                raise InputError(f"--ann-r index {i} outside 1..{n}")
            seed_idx.append(i - 1)
    try:
        prob = ExtensionProblem(src.alg, d, ann_r_seed=seed_idx,
                                require_non_nilpotent=not args.allow_nilpotent,
                                pinned=_params(args.pin))
    except ValueError as e:
        raise InputError(str(e)) from None
    try:
        sol = solve_extension(prob)
    except Inconsistent:
        payload = {"source": src.descriptor, "consistent": False}
        emit(args, payload, "no extension: the linear stage is inconsistent")
        return 1
    residuals = quadratic_residuals(prob, sol)
    particular = {prob.names[t]: format_scalar(v) for t, v in enumerate(sol.particular) if v}
    images = sol.affine_images()
    general = {prob.names[t]: p.to_json(prob.names) for t, p in images.items() if p}
    payload = {
        "source": src.descriptor,
        "consistent": True,
        "linear_solution": {"particular": particular, "general": general,
                            "homogeneous_dim": sol.homogeneous.dim},
        "free_params": sol.free_names,
        "quadratic_residuals": [{"triple": r.triple, "component": f"e{r.component + 1}",
                                 "poly": r.poly.to_json(prob.names)} for r in residuals],
    }
    text = [f"free parameters ({len(sol.free_names)}): {', '.join(sol.free_names) or 'none'}"]
    for name, p in sorted(images.items()):
        if p:
            text.append(f"  {prob.names[name]} = {p.format(prob.names)}")
    text.append(f"quadratic residuals: {len(residuals)}")
    text += [f"  {r.triple}[e{r.component + 1}]: {r.poly.format(prob.names)}" for r in residuals]
    emit(args, payload, "\n".join(text))
    return 0


def cmd_invariants(args) -> int:
    fams, files = args.family or [], args.file or []
    if not fams and not files:
        raise InputError("give at least one --family or --file")
    sources = [resolve(args, family=f, file="") for f in fams]
    sources += [resolve(args, family="", file=f) for f in files]
    seed = seed_of(args)
    profiles = {s.label: invariant_profile(s.alg, seed) for s in sources}
    payload = {"profiles": {k: p.as_dict() for k, p in profiles.items()}, "seed": seed}
    lines = [f"{k}: " + ", ".join(f"{f}={v}" for f, v in sorted(p.as_dict().items()) if f != "spectrum")
             for k, p in profiles.items()]
    if len(sources) > 1:
        try:
            rep = distinguish([s.alg for s in sources], [s.label for s in sources], seed)
        except ValueError as e:
            raise InputError(str(e)) from None
        payload["distinction"] = rep.as_dict()
        lines += ["", rep.text()]
    emit(args, payload, "\n".join(lines))
    return 0


def _n_list(args) -> List[int]:
    ns = args.n if args.n is not None else list(DEFAULT_SWEEP)
    if not ns:
        raise InputError("empty n list")
    bad = [n for n in ns if n < 6]
    if bad:
        raise InputError(f"n must be >= 6, got {bad}")
    return sorted(set(ns))


def cmd_table1(args) -> int:
    seed = seed_of(args)
    rows, checks = [], {}
    for n in _n_list(args):
        for row in TABLE1:
            key = f"n={n} {row.label}"
            if not row.applies(n):
                rows.append({"n": n, "row": row.label, "status": "skipped", "reason": "needs odd n"})
                continue
            res = check_table1_row(row, n, seed)
            checks[key] = _status(res.ok)
            rows.append({"n": n, "row": row.label, "expected": row.dim_q, "rank": res.rank,
                         "bound": "<=" if row.upper_bound else "=",
                         "nilpotency_guard": res.nilpotency.ok, "status": checks[key]})
    report = run_report("table1", {}, checks, {"rows": rows, "seed": seed})
    text = [f"{r['n']:>3}  {r['row']:<14} " + (
        f"expected {r['expected']} got {r['rank']}  {r['status']}" if r["status"] != "skipped"
        else "skipped (needs odd n)") for r in rows]
    failed = [k for k, v in checks.items() if v != "pass"]
    text.append(f"{len(checks) - len(failed)}/{len(checks)} rows match" +
                (f"; mismatches: {', '.join(failed)}" if failed else ""))
    emit(args, report, "\n".join(text))
    return 0 if not failed else 1


def cmd_report(args) -> int:
    """Leibniz + structure checks over the whole catalog, Table 1, solvable certification."""
    seed = seed_of(args)
    checks: Dict[str, str] = {}
    inputs: Dict[str, str] = {}
    for n in _n_list(args):
        algs: List[Source] = [resolve_family("mu1", n, None, None, None, {}),
                              resolve_family("mu2", n, None, None, None, {})]
        for row in TABLE1:
            if row.applies(n):
                a, b, g = (format_scalar(p) for p in row.params)
                algs.append(resolve_family(row.family, n, a, b, g, {}))
        for tag in catalog.solvable_tags():
            if tag.startswith("H") and n % 2 == 0:
                continue
            algs.append(resolve_family(tag, n, None, None, None, {}))
        for src in algs:
            inputs[src.label] = src.digest()
            res, _ = verify_checks(src, _default_checks(src))
            for k, v in res.items():
                checks[f"{src.label} {k}"] = v
        for row in TABLE1:
            if row.applies(n):
                checks[f"n={n} table1 {row.label}"] = _status(check_table1_row(row, n, seed).ok)
    report = run_report("report", inputs, checks, {"seed": seed})
    failed = sorted(k for k, v in checks.items() if v != "pass")
    text = f"{len(checks) - len(failed)}/{len(checks)} checks pass"
    if failed:
        text += "\nfailed:\n  " + "\n  ".join(failed)
    emit(args, report, text)
    return 0 if not failed else 1


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, n_many: bool = False, multi: bool = False) -> None:
    if n_many:
        p.add_argument("--n", type=int, nargs="*", help="dimensions (default 6 7 8 9 10)")
    else:
        p.add_argument("--n", type=int, help="dimension of the (nil)algebra")
    if multi:
        p.add_argument("--family", action="append", help="catalog family (repeatable)")
        p.add_argument("--file", action="append", help="algebra JSON file (repeatable)")
    else:
        p.add_argument("--family", help="mu1, mu2, L, G, an alias like 'L^{2,beta}', or a solvable tag like R1_1m10")
        p.add_argument("--file", help="algebra JSON file")
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--gamma")
    p.add_argument("--param", action="append", default=[], metavar="K=V",
                   help="extension parameter, e.g. a=5 for R1_100")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (QFLB_SEED overrides)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qflb", description="Exact computations with Leibniz "
                                     "algebras, their derivations and codimension-one extensions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="build or list catalog algebras")
    _common(p)
    p.add_argument("--list", action="store_true", help="list family names")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("verify", help="run structural checks")
    _common(p)
    p.add_argument("--checks", help=f"comma list from {', '.join(CHECKS)}")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("der", help="derivation space")
    _common(p)
    p.set_defaults(func=cmd_der)

    p = sub.add_parser("extend", help="solve a codimension-one extension problem")
    _common(p)
    p.add_argument("--derivation", required=True, help="JSON n x n matrix: column j is [e_j, x]")
    p.add_argument("--ann-r", help="1-based indices with [x, e_i] = 0, e.g. 2,3,4")
    p.add_argument("--pin", action="append", default=[], metavar="NAME=V",
                   help="fix an unknown, e.g. '[x,e1]_e2=0'")
    p.add_argument("--allow-nilpotent", action="store_true")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("invariants", help="invariant profiles and pairwise distinction")
    _common(p, multi=True)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("table1", help="complement dimensions of the nilpotent families")
    _common(p, n_many=True)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("report", help="full verification sweep")
    _common(p, n_many=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, catalog.CatalogError) as e:
        print(f"qflb {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
