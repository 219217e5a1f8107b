"""Theorem-verification suites, verdict reports and the ``okbody`` command line."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .config import ConfigError, ExperimentConfig, load_config, parse_grid, parse_rational_tuple
from .exact_geometry import fmt_q, slice_polytope, volume
from .okounkov import (
    BodyError,
    body_slice_compare,
    eventual_leading_coefficient,
    graded_semigroup,
    okounkov_body,
    slice_semigroup,
    toric_okounkov_body,
    volume_of_series,
)
from .series_ops import (
    HypothesisError,
    SeriesError,
    augmented_base_locus,
    base_locus,
    build_V,
    check_conditions,
    complete_series,
    moving_self_intersection,
    points_subseries,
    restricted_volume,
)
from .valuation import ValuationError
from .variety_model import Flag, ModelError, invariant_flags

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
CONSISTENT = "consistent within truncation"


def _s(x) -> str | None:
    return None if x is None else fmt_q(x)


@dataclass
class VerdictReport:
    """One verified relation with the raw data needed to re-derive it.

    Wall-clock time is kept on the object but left out of the JSON so that
    reports are byte-identical across runs.
    """

    tag: str
    relation: str
    left: dict
    right: dict
    verdict: str
    passed: bool
    gap: Fraction | None = None
    sequences: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def to_json(self) -> dict:
        return {
            "tag": self.tag,
            "relation": self.relation,
            "left": self.left,
            "right": self.right,
            "verdict": self.verdict,
            "pass": self.passed,
            "gap": _s(self.gap),
            "sequences": self.sequences,
            "details": self.details,
            "config": self.config,
            "seed": self.config.get("seed"),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sequence", "index", "value"])
        for name in sorted(self.sequences):
            seq = self.sequences[name]
            items = seq.items() if isinstance(seq, dict) else enumerate(seq)
            for k, v in items:
                w.writerow([name, k, v])
        return buf.getvalue()

    def summary(self) -> str:
        gap = "" if self.gap is None else f" gap={fmt_q(self.gap)}"
        return f"{self.tag}: {self.verdict}{gap} [{'pass' if self.passed else 'FAIL'}]"


def _quantity(name: str, value, exact: bool, source: str) -> dict:
    return {"name": name, "value": _s(value), "exact": exact, "source": source}


def _timed(fn):
    def wrapper(cfg, *args, **kwargs):
        t0 = time.perf_counter()
        rep = fn(cfg, *args, **kwargs)
        rep.elapsed = time.perf_counter() - t0
        return rep

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _need_divisor(cfg: ExperimentConfig):
    if cfg.divisor is None:
        raise cfg.error("divisor", "this command needs a [divisor] table")
    return cfg.divisor


def series_from_config(cfg: ExperimentConfig, flag: Flag | None = None):
    """The ``[series]`` table: ``complete`` (default) or ``points`` with rates."""
    D = _need_divisor(cfg)
    spec = cfg.series_spec
    kind = spec.get("kind", "complete")
    if kind == "complete":
        return complete_series(D, flag)
    if kind == "points":
        pts = []
        for i, p in enumerate(spec.get("points", [])):
            try:
                pts.append((parse_rational_tuple(",".join(str(c) for c in p["coords"])), p.get("rate", "1")))
            except (KeyError, ValueError) as exc:
                raise cfg.error("points", f"bad point {i}: {exc}") from None
        if not pts:
            raise cfg.error("points", "points series needs at least one point")
        return points_subseries(D, pts, spec.get("chart"), flag)
    raise cfg.error("kind", f"unknown series kind {kind!r}")


def _check_grid(cfg: ExperimentConfig, D, flag: Flag, r: int) -> list:
    """User grids must stay in the big range; the default grid is trimmed to it."""
    from .series_ops import shifted_divisor

    grid = cfg.grid(r)
    inside = [a for a in grid if shifted_divisor(D, a, flag).is_big()]
    if cfg.a_grid and len(inside) < len(grid):
        bad = next(a for a in grid if a not in inside)
        raise cfg.error("a_grid", f"a-grid entry {[fmt_q(c) for c in bad]} is outside the big range")
    return inside


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


@_timed
def verify_theorem_main_a(cfg: ExperimentConfig) -> VerdictReport:
    """``(d-r)! vol(Delta|_{0^r}) = Y_r . D^{d-r}`` for every ``0 <= r < d``."""
    D = _need_divisor(cfg)
    if not D.is_ample():
        raise cfg.error("divisor", "main-a needs an ample divisor")
    flag = cfg.flag()
    d, M = D.model.d, cfg.truncation
    series = complete_series(D, flag)
    approx = okounkov_body(graded_semigroup(flag, series, M))
    oracle = toric_okounkov_body(D, flag) if flag.kind == "torus" else None
    rows, seqs = [], {}
    passed, all_exact, worst = True, True, Fraction(0)
    for r in range(d):
        k = d - r
        sl = slice_polytope(approx.body, (0,) * r)
        lhs = math.factorial(k) * volume(sl) if not sl.is_empty else Fraction(0)
        rhs = flag.stratum_intersection(r, D)
        exact = approx.exact
        row = {"r": r, "lhs": fmt_q(lhs), "rhs": fmt_q(rhs), "body_exact": exact}
        if oracle is not None:
            osl = slice_polytope(oracle, (0,) * r)
            row["polytope_oracle"] = fmt_q(math.factorial(k) * volume(osl))
        if exact:
            row["status"] = "equal" if lhs == rhs else "violated"
            passed = passed and lhs == rhs
        else:
            all_exact = False
            row["status"] = CONSISTENT
            passed = passed and lhs <= rhs
            worst = max(worst, abs(rhs - lhs))
        if r > 0:
            grid = _check_grid(cfg, D, flag, r)
            seq = {}
            for a in grid:
                s = slice_polytope(approx.body, a)
                seq[",".join(fmt_q(c) for c in a)] = fmt_q(math.factorial(k) * volume(s) if not s.is_empty else 0)
            seqs[f"a_grid_r{r}"] = seq
        rows.append(row)
    if not passed:
        verdict = "violated"
    else:
        verdict = "equal" if all_exact else CONSISTENT
    return VerdictReport(
        "main-a",
        "=",
        _quantity("(d-r)! vol(body slice at 0^r)", Fraction(rows[-1]["lhs"]), approx.exact, "okounkov body of the value semigroup"),
        _quantity("Y_r . D^(d-r)", Fraction(rows[-1]["rhs"]), True, "fan intersection numbers"),
        verdict,
        passed,
        None if all_exact else worst,
        sequences=dict(seqs, counts={str(m): c for m, c in approx.counts.items()}),
        details={"per_r": rows, "body": approx.body.to_json(), "flag": flag.describe()},
        config=cfg.echo(),
    )


def _agree(values: dict) -> tuple:
    """``(verdict, passed, gap)`` for named ``(value, exact)`` pairs."""
    vals = [v for v, _ in values.values() if v is not None]
    exact = [v for v, e in values.values() if v is not None and e]
    gap = max(vals) - min(vals) if vals else None
    if len(set(exact)) > 1:
        return "violated", False, gap
    if len(set(vals)) == 1 and len(exact) == len(values):
        return "equal", True, None
    return CONSISTENT, True, gap


@_timed
def verify_theorem_b(cfg: ExperimentConfig) -> VerdictReport:
    """Slice length, restricted-volume growth and the closed formula, compared."""
    D = _need_divisor(cfg)
    if not D.is_big():
        raise cfg.error("divisor", "theorem-b needs a big divisor")
    flag = cfg.flag()
    d, M = D.model.d, cfg.truncation
    plus = augmented_base_locus(D)
    base = {"augmented_base_locus": plus.to_json(), "flag": flag.describe()}
    try:
        rv = restricted_volume(D, flag, M)
    except HypothesisError as exc:
        return VerdictReport(
            "theorem-b", "=", {}, {}, "hypotheses not met", False,
            details=dict(base, error=str(exc), components=plus.locus.labels()), config=cfg.echo(),
        )
    formula = rv.formula
    series = complete_series(D, flag)
    approx = okounkov_body(graded_semigroup(flag, series, M))
    sl = slice_polytope(approx.body, (0,) * (d - 1))
    length = volume(sl) if not sl.is_empty else Fraction(0)
    details = dict(base, formula=formula.to_json(), restricted=rv.to_json(), body=approx.body.to_json())
    if flag.kind == "torus":
        osl = slice_polytope(toric_okounkov_body(D, flag), (0,) * (d - 1))
        details["polytope_oracle_slice"] = fmt_q(volume(osl) if not osl.is_empty else 0)
    if not formula.hypotheses_ok:
        failing = [k for k, v in formula.checks.items() if v is False]
        details["failing_checks"] = failing
        return VerdictReport(
            "theorem-b", "=", {}, {}, "hypotheses not met", False,
            details=dict(details, components=plus.locus.labels()), config=cfg.echo(),
        )
    values = {
        "slice_length": (length, approx.exact),
        "restricted_volume": (rv.estimate, rv.stabilized),
        "formula": (formula.value, True),
    }
    verdict, passed, gap = _agree(values)
    grid = _check_grid(cfg, D, flag, d - 1) if d > 1 else []
    seq = {}
    for a in grid:
        s = slice_polytope(approx.body, a)
        seq[",".join(fmt_q(c) for c in a)] = fmt_q(volume(s) if not s.is_empty else 0)
    details["three_way"] = {k: {"value": _s(v), "exact": e} for k, (v, e) in values.items()}
    return VerdictReport(
        "theorem-b",
        "=",
        _quantity("length of body slice at 0^(d-1)", length, approx.exact, "okounkov body"),
        _quantity("Y_(d-1).D - sum ord_E||D||", formula.value, True, "closed formula"),
        verdict,
        passed,
        gap,
        sequences={"ranks": {str(m): k for m, k in rv.ranks.items()}, "a_grid": seq},
        details=details,
        config=cfg.echo(),
    )


@_timed
def verify_theorem_c(cfg: ExperimentConfig) -> VerdictReport:
    """``lim (W_m)^[d] / m^d`` against ``lim d! dim W_m / m^d``."""
    d = cfg.model.d
    if d not in (1, 2):
        raise cfg.error("variety", "theorem-c is available for d = 1, 2")
    W = series_from_config(cfg)
    M = cfg.truncation
    moving, dims, per_m = {}, {}, {}
    for m in range(1, M + 1):
        Wm = W.level(m)
        dims[m] = Wm.dim
        if Wm.is_zero():
            continue
        mv = moving_self_intersection(Wm, d, seed=cfg.seed)
        moving[m] = mv
        a = Fraction(mv, m ** d)
        b = Fraction(math.factorial(d) * Wm.dim, m ** d)
        per_m[str(m)] = {"moving": mv, "moving_ratio": fmt_q(a), "dim": Wm.dim, "dim_ratio": fmt_q(b), "gap": fmt_q(abs(a - b))}
    period = W.period()
    lm = eventual_leading_coefficient(moving, d, period)
    ld = eventual_leading_coefficient(dims, d, period)
    lim_moving = lm.value
    lim_dims = None if ld.value is None else ld.value * math.factorial(d)
    conditions = check_conditions(W, min(M, 6), seed=cfg.seed)
    last = per_m[str(max(moving))] if moving else None
    final_gap = Fraction(last["gap"]) if last else None
    if lm.stabilized and ld.stabilized:
        ok = lim_moving == lim_dims
        verdict = "equal" if ok else "violated"
        gap = None if ok else abs(lim_moving - lim_dims)
    else:
        ok = True
        verdict = CONSISTENT
        gap = final_gap
    return VerdictReport(
        "theorem-c",
        "=",
        _quantity("lim (W_m)^[d]/m^d", lim_moving, lm.stabilized, "moving self-intersection"),
        _quantity("lim d! dim W_m/m^d", lim_dims, ld.stabilized, "dimension count"),
        verdict,
        ok,
        gap,
        sequences={"per_m": per_m},
        details={"series": W.describe(), "conditions": conditions, "final_gap": _s(final_gap), "period": period},
        config=cfg.echo(),
    )


@_timed
def verify_lemma_semigroup(cfg: ExperimentConfig) -> VerdictReport:
    """``Gamma(V(D;a)) = Gamma(D)|_a`` level by level."""
    D = _need_divisor(cfg)
    flag = cfg.flag()
    a = cfg.a if cfg.a is not None else ()
    M = cfg.truncation
    C = complete_series(D, flag)
    gamma = graded_semigroup(flag, C, M)
    sliced = slice_semigroup(gamma, a)
    if a:
        V = build_V(D, a, flag)
        gV = graded_semigroup(flag, V, M)
    else:
        gV = gamma
    per_m, mismatched = {}, []
    for m in range(1, M + 1):
        left, right = sorted(gV.level(m)), sorted(sliced.level(m))
        same = left == right
        if not same:
            mismatched.append(m)
        per_m[str(m)] = {"V": len(left), "slice": len(right), "equal": same}
    ok = not mismatched
    return VerdictReport(
        "lemma-semigroup",
        "=",
        _quantity("|Gamma(V(D;a))_m|", sum(len(gV.level(m)) for m in range(1, M + 1)), True, "value sets of V"),
        _quantity("|Gamma(D)|_a,m|", sum(len(sliced.level(m)) for m in range(1, M + 1)), True, "slice of value sets"),
        "equal" if ok else "violated",
        ok,
        sequences={"per_m": per_m},
        details={"a": [fmt_q(c) for c in a], "mismatched_levels": mismatched, "flag": flag.describe(), "V": gV.to_json()},
        config=cfg.echo(),
    )


def experiment_flags(cfg: ExperimentConfig) -> tuple:
    """All invariant flags plus ``generic_flags`` seeded generic ones."""
    flags = list(invariant_flags(cfg.model))
    skipped = []
    cones = cfg.model.cones
    for i in range(cfg.generic_flags):
        seed = cfg.seed * 1000 + i
        try:
            flags.append(Flag.generic(cfg.model, seed, cones[i % len(cones)]))
        except ModelError as exc:
            skipped.append({"seed": seed, "reason": str(exc)})
    return flags, skipped


@_timed
def theorem_a_experiment(cfg: ExperimentConfig) -> VerdictReport:
    """Bounded flag search separating bodies of non-equivalent divisors."""
    if not cfg.pairs:
        raise cfg.error("pairs", "theorem-a needs [[pairs]] entries")
    M = cfg.truncation
    flags, skipped = experiment_flags(cfg)
    cache: dict = {}

    def body(D, i):
        key = (D.coeffs, i)
        if key not in cache:
            cache[key] = okounkov_body(graded_semigroup(flags[i], complete_series(D, flags[i]), M))
        return cache[key]

    rows = []
    supported = True
    for D1, D2, label in cfg.pairs:
        equivalent = D1.linearly_equivalent(D2)
        separating, inconclusive = [], []
        for i, fl in enumerate(flags):
            b1, b2 = body(D1, i), body(D2, i)
            differ = b1.body.vertices != b2.body.vertices
            min1 = min(v[0] for v in b1.body.vertices)
            min2 = min(v[0] for v in b2.body.vertices)
            if differ or min1 != min2:
                if b1.exact and b2.exact:
                    separating.append({"flag": fl.label(), "ord_Y1": [fmt_q(min1), fmt_q(min2)]})
                else:
                    inconclusive.append(fl.label())
        separated = bool(separating)
        ok = separated != equivalent
        supported = supported and ok
        rows.append({
            "label": label,
            "d1": D1.to_json(),
            "d2": D2.to_json(),
            "equivalent": equivalent,
            "big": [D1.is_big(), D2.is_big()],
            "separated": separated,
            "separating_flags": separating,
            "inconclusive_flags": inconclusive,
            "consistent": ok,
        })
    return VerdictReport(
        "theorem-a",
        "separated <=> not equivalent",
        _quantity("pairs consistent", sum(r["consistent"] for r in rows), True, "flag search"),
        _quantity("pairs", len(rows), True, "class lattice"),
        "SUPPORTED" if supported else "NOT SUPPORTED",
        supported,
        details={
            "pairs": rows,
            "flags": [f.label() for f in flags],
            "skipped_generic_flags": skipped,
            "note": "bounded flag family; separation status only, not a proof over all flags",
        },
        config=cfg.echo(),
    )


VERIFIERS = {
    "main-a": verify_theorem_main_a,
    "theorem-b": verify_theorem_b,
    "theorem-c": verify_theorem_c,
    "lemma-semigroup": verify_lemma_semigroup,
    "theorem-a": theorem_a_experiment,
}


# ---------------------------------------------------------------------------
# informational commands
# ---------------------------------------------------------------------------


def _info(tag: str, cfg: ExperimentConfig, details: dict, sequences: dict | None = None) -> VerdictReport:
    return VerdictReport(tag, "report", {}, {}, "computed", True, sequences=sequences or {}, details=details, config=cfg.echo())


def cmd_body(cfg: ExperimentConfig) -> VerdictReport:
    flag = cfg.flag()
    series = series_from_config(cfg, flag)
    rep = volume_of_series(series, cfg.truncation, flag)
    approx = okounkov_body(graded_semigroup(flag, series, cfg.truncation))
    return _info(
        "body", cfg,
        {"body": approx.to_json(), "volume": rep.to_json(), "flag": flag.describe()},
        {"dims": {str(m): k for m, k in rep.dims.items()}},
    )


def cmd_slice(cfg: ExperimentConfig) -> VerdictReport:
    flag = cfg.flag()
    series = series_from_config(cfg, flag)
    a = cfg.a if cfg.a is not None else (0,)
    cmp_ = body_slice_compare(series, flag, a, cfg.truncation)
    bs = cmp_.body_slice
    seg = None
    if bs.dim == 1 and not bs.is_empty:
        seg = [fmt_q(min(v[0] for v in bs.vertices)), fmt_q(max(v[0] for v in bs.vertices))]
    return _info("slice", cfg, {"slice": cmp_.to_json(), "segment": seg, "measure": fmt_q(cmp_.body_slice_measure)})


def cmd_semigroup(cfg: ExperimentConfig) -> VerdictReport:
    flag = cfg.flag()
    series = series_from_config(cfg, flag)
    gamma = graded_semigroup(flag, series, cfg.truncation)
    if cfg.a:
        gamma = slice_semigroup(gamma, cfg.a)
    return _info("semigroup", cfg, {"semigroup": gamma.to_json()}, {"counts": {str(m): c for m, c in gamma.counts().items()}})


def cmd_restricted_volume(cfg: ExperimentConfig) -> VerdictReport:
    D = _need_divisor(cfg)
    flag = cfg.flag()
    rv = restricted_volume(D, flag, cfg.truncation)
    return _info(
        "restricted-volume", cfg, {"restricted": rv.to_json(), "flag": flag.describe()},
        {"ranks": {str(m): k for m, k in rv.ranks.items()}, "ratios": {str(m): fmt_q(v) for m, v in rv.ratios.items()}},
    )


def cmd_base_locus(cfg: ExperimentConfig, level: str = "stable") -> VerdictReport:
    series = series_from_config(cfg)
    desc = base_locus(series, level if level == "stable" else int(level), cfg.truncation)
    details = {"base_locus": desc.to_json()}
    D = series.carrier.divisor
    if series.kind == "complete" and D.is_big():
        details["augmented_base_locus"] = augmented_base_locus(D).to_json()
    return _info("base-locus", cfg, details)


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="TOML or JSON experiment descriptor")
    common.add_argument("--truncation", type=int, help="truncation level M")
    common.add_argument("--seed", type=int, help="seed (overrides NOK_SEED and the descriptor)")
    common.add_argument("--a-grid", help='rational tuples "1/2,1/2;1/4,1/4"')
    common.add_argument("--a", help='rational tuple "1/2" or "1/2,1/3"')
    common.add_argument("--out", help="directory for report files")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="okbody", description="Okounkov bodies and restricted volumes, exactly.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (
        ("body", "Okounkov body approximation and volume"),
        ("slice", "slice of the body at a"),
        ("semigroup", "graded value semigroup"),
        ("restricted-volume", "restricted-volume rank sequence and formula"),
        ("report", "run every verification listed in the descriptor"),
    ):
        sub.add_parser(name, parents=[common], help=text)
    bl = sub.add_parser("base-locus", parents=[common], help="base locus of a level or the stable one")
    bl.add_argument("--level", default="stable")
    vp = sub.add_parser("verify", help="theorem verification suites")
    vp.add_argument("which", choices=sorted(VERIFIERS))
    for act in common._actions:
        if act.dest != "help":
            vp._add_action(act)
    return p


def _emit(rep: VerdictReport, name: str, args, cfg: ExperimentConfig) -> None:
    text = rep.to_csv() if args.format == "csv" else rep.dumps()
    out = args.out or cfg.out
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        target = path / f"{name}.{args.format}"
        target.write_text(text)
        print(f"{rep.summary()} -> {target}")
    else:
        sys.stdout.write(text)
    print(f"{name}: {rep.elapsed:.2f}s", file=sys.stderr)


def _run_report(cfg: ExperimentConfig, args) -> int:
    names = cfg.raw.get("experiment", {}).get("verify", [])
    if not names:
        raise cfg.error("experiment", "report needs experiment.verify = [...]")
    status = EXIT_PASS
    for name in names:
        if name not in VERIFIERS:
            raise cfg.error("verify", f"unknown verification {name!r}")
        rep = VERIFIERS[name](cfg)
        _emit(rep, name, args, cfg)
        if not rep.passed:
            status = EXIT_FAIL
    return status


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.input, seed=args.seed, truncation=args.truncation)
        if args.a is not None:
            cfg.a = parse_rational_tuple(args.a)
        if args.a_grid is not None:
            cfg.a_grid = parse_grid(args.a_grid)
        if args.command == "verify":
            t0 = time.perf_counter()
            rep = VERIFIERS[args.which](cfg)
            rep.elapsed = time.perf_counter() - t0
            _emit(rep, args.which, args, cfg)
            return EXIT_PASS if rep.passed else EXIT_FAIL
        if args.command == "report":
            return _run_report(cfg, args)
        t0 = time.perf_counter()
        if args.command == "base-locus":
            rep = cmd_base_locus(cfg, args.level)
        else:
            rep = {
                "body": cmd_body,
                "slice": cmd_slice,
                "semigroup": cmd_semigroup,
                "restricted-volume": cmd_restricted_volume,
            }[args.command](cfg)
        rep.elapsed = time.perf_counter() - t0
        _emit(rep, args.command, args, cfg)
        return EXIT_PASS
    except (ConfigError, FileNotFoundError, ModelError, SeriesError, BodyError, ValuationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
