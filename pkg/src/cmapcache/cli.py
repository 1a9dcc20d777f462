"""Command-line front end.

Exit codes: 0 success (in-class), 1 invalid parameters, 2 outside the
intersection class, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .bounds import (
    alpha_numerator,
    count_by_intersection,
    rate_report,
    theorem2_rate,
    theorem2_transmission_count,
)
from .combinat import k_subsets
from .delivery import DemandVector, SchemeError, dump_schedule, run_delivery, transmission_size
from .indices import fmt_set, fmt_term
from .model import (
    ParamError,
    SystemParams,
    as_fraction,
    brute_force_intersection_profile,
    derive_params,
    intersection_class_check,
)
from .placement import build_layout
from .verify import (
    DecodeError,
    PayloadConfig,
    PayloadMismatch,
    alpha_witness_parts,
    build_icp,
    check_generalized_independent,
    decode_all,
    decode_payload,
    gf2_decodable,
)

EXIT_OK, EXIT_INVALID, EXIT_OUT_OF_CLASS, EXIT_VERIFY = 0, 1, 2, 3

SWEEP_COLUMNS = ["tp", "mp", "scheme_rate", "corollary_rate", "alpha_bound", "cutset_bound", "man_rate", "cmacc_rate"]
EXACT_COLUMNS = ["mp", "scheme_rate", "corollary_rate", "alpha_bound", "cutset_bound", "man_rate", "cmacc_rate"]


def dec(x: Optional[Fraction]) -> str:
    return "" if x is None else f"{float(x):.6g}"


def exact(x: Optional[Fraction]) -> str:
    return "" if x is None else f"{x.numerator}/{x.denominator}"


def both(x: Optional[Fraction]) -> str:
    return "-" if x is None else f"{x} ({dec(x)})"


def _add_params(sp: argparse.ArgumentParser, with_mp: bool = True) -> None:
    sp.add_argument("--lambda", dest="lam", type=int, required=True, help="number of access caches")
    sp.add_argument("--r", type=int, required=True, help="access degree")
    sp.add_argument("--ma", type=as_fraction, required=True, help="access cache size in files (e.g. 4.5 or 9/2)")
    if with_mp:
        sp.add_argument("--mp", type=as_fraction, required=True, help="private cache size in files")
    sp.add_argument("--n", type=int, required=True, help="number of files")


def _params(args, out) -> Optional[SystemParams]:
    try:
        return derive_params(args.lam, args.r, args.ma, args.mp, args.n)
    except ParamError as e:
        print(f"invalid parameters: {e}", file=out)
        return None


def _header(p: SystemParams, out) -> None:
    print(f"t_a={p.t_a} t_p={p.t_p} K={p.k_users} F={p.f}", file=out)


# ---------- check ----------

def cmd_check(args, out=None) -> int:
    out = out or sys.stdout
    p = _params(args, out)
    if p is None:
        return EXIT_INVALID
    rep = intersection_class_check(p)
    print(f"t_a={p.t_a}", file=out)
    print(f"t_p={p.t_p}", file=out)
    print(f"K={p.k_users}", file=out)
    print(f"F={p.f}", file=out)
    print(f"threshold={rep.threshold}", file=out)
    print(f"in_class={'yes' if rep.in_intersection_class else 'no'}", file=out)
    print(f"uniform_level={rep.uniform_level if rep.uniform_level is not None else '-'}", file=out)
    if rep.witness is not None:
        print(f"witness={fmt_term(rep.witness)}", file=out)
    return EXIT_OK if rep.in_intersection_class else EXIT_OUT_OF_CLASS


# ---------- simulate ----------

def cmd_simulate(args, out=None) -> int:
    out = out or sys.stdout
    p = _params(args, out)
    if p is None:
        return EXIT_INVALID
    if not intersection_class_check(p).in_intersection_class:
        print(f"outside the intersection class: lambda={p.lam} >= {p.threshold}", file=out)
        return EXIT_OUT_OF_CLASS
    d = DemandVector.worst_case(p)
    try:
        schedule = run_delivery(p, d)
    except SchemeError as e:
        print(f"delivery failed: {e}", file=out)
        return EXIT_VERIFY
    rate = Fraction(len(schedule), p.f)
    print(f"{len(schedule)} transmissions, rate {rate} ({dec(rate)})", file=out)
    if args.dump:
        Path(args.dump).write_text(dump_schedule(schedule))
        print(f"schedule written to {args.dump}", file=out)
    layout = build_layout(p)
    try:
        decode_all(p, layout, schedule, d)
    except DecodeError as e:
        print(f"decoding failed: {e}", file=out)
        return EXIT_VERIFY
    print(f"all {p.k_users} users decoded", file=out)
    if args.payload_bits:
        try:
            rebuilt = decode_payload(p, layout, d, schedule, PayloadConfig(args.payload_bits, args.seed))
        except (PayloadMismatch, ValueError) as e:
            print(f"payload check failed: {e}", file=out)
            return EXIT_VERIFY
        print(f"payload: {len(rebuilt)} users reconstructed {args.payload_bits}-bit files bit-exactly "
              f"(seed {args.seed})", file=out)
    return EXIT_OK


# ---------- rates ----------

def cmd_rates(args, out=None) -> int:
    out = out or sys.stdout
    p = _params(args, out)
    if p is None:
        return EXIT_INVALID
    rep = rate_report(p)
    _header(p, out)
    scheme = both(rep.scheme_rate) if rep.scheme_rate is not None else "unavailable (outside intersection class)"
    print(f"scheme_rate     {scheme}", file=out)
    print(f"corollary_rate  {both(rep.corollary_rate)}", file=out)
    print(f"coding_gain     {rep.coding_gain if rep.coding_gain is not None else '-'}", file=out)
    print(f"alpha_bound     {both(rep.alpha_bound)}", file=out)
    print(f"cutset_bound    {both(rep.cutset.value)} raw {both(rep.cutset.raw)} at s={rep.cutset.best_s}, "
          f"q={rep.cutset.q}", file=out)
    print(f"man_rate        {both(rep.man_lower)}  [M = r*Ma + Mp = {p.r * p.m_a + p.m_p}]", file=out)
    print(f"cmacc_rate      {both(rep.cmacc_upper)}  [M = Ma + Mp/r = {p.m_a + p.m_p / p.r}]", file=out)
    return EXIT_OK if rep.scheme_rate is not None else EXIT_OUT_OF_CLASS


# ---------- sweep ----------

@dataclass(frozen=True)
class SweepSpec:
    lam: int
    r: int
    m_a: Fraction
    n_files: int
    vary: str
    start: Fraction
    stop: Fraction
    step: Fraction

    def points(self) -> list[Fraction]:
        if self.step <= 0:
            raise ValueError("sweep step must be positive")
        pts, x = [], self.start
        while x <= self.stop:
            pts.append(x)
            x += self.step
        return pts

    def mp_of(self, x: Fraction) -> Fraction:
        if self.vary == "mp":
            return x
        k = len(k_subsets(self.lam, self.r))
        return x * self.n_files / k


def run_sweep(spec: SweepSpec) -> tuple[list[dict[str, str]], list[str], list[str]]:
    """CSV rows, skipped-point notes, ordering violations."""
    rows, skipped, problems = [], [], []
    last = None
    for x in spec.points():
        mp = spec.mp_of(x)
        try:
            p = derive_params(spec.lam, spec.r, spec.m_a, mp, spec.n_files)
        except ParamError as e:
            skipped.append(f"{spec.vary}={x}: {e}")
            continue
        if not p.lam < p.threshold:
            skipped.append(f"{spec.vary}={x}: outside the intersection class "
                           f"(lambda={p.lam} >= {p.threshold})")
            continue
        rep = rate_report(p)
        vals = {
            "mp": p.m_p, "scheme_rate": rep.scheme_rate, "corollary_rate": rep.corollary_rate,
            "alpha_bound": rep.alpha_bound, "cutset_bound": rep.cutset.value,
            "man_rate": rep.man_lower, "cmacc_rate": rep.cmacc_upper,
        }
        row = {"tp": str(p.t_p)}
        row.update({c: dec(vals[c]) for c in SWEEP_COLUMNS[1:]})
        row.update({c + "_exact": exact(vals[c]) for c in EXACT_COLUMNS})
        rows.append(row)
        s = rep.scheme_rate
        for name in ("alpha_bound", "cutset_bound", "man_rate"):
            if vals[name] > s:
                problems.append(f"t_p={p.t_p}: {name} {vals[name]} exceeds scheme rate {s}")
        if last is not None and s > last:
            problems.append(f"t_p={p.t_p}: scheme rate increased with Mp ({last} -> {s})")
        last = s
    return rows, skipped, problems


def write_sweep_csv(rows: list[dict[str, str]], path) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS + [c + "_exact" for c in EXACT_COLUMNS], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    Path(path).write_text(buf.getvalue())


def cmd_sweep(args, out=None) -> int:
    out = out or sys.stdout
    spec = SweepSpec(args.lam, args.r, args.ma, args.n, args.vary,
                     as_fraction(args.start), as_fraction(args.stop), as_fraction(args.step))
    try:
        rows, skipped, problems = run_sweep(spec)
    except ValueError as e:
        print(f"invalid sweep: {e}", file=out)
        return EXIT_INVALID
    if not rows:
        print("empty sweep: no valid in-class points", file=out)
        for s in skipped:
            print(f"  skipped {s}", file=out)
        return EXIT_INVALID
    try:
        write_sweep_csv(rows, args.out)
    except OSError as e:
        print(f"cannot write {args.out}: {e}", file=out)
        return EXIT_INVALID
    print(f"{len(rows)} rows written to {args.out}", file=out)
    if skipped:
        side = Path(str(args.out) + ".skipped.txt")
        side.write_text("".join(s + "\n" for s in skipped))
        print(f"{len(skipped)} points skipped, reasons in {side}", file=out)
    if args.figure:
        from .figures import plot_sweep
        title = f"lambda={spec.lam}, r={spec.r}, Ma={spec.m_a}, N={spec.n_files}"
        plot_sweep(rows, args.figure, title)
        print(f"figure written to {args.figure}", file=out)
    for msg in problems:
        print(f"ordering violated: {msg}", file=out)
    return EXIT_VERIFY if problems else EXIT_OK


def cmd_plot(args, out=None) -> int:
    out = out or sys.stdout
    from .figures import plot_sweep, read_sweep
    rows = read_sweep(args.csv)
    if not rows:
        print(f"{args.csv} has no rows", file=out)
        return EXIT_INVALID
    plot_sweep(rows, args.out, args.title or "")
    print(f"figure written to {args.out}", file=out)
    return EXIT_OK


# ---------- verify ----------

@dataclass
class Check:
    name: str
    ok: Optional[bool]     # None = skipped
    detail: str = ""

    def line(self) -> str:
        tag = {True: "PASS", False: "FAIL", None: "SKIP"}[self.ok]
        return f"{tag} {self.name}" + (f": {self.detail}" if self.detail else "")


def run_checks(p: SystemParams, gf2_limit: int = 5000, subset_limit: int = 20,
               payload_bits: Optional[int] = None, seed: int = 0, max_lambda: int = 12) -> list[Check]:
    checks: list[Check] = []
    rep = intersection_class_check(p)
    in_class = rep.in_intersection_class

    if p.lam > max_lambda:
        checks.append(Check("intersection profile", None, f"lambda={p.lam} above guard {max_lambda}"))
        profile = None
    else:
        profile = brute_force_intersection_profile(p, max_lambda)
        checks.append(Check("class condition vs brute force", in_class == (0 not in profile),
                            f"formula says {'in' if in_class else 'out'}, profile keys {sorted(profile)}"))
        checks.append(Check("profile total", sum(profile.values()) == p.total_demanded,
                            f"{sum(profile.values())} vs {p.total_demanded}"))
    if rep.witness is not None:
        user, idx = rep.witness
        checks.append(Check("empty-intersection witness", not idx.intersection(user), fmt_term(rep.witness)))
    if not in_class:
        checks.append(Check("delivery", None, "outside the intersection class"))
        return checks

    if profile is not None:
        formula = {i: count_by_intersection(p, i) for i in range(1, p.r)}
        formula = {i: c for i, c in formula.items() if c}
        checks.append(Check("count by intersection vs profile", formula == profile,
                            f"formula {formula} profile {profile}"))
        if rep.uniform_level is not None:
            checks.append(Check("uniform level vs profile", list(profile) == [rep.uniform_level],
                                f"level {rep.uniform_level}, profile keys {sorted(profile)}"))

    d = DemandVector.worst_case(p)
    try:
        schedule = run_delivery(p, d)
    except SchemeError as e:
        checks.append(Check("delivery", False, str(e)))
        return checks
    count = theorem2_transmission_count(p)
    checks.append(Check("transmission count vs formula", len(schedule) == count,
                        f"delivery {len(schedule)}, formula {count}"))
    rate = theorem2_rate(p)
    checks.append(Check("rate vs count/F", rate == Fraction(len(schedule), p.f),
                        f"formula {rate}, delivery {len(schedule)}/{p.f}"))
    bad = [tx for tx in schedule
           if len(tx) != transmission_size(p, len(tx.terms[0][1].intersection(tx.terms[0][0])))]
    checks.append(Check("transmission sizes", not bad, f"{len(bad)} of {len(schedule)} off"))

    b1, b2 = alpha_witness_parts(p)
    n1, n2 = alpha_numerator(p)
    union = set(b1) | set(b2)
    checks.append(Check("alpha witness size", (len(b1), len(b2), len(union)) == (n1, n2, n1 + n2),
                        f"|B1|={len(b1)} |B2|={len(b2)} |B|={len(union)} vs {n1}+{n2}"))
    checks.append(Check("schedule length >= |B|", len(schedule) >= len(union), f"{len(schedule)} vs {len(union)}"))
    if len(union) <= subset_limit:
        icp = build_icp(p, None, d)
        ok = check_generalized_independent(icp, icp.ids_of(union), subset_limit)
        checks.append(Check("B(d) generalized independent", ok, f"{2 ** len(union)} subsets"))
    else:
        checks.append(Check("B(d) generalized independent", None, f"|B|={len(union)} above guard {subset_limit}"))

    try:
        decoded = decode_all(p, None, schedule, d)
        checks.append(Check("peeling decode", True, f"{len(decoded)} users"))
    except DecodeError as e:
        checks.append(Check("peeling decode", False, str(e)))
        decoded = None
    if decoded is not None and p.total_demanded <= gf2_limit:
        disagree = [u for u in k_subsets(p.lam, p.r) if gf2_decodable(p, None, u, schedule, d) != decoded[u]]
        checks.append(Check("GF(2) elimination agrees", not disagree,
                            f"disagreeing users {[fmt_set(u) for u in disagree[:3]]}" if disagree else ""))
    elif decoded is not None:
        checks.append(Check("GF(2) elimination agrees", None, f"{p.total_demanded} terms above guard {gf2_limit}"))
    if payload_bits:
        try:
            decode_payload(p, None, d, schedule, PayloadConfig(payload_bits, seed))
            checks.append(Check("bit-exact payload", True, f"B={payload_bits}, seed {seed}"))
        except PayloadMismatch as e:
            checks.append(Check("bit-exact payload", False, str(e)))
    return checks


def cmd_verify(args, out=None) -> int:
    out = out or sys.stdout
    p = _params(args, out)
    if p is None:
        return EXIT_INVALID
    _header(p, out)
    checks = run_checks(p, args.gf2_limit, args.subset_limit, args.payload_bits, args.seed, args.max_lambda)
    for c in checks:
        print(c.line(), file=out)
    if any(c.ok is False for c in checks):
        return EXIT_VERIFY
    return EXIT_OK if p.lam < p.threshold else EXIT_OUT_OF_CLASS


# ---------- entry ----------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cmapcache",
                                 description="Intersection-class coded caching for multi-access systems with private caches")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("check", help="derived parameters and class membership")
    _add_params(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("simulate", help="run placement, delivery and decoding")
    _add_params(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dump", help="write the transmission schedule to this file")
    sp.add_argument("--payload-bits", type=int, default=0, help="file size B in bits for a bit-exact run")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("rates", help="scheme rate and bounds at one point")
    _add_params(sp)
    sp.set_defaults(func=cmd_rates)

    sp = sub.add_parser("sweep", help="rates over a range of private cache sizes, as CSV")
    _add_params(sp, with_mp=False)
    sp.add_argument("--vary", choices=["mp", "tp"], default="mp", help="swept quantity: Mp in files or t_p (default mp)")
    sp.add_argument("--from", dest="start", required=True, help="first value, inclusive")
    sp.add_argument("--to", dest="stop", required=True, help="last value, inclusive")
    sp.add_argument("--step", default="1", help="increment, exact rational (default 1)")
    sp.add_argument("--out", required=True, help="CSV output path")
    sp.add_argument("--figure", help="also render a rate-vs-t_p figure (png/svg/pdf)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("plot", help="render a figure from a sweep CSV")
    sp.add_argument("csv")
    sp.add_argument("--out", required=True)
    sp.add_argument("--title")
    sp.set_defaults(func=cmd_plot)

    sp = sub.add_parser("verify", help="run every brute-force oracle at one point")
    _add_params(sp)
    sp.add_argument("--gf2-limit", type=int, default=5000, help="max demanded terms for the GF(2) oracle")
    sp.add_argument("--subset-limit", type=int, default=20, help="max |B(d)| for the 2^n independence check")
    sp.add_argument("--payload-bits", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-lambda", type=int, default=12)
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
