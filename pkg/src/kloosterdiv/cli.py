"""Command-line front end.

    kloosterdiv ksum --p 3 --k 2 --n 1 --beta 1
    kloosterdiv kshort --p 3 5 7 --k 7 --beta 1 --lambda 0.25 0.3 --svg out.svg
    kloosterdiv weyl --p 31 --k 3 --N 961
    kloosterdiv divap --p 3 --k 7 --x 102244
    kloosterdiv identity-check
    kloosterdiv bench --p 5 --k 9 --samples 20

Exit status: 0 on success, 2 on a validation error, 1 when an internal
consistency check fails.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import List, Optional

from . import __version__
from .analytic import default_poisson_grid, hsum_exhaustive, poisson_grid
from .bench import bench_naive_vs_explicit
from .divisor_ap import DEFAULT_MAX_X, discrepancy_scan, tau_sieve
from .errors import KloosterdivError
from .kloosterman import MAX_NAIVE_MODULUS, kloosterman_explicit, kloosterman_naive, weil_check
from .modcore import PrimePowerModulus, legendre
from .padic_phase import build_expansion
from .reports import ReportEnvelope, dicts_csv, divap_csv, to_jsonable
from .shortsum import delta_scan, short_sum_report, weyl_inequality_check, weyl_rhs_literal

DEFAULT_MAX_Q = MAX_NAIVE_MODULUS  # q**2 < 2**63
DEFAULT_MAX_K = 10
SUBCOMMANDS = ("ksum", "kshort", "weyl", "divap", "identity-check", "bench")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    p: List[int] = field(default_factory=list)
    k: Optional[int] = None
    beta: Optional[int] = None
    n: Optional[int] = None
    a: Optional[int] = None
    x: Optional[int] = None
    N: Optional[int] = None
    lambdas: List[float] = field(default_factory=list)
    alpha: Optional[int] = None
    samples: int = 20
    format: str = "json"
    out: Optional[str] = None
    seed: int = 0
    workers: int = 1
    max_q: int = DEFAULT_MAX_Q
    max_x: int = DEFAULT_MAX_X
    max_k: int = DEFAULT_MAX_K
    unsafe: bool = False
    literal: bool = False
    inject_fault: bool = False
    svg: Optional[str] = None
    cases: Optional[int] = None

    def echo(self) -> dict:
        d = asdict(self)
        for key in ("out", "svg", "workers"):
            d.pop(key)
        return d

    def modulus(self, p: int) -> PrimePowerModulus:
        if self.k is None:
            raise ConfigError("--k is required")
        if self.k < 1 or (self.k > self.max_k and not self.unsafe):
            raise ConfigError(f"k={self.k} outside [1, max_k={self.max_k}] (pass --unsafe to override)")
        try:
            m = PrimePowerModulus(p, self.k)
        except KloosterdivError as exc:
            raise ConfigError(str(exc)) from exc
        if m.q > self.max_q and not self.unsafe:
            raise ConfigError(f"q={m.q} exceeds max_q={self.max_q} (pass --unsafe to override)")
        return m


def _common(parser):
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=None, help="worker processes (default: logical cores)")
    parser.add_argument("--max-q", type=int, default=DEFAULT_MAX_Q)
    parser.add_argument("--max-x", type=int, default=DEFAULT_MAX_X)
    parser.add_argument("--max-k", type=int, default=DEFAULT_MAX_K)
    parser.add_argument("--unsafe", action="store_true", help="acknowledge running past the caps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kloosterdiv", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("ksum", help="one Kloosterman sum S(n, beta; p^k)")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--beta", type=int, required=True)
    _common(sp)

    sp = sub.add_parser("kshort", help="short sums sum_{n<=N} S(n, beta; p^k)")
    sp.add_argument("--p", type=int, nargs="+", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--beta", type=int, default=1)
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--N", type=int)
    grp.add_argument("--lambda", dest="lambdas", type=float, nargs="+")
    sp.add_argument("--svg", default=None, help="also draw |sum|/(N sqrt q) against p")
    _common(sp)

    sp = sub.add_parser("weyl", help="Weyl differencing inequality per residue class")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--beta", type=int, default=1)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--alpha", type=int, default=None)
    sp.add_argument("--literal", action="store_true", help="also evaluate the bound by nested loops")
    _common(sp)

    sp = sub.add_parser("divap", help="divisor sums over progressions mod p^k")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--x", type=int, required=True)
    sp.add_argument("--a", type=int, default=None)
    _common(sp)

    sp = sub.add_parser("identity-check", help="h-sum reordering and Poisson identities")
    sp.add_argument("--cases", type=int, default=None, help="only the first CASES grid entries")
    _common(sp)

    sp = sub.add_parser("bench", help="closed form vs brute force timing")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    _common(sp)
    return parser


def config_from_args(ns) -> RunConfig:
    p = ns.p if isinstance(getattr(ns, "p", None), list) else ([ns.p] if getattr(ns, "p", None) else [])
    default_format = "csv" if ns.subcommand == "divap" else "json"
    workers = ns.workers if ns.workers is not None else (os.cpu_count() or 1)
    if workers < 1:
        raise ConfigError("--workers must be >= 1")
    cfg = RunConfig(
        subcommand=ns.subcommand,
        p=p,
        k=getattr(ns, "k", None),
        beta=getattr(ns, "beta", None),
        n=getattr(ns, "n", None),
        a=getattr(ns, "a", None),
        x=getattr(ns, "x", None),
        N=getattr(ns, "N", None),
        lambdas=getattr(ns, "lambdas", None) or [],
        alpha=getattr(ns, "alpha", None),
        samples=getattr(ns, "samples", 20),
        format=ns.format or default_format,
        out=ns.out,
        seed=ns.seed,
        workers=workers,
        max_q=ns.max_q,
        max_x=ns.max_x,
        max_k=ns.max_k,
        unsafe=ns.unsafe,
        literal=getattr(ns, "literal", False),
        inject_fault=getattr(ns, "inject_fault", False),
        svg=getattr(ns, "svg", None),
        cases=getattr(ns, "cases", None),
    )
    if cfg.x is not None and (cfg.x < 1 or (cfg.x > cfg.max_x and not cfg.unsafe)):
        raise ConfigError(f"x={cfg.x} outside [1, max_x={cfg.max_x}] (pass --unsafe to override)")
    if cfg.N is not None and cfg.N < 1:
        raise ConfigError("--N must be >= 1")
    if any(lam <= 0 for lam in cfg.lambdas):
        raise ConfigError("--lambda values must be positive")
    return cfg


@contextmanager
def _pool(workers):
    if workers <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=workers) as ex:
        yield ex.map


class _Timer:
    def __init__(self):
        self.phases = {}

    @contextmanager
    def phase(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.phases[name] = self.phases.get(name, 0.0) + time.perf_counter() - t0


# -- subcommand bodies: each returns (payload, csv_text) ---------------------


def _run_ksum(cfg, timer, map_fn):
    m = cfg.modulus(cfg.p[0])
    n, beta = cfg.n, cfg.beta
    out = {"p": m.p, "k": m.k, "q": m.q, "n": n, "beta": beta, "explicit": None}
    if m.k >= 2 and (n * beta) % m.p:
        with timer.phase("explicit"):
            v = kloosterman_explicit(n, beta, m)
        out["explicit"] = v
        out["approx"] = v.approx
    with timer.phase("naive"):
        naive = kloosterman_naive(n, beta, m.q)
    out["naive"] = naive
    out.setdefault("approx", naive.real)
    if out["explicit"] is not None and abs(naive.real - out["approx"]) >= 1e-6 * m.q**0.5:
        raise AssertionError("closed form and brute force disagree")
    out["weil_ok"] = weil_check(naive, m)
    row = {k: out[k] for k in ("p", "k", "q", "n", "beta", "approx")}
    row["naive"] = naive.real
    return out, dicts_csv([row])


def _report_row(r):
    return {
        "p": r.m.p,
        "k": r.m.k,
        "q": r.m.q,
        "beta": r.beta,
        "lam": r.lam,
        "N": r.N,
        "direct_sum": r.direct_sum.real,
        "phase_sum": r.phase_sum.real,
        "path_gap": r.path_gap,
        "trivial_bound": r.trivial_bound,
        "normalized": r.normalized,
        "weyl_rhs": r.weyl_rhs,
        "empirical_delta": r.empirical_delta,
        "in_theorem_range": r.in_theorem_range,
    }


def _run_kshort(cfg, timer, map_fn):
    rows = []
    for p in cfg.p:
        m = cfg.modulus(p)
        with timer.phase(f"p={p}"):
            if cfg.N is not None:
                reports = [short_sum_report(m, cfg.beta, cfg.N)]
            else:
                reports = delta_scan(m, cfg.beta, cfg.lambdas, map_fn=map_fn)
        rows.extend(_report_row(r) for r in reports)
    if cfg.svg:
        write_svg(rows, cfg.svg)
    return rows, dicts_csv(rows)


def write_svg(rows, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    keys = sorted({r["lam"] if r["lam"] is not None else r["N"] for r in rows})
    for key in keys:
        sel = [r for r in rows if (r["lam"] if r["lam"] is not None else r["N"]) == key]
        sel.sort(key=lambda r: r["p"])
        ax.plot([r["p"] for r in sel], [r["normalized"] for r in sel], marker="o", label=f"{key}")
    ax.set_xlabel("p")
    ax.set_ylabel("|sum S(n,beta;q)| / (N sqrt q)")
    ax.legend(title="lambda" if rows and rows[0]["lam"] is not None else "N")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _run_weyl(cfg, timer, map_fn):
    m = cfg.modulus(cfg.p[0])
    alphas = [cfg.alpha] if cfg.alpha else [a for a in range(1, m.p) if legendre(a, m.p) == 1]
    rows = []
    for alpha in alphas:
        exp = build_expansion(alpha, cfg.beta, m)
        row = {"alpha": alpha, "omega": exp.omega, "c_top": exp.c_top, "N": cfg.N, "admissible": exp.coeffs_coprime[-1]}
        if exp.coeffs_coprime[-1]:
            with timer.phase("weyl"):
                chk = weyl_inequality_check(exp, cfg.N)
            row.update(lhs=chk.lhs, rhs=chk.rhs, holds=chk.holds)
            if cfg.literal and cfg.N >= m.p:
                with timer.phase("literal"):
                    row["rhs_literal"] = weyl_rhs_literal(cfg.N, m, exp.omega, exp.c_top)
            if not chk.holds:
                raise AssertionError(f"Weyl inequality failed for alpha={alpha}: {chk}")
        rows.append(row)
    return rows, dicts_csv(rows)


def _run_divap(cfg, timer, map_fn):
    m = cfg.modulus(cfg.p[0])
    with timer.phase("sieve"):
        tau = tau_sieve(cfg.x, cap=cfg.max_x if not cfg.unsafe else max(cfg.x, cfg.max_x))
    with timer.phase("scan"):
        records, summary = discrepancy_scan(cfg.x, m, tau, map_fn=map_fn, chunks=cfg.workers)
    if cfg.a is not None:
        records = [r for r in records if r.a == cfg.a % m.q]
        if not records:
            raise ConfigError(f"a={cfg.a} is not a unit mod {m.q}")
    if not summary.conservation_ok:
        raise AssertionError("progression sums do not add up to the coprime total")
    rows = [
        {
            "a": r.a,
            "ap_sum": r.ap_sum,
            "main_term": r.main_term,
            "discrepancy": r.discrepancy,
            "normalized": r.normalized,
        }
        for r in records
    ]
    return {"x": cfg.x, "q": m.q, "records": rows, "summary": summary}, divap_csv(records)


def _run_identity(cfg, timer, map_fn):
    hsum = []
    with timer.phase("hsum"):
        for p, k in [(3, 3), (3, 4), (5, 3), (7, 2)]:
            m = PrimePowerModulus(p, k)
            hsum.append({"q": m.q, "all_equal": hsum_exhaustive(m)})
    cases = default_poisson_grid()
    if cfg.cases:
        cases = cases[: cfg.cases]
    with timer.phase("poisson"):
        checks = poisson_grid(cases, map_fn=map_fn)
    rows = []
    for c in checks:
        rel = c.abs_error / c.scale
        rows.append({**c.params, "abs_error": c.abs_error, "relative_error": rel, "ok": rel < 1e-6})
    if not all(h["all_equal"] for h in hsum) or not all(r["ok"] for r in rows):
        raise AssertionError("identity check failed")
    return {"hsum": hsum, "poisson": rows}, dicts_csv(rows)


def _run_bench(cfg, timer, map_fn):
    m = cfg.modulus(cfg.p[0])
    with timer.phase("bench"):
        rec = bench_naive_vs_explicit(m, cfg.samples, cfg.seed, inject_fault=cfg.inject_fault)
    return rec, dicts_csv([to_jsonable(rec)])


RUNNERS = {
    "ksum": _run_ksum,
    "kshort": _run_kshort,
    "weyl": _run_weyl,
    "divap": _run_divap,
    "identity-check": _run_identity,
    "bench": _run_bench,
}


def dispatch(cfg: RunConfig):
    """Run one subcommand; returns (ReportEnvelope, rendered text)."""
    timer = _Timer()
    with _pool(cfg.workers) as map_fn:
        payload, csv_text = RUNNERS[cfg.subcommand](cfg, timer, map_fn)
    env = ReportEnvelope(config=cfg.echo(), payload=payload, timing=timer.phases)
    text = csv_text if cfg.format == "csv" else env.to_json(indent=2) + "\n"
    return env, text


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        _, text = dispatch(cfg)
    except (ConfigError, KloosterdivError) as exc:
        print(f"kloosterdiv: error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"kloosterdiv: internal check failed: {exc}", file=sys.stderr)
        return 1
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
