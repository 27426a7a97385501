"""Command-line front end.

    sparsela [run] --gen binomial 5 --order p4 --factor lu
    sparsela analyze --gen binomial 3
    sparsela bch --blocks 6x4,5x3 --n0 3 --seed 1
    sparsela bup --blocks 6x4,5x3 --n0 3 --case IV

Options may also come from a key=value file given with --config; flags on
the command line win.  The exit status is 0 only when every stage ran.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field

import numpy as np

from . import blockpar, fpscale, stability
from .blockform import angular_partition, greedy_balanced, improve_partition, p4
from .fillasym import eliminate, p3_order, symbolic_lu
from .lufact import factor_gauss, factor_preordered
from .matcore import as_dense, gen_test, read_mm
from .orthosym import cholesky, qr
from .symelim import UGraph, dissection_order, orgm_order
from .update import BartelsGolubBasis, SaundersBasis

ORDERS = ("none", "markowitz", "tewarson", "p3", "p4", "orgm", "dissection")
FACTORS = ("lu", "cholesky", "qr")
SCALES = ("none",) + fpscale.METHODS
SUBCOMMANDS = ("run", "analyze", "bch", "bup")


class StageError(RuntimeError):
    def __init__(self, stage, err):
        super().__init__(f"{stage}: {err}")
        self.stage = stage


@dataclass
class Report:
    rows: list = field(default_factory=list)  # (section, key, value)

    def add(self, section, key, value):
        self.rows.append((section, key, value))

    def render(self, fmt="text"):
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf)
            w.writerow(["section", "key", "value"])
            for r in self.rows:
                w.writerow([r[0], r[1], _fmt(r[2])])
            return buf.getvalue()
        out, last = [], None
        for sec, key, val in self.rows:
            if sec != last:
                out.append(f"[{sec}]")
                last = sec
            out.append(f"  {key:<18} {_fmt(val)}")
        return "\n".join(out) + "\n"

    def get(self, section, key):
        for s, k, v in self.rows:
            if s == section and k == key:
                return v
        raise KeyError((section, key))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def read_config(path):
    """Plain key=value lines; '#' starts a comment; dashes and underscores
    in keys are interchangeable."""
    cfg = {}
    with open(path) as fh:
        for no, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{no}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            cfg[k.replace("-", "_")] = v
    return cfg


def build_parser():
    p = argparse.ArgumentParser(prog="sparsela", description="Sparse linear algebra pipelines.")
    p.add_argument("command", nargs="?", choices=SUBCOMMANDS, default=None)
    p.add_argument("--config", help="key=value file with default options")
    p.add_argument("--input", help="Matrix Market file")
    p.add_argument("--gen", nargs=2, metavar=("KIND", "N"), help="binomial|hilbert|tridiagonal|random and size")
    p.add_argument("--scale", choices=SCALES, default="none")
    p.add_argument("--order", choices=ORDERS, default="none")
    p.add_argument("--factor", choices=FACTORS, default="lu")
    p.add_argument("--fp-base", type=int, default=10)
    p.add_argument("--fp-digits", type=int, default=6)
    p.add_argument("--fp-mode", choices=("rounding", "truncation"), default="rounding")
    p.add_argument("--alpha", type=float, default=1.0, help="balance weight of the partition cost")
    p.add_argument("--blocks-h", type=int, default=2, help="colors for the partition analysis")
    p.add_argument("--pivomin", type=float, default=None)
    p.add_argument("--multmax", type=float, default=None)
    p.add_argument("--updates", type=int, default=0, help="random column replacements to apply")
    p.add_argument("--report", choices=("text", "csv"), default="text")
    p.add_argument("--seed", type=int, default=0)
    # block-angular subcommands
    p.add_argument("--blocks", help="diagonal block shapes, e.g. 6x4,5x3")
    p.add_argument("--n0", type=int, default=2, help="coupling columns")
    p.add_argument("--regime", choices=("serial", "parallel"), default="serial")
    p.add_argument("--case", choices=blockpar.CASES + ("all",), default="all")
    return p


_TYPES = {"fp_base": int, "fp_digits": int, "alpha": float, "blocks_h": int, "pivomin": float,
          "multmax": float, "updates": int, "seed": int, "n0": int}


def parse_args(argv):
    parser = build_parser()
    pre, _ = parser.parse_known_args(argv)
    if pre.config:
        cfg = read_config(pre.config)
        known = {a.dest for a in parser._actions}
        bad = set(cfg) - known
        if bad:
            parser.error(f"unknown config keys: {', '.join(sorted(bad))}")
        for k, v in cfg.items():
            if k == "gen":
                cfg[k] = v.split()
            elif k in _TYPES:
                cfg[k] = _TYPES[k](v)
        parser.set_defaults(**cfg)
    args = parser.parse_args(argv)
    if args.command is None:
        if args.gen is None and args.input is None and args.blocks is None:
            parser.print_usage(sys.stderr)
            raise SystemExit(2)
        args.command = "run"
    return args


def load_matrix(args):
    rng = np.random.default_rng(args.seed)
    if args.input:
        A = as_dense(read_mm(args.input)).astype(float)
        return A, A @ np.ones(A.shape[1])
    if not args.gen:
        raise ValueError("either --input or --gen is required")
    kind, n = args.gen[0], int(args.gen[1])
    if kind == "random":
        A = (rng.random((n, n)) < 0.2) * rng.uniform(-1, 1, (n, n))
        A += np.diag(rng.uniform(1, 2, n))
        return A, A.sum(axis=1)
    A, b = gen_test(kind, n)
    return as_dense(A).astype(float), np.asarray(b, dtype=float)


def _fp(args):
    return fpscale.FPSystem(args.fp_base, args.fp_digits, args.fp_mode)


def _stage(name, fn, *a):
    try:
        return fn(*a)
    except Exception as e:  # noqa: BLE001 - reported with the stage name
        raise StageError(name, e) from e


def _is_symmetric(A):
    return A.shape[0] == A.shape[1] and np.allclose(A, A.T)


def stage_scale(args, A, b, rep):
    if args.scale == "none":
        return A, b, None
    sys_ = _fp(args)
    before = fpscale.expo_stats(A, sys_)
    sc = fpscale.scale(A, args.scale, sys_)
    E = np.array([float(args.fp_base) ** e for e in sc.e])
    D = np.array([float(args.fp_base) ** d for d in sc.d])
    after = fpscale.stats_from_grid(sc.apply_grid(fpscale.exponent_grid(A, args.fp_base)))
    for tag, st in (("before", before), ("after", after)):
        rep.add("scale", f"mex_{tag}", float(st.mex))
        rep.add("scale", f"vex_{tag}", float(st.vex))
        rep.add("scale", f"vex_sum_{tag}", float(st.vex_sum))
        rep.add("scale", f"diam_{tag}", st.diam)
    return E[:, None] * A * D[None, :], E * b, D


def stage_order(args, A, rep):
    n = A.shape[0]
    ident = list(range(1, n + 1))
    if args.order == "none":
        return ident, ident, []
    if args.order in ("orgm", "dissection"):
        if not _is_symmetric(A != 0):
            raise ValueError(f"{args.order} needs a symmetric pattern")
        G = UGraph.from_pattern(A != 0)
        q = orgm_order(G) if args.order == "orgm" else dissection_order(G)[0]
        return q, q, []
    if args.order in ("markowitz", "tewarson"):
        res = eliminate(A, args.order, args.multmax, args.pivomin)
        return res.p, res.q, []
    if args.order == "p3":
        r = p3_order(A != 0)
        rep.add("order", "spikes", len(r.spikes))
        return r.p, r.q, r.spikes
    bt = p4(A != 0)
    rep.add("order", "blocks", bt.h)
    rep.add("order", "spikes", len(bt.spikes))
    return bt.p, bt.q, bt.spikes


def stage_factor(args, A, p, q, spikes, rep):
    Ap = A[np.ix_([i - 1 for i in p], [j - 1 for j in q])]
    if args.factor == "lu":
        F = factor_gauss(A, "partial") if args.order == "none" else factor_preordered(A, p, q, spikes)
        S = np.abs(F.LU) > 0
        rep.add("factor", "enn_A", int((A != 0).sum()))
        rep.add("factor", "enn_LU", int(S.sum()))
        rep.add("factor", "fill", int(S.sum()) - int((A != 0).sum()))
        rep.add("factor", "growth", float(F.growth))
        _, sym = symbolic_lu(Ap != 0)
        rep.add("factor", "symbolic_fill", len(sym))
        return ("lu", F)
    if args.factor == "cholesky":
        if not _is_symmetric(A) or p != q:
            raise ValueError("cholesky needs a symmetric matrix and a symmetric ordering")
        C = cholesky(Ap).C
        rep.add("factor", "enn_A", int((A != 0).sum()))
        rep.add("factor", "enn_L", int((np.abs(C) > 0).sum()))
        return ("cholesky", C)
    F = qr(Ap)
    rep.add("factor", "enn_R", int((np.abs(F.R) > 1e-15).sum()))
    return ("qr", F)


def stage_solve(args, A, b, p, q, fac, rep):
    kind, F = fac
    bp = b[[i - 1 for i in p]]
    if kind == "lu":
        x = F.solve(b)
    elif kind == "cholesky":
        from .lufact import solve_lower, solve_upper

        z = solve_upper(F.T, solve_lower(F, bp))
        x = np.empty_like(z)
        x[[j - 1 for j in q]] = z
    else:
        from .lufact import solve_upper

        z = solve_upper(F.R, F.apply_qt(bp)[: A.shape[1]])
        x = np.empty_like(z)
        x[[j - 1 for j in q]] = z
    rep.add("solve", "residual_inf", stability.residual(A, x, b))
    return x


def stage_analyze(args, A, x, rep):
    nr = stability.norm_report(A)
    for k, v in nr.rows():
        rep.add("analyze", k, v)
    if A.shape[0] <= 40:
        sys_ = _fp(args)
        xt, g = stability.spf_doolittle_solve(A, A @ np.ones(A.shape[1]), sys_)
        rep.add("analyze", "spf_u", float(sys_.u))
        rep.add("analyze", "spf_backward_err", stability.backward_error(A, xt, A @ np.ones(A.shape[1])))
        rep.add("analyze", "wilkinson_bound", stability.wilkinson_bound(A.shape[0], g, float(sys_.u)))
    m = A.shape[0]
    h = max(1, min(args.blocks_h, m))
    colors = improve_partition(A != 0, greedy_balanced(m, h), args.alpha, h)
    part = angular_partition(A != 0, colors, args.alpha, h)
    rep.add("analyze", "partition_cost", part.cost.total)
    rep.add("analyze", "residual_cols", part.cost.c)


def stage_updates(args, A, rep):
    rng = np.random.default_rng(args.seed + 1)
    n = A.shape[0]
    for name, cls in (("bartels_golub", BartelsGolubBasis), ("saunders", SaundersBasis)):
        bas = cls(A)
        for _ in range(args.updates):
            s = int(rng.integers(1, n + 1))
            a = (rng.random(n) < 0.3) * rng.uniform(-1, 1, n)
            a[s - 1] += rng.uniform(1, 2)
            bas.replace(s, a)
        b = bas.B @ np.ones(n)
        x = bas.solve(b)
        rep.add("updates", f"{name}_residual", float(np.abs(bas.B @ x - b).max()))
        if name == "saunders":
            rep.add("updates", "kernel_dim", bas.kernel_dim)
        rng = np.random.default_rng(args.seed + 1)


def run(args) -> Report:
    rep = Report()
    A, b = _stage("input", load_matrix, args)
    rep.add("input", "shape", f"{A.shape[0]}x{A.shape[1]}")
    rep.add("input", "enn", int((A != 0).sum()))
    As, bs, D = _stage("scale", stage_scale, args, A, b, rep)
    p, q, spikes = _stage("order", stage_order, args, As, rep)
    fac = _stage("factor", stage_factor, args, As, p, q, spikes, rep)
    x = _stage("solve", stage_solve, args, As, bs, p, q, fac, rep)
    if D is not None:
        x = D * x
    rep.add("solve", "x", x)
    rep.add("solve", "residual_orig", stability.residual(A, x, b))
    _stage("analyze", stage_analyze, args, A, x, rep)
    if args.updates:
        _stage("updates", stage_updates, args, A, rep)
    return rep


def analyze(args) -> Report:
    rep = Report()
    A, _ = _stage("input", load_matrix, args)
    _stage("analyze", stage_analyze, args, A, None, rep)
    return rep


def _shapes(spec):
    if not spec:
        raise ValueError("--blocks is required, e.g. --blocks 6x4,5x3")
    out = []
    for part in spec.split(","):
        m, n = part.lower().split("x")
        out.append((int(m), int(n)))
    return out


def block_instance(args):
    rng = np.random.default_rng(args.seed)
    shapes = _shapes(args.blocks)
    B = [rng.standard_normal(s) for s in shapes]
    C = [rng.standard_normal((m, args.n0)) for m, _ in shapes]
    return blockpar.BlockAngular(B, C), rng


def cmd_bch(args):
    A, _ = block_instance(args)
    U, led = blockpar.bch(A, args.regime)
    pb, ib = blockpar.bch_bound(A.dbmax, A.h, args.regime)
    text = led.to_csv()
    text += f"bound,{pb:.6g},{ib}\n"
    text += f"gram_residual,{blockpar.gram_residual(A, U):.3e},\n"
    return text


def cmd_bup(args):
    A, rng = block_instance(args)
    h = A.h
    cases = blockpar.CASES if args.case == "all" else (args.case,)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["case", "step", "ptime", "inc"])
    for case in cases:
        A2 = A.copy()
        U, _ = blockpar.bch(A2, args.regime)
        ink, outk = _case_blocks(case, h)
        if ink is None:
            w.writerow([case, "skipped (needs h >= 2)", "", ""])
            continue
        ncol = A2.nk(outk - 1) if outk <= h else A2.n0
        a = rng.standard_normal(A2.m(ink - 1) if ink <= h else int(A2.row_offsets()[-1]))
        got, led = blockpar.bup(A2, U, a, ink, outk, ncol, args.regime)
        for s in led.steps:
            w.writerow([got, s.name, s.ptime, s.inc])
        pb, ib = blockpar.bup_bound(got, A2.dbmax, h, args.regime)
        w.writerow([got, "total", led.ptime, led.inc])
        w.writerow([got, "bound", pb, ib])
        w.writerow([got, "gram_residual", f"{blockpar.gram_residual(A2, U):.3e}", ""])
    return buf.getvalue()


def _case_blocks(case, h):
    r = h + 1
    return {
        "I": (1, 2) if h >= 2 else (None, None),
        "II": (1, 1),
        "III": (1, r),
        "IV": (r, 1),
        "V": (r, r),
    }[case]


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.command == "bch":
            sys.stdout.write(cmd_bch(args))
        elif args.command == "bup":
            sys.stdout.write(cmd_bup(args))
        elif args.command == "analyze":
            sys.stdout.write(analyze(args).render(args.report))
        else:
            sys.stdout.write(run(args).render(args.report))
    except StageError as e:
        print(f"error in stage {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
