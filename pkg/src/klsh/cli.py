"""Command-line driver: build -> eval -> diagnose.

    klsh build    --dataset base.fvecs --kernel chi2 --normalize --out model.npz
    klsh eval     --model model.npz --dataset base.fvecs --queries q.fvecs \
                  --oracle --recall-at 1,10,100 --out reports/
    klsh diagnose --model model.npz --out reports/
    klsh synth    --out data.fvecs --n 2000 --d 32

Reports are CSV files with a config echo in leading comment lines; each
report directory also gets rendered PNG figures.

Exit codes: 0 success, 1 validation error, 2 runtime/numeric error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import datasets
from .bounds import BoundInputs, elimination_diagnostic, klsh_bound
from .hashing import bank_from_model, hash_points, train_bank
from .kernels import KernelSpec
from .plots import plot_decay, plot_recall_curves
from .retrieval import CodeSet, evaluate, ground_truth, write_codeset
from .snapshot import load_snapshot, save_snapshot
from .spectral import decay_report, fit_projection


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"error: {message}")


def _load_corpus(path) -> datasets.Corpus:
    ext = os.path.splitext(path)[1].lower()
    if ext == ".fvecs":
        c = datasets.read_fvecs(path)
    elif ext == ".bvecs":
        c = datasets.read_bvecs(path)
    elif ext == ".csv":
        c = datasets.read_csv(path)
    else:
        raise ValueError(f"unsupported dataset extension {ext!r} (use .fvecs/.bvecs/.csv)")
    return datasets.normalize_l1(datasets.drop_zero(c))


def _int_list(text):
    return [int(x) for x in str(text).split(",") if x]


def _float_list(text):
    return [float(x) for x in str(text).split(",") if x]


def _kernel_from_args(args, scale=None) -> KernelSpec:
    return KernelSpec(base=args.kernel, normalize=args.normalize,
                      scale_s=args.scale if scale is None else scale)


def _add_common(p):
    p.add_argument("--kernel", choices=("chi2", "intersection", "linear"), default="chi2")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--t", type=int, default=50)
    p.add_argument("--bits", type=int, default=256)
    p.add_argument("--rank", default="full", help="integer rank or 'full'")
    p.add_argument("--variant", choices=("clt", "gaussian", "nystrom-baseline"), default="clt")
    p.add_argument("--seed", type=int, default=0)


def _resolve_rank(rank_arg):
    return None if str(rank_arg) == "full" else int(rank_arg)


def _build_bank(vectors, kernel, m, t, bits, rank, variant, seed):
    if variant == "nystrom-baseline":
        rng = np.random.default_rng(seed)
        idx = rng.choice(vectors.shape[0], size=m, replace=False)
        model = fit_projection(vectors[idx], kernel, rank_r=rank, variant="nystrom")
        return bank_from_model(model, bits, "gaussian", seed, rng=rng)
    return train_bank(vectors, kernel, m, t, bits, rank, variant, seed)


def _write_csv(path, rows, header, cfg):
    with open(path, "w") as f:
        for k in sorted(cfg):
            f.write(f"# {k}={cfg[k]}\n")
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(str(row[h]) for h in header) + "\n")


def cmd_build(args) -> int:
    corpus = _load_corpus(args.dataset)
    kernel = _kernel_from_args(args)
    bank = _build_bank(corpus.vectors, kernel, args.m, args.t, args.bits,
                       _resolve_rank(args.rank), args.variant, args.seed)
    save_snapshot(args.out, bank.model, bank)
    ev = bank.model.spectrum.eigenvalues
    print(f"snapshot written to {args.out}")
    print(f"anchors m={bank.model.m}  numeric rank={bank.model.spectrum.numeric_rank}  "
          f"rank_r={bank.model.rank_r}  variant={bank.variant}  bits={bank.bits_b}")
    print("top eigenvalues (covariance scale):")
    for k in (1, 2, 4, 8, 16, 32, 64, 128):
        if k <= len(ev):
            print(f"  lambda_{k} = {ev[k - 1] / bank.model.m:.6e}")
    return 0


def cmd_eval(args) -> int:
    model, bank = load_snapshot(args.model)
    if bank is None:
        raise ValueError("snapshot carries no hash bank; rebuild with 'klsh build'")
    corpus = _load_corpus(args.dataset)
    queries = _load_corpus(args.queries)
    Rs = _int_list(args.recall_at)

    if args.truth:
        truth = datasets.read_ivecs(args.truth)[:, 0]
    elif args.oracle:
        truth = ground_truth(model.kernel, corpus.vectors, queries.vectors)
    else:
        raise ValueError("missing ground truth: pass --truth file.ivecs or --oracle")
    if truth.shape[0] != queries.n:
        raise ValueError("one truth id per query required")

    ranks = _int_list(args.rank_sweep) if args.rank_sweep else [model.rank_r]
    scales = _float_list(args.scale_sweep) if args.scale_sweep else [model.kernel.scale_s]
    sweeping = bool(args.rank_sweep or args.scale_sweep)

    os.makedirs(args.out, exist_ok=True)
    all_rows = []
    for scale in scales:
        for rank in ranks:
            if sweeping:
                kernel = KernelSpec(base=model.kernel.base,
                                    normalize=model.kernel.normalize, scale_s=scale)
                b = _build_bank(corpus.vectors, kernel, model.m,
                                bank.t if bank.t is not None else 50, bank.bits_b,
                                rank, args.variant, bank.seed)
            else:
                b = bank
            codes = CodeSet(codes=hash_points(b, corpus.vectors),
                            ids=np.arange(corpus.n, dtype=np.int64), bits_b=b.bits_b)
            qcodes = hash_points(b, queries.vectors)
            report = evaluate(codes, qcodes, truth, Rs,
                              params={"rank": b.model.rank_r, "scale": scale})
            all_rows.extend(report.rows())
            if not sweeping:
                write_codeset(os.path.join(args.out, "corpus.codes"), codes)

    cfg = {"dataset": args.dataset, "queries": args.queries, "model": args.model,
           "recall_at": args.recall_at, "kernel": model.kernel.base,
           "normalize": model.kernel.normalize, "scale": model.kernel.scale_s,
           "m": model.m, "bits": bank.bits_b, "variant": bank.variant,
           "seed": bank.seed, "rank": model.rank_r,
           "rank_sweep": args.rank_sweep or "", "scale_sweep": args.scale_sweep or ""}
    csv_path = os.path.join(args.out, "recall.csv")
    _write_csv(csv_path, all_rows, ["R", "recall", "rank", "scale"], cfg)
    group = "scale" if len(scales) > 1 else "rank"
    plot_recall_curves(all_rows, os.path.join(args.out, "recall.png"), group_key=group)
    for row in all_rows:
        print(f"rank={row['rank']:>5} scale={row['scale']:>4} "
              f"Recall@{row['R']:<5} = {row['recall']:.4f}")
    print(f"report written to {csv_path}")
    return 0


def cmd_diagnose(args) -> int:
    model, _ = load_snapshot(args.model)
    m = model.m
    ks = _int_list(args.ks) if args.ks else [k for k in (8, 16, 32, 64, 128, 256, 512) if k < m]
    eps_grid = _float_list(args.eps)
    os.makedirs(args.out, exist_ok=True)
    cfg = {"model": args.model, "ks": ",".join(map(str, ks)),
           "eps": args.eps, "xi": args.xi}

    decay_by_label = {f"s={model.kernel.scale_s:g}": decay_report(model.spectrum, ks)}
    if args.scale_sweep:
        for s in _float_list(args.scale_sweep):
            kernel = KernelSpec(base=model.kernel.base, normalize=model.kernel.normalize,
                                scale_s=s)
            alt = fit_projection(model.anchors, kernel, variant=model.variant)
            decay_by_label[f"s={s:g}"] = decay_report(alt.spectrum, ks)

    decay_rows = []
    for label, rows in decay_by_label.items():
        for row in rows:
            decay_rows.append({**row, "spectrum": label})
    _write_csv(os.path.join(args.out, "decay.csv"), decay_rows,
               ["spectrum", "k", "eigenvalue", "eigengap", "tail_mass", "zero_eigengap"], cfg)
    plot_decay(decay_by_label, os.path.join(args.out, "decay.png"))

    dataset = _load_corpus(args.dataset).vectors if args.dataset else model.anchors
    bound_rows = []
    for k in ks:
        try:
            diag = elimination_diagnostic(model, dataset, k, xi=args.xi)
        except ValueError as exc:
            print(f"k={k}: {exc}")
            continue
        for eps in eps_grid:
            res = klsh_bound(BoundInputs(lambda_k=diag["lambda_k"], eps=eps,
                                         kappa_star=1.0, eta=diag["eta"], xi=args.xi))
            bound_rows.append({
                "k": k, "eps": eps, "lambda_k": f"{diag['lambda_k']:.6e}",
                "eta": f"{diag['eta']:.6e}", "threshold": f"{diag['threshold']:.6e}",
                "violation_rate": diag["violation_rate"], "vacuous": diag["vacuous"],
                "bound": f"{res.value:.6f}", "applicable": res.applicable,
                "success_probability": f"{res.success_probability:.4f}",
                "query_cost": res.query_cost,
            })
    _write_csv(os.path.join(args.out, "bounds.csv"), bound_rows,
               ["k", "eps", "lambda_k", "eta", "threshold", "violation_rate",
                "vacuous", "bound", "applicable", "success_probability", "query_cost"], cfg)
    for row in bound_rows:
        flag = "" if row["applicable"] else "  [bound inapplicable]"
        vac = "  [vacuous threshold]" if row["vacuous"] else ""
        print(f"k={row['k']:>4} eps={row['eps']:<4} bound={row['bound']}"
              f" threshold={row['threshold']} violations={row['violation_rate']:.3f}{flag}{vac}")
    print(f"reports written to {args.out}")
    return 0


def cmd_synth(args) -> int:
    corpus = datasets.synth_histograms(args.n, args.d, args.clusters,
                                       args.concentration, args.seed)
    datasets.write_fvecs(args.out, corpus.vectors)
    print(f"wrote {corpus.n} x {corpus.d} histograms to {args.out}")
    return 0


def make_parser() -> _Parser:
    parser = _Parser(prog="klsh", description="Kernel LSH retrieval toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="train a projection model and hash bank")
    b.add_argument("--dataset", required=True)
    _add_common(b)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("eval", help="hash, rank, and score Recall@R")
    e.add_argument("--model", required=True)
    e.add_argument("--dataset", required=True)
    e.add_argument("--queries", required=True)
    e.add_argument("--truth")
    e.add_argument("--oracle", action="store_true",
                   help="compute exact-NN ground truth instead of reading --truth")
    e.add_argument("--recall-at", dest="recall_at", default="1,10,100")
    e.add_argument("--rank-sweep", dest="rank_sweep",
                   help="comma list of ranks to rebuild and evaluate")
    e.add_argument("--scale-sweep", dest="scale_sweep",
                   help="comma list of transform scales to rebuild and evaluate")
    e.add_argument("--variant", choices=("clt", "gaussian", "nystrom-baseline"), default="clt")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)

    d = sub.add_parser("diagnose", help="spectral decay, thresholds, and bound grid")
    d.add_argument("--model", required=True)
    d.add_argument("--dataset")
    d.add_argument("--ks", help="comma list of k values")
    d.add_argument("--eps", default="0.1,0.5,1.0")
    d.add_argument("--xi", type=float, default=3.0)
    d.add_argument("--scale-sweep", dest="scale_sweep",
                   help="comma list of scales for decay comparison")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_diagnose)

    s = sub.add_parser("synth", help="generate a synthetic histogram corpus")
    s.add_argument("--out", required=True)
    s.add_argument("--n", type=int, default=2000)
    s.add_argument("--d", type=int, default=32)
    s.add_argument("--clusters", type=int, default=20)
    s.add_argument("--concentration", type=float, default=50.0)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        print(exc.code, file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # numeric / unexpected runtime failures
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
