"""Command-line interface.

Subcommands: simulate, fit, summarize, diagnose, icc-curve.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io, model, sampler, summary, synth

USAGE_ERROR = 2
DATA_ERROR = 3
NUMERICAL_ERROR = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csnirt",
        description="Finite-mixture centred skew-probit IRT models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic response matrix")
    p_sim.add_argument("--preset", required=True, help="scenario name")
    p_sim.add_argument("--subjects", required=True, type=int, help="number of subjects")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True, help="output directory")

    p_fit = sub.add_parser("fit", help="run the MCMC sampler")
    p_fit.add_argument("--config", required=True, help="flat key = value config file")
    p_fit.add_argument("--out", required=True, help="output directory for draws files")
    p_fit.add_argument("--workers", type=int, default=None, help="parallel chain processes")

    p_sum = sub.add_parser("summarize", help="summarise draws into an item table")
    p_sum.add_argument("--draws", required=True, help="directory of draws_chain*.csv files")
    p_sum.add_argument("--out", required=True, help="output summary CSV")
    p_sum.add_argument("--level", type=float, default=0.95, help="credible interval level")

    p_diag = sub.add_parser("diagnose", help="print ESS / R-hat / acceptance diagnostics")
    p_diag.add_argument("--draws", required=True, help="directory of draws_chain*.csv files")

    p_icc = sub.add_parser("icc-curve", help="emit (theta, probability) pairs of one ICC")
    p_icc.add_argument("--a", required=True, type=float, help="discrimination")
    p_icc.add_argument("--b", required=True, type=float, help="difficulty")
    p_icc.add_argument("--c", type=float, default=0.0, help="guessing floor")
    p_icc.add_argument("--gamma", required=True, type=float, help="skewness")
    p_icc.add_argument("--from", dest="grid_from", type=float, default=-4.0)
    p_icc.add_argument("--to", dest="grid_to", type=float, default=4.0)
    p_icc.add_argument("--points", type=int, default=81)
    p_icc.add_argument("--out", default=None, help="write to file instead of stdout")
    return parser


def _cmd_simulate(args) -> int:
    scenario = synth.preset(args.preset, args.subjects, args.seed)
    rm, abilities = synth.generate(scenario)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    io.write_responses(rm, outdir / "responses.csv")
    io.write_truth(scenario, abilities.theta, outdir)
    print(f"wrote {rm.n_items} x {rm.n_subjects} responses to {outdir / 'responses.csv'}")
    return 0


def _cmd_fit(args) -> int:
    cfg = io.read_config(args.config)
    base = Path(args.config).parent
    responses_path = Path(cfg.responses_path)
    if not responses_path.is_absolute():
        responses_path = base / responses_path
    rm = io.read_responses(responses_path)

    if cfg.exclude_items:
        unknown = set(cfg.exclude_items) - set(rm.item_ids)
        if unknown:
            raise io.DataError(f"exclude_items not present in data: {sorted(unknown)}")
        keep = [i for i, iid in enumerate(rm.item_ids) if iid not in cfg.exclude_items]
        rm = model.ResponseMatrix(
            y=rm.y[keep],
            item_ids=tuple(rm.item_ids[i] for i in keep),
            subject_ids=rm.subject_ids,
        )

    fixed_c = None
    if cfg.model == "3pcsp-fixed-c":
        if cfg.fixed_c_path is None:
            raise io.DataError("model 3pcsp-fixed-c requires data.fixed_c_path")
        fc_path = Path(cfg.fixed_c_path)
        if not fc_path.is_absolute():
            fc_path = base / fc_path
        fc = io.read_fixed_c(fc_path)
        missing = [iid for iid in rm.item_ids if iid not in fc]
        if missing:
            raise io.DataError(f"fixed_c file misses items: {missing}")
        fixed_c = np.array([fc[iid] for iid in rm.item_ids])

    stores = sampler.run_chains(
        rm,
        cfg.priors,
        cfg.tuning,
        iterations=cfg.iterations,
        burnin=cfg.burnin,
        thin=cfg.thin,
        seed=cfg.seed,
        chains=cfg.chains,
        model=cfg.model,
        fixed_c=fixed_c,
        config_echo=cfg.flat(),
        workers=args.workers,
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    width = len(str(max(cfg.chains - 1, 1)))
    for store in stores:
        io.write_draws(store, outdir / f"draws_chain{store.chain_id:0{width}d}.csv")
    for store in stores:
        rates = ", ".join(f"{k}={v:.3f}" for k, v in sorted(store.acceptance_rates().items()))
        print(f"chain {store.chain_id}: {store.n_draws} draws, acceptance {rates}")
    print(f"wrote {len(stores)} chains to {outdir}")
    return 0


def _cmd_summarize(args) -> int:
    stores = io.load_draws_dir(args.draws)
    items = summary.summarize_items(stores, level=args.level)
    io.write_item_summaries(items, args.out)
    n_sym = sum(it.classification == "symmetric" for it in items)
    print(
        f"pooled {sum(s.n_draws for s in stores)} draws from {len(stores)} chains; "
        f"{n_sym}/{len(items)} items classified symmetric; table in {args.out}"
    )
    return 0


def _cmd_diagnose(args) -> int:
    stores = io.load_draws_dir(args.draws)
    diag = summary.diagnostics(stores)
    print(f"chains: {len(stores)}, stored draws per chain: {stores[0].n_draws}")
    for k, v in sorted(diag.acceptance.items()):
        print(f"acceptance {k}: {v:.3f}")
    if diag.ess:
        worst_ess = sorted(diag.ess.items(), key=lambda kv: kv[1])[:5]
        print("lowest ESS: " + ", ".join(f"{k}={v:.0f}" for k, v in worst_ess))
    if diag.rhat:
        worst_rhat = sorted(diag.rhat.items(), key=lambda kv: -kv[1])[:5]
        print("highest split R-hat: " + ", ".join(f"{k}={v:.3f}" for k, v in worst_rhat))
    if diag.constant:
        print(f"constant parameters (excluded): {len(diag.constant)}")
    return 0


def _cmd_icc_curve(args) -> int:
    if args.points < 2:
        raise ValueError("need at least 2 grid points")
    grid = np.linspace(args.grid_from, args.grid_to, args.points)
    probs = model.icc(model.predictor(args.a, args.b, grid), args.gamma, args.c)
    lines = ["theta,p"]
    lines += [f"{repr(float(t))},{repr(float(p))}" for t, p in zip(grid, probs)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "summarize": _cmd_summarize,
    "diagnose": _cmd_diagnose,
    "icc-curve": _cmd_icc_curve,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return _COMMANDS[args.command](args)
    except io.DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except sampler.NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
