"""Command-line front end: simulate, fit, summarize."""

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from cli import __version__
from cli.config import load_config
from cli.ingest import load_csv
from cli.report import ReportWriter, read_draws
from inference.summary import summarize, summarize_levels
from samplers.gibbs_orchestrator import ChainConfig, run_chain, run_plugin_chain
from simulation.mc_orchestrator import MonteCarloOrchestrator, ReplicationTask, replication_draws
from utils.errors import ConditionalBayesError, ConfigError
from utils.model import PriorSpec

logger = logging.getLogger(__name__)

EXIT_ERROR = 2


@dataclass(frozen=True)
class RunSpec:
    subcommand: str
    config: Optional[Path]
    out: Optional[Path]
    seed: Optional[int]
    jobs: int

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunSpec":
        spec = cls(
            subcommand=args.command,
            config=Path(args.config) if getattr(args, "config", None) else None,
            out=Path(args.out) if getattr(args, "out", None) else None,
            seed=getattr(args, "seed", None),
            jobs=getattr(args, "jobs", 1),
        )
        spec.validate()
        return spec

    def validate(self) -> None:
        if self.config is not None and not self.config.is_file():
            raise ConfigError(f"config file {self.config} does not exist")
        if self.out is not None:
            existing = next((p for p in [self.out, *self.out.parents] if p.exists()), None)
            if existing is None or not os.access(existing, os.W_OK):
                raise ConfigError(f"output directory {self.out} is not writable")
        if self.jobs < 1:
            raise ConfigError(f"--jobs must be at least 1, got {self.jobs}")


def _comma_list(value: str) -> List[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conditional-bayes",
        description="Bayesian inference for a treatment effect in high-dimensional logistic regression",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="Monte Carlo coverage study")
    simulate.add_argument("--config", required=True, help="JSON study configuration")
    simulate.add_argument("--out", required=True, help="output directory")
    simulate.add_argument("--reps", type=int, help="replications per cell (overrides the config)")
    simulate.add_argument("--seed", type=int, help="data and chain seed (overrides the config)")
    simulate.add_argument("--jobs", type=int, default=1, help="worker processes for replications")
    simulate.add_argument("--no-progress", action="store_true", help="hide the progress bar")

    fit = commands.add_parser("fit", help="interval estimate for one CSV dataset")
    fit.add_argument("--data", required=True, help="CSV file")
    fit.add_argument("--treatment", required=True, help="treatment column")
    fit.add_argument("--outcome", required=True, help="binary outcome column")
    fit.add_argument("--categorical", type=_comma_list, default=[], help="comma-separated categorical columns")
    fit.add_argument("--alpha", type=float, default=0.05)
    fit.add_argument("--nuisance", choices=["gibbs", "lasso"], default="gibbs")
    fit.add_argument("--iterations", type=int, default=6000)
    fit.add_argument("--burn-in", type=int, default=1000)
    fit.add_argument("--thin", type=int, default=1)
    fit.add_argument("--seed", type=int, default=2024)
    fit.add_argument("--lam", type=float, default=10.0, help="prior variance of theta")
    fit.add_argument("--out", help="directory for report, draws and manifest")
    fit.add_argument("--format", choices=["csv", "jsonl"], default="csv")

    summarize_cmd = commands.add_parser("summarize", help="interval estimate from a draws file")
    summarize_cmd.add_argument("--draws", required=True)
    summarize_cmd.add_argument("--alpha", type=float, default=0.05)
    return parser


def _print_intervals(intervals) -> None:
    for interval in intervals:
        print(json.dumps(interval.to_dict()))


def cmd_simulate(args: argparse.Namespace, spec: RunSpec) -> int:
    config = load_config(spec.config).with_overrides(reps=args.reps, seed=spec.seed)
    chain = config.chain_config()
    orchestrator = MonteCarloOrchestrator(
        methods=config.methods.use,
        reps=config.methods.reps,
        chain=chain,
        priors=config.prior_spec(),
        alpha=config.methods.alpha,
        jobs=spec.jobs,
        progress=not args.no_progress,
        lasso_grid_size=config.methods.lasso_grid_size,
    )
    cells = config.dgp_cells()
    report = orchestrator.run(cells)

    writer = ReportWriter(spec.out, config.output.format)
    writer.report(report)
    if config.output.write_draws and "CB" in config.methods.use:
        first = ReplicationTask(cells[0], 0, ("CB",), chain, config.prior_spec(), config.methods.alpha)
        writer.draws(replication_draws(first))
    writer.manifest(
        seed=config.dgp.seed,
        config_digest=config.digest(),
        extra={"command": "simulate", "chain_seed": config.chain.seed, "config": config.to_dict()},
    )
    print(report.to_frame().to_string(index=False))
    return 0


def _fit_digest(args: argparse.Namespace, chain: ChainConfig) -> str:
    settings = {
        "data": str(Path(args.data).resolve()),
        "treatment": args.treatment,
        "outcome": args.outcome,
        "categorical": list(args.categorical),
        "alpha": args.alpha,
        "nuisance": args.nuisance,
        "lam": args.lam,
        "chain": chain.digest(),
    }
    canonical = json.dumps(settings, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def cmd_fit(args: argparse.Namespace, spec: RunSpec) -> int:
    ingested = load_csv(args.data, args.treatment, args.outcome, args.categorical)
    data = ingested.dataset
    chain = ChainConfig(iterations=args.iterations, burn_in=args.burn_in, seed=args.seed, thin=args.thin)
    priors = PriorSpec(lam=args.lam).resolve(data.n, data.d)
    digest = _fit_digest(args, chain)
    meta = {"fit_digest": digest}
    if args.nuisance == "lasso":
        draws = run_plugin_chain(data, priors, chain, meta=meta)
    else:
        draws = run_chain(data, priors, chain, meta=meta)
    intervals = summarize_levels(draws, args.alpha)
    _print_intervals(intervals)

    # without --out only the manifest is written, to the working directory
    writer = ReportWriter(spec.out if spec.out is not None else Path.cwd(), args.format)
    if spec.out is not None:
        writer.report(intervals)
        writer.draws(draws)
    manifest = writer.manifest(
        seed=args.seed,
        config_digest=digest,
        extra={
            "command": "fit",
            "nuisance": args.nuisance,
            "dropped_rows": ingested.dropped_rows,
            "dropped_columns": list(ingested.dropped_columns),
            "treatment_levels": list(ingested.treatment_labels),
            "features": list(data.feature_names),
        },
    )
    logger.info(f"Wrote {manifest}")
    return 0


def cmd_summarize(args: argparse.Namespace, spec: RunSpec) -> int:
    draws = read_draws(args.draws)
    _print_intervals([summarize(draws, args.alpha)])
    return 0


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "summarize": cmd_summarize}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        spec = RunSpec.from_args(args)
        return COMMANDS[args.command](args, spec)
    except ConditionalBayesError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        print(f"error: {str(e)}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
