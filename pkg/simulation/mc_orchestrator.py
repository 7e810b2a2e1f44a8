import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from inference.summary import IntervalEstimate, PosteriorDraws, coverage_stats, summarize
from samplers.gibbs_orchestrator import ChainConfig, run_chain
from simulation.baselines import naive_fit, oracle_fit
from simulation.dgp import DgpConfig, generate_dataset
from utils.errors import ConditionalBayesError, DomainError
from utils.model import Dataset, PriorSpec
from utils.randkit import RngStream

logger = logging.getLogger(__name__)

METHODS = ("CB", "ORACLE", "NAIVE")

# Sub-stream tags of a replication stream.
DATA_TAG = 1
CHAIN_TAG = 2


@dataclass(frozen=True)
class McRow:
    method: str
    theta0: float
    n: int
    d: int
    coverage: float
    mc_se: float
    length: float
    bias: float
    reps: int
    failures: int
    wall_ms: float = field(compare=False)
    signed_bias: float


REPORT_COLUMNS = tuple(f.name for f in fields(McRow))


@dataclass(frozen=True)
class McReport:
    rows: Tuple[McRow, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))

    def __len__(self) -> int:
        return len(self.rows)

    def row(self, method: str, theta0: float, n: int, d: int) -> McRow:
        for candidate in self.rows:
            if (candidate.method, candidate.theta0, candidate.n, candidate.d) == (method, theta0, n, d):
                return candidate
        raise KeyError((method, theta0, n, d))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.rows], columns=list(REPORT_COLUMNS))

    @classmethod
    def from_records(cls, records: Iterable[Dict[str, Any]]) -> "McReport":
        rows = []
        for record in records:
            rows.append(
                McRow(
                    method=str(record["method"]),
                    theta0=float(record["theta0"]),
                    n=int(record["n"]),
                    d=int(record["d"]),
                    coverage=float(record["coverage"]),
                    mc_se=float(record["mc_se"]),
                    length=float(record["length"]),
                    bias=float(record["bias"]),
                    reps=int(record["reps"]),
                    failures=int(record["failures"]),
                    wall_ms=float(record["wall_ms"]),
                    signed_bias=float(record["signed_bias"]),
                )
            )
        return cls(tuple(rows))


@dataclass(frozen=True)
class ReplicationTask:
    cfg: DgpConfig
    rep: int
    methods: Tuple[str, ...]
    chain: ChainConfig
    priors: PriorSpec
    alpha: float
    lasso_grid_size: int = 50


def _cb_draws(data: Dataset, task: ReplicationTask, chain: ChainConfig) -> PosteriorDraws:
    priors = task.priors.resolve(data.n, data.d)
    return run_chain(data, priors, chain, meta={"rep": task.rep, "theta0": task.cfg.theta0})


def _estimate(method: str, data: Dataset, task: ReplicationTask, chain: ChainConfig) -> IntervalEstimate:
    if method == "CB":
        return summarize(_cb_draws(data, task, chain), task.alpha)
    if method == "ORACLE":
        return oracle_fit(data, task.cfg.support, task.alpha)
    return naive_fit(data, alpha=task.alpha, grid_size=task.lasso_grid_size)


def replication_inputs(task: ReplicationTask) -> Tuple[Dataset, ChainConfig]:
    """Dataset and chain settings of one replication.

    Streams depend only on (seed, rep), so results do not depend on which
    worker runs the task or in what order.
    """
    base = RngStream(task.cfg.seed, task.rep)
    chain = replace(task.chain, stream_id=base.child(CHAIN_TAG).stream_id)
    return generate_dataset(task.cfg, base.child(DATA_TAG)), chain


def replication_draws(task: ReplicationTask) -> PosteriorDraws:
    """The CB posterior draws that replication ``task.rep`` summarizes."""
    data, chain = replication_inputs(task)
    return _cb_draws(data, task, chain)


def run_replication(task: ReplicationTask) -> Dict[str, Any]:
    """Generate one dataset and run every requested method on it."""
    results: Dict[str, Dict[str, Any]] = {}
    try:
        data, chain = replication_inputs(task)
    except ConditionalBayesError as e:
        logger.error(f"Data generation failed for replication {task.rep}: {str(e)}")
        return {
            "rep": task.rep,
            "results": {m: {"status": "failed", "error": str(e), "wall_ms": 0.0} for m in task.methods},
        }

    for method in task.methods:
        started = time.perf_counter()
        try:
            interval = _estimate(method, data, task, chain)
            results[method] = {"status": "completed", "interval": interval}
        except (ConditionalBayesError, np.linalg.LinAlgError) as e:
            logger.error(f"{method} failed on replication {task.rep} (theta0={task.cfg.theta0}): {str(e)}")
            results[method] = {"status": "failed", "error": str(e)}
        results[method]["wall_ms"] = 1000.0 * (time.perf_counter() - started)
    return {"rep": task.rep, "results": results}


def _aggregate(method: str, cfg: DgpConfig, outcomes: Sequence[Dict[str, Any]]) -> McRow:
    completed = [o["interval"] for o in outcomes if o["status"] == "completed"]
    failures = len(outcomes) - len(completed)
    wall_ms = math.fsum(o["wall_ms"] for o in outcomes)
    cell = dict(method=method, theta0=cfg.theta0, n=cfg.n, d=cfg.d, failures=failures, wall_ms=wall_ms)
    if not completed:
        logger.warning(f"every replication of {method} failed at theta0={cfg.theta0}, n={cfg.n}, d={cfg.d}")
        nan = float("nan")
        return McRow(coverage=nan, mc_se=nan, length=nan, bias=nan, reps=0, signed_bias=nan, **cell)
    stats = coverage_stats(completed, [i.point for i in completed], cfg.theta0)
    return McRow(
        coverage=stats.coverage,
        mc_se=stats.mc_se,
        length=stats.length,
        bias=stats.bias,
        reps=stats.count,
        signed_bias=stats.signed_bias,
        **cell,
    )


class MonteCarloOrchestrator:
    """Runs replications over a list of DGP cells and aggregates them per (method, cell)."""

    def __init__(
        self,
        methods: Sequence[str] = METHODS,
        reps: int = 200,
        chain: Optional[ChainConfig] = None,
        priors: Optional[PriorSpec] = None,
        alpha: float = 0.05,
        jobs: int = 1,
        progress: bool = False,
        lasso_grid_size: int = 50,
    ):
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise DomainError(f"unknown methods {unknown}; choose from {list(METHODS)}")
        if not methods:
            raise DomainError("at least one method is required")
        if reps < 1:
            raise DomainError(f"reps must be at least 1, got {reps}")
        if jobs < 1:
            raise DomainError(f"jobs must be at least 1, got {jobs}")
        self.methods = tuple(methods)
        self.reps = reps
        self.chain = chain or ChainConfig()
        self.priors = priors or PriorSpec()
        self.alpha = alpha
        self.jobs = jobs
        self.progress = progress
        self.lasso_grid_size = lasso_grid_size

    def tasks(self, cfgs: Sequence[DgpConfig]) -> List[ReplicationTask]:
        return [
            ReplicationTask(cfg, rep, self.methods, self.chain, self.priors, self.alpha, self.lasso_grid_size)
            for cfg in cfgs
            for rep in range(self.reps)
        ]

    def _execute(self, tasks: List[ReplicationTask]) -> List[Dict[str, Any]]:
        bar = tqdm(total=len(tasks), desc="replications", unit="rep", disable=not self.progress)
        outcomes = []
        try:
            if self.jobs == 1:
                for task in tasks:
                    outcomes.append(run_replication(task))
                    bar.update()
            else:
                with ProcessPoolExecutor(max_workers=self.jobs) as executor:
                    for outcome in executor.map(run_replication, tasks):
                        outcomes.append(outcome)
                        bar.update()
        finally:
            bar.close()
        return outcomes

    def run(self, cfgs: Sequence[DgpConfig]) -> McReport:
        if not cfgs:
            raise DomainError("at least one DGP configuration is required")
        tasks = self.tasks(cfgs)
        logger.info(f"Running {len(tasks)} replications of {list(self.methods)} with {self.jobs} worker(s)")
        outcomes = self._execute(tasks)

        rows = []
        for c, cfg in enumerate(cfgs):
            cell = outcomes[c * self.reps:(c + 1) * self.reps]
            for method in self.methods:
                rows.append(_aggregate(method, cfg, [o["results"][method] for o in cell]))
        logger.info(f"Monte Carlo study finished: {len(rows)} report rows")
        return McReport(tuple(rows))


def run_mc(
    cfgs: Sequence[DgpConfig],
    methods: Sequence[str],
    reps: int,
    chain: ChainConfig,
    alpha: float = 0.05,
    priors: Optional[PriorSpec] = None,
    jobs: int = 1,
    progress: bool = False,
    lasso_grid_size: int = 50,
) -> McReport:
    orchestrator = MonteCarloOrchestrator(methods, reps, chain, priors, alpha, jobs, progress, lasso_grid_size)
    return orchestrator.run(cfgs)
