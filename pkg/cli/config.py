"""JSON study configuration: sections dgp, chain, priors, methods, output.

Missing keys take the defaults below; unknown keys at any level are errors.
"""

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from samplers.gibbs_orchestrator import ChainConfig
from simulation.dgp import DEFAULT_BETA0, DEFAULT_GAMMA0, DgpConfig
from simulation.mc_orchestrator import METHODS
from utils.errors import ConditionalBayesError, ConfigError
from utils.model import PriorSpec

logger = logging.getLogger(__name__)

DEFAULT_THETA0 = tuple(round(0.1 * k, 1) for k in range(10))
OUTPUT_FORMATS = ("csv", "jsonl")


@dataclass(frozen=True)
class DgpSection:
    sizes: Tuple[Tuple[int, int], ...] = ((400, 500),)
    theta0: Tuple[float, ...] = DEFAULT_THETA0
    beta0: Tuple[float, ...] = DEFAULT_BETA0
    gamma0: Tuple[float, ...] = DEFAULT_GAMMA0
    rho: float = 0.5
    seed: int = 2024


@dataclass(frozen=True)
class ChainSection:
    iterations: int = 6000
    burn_in: int = 1000
    thin: int = 1
    seed: int = 2024
    propensity_first: bool = True


@dataclass(frozen=True)
class PriorsSection:
    lam: float = 10.0
    tau0_sq: Optional[float] = None
    tau1_sq: Optional[float] = None
    q: Optional[float] = None


@dataclass(frozen=True)
class MethodsSection:
    use: Tuple[str, ...] = METHODS
    alpha: float = 0.05
    reps: int = 200
    lasso_grid_size: int = 50


@dataclass(frozen=True)
class OutputSection:
    format: str = "csv"
    write_draws: bool = False


@dataclass(frozen=True)
class StudyConfig:
    dgp: DgpSection = field(default_factory=DgpSection)
    chain: ChainSection = field(default_factory=ChainSection)
    priors: PriorsSection = field(default_factory=PriorsSection)
    methods: MethodsSection = field(default_factory=MethodsSection)
    output: OutputSection = field(default_factory=OutputSection)

    def dgp_cells(self) -> List[DgpConfig]:
        """One cell per (size, theta0), sizes outermost."""
        return [
            DgpConfig(
                n=n,
                d=d,
                theta0=theta0,
                beta0=self.dgp.beta0,
                gamma0=self.dgp.gamma0,
                rho=self.dgp.rho,
                seed=self.dgp.seed,
            )
            for n, d in self.dgp.sizes
            for theta0 in self.dgp.theta0
        ]

    def chain_config(self) -> ChainConfig:
        return ChainConfig(
            iterations=self.chain.iterations,
            burn_in=self.chain.burn_in,
            seed=self.chain.seed,
            thin=self.chain.thin,
            propensity_first=self.chain.propensity_first,
        )

    def prior_spec(self) -> PriorSpec:
        return PriorSpec(lam=self.priors.lam, tau0_sq=self.priors.tau0_sq, tau1_sq=self.priors.tau1_sq, q=self.priors.q)

    def with_overrides(self, reps: Optional[int] = None, seed: Optional[int] = None) -> "StudyConfig":
        """Command-line overrides; ``seed`` replaces both the data and the chain seed."""
        config = self
        if reps is not None:
            config = replace(config, methods=replace(config.methods, reps=reps))
        if seed is not None:
            config = replace(config, dgp=replace(config.dgp, seed=seed), chain=replace(config.chain, seed=seed))
        validate(config)
        return config

    def to_dict(self) -> Dict[str, Any]:
        return json.loads(json.dumps(asdict(self)))

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _coerce(value: Any, default: Any, where: str) -> Any:
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        return value
    if isinstance(default, float) or (default is None and where.startswith("priors.")):
        if value is None and default is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string, got {value!r}")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be a list, got {value!r}")
        if where == "dgp.sizes":
            pairs = []
            for pair in value:
                if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(v, int) for v in pair)):
                    raise ConfigError(f"{where} entries must be [n, d] integer pairs, got {pair!r}")
                pairs.append((pair[0], pair[1]))
            return tuple(pairs)
        if where == "methods.use":
            return tuple(_coerce(v, "", f"{where}[]") for v in value)
        return tuple(_coerce(v, 0.0, f"{where}[]") for v in value)
    raise ConfigError(f"{where}: unsupported value {value!r}")


def _section(cls, raw: Any, name: str):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"section '{name}' must be an object")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {unknown}")
    defaults = cls()
    values = {key: _coerce(value, getattr(defaults, key), f"{name}.{key}") for key, value in raw.items()}
    return cls(**values)


def validate(config: StudyConfig) -> None:
    unknown = [m for m in config.methods.use if m not in METHODS]
    if unknown or not config.methods.use:
        raise ConfigError(f"methods.use must be a non-empty subset of {list(METHODS)}, got {list(config.methods.use)}")
    if not 0.0 < config.methods.alpha < 1.0:
        raise ConfigError(f"methods.alpha must lie in (0, 1), got {config.methods.alpha}")
    if config.methods.reps < 1:
        raise ConfigError(f"methods.reps must be at least 1, got {config.methods.reps}")
    if config.methods.lasso_grid_size < 1:
        raise ConfigError("methods.lasso_grid_size must be at least 1")
    if config.output.format not in OUTPUT_FORMATS:
        raise ConfigError(f"output.format must be one of {list(OUTPUT_FORMATS)}, got {config.output.format!r}")
    if not config.dgp.sizes or not config.dgp.theta0:
        raise ConfigError("dgp.sizes and dgp.theta0 must be non-empty")
    try:
        config.dgp_cells()
        config.chain_config()
        config.prior_spec().resolve(*config.dgp.sizes[0])
    except ConditionalBayesError as e:
        raise ConfigError(f"invalid configuration: {str(e)}") from e


def parse_config(raw: Dict[str, Any]) -> StudyConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    sections = {f.name: f.type for f in fields(StudyConfig)}
    unknown = sorted(set(raw) - set(sections))
    if unknown:
        raise ConfigError(f"unknown top-level keys: {unknown}")
    config = StudyConfig(
        dgp=_section(DgpSection, raw.get("dgp"), "dgp"),
        chain=_section(ChainSection, raw.get("chain"), "chain"),
        priors=_section(PriorsSection, raw.get("priors"), "priors"),
        methods=_section(MethodsSection, raw.get("methods"), "methods"),
        output=_section(OutputSection, raw.get("output"), "output"),
    )
    validate(config)
    return config


def load_config(path: Union[str, Path, None]) -> StudyConfig:
    """Parse a config file; ``None`` gives the all-defaults study."""
    if path is None:
        return parse_config({})
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {str(e)}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {str(e)}") from e
    config = parse_config(raw)
    logger.info(f"Loaded config {path} (digest {config.digest()[:12]})")
    return config
