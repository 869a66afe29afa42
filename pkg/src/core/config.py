"""
Configuration management for ticketforge.

Nested dataclasses hold the run defaults; ConfigLoader reads them from YAML,
validates them and hashes them so every ticket records the settings it was
built with.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from .interfaces import IConfigLoader, ValidationResult

MODES = ("l+1", "2l")
TOLERANCE_POLICIES = ("lemma", "proof")
POOL_SIZINGS = ("auto", "fixed")
SOLVER_METHODS = ("auto", "mitm", "exhaustive", "greedy")
NORM_METHODS = ("interval", "sampled")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass
class ConstructionConfig:
    """Settings consumed by the construction pipelines."""
    mode: str = "l+1"
    eps: float = 0.05
    delta: float = 0.05
    pool: int = 15
    pool_sizing: str = "auto"
    pool_limit: int = 24
    seed: int = 0
    retries: int = 3
    spare_rows: int = 16
    tolerance_policy: str = "lemma"
    carrier_tolerance: float = 0.1
    max_subset_size: Optional[int] = None
    first_activation: Optional[str] = None
    best_effort: bool = False
    workers: int = 1

    def subset_cap(self) -> Optional[int]:
        """Cardinality cap per block: 10 for the m=20 protocol, else as configured."""
        if self.max_subset_size is None and self.pool == 20:
            return 10
        return self.max_subset_size


@dataclass
class SolverConfig:
    """Subset-sum solver selection."""
    method: str = "auto"
    exhaustive_limit: int = 25
    mitm_limit: int = 44


@dataclass
class BoundsConfig:
    """Constants of the width and budget calculators."""
    c: float = 1.0
    gamma: float = 0.1
    norms: str = "interval"
    sampled_safety: float = 1.05
    underflow: float = 1e-12


@dataclass
class VerifyConfig:
    """Sup-norm estimation settings."""
    samples: int = 10_000
    seed: int = 0
    corner_limit: int = 4096


@dataclass
class BenchConfig:
    """Subset-sum benchmark grid."""
    trials: int = 10_000
    distributions: List[str] = field(default_factory=lambda: ["uniform", "product",
                                                              "product_signed"])
    eps_grid: List[float] = field(default_factory=lambda: [0.1, 0.01, 0.001])
    m_grid: List[int] = field(default_factory=lambda: [5, 10, 15, 20])


@dataclass
class TicketForgeConfig:
    """
    Complete ticketforge configuration.

    Sections map one-to-one onto the UPPERCASE blocks of config/default.yaml.
    """

    construction: ConstructionConfig = field(default_factory=ConstructionConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    log_level: str = "INFO"

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary for serialization."""
        c = self.construction
        return {
            "CONSTRUCTION": {
                "MODE": c.mode,
                "EPS": c.eps,
                "DELTA": c.delta,
                "POOL": c.pool,
                "POOL_SIZING": c.pool_sizing,
                "POOL_LIMIT": c.pool_limit,
                "SEED": c.seed,
                "RETRIES": c.retries,
                "SPARE_ROWS": c.spare_rows,
                "TOLERANCE_POLICY": c.tolerance_policy,
                "CARRIER_TOLERANCE": c.carrier_tolerance,
                "MAX_SUBSET_SIZE": c.max_subset_size,
                "FIRST_ACTIVATION": c.first_activation,
                "BEST_EFFORT": c.best_effort,
                "WORKERS": c.workers,
            },
            "SOLVER": {
                "METHOD": self.solver.method,
                "EXHAUSTIVE_LIMIT": self.solver.exhaustive_limit,
                "MITM_LIMIT": self.solver.mitm_limit,
            },
            "BOUNDS": {
                "C": self.bounds.c,
                "GAMMA": self.bounds.gamma,
                "NORMS": self.bounds.norms,
                "SAMPLED_SAFETY": self.bounds.sampled_safety,
                "UNDERFLOW": self.bounds.underflow,
            },
            "VERIFY": {
                "SAMPLES": self.verify.samples,
                "SEED": self.verify.seed,
                "CORNER_LIMIT": self.verify.corner_limit,
            },
            "BENCH": {
                "TRIALS": self.bench.trials,
                "DISTRIBUTIONS": list(self.bench.distributions),
                "EPS_GRID": list(self.bench.eps_grid),
                "M_GRID": list(self.bench.m_grid),
            },
            "LOGGING": {
                "LEVEL": self.log_level,
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TicketForgeConfig":
        """Create configuration from dictionary."""
        config = cls()

        if "CONSTRUCTION" in data:
            c_data = data["CONSTRUCTION"]
            c = config.construction
            c.mode = c_data.get("MODE", c.mode)
            c.eps = c_data.get("EPS", c.eps)
            c.delta = c_data.get("DELTA", c.delta)
            c.pool = c_data.get("POOL", c.pool)
            c.pool_sizing = c_data.get("POOL_SIZING", c.pool_sizing)
            c.pool_limit = c_data.get("POOL_LIMIT", c.pool_limit)
            c.seed = c_data.get("SEED", c.seed)
            c.retries = c_data.get("RETRIES", c.retries)
            c.spare_rows = c_data.get("SPARE_ROWS", c.spare_rows)
            c.tolerance_policy = c_data.get("TOLERANCE_POLICY", c.tolerance_policy)
            c.carrier_tolerance = c_data.get("CARRIER_TOLERANCE", c.carrier_tolerance)
            c.max_subset_size = c_data.get("MAX_SUBSET_SIZE", c.max_subset_size)
            c.first_activation = c_data.get("FIRST_ACTIVATION", c.first_activation)
            c.best_effort = c_data.get("BEST_EFFORT", c.best_effort)
            c.workers = c_data.get("WORKERS", c.workers)

        if "SOLVER" in data:
            s_data = data["SOLVER"]
            config.solver.method = s_data.get("METHOD", config.solver.method)
            config.solver.exhaustive_limit = s_data.get("EXHAUSTIVE_LIMIT",
                                                        config.solver.exhaustive_limit)
            config.solver.mitm_limit = s_data.get("MITM_LIMIT", config.solver.mitm_limit)

        if "BOUNDS" in data:
            b_data = data["BOUNDS"]
            config.bounds.c = b_data.get("C", config.bounds.c)
            config.bounds.gamma = b_data.get("GAMMA", config.bounds.gamma)
            config.bounds.norms = b_data.get("NORMS", config.bounds.norms)
            config.bounds.sampled_safety = b_data.get("SAMPLED_SAFETY",
                                                      config.bounds.sampled_safety)
            config.bounds.underflow = b_data.get("UNDERFLOW", config.bounds.underflow)

        if "VERIFY" in data:
            v_data = data["VERIFY"]
            config.verify.samples = v_data.get("SAMPLES", config.verify.samples)
            config.verify.seed = v_data.get("SEED", config.verify.seed)
            config.verify.corner_limit = v_data.get("CORNER_LIMIT", config.verify.corner_limit)

        if "BENCH" in data:
            bench_data = data["BENCH"]
            config.bench.trials = bench_data.get("TRIALS", config.bench.trials)
            config.bench.distributions = bench_data.get("DISTRIBUTIONS",
                                                        config.bench.distributions)
            config.bench.eps_grid = bench_data.get("EPS_GRID", config.bench.eps_grid)
            config.bench.m_grid = bench_data.get("M_GRID", config.bench.m_grid)

        if "LOGGING" in data:
            config.log_level = data["LOGGING"].get("LEVEL", config.log_level)

        return config


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


class ConfigLoader(IConfigLoader):
    """
    Concrete implementation of configuration loading.

    Handles YAML loading, validation, and hash generation.
    """

    def load_config(self, config_path: str) -> Dict[str, Any]:
        """Load configuration from YAML file with validation."""
        try:
            config_file = Path(config_path)
            if not config_file.exists():
                raise FileNotFoundError(f"Configuration file not found: {config_path}")

            with open(config_file, "r", encoding="utf-8") as f:
                raw_config = yaml.safe_load(f)

            if raw_config is None:
                raw_config = {}

            validation_result = self.validate_config(raw_config)
            if not validation_result.is_valid:
                raise ValueError(f"Configuration validation failed: {validation_result.summary()}")

            config = TicketForgeConfig.from_dict(raw_config)
            return config.to_dict()

        except yaml.YAMLError as e:
            raise ValueError(f"Invalid YAML in configuration file: {e}")
        except Exception as e:
            raise ValueError(f"Error loading configuration: {e}")

    def load_typed(self, config_path: Optional[str]) -> TicketForgeConfig:
        """Load a configuration file into the typed dataclass, or return defaults."""
        if config_path is None:
            return load_default_config()
        return TicketForgeConfig.from_dict(self.load_config(config_path))

    def validate_config(self, config: Dict[str, Any]) -> ValidationResult:
        """Validate configuration structure and values."""
        result = ValidationResult(is_valid=True, errors=[], warnings=[])

        if not isinstance(config, dict):
            result.add_error("<root>", "Configuration must be a mapping", config)
            return result

        construction = config.get("CONSTRUCTION", {})
        if "MODE" in construction and construction["MODE"] not in MODES:
            result.add_error("CONSTRUCTION.MODE", f"Must be one of: {', '.join(MODES)}",
                             construction["MODE"])
        for key in ("EPS", "DELTA"):
            if key in construction:
                value = construction[key]
                if not _is_number(value) or not 0 < value < 1:
                    result.add_error(f"CONSTRUCTION.{key}", "Must be a number in (0, 1)", value)
        if "POOL" in construction:
            pool = construction["POOL"]
            if not _is_int(pool) or pool < 1:
                result.add_error("CONSTRUCTION.POOL", "Must be a positive integer", pool)
        if "POOL_SIZING" in construction and construction["POOL_SIZING"] not in POOL_SIZINGS:
            result.add_error("CONSTRUCTION.POOL_SIZING",
                             f"Must be one of: {', '.join(POOL_SIZINGS)}",
                             construction["POOL_SIZING"])
        if "POOL_LIMIT" in construction:
            limit = construction["POOL_LIMIT"]
            if not _is_int(limit) or not 1 <= limit <= 44:
                result.add_error("CONSTRUCTION.POOL_LIMIT", "Must be an integer in [1, 44]",
                                 limit)
        for key in ("SEED", "RETRIES", "SPARE_ROWS"):
            if key in construction:
                value = construction[key]
                if not _is_int(value) or value < 0:
                    result.add_error(f"CONSTRUCTION.{key}", "Must be a non-negative integer",
                                     value)
        if "WORKERS" in construction:
            workers = construction["WORKERS"]
            if not _is_int(workers) or workers < 1:
                result.add_error("CONSTRUCTION.WORKERS", "Must be a positive integer", workers)
        if "TOLERANCE_POLICY" in construction:
            policy = construction["TOLERANCE_POLICY"]
            if policy not in TOLERANCE_POLICIES:
                result.add_error("CONSTRUCTION.TOLERANCE_POLICY",
                                 f"Must be one of: {', '.join(TOLERANCE_POLICIES)}", policy)
        if "CARRIER_TOLERANCE" in construction:
            tol = construction["CARRIER_TOLERANCE"]
            if not _is_number(tol) or not 0 < tol < 1:
                result.add_error("CONSTRUCTION.CARRIER_TOLERANCE", "Must be a number in (0, 1)",
                                 tol)
        if construction.get("MAX_SUBSET_SIZE") is not None:
            cap = construction["MAX_SUBSET_SIZE"]
            if not _is_int(cap) or cap < 1:
                result.add_error("CONSTRUCTION.MAX_SUBSET_SIZE",
                                 "Must be a positive integer or null", cap)

        solver = config.get("SOLVER", {})
        if "METHOD" in solver and solver["METHOD"] not in SOLVER_METHODS:
            result.add_error("SOLVER.METHOD", f"Must be one of: {', '.join(SOLVER_METHODS)}",
                             solver["METHOD"])
        if "EXHAUSTIVE_LIMIT" in solver:
            limit = solver["EXHAUSTIVE_LIMIT"]
            if not _is_int(limit) or not 0 <= limit <= 25:
                result.add_error("SOLVER.EXHAUSTIVE_LIMIT", "Must be an integer in [0, 25]", limit)
        if "MITM_LIMIT" in solver:
            limit = solver["MITM_LIMIT"]
            if not _is_int(limit) or not 0 <= limit <= 44:
                result.add_error("SOLVER.MITM_LIMIT", "Must be an integer in [0, 44]", limit)

        bounds = config.get("BOUNDS", {})
        for key in ("C", "GAMMA", "UNDERFLOW"):
            if key in bounds:
                value = bounds[key]
                if not _is_number(value) or value <= 0:
                    result.add_error(f"BOUNDS.{key}", "Must be a positive number", value)
        if "NORMS" in bounds and bounds["NORMS"] not in NORM_METHODS:
            result.add_error("BOUNDS.NORMS", f"Must be one of: {', '.join(NORM_METHODS)}",
                             bounds["NORMS"])
        if "SAMPLED_SAFETY" in bounds:
            safety = bounds["SAMPLED_SAFETY"]
            if not _is_number(safety) or safety < 1:
                result.add_error("BOUNDS.SAMPLED_SAFETY", "Must be a number >= 1", safety)

        verify = config.get("VERIFY", {})
        if "SAMPLES" in verify:
            samples = verify["SAMPLES"]
            if not _is_int(samples) or samples < 1:
                result.add_error("VERIFY.SAMPLES", "Must be a positive integer", samples)
        if "SEED" in verify:
            seed = verify["SEED"]
            if not _is_int(seed) or seed < 0:
                result.add_error("VERIFY.SEED", "Must be a non-negative integer", seed)

        bench = config.get("BENCH", {})
        if "TRIALS" in bench:
            trials = bench["TRIALS"]
            if not _is_int(trials) or trials < 1:
                result.add_error("BENCH.TRIALS", "Must be a positive integer", trials)
        if "EPS_GRID" in bench:
            grid = bench["EPS_GRID"]
            if not isinstance(grid, list) or not all(_is_number(e) and e > 0 for e in grid):
                result.add_error("BENCH.EPS_GRID", "Must be a list of positive numbers", grid)
        if "M_GRID" in bench:
            grid = bench["M_GRID"]
            if not isinstance(grid, list) or not all(_is_int(m) and m >= 0 for m in grid):
                result.add_error("BENCH.M_GRID", "Must be a list of non-negative integers", grid)
        if "DISTRIBUTIONS" in bench:
            dists = bench["DISTRIBUTIONS"]
            if not isinstance(dists, list) or not all(isinstance(d, str) for d in dists):
                result.add_error("BENCH.DISTRIBUTIONS", "Must be a list of strings", dists)

        level = config.get("LOGGING", {}).get("LEVEL")
        if level is not None and level not in LOG_LEVELS:
            result.add_error("LOGGING.LEVEL", f"Must be one of: {', '.join(LOG_LEVELS)}", level)

        return result

    def get_config_hash(self, config: Dict[str, Any]) -> str:
        """Generate SHA256 hash of configuration for reproducibility."""
        sorted_config = self._sort_dict_recursively(config)
        config_json = json.dumps(sorted_config, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(config_json.encode("utf-8")).hexdigest()

    def _sort_dict_recursively(self, obj: Any) -> Any:
        """Recursively sort dictionary keys for consistent hashing."""
        if isinstance(obj, dict):
            return {k: self._sort_dict_recursively(v) for k, v in sorted(obj.items())}
        elif isinstance(obj, list):
            return [self._sort_dict_recursively(item) for item in obj]
        else:
            return obj


def load_default_config() -> TicketForgeConfig:
    """Load the default configuration."""
    return TicketForgeConfig()


def save_config_to_yaml(config: TicketForgeConfig, output_path: str) -> None:
    """Save configuration to YAML file."""
    config_dict = config.to_dict()
    with open(output_path, "w", encoding="utf-8") as f:
        yaml.dump(config_dict, f, default_flow_style=False, sort_keys=False, indent=2)
