"""
Core interfaces for ticketforge.

Defines the validation records shared by the config and model-file checks, and
the abstract contracts for configuration loading, document validation and
subset-sum solving.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Dict, List, Optional

if TYPE_CHECKING:
    from ..subsetsum.problem import SubsetSolution, SubsetSumProblem


@dataclass
class ValidationError:
    """Represents a validation error with context."""
    field: str
    message: str
    value: Any
    layer: Optional[int] = None
    entry: Optional[str] = None
    error_type: str = "validation"


@dataclass
class ValidationResult:
    """Result of validation operation."""
    is_valid: bool
    errors: List[ValidationError]
    warnings: List[ValidationError]

    def add_error(self, field: str, message: str, value: Any,
                  layer: Optional[int] = None, entry: Optional[str] = None) -> None:
        """Add a validation error."""
        self.errors.append(ValidationError(field, message, value, layer, entry, "error"))
        self.is_valid = False

    def add_warning(self, field: str, message: str, value: Any,
                    layer: Optional[int] = None, entry: Optional[str] = None) -> None:
        """Add a validation warning."""
        self.warnings.append(ValidationError(field, message, value, layer, entry, "warning"))

    def merge(self, other: "ValidationResult") -> None:
        """Merge another validation result into this one."""
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)
        if not other.is_valid:
            self.is_valid = False

    def summary(self, limit: int = 5) -> str:
        """One-line digest of the first ``limit`` errors."""
        parts = [f"{err.field}: {err.message}" for err in self.errors[:limit]]
        if len(self.errors) > limit:
            parts.append(f"... and {len(self.errors) - limit} more")
        return "; ".join(parts)


@dataclass
class ReportMetadata:
    """Provenance attached to every emitted report."""
    app_version: str
    format_version: str
    config_sha256: str
    model_sha256: Optional[str] = None


class IConfigLoader(ABC):
    """
    Abstract interface for configuration loading and validation.
    """

    @abstractmethod
    def load_config(self, config_path: str) -> Dict[str, Any]:
        """Load configuration from file with validation."""
        pass

    @abstractmethod
    def validate_config(self, config: Dict[str, Any]) -> ValidationResult:
        """Validate configuration structure and values."""
        pass

    @abstractmethod
    def get_config_hash(self, config: Dict[str, Any]) -> str:
        """Generate SHA256 hash of configuration for reproducibility."""
        pass


class IValidator(ABC):
    """
    Abstract interface for document validation.

    Structural checks run first; value and reference checks assume a
    structurally sound document.
    """

    @abstractmethod
    def validate_structure(self, document: Dict[str, Any]) -> ValidationResult:
        """Validate keys, nesting and array shapes."""
        pass

    @abstractmethod
    def validate_values(self, document: Dict[str, Any]) -> ValidationResult:
        """Validate numeric ranges and finiteness."""
        pass

    @abstractmethod
    def validate_references(self, document: Dict[str, Any]) -> ValidationResult:
        """Validate references to registered names such as activation tags."""
        pass


class ISubsetSumSolver(ABC):
    """
    Abstract interface for subset-sum approximation solvers.

    Every solver honours the same contract: among subsets within tolerance
    return one of minimal cardinality, ties broken by smaller residual and then
    by the lexicographically smallest index tuple; otherwise return the
    minimal-residual subset with ``achieved=False``.
    """

    name: str = "abstract"
    max_size: int = 0

    @abstractmethod
    def solve(self, problem: "SubsetSumProblem") -> "SubsetSolution":
        """Solve one subset-sum approximation problem."""
        pass
