"""
Activation registry and linearization machinery.

Each activation carries the constants of its piecewise-linear approximation
near zero: slopes m_plus / m_minus, intercept d, and the radius a(eps'') within
which |phi(x) - (mu(x) x + d)| <= eps''. Constructions invert g(x) = x / a(x)
to trade the first-layer scale sigma against the linearization error.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Optional, Union

import numpy as np
from scipy.optimize import brentq

from ..core.errors import ActivationError, DomainError, RadiusError

ArrayLike = Union[float, np.ndarray]

UNCONSTRAINED = math.inf
EPS2_CEILING = 1.0
INVERSION_TOLERANCE = 1e-12
GRID_POINTS = 10_001
GRID_LEVELS = (1e-1, 1e-2, 1e-3)


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # tanh form avoids overflow in exp for large |x|
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _identity(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=np.float64) * 1.0


def _infinite_radius(_: float) -> float:
    return UNCONSTRAINED


def _tanh_radius(eps2: float) -> float:
    return min((3.0 * eps2) ** (1.0 / 3.0), math.pi / 2.0)


def _sigmoid_radius(eps2: float) -> float:
    return min((48.0 * eps2) ** (1.0 / 3.0), math.pi)


@dataclass(frozen=True)
class ActivationSpec:
    """Activation function together with its linearization constants."""
    tag: str
    fn: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)
    lipschitz: float
    m_plus: float
    m_minus: float
    d: float
    radius_fn: Callable[[float], float] = field(compare=False, repr=False)
    homogeneous: bool = False
    piecewise_linear: bool = False

    def __call__(self, x: ArrayLike) -> np.ndarray:
        return self.fn(np.asarray(x, dtype=np.float64))

    @property
    def slope_sum(self) -> float:
        return self.m_plus + self.m_minus

    @property
    def phi0(self) -> float:
        return float(self.fn(np.zeros(1))[0])

    @property
    def bounded_radius(self) -> bool:
        """True when the linearization only holds on a finite interval."""
        return math.isfinite(self.radius(EPS2_CEILING))

    def radius(self, eps2: float) -> float:
        """Validity radius a(eps'')."""
        return self.radius_fn(eps2)

    def g(self, eps2: float) -> float:
        """Ratio eps'' / a(eps''); identically zero when a is infinite."""
        a = self.radius(eps2)
        return 0.0 if math.isinf(a) else eps2 / a

    def linearization(self, x: ArrayLike) -> np.ndarray:
        """Piecewise-linear surrogate mu(x) x + d."""
        x = np.asarray(x, dtype=np.float64)
        return np.where(x >= 0.0, self.m_plus * x, self.m_minus * x) + self.d


def _leaky(alpha: float) -> ActivationSpec:
    def fn(x: np.ndarray) -> np.ndarray:
        return np.where(x >= 0.0, x, alpha * x)

    return ActivationSpec(
        tag=f"lrelu:{alpha:g}", fn=fn, lipschitz=max(1.0, abs(alpha)), m_plus=1.0,
        m_minus=alpha, d=0.0, radius_fn=_infinite_radius, homogeneous=True,
        piecewise_linear=True,
    )


_REGISTRY: Dict[str, ActivationSpec] = {
    "relu": ActivationSpec("relu", _relu, 1.0, 1.0, 0.0, 0.0, _infinite_radius,
                           homogeneous=True, piecewise_linear=True),
    "tanh": ActivationSpec("tanh", np.tanh, 1.0, 1.0, 1.0, 0.0, _tanh_radius),
    "sigmoid": ActivationSpec("sigmoid", _sigmoid, 0.25, 0.25, 0.25, 0.5, _sigmoid_radius),
    "linear": ActivationSpec("linear", _identity, 1.0, 1.0, 1.0, 0.0, _infinite_radius,
                             homogeneous=True, piecewise_linear=True),
}


def spec_for(tag: str) -> ActivationSpec:
    """Look up a registered activation by its model-file tag."""
    if tag in _REGISTRY:
        return _REGISTRY[tag]
    if tag.startswith("lrelu:"):
        try:
            alpha = float(tag.split(":", 1)[1])
        except ValueError:
            raise ActivationError(f"Malformed leaky-ReLU tag: {tag!r}")
        if not math.isfinite(alpha) or alpha <= 0:
            raise ActivationError(f"Leaky-ReLU slope must be positive and finite: {tag!r}")
        return _leaky(alpha)
    raise ActivationError(f"Unknown activation tag: {tag!r}")


def is_registered(tag: str) -> bool:
    try:
        spec_for(tag)
    except ActivationError:
        return False
    return True


def check_linearization(spec: ActivationSpec, levels: tuple = GRID_LEVELS,
                        points: int = GRID_POINTS) -> float:
    """
    Dense grid scan of the linearization bound.

    Returns the worst ratio max|phi(x) - mu(x) x - d| / eps'' over the grid
    levels; a valid spec stays at or below 1.
    """
    worst = 0.0
    for eps2 in levels:
        a = spec.radius(eps2)
        half = 1.0 if math.isinf(a) else a
        grid = np.linspace(-half, half, points)
        gap = float(np.max(np.abs(spec(grid) - spec.linearization(grid))))
        worst = max(worst, gap / eps2)
    return worst


def register_activation(tag: str, fn: Callable[[np.ndarray], np.ndarray], lipschitz: float,
                        m_plus: float, m_minus: float, d: float,
                        radius_fn: Optional[Callable[[float], float]] = None,
                        homogeneous: bool = False) -> ActivationSpec:
    """
    Register an activation with caller-supplied linearization constants.

    The registry refuses functions whose slopes cancel (m_plus + m_minus = 0)
    or whose claimed linearization fails the grid scan.
    """
    if tag in _REGISTRY or tag.startswith("lrelu:"):
        raise ActivationError(f"Activation tag already registered: {tag!r}")
    if m_plus + m_minus == 0:
        raise ActivationError(f"{tag!r}: slopes cancel (m_plus + m_minus = 0)")
    spec = ActivationSpec(tag, fn, lipschitz, m_plus, m_minus, d,
                          radius_fn or _infinite_radius, homogeneous=homogeneous)
    ratio = check_linearization(spec)
    if ratio > 1.0 + 1e-9:
        raise ActivationError(
            f"{tag!r}: linearization bound violated by factor {ratio:.3g} near zero"
        )
    _REGISTRY[tag] = spec
    return spec


def unregister_activation(tag: str) -> None:
    """Remove a custom activation; built-in tags cannot be removed."""
    if tag in ("relu", "tanh", "sigmoid", "linear"):
        raise ActivationError(f"Built-in activation cannot be removed: {tag!r}")
    _REGISTRY.pop(tag, None)


def identity_residual(spec: ActivationSpec, x: float, eps2: float) -> float:
    """
    Error of representing the identity with two mirrored neurons.

    Returns |x - (phi(x) - phi(-x)) / (m_plus + m_minus)|, which is at most
    2 eps'' / (m_plus + m_minus) inside the validity radius.
    """
    a = spec.radius(eps2)
    if abs(x) > a:
        raise RadiusError(f"|x|={abs(x):.6g} exceeds validity radius a={a:.6g} of {spec.tag}")
    if spec.piecewise_linear:
        # exact rational evaluation; the representation has no error term
        fx = Fraction(x)
        mp, mm, d = Fraction(spec.m_plus), Fraction(spec.m_minus), Fraction(spec.d)
        up = (mp * fx if fx >= 0 else mm * fx) + d
        down = (mp * -fx if -fx >= 0 else mm * -fx) + d
        return float(abs(fx - (up - down) / (mp + mm)))
    pair = spec(np.array([x, -x]))
    return abs(x - (float(pair[0]) - float(pair[1])) / spec.slope_sum)


def invert_g(spec: ActivationSpec, y: float) -> float:
    """
    Solve g(eps'') = y for eps'' in (0, 1].

    Returns ``UNCONSTRAINED`` when the activation has no radius limit.
    """
    if not spec.bounded_radius:
        return UNCONSTRAINED
    upper = spec.g(EPS2_CEILING)
    if not (0.0 < y <= upper):
        raise DomainError(f"g^-1 of {spec.tag} defined on (0, {upper:.6g}], got y={y!r}")
    if y == upper:
        return EPS2_CEILING
    lower = 1e-300
    eps2 = brentq(lambda e: spec.g(e) - y, lower, EPS2_CEILING,
                  xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=500)
    if abs(spec.g(eps2) - y) > INVERSION_TOLERANCE:
        raise DomainError(f"g^-1 of {spec.tag} did not converge for y={y!r}")
    return float(eps2)
