"""Nonlinearities of the chemotaxis-consumption system.

The model is the triple (D, S, f) together with the form of the signal
equation:

    u_t = div(D(u) grad u - u S(u) grad v) + f(u, v)
    v_t = lap v - u v            (consumption)
    v_t = lap v - v + u          (Keller-Segel)

Every ``eval_*`` function accepts a scalar or a numpy array and returns the
same kind of object.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError

ArrayLike = Union[float, np.ndarray]

# Smallest point of the geometric sample used by validate_hypotheses,
# relative to s0.
HYPOTHESIS_SAMPLE_FLOOR = 1e-12


# -- diffusion families -----------------------------------------------------

@dataclass(frozen=True)
class PorousMedium:
    """D(s) = m s^(m-1), Phi(s) = s^m."""

    m: float

    def __post_init__(self):
        if not self.m > 1:
            raise DomainError(f"porous-medium exponent must exceed 1, got {self.m}")


@dataclass(frozen=True)
class Linear:
    d: float

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError(f"linear diffusivity must be positive, got {self.d}")


@dataclass(frozen=True)
class Custom:
    """Tabulated D with monotone piecewise-cubic (PCHIP) interpolation.

    The table must start at s = 0 with D(0) = 0. Beyond the last abscissa D is
    held at its final value, which keeps a nondecreasing table nondecreasing.
    Monotonicity of the table itself is not enforced here; that is what
    :func:`validate_hypotheses` reports on.
    """

    table: tuple[tuple[float, float], ...]
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)
    _phi_knots: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        table = tuple((float(s), float(d)) for s, d in self.table)
        object.__setattr__(self, "table", table)
        if len(table) < 2:
            raise DomainError("custom diffusion table needs at least two (s, D) pairs")
        s = np.array([p[0] for p in table])
        d = np.array([p[1] for p in table])
        if s[0] != 0.0 or d[0] != 0.0:
            raise DomainError("custom diffusion table must start with the pair (0, 0)")
        if np.any(np.diff(s) <= 0):
            raise DomainError("custom diffusion abscissae must be strictly increasing")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise DomainError("custom diffusion values must be finite and nonnegative")
        interp = PchipInterpolator(s, d, extrapolate=False)
        object.__setattr__(self, "_interp", interp)
        # Phi at the knots; Simpson is exact on each cubic piece.
        mids = interp(0.5 * (s[:-1] + s[1:]))
        pieces = np.diff(s) / 6.0 * (d[:-1] + 4.0 * mids + d[1:])
        object.__setattr__(self, "_phi_knots", np.concatenate([[0.0], np.cumsum(pieces)]))

    @property
    def knots(self) -> np.ndarray:
        return self._interp.x

    def value(self, s: np.ndarray) -> np.ndarray:
        x = self._interp.x
        out = self._interp(np.minimum(s, x[-1]))
        return np.maximum(out, 0.0)


# -- sensitivity families ---------------------------------------------------

@dataclass(frozen=True)
class Constant:
    chi: float

    def __post_init__(self):
        if not self.chi >= 0:
            raise DomainError(f"sensitivity chi must be nonnegative, got {self.chi}")


@dataclass(frozen=True)
class Saturating:
    """S(s) = chi / (1 + kappa s)."""

    chi: float
    kappa: float

    def __post_init__(self):
        if not (self.chi >= 0 and self.kappa >= 0):
            raise DomainError("saturating sensitivity needs chi >= 0 and kappa >= 0")


# -- source families --------------------------------------------------------

@dataclass(frozen=True)
class ZeroSource:
    pass


@dataclass(frozen=True)
class Logistic:
    """f(u, v) = max(r u (1 - u/K), 0)."""

    r: float
    K: float

    def __post_init__(self):
        if not self.r >= 0:
            raise DomainError(f"logistic rate must be nonnegative, got {self.r}")
        if not self.K > 0:
            raise DomainError(f"logistic capacity must be positive, got {self.K}")


class SignalMode(enum.Enum):
    CONSUMPTION = "consumption"
    KELLER_SEGEL = "keller_segel"


Diffusion = Union[PorousMedium, Linear, Custom]
Sensitivity = Union[Constant, Saturating]
Source = Union[ZeroSource, Logistic]


@dataclass(frozen=True)
class ModelSpec:
    diffusion: Diffusion
    sensitivity: Sensitivity = Constant(1.0)
    source: Source = ZeroSource()
    signal_mode: SignalMode = SignalMode.CONSUMPTION
    s0: float = 1.0
    p: float | None = None

    def __post_init__(self):
        if not self.s0 > 0:
            raise DomainError(f"s0 must be positive, got {self.s0}")
        if self.p is None:
            # p is unrelated to m in the theory; p = m is the natural choice.
            default = self.diffusion.m if isinstance(self.diffusion, PorousMedium) else 2.0
            object.__setattr__(self, "p", float(default))
        if not self.p > 1:
            raise DomainError(f"degeneracy exponent p must exceed 1, got {self.p}")

    @property
    def has_source(self) -> bool:
        return not isinstance(self.source, ZeroSource)


def _check_nonneg(name: str, x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.size and not arr.min() >= 0:
        raise DomainError(f"{name} must be nonnegative")
    return arr


def _like(x, arr: np.ndarray):
    return float(arr) if np.ndim(x) == 0 else arr


def eval_D(spec: ModelSpec, s: ArrayLike) -> ArrayLike:
    arr = _check_nonneg("s", s)
    dif = spec.diffusion
    if isinstance(dif, PorousMedium):
        out = dif.m * arr ** (dif.m - 1.0)
    elif isinstance(dif, Linear):
        out = np.full_like(arr, dif.d)
    else:
        out = dif.value(arr)
    return _like(s, out)


def eval_D_prime(spec: ModelSpec, s: ArrayLike) -> ArrayLike:
    """D'(s) for s > 0; closed form except for tabulated D (centered difference)."""
    arr = _check_nonneg("s", s)
    dif = spec.diffusion
    if isinstance(dif, PorousMedium):
        with np.errstate(divide="ignore"):
            out = dif.m * (dif.m - 1.0) * arr ** (dif.m - 2.0)
    elif isinstance(dif, Linear):
        out = np.zeros_like(arr)
    else:
        h = arr * 1e-6
        out = (dif.value(arr + h) - dif.value(arr - h)) / (2.0 * h)
    return _like(s, out)


def _simpson(fun, a: np.ndarray, b: np.ndarray, rtol: float = 1e-12, max_level: int = 30) -> np.ndarray:
    """Composite Simpson on [a, b], doubling panels until successive estimates agree."""
    n = 2
    prev = None
    for _ in range(max_level):
        x = a[..., None] + (b - a)[..., None] * np.linspace(0.0, 1.0, n + 1)
        w = np.ones(n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        est = (b - a) / (3.0 * n) * (fun(x) @ w)
        if prev is not None:
            scale = np.maximum(np.abs(est), np.finfo(float).tiny)
            if np.all(np.abs(est - prev) <= rtol * scale):
                return est
        prev = est
        n *= 2
    return est


def eval_Phi(spec: ModelSpec, s: ArrayLike) -> ArrayLike:
    """Kirchhoff transform Phi(s) = int_0^s D."""
    arr = _check_nonneg("s", s)
    dif = spec.diffusion
    if isinstance(dif, PorousMedium):
        out = arr ** dif.m
    elif isinstance(dif, Linear):
        out = dif.d * arr
    else:
        knots = dif.knots
        last = knots[-1]
        inside = np.minimum(arr, last)
        k = np.clip(np.searchsorted(knots, inside, side="right") - 1, 0, len(knots) - 2)
        left = knots[k]
        out = dif._phi_knots[k] + _simpson(dif.value, left, inside)
        beyond = arr > last
        if np.any(beyond):
            out = np.where(beyond, dif._phi_knots[-1] + dif.value(np.array(last)) * (arr - last), out)
    return _like(s, out)


def eval_S(spec: ModelSpec, s: ArrayLike) -> ArrayLike:
    arr = _check_nonneg("s", s)
    sens = spec.sensitivity
    if isinstance(sens, Constant):
        out = np.full_like(arr, sens.chi)
    else:
        out = sens.chi / (1.0 + sens.kappa * arr)
    return _like(s, out)


def eval_f(spec: ModelSpec, u: ArrayLike, v: ArrayLike) -> ArrayLike:
    uu = _check_nonneg("u", u)
    _check_nonneg("v", v)
    src = spec.source
    if isinstance(src, ZeroSource):
        out = np.zeros(np.broadcast_shapes(np.shape(u), np.shape(v)))
    else:
        out = np.maximum(src.r * uu * (1.0 - uu / src.K), 0.0)
        out = np.broadcast_to(out, np.broadcast_shapes(np.shape(u), np.shape(v))).copy()
    return _like(u if np.ndim(u) else v, out)


def compute_CS(spec: ModelSpec, M: float) -> float:
    """sup of S over [0, M]. Both families attain it at s = 0."""
    if not M > 0:
        raise DomainError(f"M must be positive, got {M}")
    return float(spec.sensitivity.chi)


@dataclass
class HypothesisReport:
    cd_min: float
    cd_max: float
    admissible: bool
    violations: list[tuple[float, str]]
    smallest_sample: float

    def lines(self) -> list[str]:
        out = [
            f"cd_min = {self.cd_min!r}   (sup of s D'(s) / D(s))",
            f"cd_max = {self.cd_max!r}   (inf of D(s) / s^(p-1))",
            f"smallest sampled s = {self.smallest_sample!r}",
            f"admissible = {self.admissible}",
        ]
        for s, cond in self.violations:
            out.append(f"  violation {cond} at s = {s!r}")
        return out


def validate_hypotheses(spec: ModelSpec, samples: int = 1000) -> HypothesisReport:
    """Check the structural conditions on D by sampling.

    The window conditions s D' <= C_D D and C_D s^(p-1) <= D are evaluated on a
    geometric sample of (0, s0] (which crowds points toward the degeneracy at
    0) plus s0 itself. Positivity and monotonicity of D are additionally
    checked on a uniform sample covering the whole tabulated range, since a
    dip in a custom table may lie beyond s0.
    """
    if samples < 100:
        raise DomainError("validate_hypotheses needs at least 100 samples")
    s0, p = spec.s0, spec.p
    geo = np.geomspace(s0 * HYPOTHESIS_SAMPLE_FLOOR, s0, samples)
    violations: list[tuple[float, str]] = []

    span = s0
    if isinstance(spec.diffusion, Custom):
        span = max(span, float(spec.diffusion.knots[-1]))
    wide = np.union1d(geo, np.linspace(0.0, span, samples + 1)[1:])
    if isinstance(spec.diffusion, Custom):
        inner = spec.diffusion.knots[1:-1]
        wide = np.union1d(wide, inner)
    d_wide = np.asarray(eval_D(spec, wide))
    dp_wide = np.asarray(eval_D_prime(spec, wide))
    for s in wide[d_wide <= 0]:
        violations.append((float(s), "D_positive"))
    drop = (dp_wide < -1e-9 * np.maximum(1.0, d_wide)) | (np.diff(d_wide, prepend=0.0) < -1e-12)
    for s in wide[drop]:
        violations.append((float(s), "D_nondecreasing"))

    d = np.asarray(eval_D(spec, geo))
    dp = np.asarray(eval_D_prime(spec, geo))
    pos = d > 0
    cd_min = float(np.max(geo[pos] * dp[pos] / d[pos])) if np.any(pos) else math.inf
    cd_min = max(cd_min, 0.0)
    lower = d / geo ** (p - 1.0)
    i = int(np.argmin(lower))
    cd_max = float(lower[i])
    if not (cd_max > 0 and cd_min <= cd_max):
        violations.append((float(geo[i]), "C_D_window"))
    return HypothesisReport(
        cd_min=cd_min,
        cd_max=cd_max,
        admissible=not violations,
        violations=violations,
        smallest_sample=float(geo[0]),
    )
