"""Problem parameters, seeding, and the planted / null samplers.

The planted model draws a uniformly random binary ``k``-sparse vector
``beta``, a Gaussian design ``X`` (rows are observations) and Gaussian
noise ``W`` and returns ``Y = X beta + W``.  The null model replaces
``Y`` by ``lam * W``, independent of ``X``.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from aonlab.errors import PreconditionError, RejectionBudgetExhausted

if TYPE_CHECKING:
    from aonlab.divergence import ConditioningParams

_U64 = 1 << 64


@dataclass(frozen=True)
class ModelParams:
    """Dimensions and noise level.

    ``lam`` is the null-model scale; ``None`` means the covariance-matched
    value ``lambda0 = sqrt(k / sigma2 + 1)``.
    """

    p: int
    k: int
    sigma2: float
    n: int = 0
    lam: float | None = None

    def __post_init__(self):
        for name in ("p", "k", "n"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise PreconditionError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not 1 <= self.k <= self.p:
            raise PreconditionError(f"need 1 <= k <= p, got k={self.k}, p={self.p}")
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise PreconditionError(f"sigma2 must be a positive finite real, got {self.sigma2}")
        if self.n < 0:
            raise PreconditionError(f"n must be nonnegative, got {self.n}")
        if self.lam is not None and not (math.isfinite(self.lam) and self.lam > 0):
            raise PreconditionError(f"lam must be positive, got {self.lam}")

    @property
    def snr(self) -> float:
        return self.k / self.sigma2

    @property
    def lambda0(self) -> float:
        return math.sqrt(self.k / self.sigma2 + 1.0)

    @property
    def null_scale(self) -> float:
        return self.lambda0 if self.lam is None else float(self.lam)

    @property
    def mse0(self) -> float:
        """Squared error of the trivial estimator ``E[beta] = (k/p) * ones``."""
        return self.k * (1.0 - self.k / self.p)

    @property
    def nstar(self) -> float:
        return critical_sample_size(self)

    def with_n(self, n: int) -> ModelParams:
        return dataclasses.replace(self, n=n)


def critical_sample_size(params: ModelParams) -> float:
    """``n* = 2 k log(p/k) / log(1 + k/sigma2)``."""
    if params.k >= params.p:
        raise PreconditionError("critical sample size needs k < p")
    return 2.0 * params.k * math.log(params.p / params.k) / math.log1p(params.snr)


@dataclass(frozen=True)
class Seed:
    """Key of a counter-based generator.

    ``(value, stream)`` maps injectively onto a Philox key, so trial
    block ``b`` of a run can be regenerated alone via ``seed.child(b)``.
    """

    value: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.value < _U64:
            raise PreconditionError(f"seed value must be a 64-bit unsigned integer, got {self.value}")
        if not 0 <= self.stream < _U64:
            raise PreconditionError(f"seed stream must be in [0, 2**64), got {self.stream}")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.value + (self.stream << 64)))

    def derive(self, *tags: int) -> Seed:
        """Independent seed for a named sub-task (tags are small integers)."""
        ss = np.random.SeedSequence([self.value, self.stream, *tags])
        return Seed(int(ss.generate_state(1, np.uint64)[0]), 0)

    def child(self, index: int) -> Seed:
        """Seed of trial block ``index``."""
        return Seed(self.derive().value, index)


@dataclass(frozen=True)
class SupportVector:
    """Binary k-sparse vector stored as its strictly increasing support."""

    indices: tuple[int, ...]
    p: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise PreconditionError("support must be nonempty")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise PreconditionError(f"support indices must be strictly increasing: {idx}")
        if idx[0] < 0 or idx[-1] >= self.p:
            raise PreconditionError(f"support indices must lie in [0, {self.p}): {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def k(self) -> int:
        return len(self.indices)

    def dense(self) -> np.ndarray:
        v = np.zeros(self.p)
        v[list(self.indices)] = 1.0
        return v

    @classmethod
    def from_dense(cls, v) -> SupportVector:
        v = np.asarray(v)
        if not np.all((v == 0) | (v == 1)):
            raise PreconditionError("dense support must be binary")
        return cls(tuple(np.flatnonzero(v)), v.shape[0])


class Origin(enum.Enum):
    PLANTED = "planted"
    NULL = "null"
    CONDITIONED_PLANTED = "conditioned_planted"


@dataclass(frozen=True, eq=False)
class Instance:
    """One observation ``(X, Y)``; ``truth`` is set exactly for planted origins."""

    X: np.ndarray
    Y: np.ndarray
    truth: SupportVector | None
    origin: Origin

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        Y = np.array(self.Y, dtype=float)
        if X.ndim != 2 or Y.ndim != 1 or X.shape[0] != Y.shape[0]:
            raise PreconditionError(f"shape mismatch: X {X.shape}, Y {Y.shape}")
        if (self.truth is None) != (self.origin is Origin.NULL):
            raise PreconditionError("planted instances carry a truth, null instances do not")
        if self.truth is not None and self.truth.p != X.shape[1]:
            raise PreconditionError("truth dimension does not match X")
        X.flags.writeable = False
        Y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def draw_supports(rng: np.random.Generator, p: int, k: int, size: int) -> np.ndarray:
    """``size`` uniform k-subsets of ``range(p)``, rows sorted ascending.

    Partial Fisher-Yates over each row, vectorised across rows.
    """
    perm = np.tile(np.arange(p), (size, 1))
    rows = np.arange(size)
    for i in range(k):
        j = rng.integers(i, p, size=size)
        head = perm[:, i].copy()
        perm[:, i] = perm[rows, j]
        perm[rows, j] = head
    return np.sort(perm[:, :k], axis=1)


def draw_planted(rng: np.random.Generator, params: ModelParams, size: int):
    """Batch of planted draws: ``(X[size,n,p], Y[size,n], supports[size,k])``."""
    p, k, n = params.p, params.k, params.n
    supports = draw_supports(rng, p, k, size)
    X = rng.standard_normal((size, n, p))
    W = math.sqrt(params.sigma2) * rng.standard_normal((size, n))
    Y = np.take_along_axis(X, np.broadcast_to(supports[:, None, :], (size, n, k)), axis=2).sum(-1) + W
    return X, Y, supports


def draw_null(rng: np.random.Generator, params: ModelParams, size: int, lam: float | None = None):
    """Batch of null draws: ``(X[size,n,p], Y[size,n])`` with ``Y = lam * W``."""
    lam = params.null_scale if lam is None else lam
    X = rng.standard_normal((size, params.n, params.p))
    Y = lam * math.sqrt(params.sigma2) * rng.standard_normal((size, params.n))
    return X, Y


def sample_planted(params: ModelParams, seed: Seed) -> Instance:
    X, Y, supports = draw_planted(seed.rng(), params, 1)
    truth = SupportVector(tuple(supports[0]), params.p)
    return Instance(X[0], Y[0], truth, Origin.PLANTED)


def sample_null(params: ModelParams, seed: Seed) -> Instance:
    """Null draw at scale ``params.null_scale``."""
    X, Y = draw_null(seed.rng(), params, 1)
    return Instance(X[0], Y[0], None, Origin.NULL)


def sample_conditioned_planted(
    params: ModelParams,
    cond: ConditioningParams,
    seed: Seed,
    max_rejects: int,
) -> Instance:
    """Planted draw conditioned on the event ``(X, beta) in E_{gamma,tau}``, by rejection.

    Rejection on ``(X, beta)`` before looking at ``W`` samples the
    conditioned model exactly, since the event does not involve ``W``.
    """
    from aonlab.divergence import event_holds

    if max_rejects < 1:
        raise PreconditionError("max_rejects must be at least 1")
    rng = seed.rng()
    for _ in range(max_rejects):
        X, Y, supports = draw_planted(rng, params, 1)
        truth = SupportVector(tuple(supports[0]), params.p)
        if event_holds(X[0], truth, params, cond):
            return Instance(X[0], Y[0], truth, Origin.CONDITIONED_PLANTED)
    raise RejectionBudgetExhausted(max_rejects)
