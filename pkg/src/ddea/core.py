"""Shared domain types: objective functions, RNG streams, and the evaluation budget.

Everything downstream (the classic DE driver, the Gaussian-mutation driver,
the speciation layer and the experiment harness) builds on the types here.
Conventions:

* minimization everywhere; wrap maximization problems by negating the
  objective before constructing an :class:`ObjectiveSpec`,
* initialization bounds are initialization-only; the search itself is
  unclamped unless a run explicitly asks for clamping,
* every objective evaluation is charged to a :class:`BudgetLedger`, one
  count per evaluation, no exceptions.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class ConfigurationError(ValueError):
    """Invalid user-supplied configuration (bad bounds, bad N, bad schema)."""


class InternalInvariantError(AssertionError):
    """A library invariant was violated; indicates a bug, not bad input."""


class BudgetExhausted(Exception):
    """Raised when an evaluation is requested past the configured cap."""


def as_genome(values, dimension: int | None = None) -> np.ndarray:
    """Coerce ``values`` to a finite 1-D float64 genome, validating length."""
    g = np.asarray(values, dtype=np.float64)
    if g.ndim != 1:
        raise InternalInvariantError(f"genome must be 1-D, got shape {g.shape}")
    if dimension is not None and g.shape[0] != dimension:
        raise InternalInvariantError(
            f"genome length {g.shape[0]} != declared dimension {dimension}"
        )
    if not np.all(np.isfinite(g)):
        raise InternalInvariantError("genome contains non-finite entries")
    return g


@dataclass
class Individual:
    """A genome plus its lazily computed objective value (lower is better)."""

    genome: np.ndarray
    fitness: Optional[float] = None

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None


@dataclass(frozen=True)
class Bounds:
    """Per-gene lower/upper initialization bounds."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ConfigurationError("bounds must be equal-length 1-D vectors")
        if not np.all(lo < hi):
            raise ConfigurationError("each lower bound must be < its upper bound")

    @classmethod
    def uniform(cls, lower: float, upper: float, dimension: int) -> "Bounds":
        return cls(np.full(dimension, lower), np.full(dimension, upper))

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]


@dataclass(frozen=True)
class ControlParams:
    """Classic DE control constants shared by both algorithm drivers.

    ``force_one_gene`` adds the conventional forced donor index to the
    binomial crossover; default off, which is the literal crossover rule.
    """

    population_size: int
    f_weight: float = 0.8
    crossover_rate: float = 0.9
    force_one_gene: bool = False

    def __post_init__(self):
        if self.population_size < 4:
            raise ConfigurationError("population_size must be >= 4")
        if not (0.0 < self.f_weight <= 1.0):
            raise ConfigurationError("f_weight must be in (0, 1]")
        if not (0.0 <= self.crossover_rate <= 1.0):
            raise ConfigurationError("crossover_rate must be in [0, 1]")


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian fitness noise, derived deterministically per genome.

    The noise sample is seeded from (seed, genome bytes) so evaluation stays
    pure: the same genome always receives the same perturbation, and
    concurrent workers need no shared noise stream.
    """

    std: float
    seed: int = 0

    def __post_init__(self):
        if self.std < 0:
            raise ConfigurationError("noise std must be >= 0")

    def sample(self, genome: np.ndarray) -> float:
        words = np.frombuffer(genome.tobytes(), dtype=np.uint32)
        ss = np.random.SeedSequence([np.uint32(self.seed & 0xFFFFFFFF), *words])
        return float(np.random.Generator(np.random.Philox(ss)).normal(0.0, self.std))


@dataclass(frozen=True)
class ObjectiveSpec:
    """A minimization problem: dimension, init bounds and a pure evaluator.

    ``evaluate`` maps one genome to a finite float. ``batch_evaluate``, when
    provided, maps an (n, D) genome matrix to an (n,) value vector and must
    agree with ``evaluate`` row-wise; drivers use it to amortize call
    overhead. ``eval_noise`` adds deterministic per-genome Gaussian noise on
    top of either path.
    """

    name: str
    dimension: int
    init_bounds: Bounds
    evaluate: Callable[[np.ndarray], float]
    batch_evaluate: Optional[Callable[[np.ndarray], np.ndarray]] = None
    eval_noise: Optional[NoiseSpec] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigurationError("dimension must be >= 1")
        if self.init_bounds.dimension != self.dimension:
            raise ConfigurationError("init_bounds dimension != objective dimension")

    def value(self, genome: np.ndarray) -> float:
        """Evaluate one genome, applying noise if configured (not charged here)."""
        v = float(self.evaluate(genome))
        if self.eval_noise is not None:
            v += self.eval_noise.sample(genome)
        if not np.isfinite(v):
            raise InternalInvariantError(
                f"objective {self.name!r} returned non-finite value {v!r}"
            )
        return v

    def values(self, genomes: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`value` over an (n, D) matrix."""
        if self.batch_evaluate is None or self.eval_noise is not None:
            return np.array([self.value(g) for g in genomes], dtype=np.float64)
        v = np.asarray(self.batch_evaluate(genomes), dtype=np.float64)
        if not np.all(np.isfinite(v)):
            raise InternalInvariantError(
                f"objective {self.name!r} returned non-finite batch values"
            )
        return v


class BudgetLedger:
    """Shared monotone counter of objective evaluations against a hard cap.

    Every evaluation increments ``used`` by exactly one and appends one event
    to an independently kept audit log, so ``used == len(audit_log)`` can be
    cross-checked after any run. Increments are lock-protected; the cap is
    never overshot because callers reserve before evaluating.
    """

    def __init__(self, cap: int):
        if cap < 1:
            raise ConfigurationError("budget cap must be >= 1")
        self.cap = int(cap)
        self.used = 0
        self.audit_log: list[str] = []
        self._lock = threading.Lock()

    @property
    def remaining(self) -> int:
        return self.cap - self.used

    def charge(self, n: int = 1, tag: str = "eval") -> None:
        with self._lock:
            if self.used + n > self.cap:
                raise BudgetExhausted(
                    f"cap {self.cap} would be exceeded (used {self.used}, requested {n})"
                )
            self.used += n
            self.audit_log.extend([tag] * n)

    def audit_total(self) -> int:
        return len(self.audit_log)


class RngStream:
    """A named, splittable random stream over a counter-based generator.

    A stream is identified by ``(seed, stream_id)``; identical identity and
    draw sequence give identical outputs regardless of what other streams
    did. ``spawn`` allocates child ids from one monotone per-run counter, so
    streams created for new species never collide within a run.
    """

    def __init__(self, seed: int, stream_id: int = 0, _counter=None):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._counter = _counter if _counter is not None else itertools.count(stream_id + 1)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.Philox(ss))

    def spawn(self) -> "RngStream":
        return RngStream(self.seed, next(self._counter), self._counter)

    # Thin draw helpers; all randomness in the library goes through these.
    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def random(self, size=None):
        return self.generator.random(size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def integers(self, low, high, size=None):
        return self.generator.integers(low, high, size=size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def scale_unit_sample(xi, bounds: Bounds) -> np.ndarray:
    """Map unit-interval samples onto the init box: x = xi*(upper-lower)+lower."""
    return np.asarray(xi) * (bounds.upper - bounds.lower) + bounds.lower


def init_population(
    spec: ObjectiveSpec, params: ControlParams, rng: RngStream
) -> list[Individual]:
    """Draw N unevaluated individuals uniformly inside the init bounds.

    One fresh unit draw per gene; fitness left unset so the caller decides
    when (and against which ledger) evaluation happens.
    """
    xi = rng.random((params.population_size, spec.dimension))
    genomes = scale_unit_sample(xi, spec.init_bounds)
    return [Individual(genome=g) for g in genomes]


def evaluate_individual(
    ind: Individual, spec: ObjectiveSpec, ledger: BudgetLedger, tag: str = "eval"
) -> Individual:
    """Set ``ind.fitness``, charging the ledger; already-evaluated is a no-op."""
    if ind.evaluated:
        return ind
    ledger.charge(1, tag)
    ind.fitness = spec.value(as_genome(ind.genome, spec.dimension))
    return ind


def evaluate_batch(
    genomes: np.ndarray, spec: ObjectiveSpec, ledger: BudgetLedger, tag: str = "eval"
) -> np.ndarray:
    """Evaluate as many leading rows of ``genomes`` as the budget allows.

    Returns the fitness vector for the evaluated prefix (possibly shorter
    than ``genomes``); the caller handles the truncated remainder. Budget is
    reserved before evaluation so the cap is never overshot.
    """
    k = min(len(genomes), ledger.remaining)
    if k == 0:
        return np.empty(0, dtype=np.float64)
    ledger.charge(k, tag)
    return spec.values(genomes[:k])
