"""Finite categorical distributions, conditional tables, and log-space scoring.

Everything downstream (target/skill models, learning, the service) is built
on these four ideas:

* a ``Domain`` is a named, ordered set of value labels,
* a ``Distribution`` is a normalized probability vector over a domain,
* a ``ConditionalTable`` stores one distribution per parent assignment,
* scoring multiplies many probabilities, so it happens in log space with an
  explicit zero-weight sentinel instead of ``log(0)`` arithmetic.

All types are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

#: Log-space sentinel for "this outcome has probability exactly zero".
#: It is never produced by math.log and never fed back into arithmetic;
#: log_normalize maps it straight to probability 0.
LOG_ZERO = float("-inf")

#: Tolerance for "this vector is normalized" checks.
SUM_TOL = 1e-9

#: Smoothing applied to the second argument of kl_divergence.
KL_EPSILON = 1e-9


class ProbError(Exception):
    """Base class for probability-layer errors."""


class AllZeroError(ProbError):
    """Every weight is zero: the question has no consistent outcome."""


class NegativeOrNaNError(ProbError):
    """A weight is negative, NaN, or otherwise not a finite nonnegative real."""


class FactorOutOfRangeError(ProbError):
    """A factor passed to log_score is outside [0, 1]."""


class DomainMismatchError(ProbError):
    """Two distributions that must share a domain do not."""


class UnknownParentValueError(ProbError):
    """A parent assignment uses a value not in the parent's domain."""


class TableShapeError(ProbError):
    """A conditional table does not cover the parent product exactly once."""


@dataclass(frozen=True)
class Domain:
    """Named, ordered set of distinct value labels.

    The order is fixed at construction and defines tie-breaking and
    serialization order everywhere.
    """

    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) < 1:
            raise TableShapeError(f"domain {self.name!r} must have at least one value")
        if len(set(self.values)) != len(self.values):
            raise TableShapeError(f"domain {self.name!r} has duplicate values")
        object.__setattr__(
            self, "_index", MappingProxyType({v: i for i, v in enumerate(self.values)})
        )

    def __len__(self) -> int:
        return len(self.values)

    def __contains__(self, value: str) -> bool:
        return value in self._index

    def index(self, value: str) -> int:
        try:
            return self._index[value]
        except KeyError:
            raise UnknownParentValueError(
                f"{value!r} is not a value of domain {self.name!r}"
            ) from None

    def to_json(self) -> dict:
        return {"name": self.name, "values": list(self.values)}

    @classmethod
    def from_json(cls, doc: dict) -> "Domain":
        return cls(doc["name"], tuple(doc["values"]))


@dataclass(frozen=True)
class Distribution:
    """Probability vector aligned to a domain's value order."""

    domain: Domain
    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if len(self.probs) != len(self.domain):
            raise DomainMismatchError(
                f"{len(self.probs)} probabilities for domain of size {len(self.domain)}"
            )
        for p in self.probs:
            if not (0.0 <= p <= 1.0):
                raise NegativeOrNaNError(f"probability {p!r} outside [0, 1]")
        if abs(sum(self.probs) - 1.0) > SUM_TOL:
            raise ProbError(f"probabilities sum to {sum(self.probs)!r}, not 1")

    def prob(self, value: str) -> float:
        return self.probs[self.domain.index(value)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.domain.values, self.probs))


def normalize(weights: Sequence[float], domain: Domain) -> Distribution:
    """Scale nonnegative weights into a Distribution over ``domain``.

    Raises NegativeOrNaNError for malformed input and AllZeroError when no
    weight is positive (there is no consistent outcome to normalize to).
    """
    if len(weights) != len(domain):
        raise DomainMismatchError(
            f"{len(weights)} weights for domain {domain.name!r} of size {len(domain)}"
        )
    for w in weights:
        if not math.isfinite(w) or w < 0.0:
            raise NegativeOrNaNError(f"weight {w!r} is not a finite nonnegative real")
    total = math.fsum(weights)
    if total <= 0.0:
        raise AllZeroError(f"no positive weight over domain {domain.name!r}")
    return Distribution(domain, tuple(w / total for w in weights))


def uniform(domain: Domain) -> Distribution:
    """Uniform distribution: the parametric form for unknown priors."""
    p = 1.0 / len(domain)
    return Distribution(domain, (p,) * len(domain))


def point_mass(domain: Domain, value: str) -> Distribution:
    """All probability on one value. Hard CPT rows are built from this."""
    i = domain.index(value)
    return Distribution(domain, tuple(1.0 if j == i else 0.0 for j in range(len(domain))))


def argmax(dist: Distribution) -> str:
    """Most probable value; ties broken by domain order (first wins)."""
    best = 0
    for i in range(1, len(dist.probs)):
        if dist.probs[i] > dist.probs[best]:
            best = i
    return dist.domain.values[best]


def log_score(factors: Iterable[float]) -> float:
    """Sum of logs of probabilities, with an exact-zero sentinel.

    A factor of exactly 0 short-circuits to LOG_ZERO; log(0) is never
    evaluated. Safe for thousands of factors down to 1e-300 each.
    """
    total = 0.0
    for f in factors:
        if not (0.0 <= f <= 1.0):
            raise FactorOutOfRangeError(f"factor {f!r} outside [0, 1]")
        if f == 0.0:
            return LOG_ZERO
        total += math.log(f)
    return total


def log_normalize(log_weights: Sequence[float], domain: Domain) -> Distribution:
    """Normalize log-space scores into a Distribution.

    LOG_ZERO entries become exact probability 0. Uses the max-shift trick so
    the exponentials cannot underflow to an all-zero vector.
    """
    if len(log_weights) != len(domain):
        raise DomainMismatchError(
            f"{len(log_weights)} scores for domain {domain.name!r} of size {len(domain)}"
        )
    finite = [s for s in log_weights if s != LOG_ZERO]
    if not finite:
        raise AllZeroError(f"every score is the zero sentinel over {domain.name!r}")
    for s in finite:
        if not math.isfinite(s):
            raise NegativeOrNaNError(f"log weight {s!r} is not finite")
    m = max(finite)
    weights = [0.0 if s == LOG_ZERO else math.exp(s - m) for s in log_weights]
    return normalize(weights, domain)


def kl_divergence(p: Distribution, q: Distribution) -> float:
    """KL(p || q) with q epsilon-smoothed then renormalized.

    Smoothing (epsilon = 1e-9, applied to q only) keeps the divergence finite
    against learned tables that contain hard zeros. 0*log(0) is taken as 0.
    """
    if p.domain != q.domain:
        raise DomainMismatchError(
            f"KL over mismatched domains {p.domain.name!r} vs {q.domain.name!r}"
        )
    k = len(p.domain)
    z = 1.0 + k * KL_EPSILON
    total = 0.0
    for pi, qi in zip(p.probs, q.probs):
        if pi == 0.0:
            continue
        total += pi * math.log(pi * z / (qi + KL_EPSILON))
    return max(total, 0.0)


@dataclass(frozen=True)
class ConditionalTable:
    """P(child | parents) stored as one Distribution per parent assignment.

    Rows are keyed by the tuple of parent values in parent order; the
    constructor requires exactly one row per element of the parent-domain
    Cartesian product. A table with no parents has the single key ().
    """

    child: Domain
    parents: tuple[Domain, ...]
    rows: Mapping[tuple[str, ...], Distribution] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        expected = set(itertools.product(*(d.values for d in self.parents)))
        got = set(self.rows)
        if got != expected:
            missing = sorted(expected - got)[:3]
            extra = sorted(got - expected)[:3]
            raise TableShapeError(
                f"table for {self.child.name!r}: missing rows {missing}, extra rows {extra}"
            )
        for key, dist in self.rows.items():
            if dist.domain != self.child:
                raise DomainMismatchError(
                    f"row {key} is over {dist.domain.name!r}, expected {self.child.name!r}"
                )
        object.__setattr__(self, "rows", MappingProxyType(dict(self.rows)))

    def lookup(self, parent_values: Sequence[str]) -> Distribution:
        """Return the stored row for a full parent assignment."""
        key = tuple(parent_values)
        if len(key) != len(self.parents):
            raise UnknownParentValueError(
                f"assignment {key} does not cover {len(self.parents)} parents"
            )
        for value, dom in zip(key, self.parents):
            if value not in dom:
                raise UnknownParentValueError(
                    f"{value!r} is not a value of parent domain {dom.name!r}"
                )
        return self.rows[key]

    def to_json(self) -> dict:
        return {
            "child": self.child.to_json(),
            "parents": [d.to_json() for d in self.parents],
            "rows": {
                "|".join(key): list(dist.probs)
                for key, dist in sorted(self.rows.items())
            },
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ConditionalTable":
        child = Domain.from_json(doc["child"])
        parents = tuple(Domain.from_json(d) for d in doc["parents"])
        rows = {}
        for key, probs in doc["rows"].items():
            parts = tuple(key.split("|")) if key else ()
            rows[parts] = Distribution(child, tuple(probs))
        return cls(child, parents, rows)


def lookup(table: ConditionalTable, parent_values: Sequence[str]) -> Distribution:
    """Module-level alias for ConditionalTable.lookup."""
    return table.lookup(parent_values)


def table_to_json_str(table: ConditionalTable) -> str:
    """Serialize a table to canonical JSON (sorted keys, full float precision)."""
    return json.dumps(table.to_json(), sort_keys=True)


def table_from_json_str(text: str) -> ConditionalTable:
    return ConditionalTable.from_json(json.loads(text))
