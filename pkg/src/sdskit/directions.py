"""Positive spanning sets of unit directions and their cosine measure.

The cosine measure of a finite set ``D`` of unit vectors is

    mu(D) = min_{|v| = 1} max_{d in D} <v, d>

and is positive exactly when ``D`` positively spans R^n.  Two independent
routes are provided: :func:`cosine_measure_exact` enumerates the finitely
many candidate minimizers, :func:`cosine_measure_sampled` takes the min over
seeded random unit vectors and therefore only bounds ``mu`` from above.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _backend
from .errors import (
    DegenerateSetError,
    DomainError,
    DuplicateDirectionError,
    EnumerationBudgetError,
    InvalidDirectionError,
    ShapeError,
)

UNIT_TOL = 1e-12
DUPLICATE_TOL = 1e-12
COND_MAX = 1e10
DEFAULT_SUBSET_BUDGET = 2_000_000
SAMPLE_CHUNK = 65536


class DirectionSet:
    """An ordered, immutable collection of unit vectors in R^n.

    Poll order is the stored order.  Use :func:`build_direction_set` to
    construct one from raw (unnormalized) vectors.
    """

    __slots__ = ("_matrix", "_mu_cache")

    def __init__(self, matrix):
        m = np.array(matrix, dtype=np.float64, copy=True)
        if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
            raise ShapeError(f"expected a nonempty (size, dimension) array, got {m.shape}")
        norms = np.linalg.norm(m, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise InvalidDirectionError("directions must have unit norm; use build_direction_set")
        m.setflags(write=False)
        self._matrix = m
        self._mu_cache = {}

    @property
    def matrix(self) -> np.ndarray:
        """Read-only ``(size, dimension)`` array, one direction per row."""
        return self._matrix

    @property
    def dimension(self) -> int:
        return self._matrix.shape[1]

    @property
    def size(self) -> int:
        return self._matrix.shape[0]

    def __len__(self):
        return self.size

    def __iter__(self):
        return iter(self._matrix)

    def __getitem__(self, i):
        return self._matrix[i]

    def __eq__(self, other):
        if not isinstance(other, DirectionSet):
            return NotImplemented
        return self._matrix.shape == other._matrix.shape and bool(
            np.array_equal(self._matrix, other._matrix)
        )

    def __hash__(self):
        return hash((self._matrix.shape, self._matrix.tobytes()))

    def __repr__(self):
        return f"DirectionSet(dimension={self.dimension}, size={self.size})"

    def to_dict(self) -> dict:
        return {"dimension": self.dimension, "directions": self._matrix.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "DirectionSet":
        try:
            dim = int(doc["dimension"])
            vectors = doc["directions"]
        except (KeyError, TypeError) as exc:
            raise ShapeError(f"malformed direction-set document: {exc}") from None
        ds = build_direction_set(vectors)
        if ds.dimension != dim:
            raise ShapeError(f"declared dimension {dim} but vectors have dimension {ds.dimension}")
        return ds


@dataclass(frozen=True)
class CosineMeasureResult:
    """Value of the cosine measure with the vector attaining it.

    ``mu`` can be zero or negative when the set does not positively span;
    ``tolerance`` is how closely ``max_d <witness_v, d>`` reproduces ``mu``.
    """

    mu: float
    witness_v: np.ndarray
    method: str
    tolerance: float = 1e-12

    def ratio(self, size: int) -> float:
        """|D| / mu^2, the factor through which D enters every complexity bound."""
        return size / self.mu**2


def build_direction_set(raw_vectors: Sequence[Sequence[float]]) -> DirectionSet:
    """Normalize ``raw_vectors`` to unit length, keeping their order.

    Vectors whose norm is already within ``UNIT_TOL`` of 1 are kept as given.

    Raises
    ------
    ShapeError
        Empty input or vectors of differing dimension.
    InvalidDirectionError
        A zero or non-finite vector.
    DuplicateDirectionError
        Two vectors coincide after normalization.
    """
    rows = list(raw_vectors)
    if not rows:
        raise ShapeError("direction list is empty")
    try:
        dims = {len(r) for r in rows}
    except TypeError:
        raise ShapeError("each direction must be a sequence of numbers") from None
    if len(dims) != 1:
        raise ShapeError(f"directions have mixed dimensions {sorted(dims)}")
    m = np.array(rows, dtype=np.float64)
    if m.shape[1] == 0:
        raise ShapeError("directions must have dimension >= 1")
    if not np.all(np.isfinite(m)):
        raise InvalidDirectionError("directions must be finite")
    norms = np.linalg.norm(m, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise InvalidDirectionError(f"direction {int(zero[0])} is the zero vector")
    # rows already unit within tolerance are kept bit-for-bit so that
    # saved sets reload unchanged
    scale = np.where(np.abs(norms - 1.0) <= UNIT_TOL, 1.0, norms)
    m = m / scale[:, None]
    for i in range(1, m.shape[0]):
        gaps = np.max(np.abs(m[:i] - m[i]), axis=1)
        j = np.flatnonzero(gaps <= DUPLICATE_TOL)
        if j.size:
            raise DuplicateDirectionError(f"direction {i} duplicates direction {int(j[0])}")
    return DirectionSet(m)


def maximal_positive_basis(n: int) -> DirectionSet:
    """Return ``{+e_1, -e_1, ..., +e_n, -e_n}`` in that order."""
    if int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n!r}")
    n = int(n)
    m = np.zeros((2 * n, n))
    for i in range(n):
        m[2 * i, i] = 1.0
        m[2 * i + 1, i] = -1.0
    return DirectionSet(m)


def subset_count(size: int, dimension: int) -> int:
    """Number of subsets the exact enumeration visits."""
    return sum(math.comb(size, k) for k in range(1, min(dimension, size) + 1))


def cosine_measure_exact(
    D: DirectionSet,
    *,
    max_subsets: int = DEFAULT_SUBSET_BUDGET,
    cond_max: float = COND_MAX,
    backend: str | None = None,
) -> CosineMeasureResult:
    """Cosine measure by enumerating candidate minimizers.

    Every minimizer of ``v -> max_d <v, d>`` on the sphere makes equal inner
    products with an independent subset of active directions and lies in
    their span (or, when the value is zero, is normal to ``n - 1`` of them).
    Enumerating all independent subsets of size at most ``n`` (condition
    number below ``cond_max``) therefore reaches the minimum.

    Raises
    ------
    EnumerationBudgetError
        More than ``max_subsets`` subsets would be visited.
    DegenerateSetError
        No independent subset of size ``n`` exists (``D`` does not span R^n).
    """
    key = ("exact", max_subsets, cond_max)
    cached = D._mu_cache.get(key)
    if cached is not None and backend is None:
        return cached
    count = subset_count(D.size, D.dimension)
    if count > max_subsets:
        raise EnumerationBudgetError(
            f"exact cosine measure needs {count} subsets, budget is {max_subsets}"
        )
    value, witness, full_rank = _backend.get(backend).exact_candidates(D.matrix, cond_max)
    if full_rank == 0:
        raise DegenerateSetError(
            f"no linearly independent {D.dimension}-subset among {D.size} directions"
        )
    witness = np.asarray(witness, dtype=np.float64)
    witness.setflags(write=False)
    result = CosineMeasureResult(mu=float(value) + 0.0, witness_v=witness, method="exact-enumeration")
    if backend is None:
        D._mu_cache[key] = result
    return result


def sample_unit_vectors(n: int, num_samples: int, seed: int):
    """Yield seeded chunks of uniform unit vectors (total ``num_samples``)."""
    rng = np.random.default_rng(seed)
    left = num_samples
    while left > 0:
        m = min(SAMPLE_CHUNK, left)
        V = rng.standard_normal((m, n))
        yield V / np.linalg.norm(V, axis=1)[:, None]
        left -= m


def cosine_measure_sampled(
    D: DirectionSet, num_samples: int, seed: int, *, backend: str | None = None
) -> CosineMeasureResult:
    """Upper estimate of the cosine measure from seeded uniform unit vectors.

    The estimate is ``min_i max_d <v_i, d>`` over the samples, which can only
    overestimate ``mu`` and converges to it as ``num_samples`` grows.  The
    tolerance is 0: the witness reproduces the value exactly.
    """
    if int(num_samples) != num_samples or num_samples < 1:
        raise DomainError(f"num_samples must be a positive integer, got {num_samples!r}")
    kernels = _backend.get(backend)
    best = np.inf
    witness = None
    for V in sample_unit_vectors(D.dimension, int(num_samples), seed):
        value, i = kernels.sampled_minmax(D.matrix, V)
        if value < best:
            best = value
            witness = V[i].copy()
    witness.setflags(write=False)
    return CosineMeasureResult(mu=float(best), witness_v=witness, method="sampled", tolerance=0.0)


def is_positive_spanning_set(D: DirectionSet, tol: float = 1e-9, **kwargs) -> bool:
    """True iff the exact cosine measure exceeds ``tol``.

    Equivalent to the origin lying in the interior of the convex hull of D.
    A degenerate set (not spanning R^n) is reported as ``False``.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    try:
        return cosine_measure_exact(D, **kwargs).mu > tol
    except DegenerateSetError:
        return False


def best_aligned_direction(D: DirectionSet, v, *, backend: str | None = None):
    """Direction of ``D`` forming the smallest angle with ``v``.

    Returns ``(direction, cosine)``; ties go to the lowest index.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (D.dimension,):
        raise ShapeError(f"expected a vector of length {D.dimension}, got shape {v.shape}")
    nrm = float(np.linalg.norm(v))
    if nrm == 0 or not math.isfinite(nrm):
        raise DomainError("v must be a nonzero finite vector")
    i, value = _backend.get(backend).max_inner(D.matrix, v / nrm)
    return D.matrix[i].copy(), value


def load_direction_set(path) -> DirectionSet:
    with open(path) as fh:
        return DirectionSet.from_dict(json.load(fh))


def save_direction_set(D: DirectionSet, path) -> None:
    Path(path).write_text(json.dumps(D.to_dict(), indent=2) + "\n")
