# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

"""Patches of V(L, k), their census, frequencies and entropy.

The rho-patch of V at a lattice point t is (V - t) within the open ball B_rho(0). Every patch
occurs with a positive frequency given by an inclusion-exclusion sum over the window points
missing from the patch, each term carrying an infinite product over all primes:

    nu(P) = sum over F in (W \\ P) of (-1)^|F| prod_p (1 - |(P u F) / p^k L| / p^(nk))

`frequency_exact` evaluates that sum with a certified error. Primes p with p^k * min_norm > 2 rho
separate all window points into distinct cosets, so their factor only depends on m = |P u F|.
Those factors are compared against zeta(nk)^(-m) = prod_p (1 - p^(-nk))^m: with
g(x) = (1 - m x) / (1 - x)^m one has -m^2 x^2 <= log g(x) <= 0 whenever m x <= 1/2, hence the
product over primes beyond a cut-off P lies in [exp(-m^2 P^(1-2s) / (2s-1)), 1] with s = nk.
The cut-off doubles until the summed bracket widths fall below the requested tolerance.

```python
from kfree_points.kfree import KFreeParams
from kfree_points.lattice import standard_lattice
from kfree_points.patches import census, frequency_exact, patch_at

params, lat = KFreeParams(n=2, k=1), standard_lattice(2)
patch = patch_at(params, lat, (1, 0), 1.1)
frequency_exact(patch, params, lat, 1e-10).value
census(params, lat, 1.1, 200.0).distinct
```
"""

import json
import logging
import math
import sys
from collections import Counter

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from kfree_points.arithmetic import integer_root, sieve_primes, zeta
from kfree_points.errors import BudgetExceededError, ParameterError
from kfree_points.kfree import (
    Configuration,
    KFreeParams,
    count_in_ball,
    is_kfree_point,
    window_mask,
)
from kfree_points.lattice import (
    DEFAULT_CHUNK_SIZE,
    Lattice,
    LatticePoint,
    ball_offsets,
    ball_volume,
    iter_ball_chunks,
    map_ball_chunks,
    points_in_ball,
    reduce_mod,
)

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_SUBSET_BITS = 22
MIN_PRIME_CUTOFF = 64


class Patch(Configuration):
    """A rho-patch: a configuration inside the open ball B_rho(0)."""

    @model_validator(mode="after")
    def _check_rho(self):
        if self.window_radius is None or self.window_radius <= 0:
            raise ValueError("a patch needs a positive radius rho")
        return self

    @property
    def rho(self) -> float:
        """Radius of the patch window."""
        return self.window_radius


class FrequencyResult(BaseModel):
    """An exact patch frequency with its certified truncation error."""

    model_config = ConfigDict(frozen=True)

    value: float
    truncation_error: float
    prime_cutoff: int
    term_count: int

    @property
    def lower_bound(self) -> float:
        """Certified lower bound of the frequency."""
        return self.value - self.truncation_error


class PatchCensus(BaseModel):
    """Occurrence counts of rho-patches over the translates t in the ball of `scan_radius`."""

    model_config = ConfigDict(frozen=True)

    n: int
    rho: float
    scan_radius: float
    translates: int
    patches: dict[tuple[LatticePoint, ...], int]

    @property
    def distinct(self) -> int:
        """N(rho) as seen by this census."""
        return len(self.patches)

    def sorted_patches(self) -> list[tuple[tuple[LatticePoint, ...], int]]:
        """Patches in canonical order: by size, then lexicographically."""
        return sorted(self.patches.items(), key=lambda item: (len(item[0]), item[0]))

    def patch(self, key: tuple[LatticePoint, ...]) -> Patch:
        """Rebuild the patch for a census key."""
        return Patch(points=key, window_radius=self.rho)

    def to_dict(self) -> dict:
        """Return the census with JSON-encoded patch keys."""
        return {
            "n": self.n,
            "rho": self.rho,
            "scan_radius": self.scan_radius,
            "translates": self.translates,
            "patches": {
                json.dumps([list(p) for p in key]): count for key, count in self.sorted_patches()
            },
        }


class EntropyEstimate(BaseModel):
    """Finite-radius views of the patch counting entropy."""

    model_config = ConfigDict(frozen=True)

    rho: float
    distinct_patches: int
    empirical: float
    interpolation_lower: float
    ceiling: float
    limit: float


class FrequencyRow(BaseModel):
    """One line of a frequency table."""

    model_config = ConfigDict(frozen=True)

    patch_id: int
    points: tuple[LatticePoint, ...]
    count: int
    empirical: float
    exact: float
    truncation_error: float


def _check_dimension(params: KFreeParams, lat: Lattice):
    if lat.n != params.n:
        raise ParameterError(f"lattice has rank {lat.n} but V(L, k) was set up for n={params.n}")


def _window(lat: Lattice, rho: float) -> np.ndarray:
    return np.asarray(ball_offsets(lat, rho), dtype=np.int64).reshape(-1, lat.n)


def patch_at(params: KFreeParams, lat: Lattice, t, rho: float) -> Patch:
    """Return the rho-patch (V - t) within B_rho(0)."""
    _check_dimension(params, lat)
    if rho <= 0:
        raise ParameterError(f"rho must be positive, got {rho}")
    t = tuple(int(c) for c in t)
    points = [
        u
        for u in ball_offsets(lat, rho)
        if is_kfree_point(tuple(a + b for a, b in zip(t, u)), params)
    ]
    return Patch(points=points, window_radius=rho)


def _pattern_counts(translates: np.ndarray, window: np.ndarray, k: int) -> Counter:
    """Count window occupation patterns (packed to bytes) over a slab of translates."""
    if len(window) == 0:
        return Counter({b"": len(translates)})
    packed = np.packbits(window_mask(translates, window, k), axis=1)
    rows, counts = np.unique(packed, axis=0, return_counts=True)
    return Counter({row.tobytes(): int(count) for row, count in zip(rows, counts)})


def _decode(pattern: bytes, window: np.ndarray) -> tuple[LatticePoint, ...]:
    bits = np.unpackbits(np.frombuffer(pattern, dtype=np.uint8))[: len(window)].astype(bool)
    return tuple(tuple(int(c) for c in row) for row in window[bits])


def _slab_size(chunk_size: int, window: np.ndarray) -> int:
    return max(1024, chunk_size // max(len(window), 1))


def census(
    params: KFreeParams,
    lat: Lattice,
    rho: float,
    scan_radius: float,
    *,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> PatchCensus:
    """Count the rho-patches of V at every translate t in the open ball of `scan_radius`.

    Translates near the boundary of the scan ball are included although their windows stick out.
    """
    _check_dimension(params, lat)
    if rho <= 0 or scan_radius < rho:
        raise ParameterError(f"need 0 < rho <= scan_radius, got rho={rho}, scan={scan_radius}")
    window = _window(lat, rho)
    partial = map_ball_chunks(
        lat,
        scan_radius,
        lambda chunk: _pattern_counts(chunk, window, params.k),
        workers=workers,
        chunk_size=_slab_size(chunk_size, window),
    )
    merged = Counter()
    for counts in partial:
        merged.update(counts)
    patches = {_decode(pattern, window): count for pattern, count in merged.items()}
    translates = sum(patches.values())
    logger.info(
        "census rho=%s scan=%s: %d distinct patches over %d translates",
        rho,
        scan_radius,
        len(patches),
        translates,
    )
    return PatchCensus(
        n=params.n, rho=rho, scan_radius=scan_radius, translates=translates, patches=patches
    )


def frequency_empirical(census: PatchCensus, patch: Patch) -> float:
    """Occurrence count of a patch divided by the volume of the scan ball (0 if absent)."""
    if not math.isclose(patch.rho, census.rho):
        raise ParameterError(f"patch radius {patch.rho} differs from census radius {census.rho}")
    return census.patches.get(patch.key, 0) / ball_volume(census.n, census.scan_radius)


def occurrences(
    patch: Patch,
    params: KFreeParams,
    lat: Lattice,
    radius: float,
    *,
    anchor=None,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> int:
    """Count t in the open ball of `radius` with (V - (t + anchor)) within B_rho(0) == patch."""
    _check_dimension(params, lat)
    window = _window(lat, patch.rho)
    target = _target_row(patch, lat, window)
    shift = np.zeros(params.n, dtype=np.int64) if anchor is None else np.asarray(anchor, np.int64)

    def _count(chunk):
        rows = window_mask(chunk + shift, window, params.k)
        return int(np.count_nonzero(np.all(rows == target, axis=1)))

    counts = map_ball_chunks(
        lat, radius, _count, workers=workers, chunk_size=_slab_size(chunk_size, window)
    )
    return sum(counts)


def _target_row(patch: Patch, lat: Lattice, window: np.ndarray) -> np.ndarray:
    if not patch.within_window(lat):
        raise ParameterError(f"patch has points outside the window of radius {patch.rho}")
    index = {tuple(int(c) for c in row): i for i, row in enumerate(window)}
    target = np.zeros(len(window), dtype=bool)
    target[[index[point] for point in patch.points]] = True
    return target


def locate_patch(
    patch: Patch, params: KFreeParams, lat: Lattice, search_radius: float
) -> LatticePoint | None:
    """Find a translate t of smallest norm with (V - t) within B_rho(0) equal to the patch.

    Returns None when the patch does not occur in the searched ball.
    """
    _check_dimension(params, lat)
    window = _window(lat, patch.rho)
    target = _target_row(patch, lat, window)
    best, best_norm = None, math.inf
    slab = _slab_size(DEFAULT_CHUNK_SIZE, window)
    for chunk in iter_ball_chunks(lat, search_radius, chunk_size=slab):
        hits = chunk[np.all(window_mask(chunk, window, params.k) == target, axis=1)]
        if not len(hits):
            continue
        norms = lat.norms_squared(hits)
        index = int(np.argmin(norms))
        if norms[index] < best_norm:
            best, best_norm = tuple(int(c) for c in hits[index]), float(norms[index])
    return best


def _class_bits(window: np.ndarray, modulus: int) -> np.ndarray:
    """One bit per residue class mod `modulus` L, for each window point.

    Rows are bitsets spread over as many uint64 words as the window needs.
    """
    _, classes = np.unique(reduce_mod(window, modulus), axis=0, return_inverse=True)
    classes = classes.reshape(-1).astype(np.uint64)
    bits = np.zeros((len(window), max(1, -(-len(window) // 64))), dtype=np.uint64)
    bits[np.arange(len(window)), (classes // np.uint64(64)).astype(np.intp)] = np.left_shift(
        np.uint64(1), classes % np.uint64(64)
    )
    return bits


def _subset_masks(base: np.ndarray, bits: np.ndarray) -> np.ndarray:
    """OR of `base` with every subset of the rows of `bits`, indexed by the subset bitmask."""
    masks = np.empty((1 << len(bits), len(base)), dtype=np.uint64)
    masks[0] = base
    for j, bit in enumerate(bits):
        half = 1 << j
        masks[half : 2 * half] = masks[:half] | bit
    return masks


def frequency_exact(
    patch: Patch,
    params: KFreeParams,
    lat: Lattice,
    tolerance: float = DEFAULT_TOLERANCE,
    *,
    max_subset_bits: int = DEFAULT_MAX_SUBSET_BITS,
    zeta_tolerance: float = 1e-12,
) -> FrequencyResult:
    """Evaluate the inclusion-exclusion frequency formula with a certified truncation error.

    Subsets that contain a full set of residues modulo p^k L for some small prime contribute 0
    and are dropped before the prime products are formed. Configurations that are not patches
    of V get a value that is 0 up to the truncation error.
    """
    _check_dimension(params, lat)
    if tolerance <= 0:
        raise ParameterError(f"tolerance must be positive, got {tolerance}")
    window = _window(lat, patch.rho)
    inside = _target_row(patch, lat, window)
    free = np.flatnonzero(~inside)
    if len(free) > max_subset_bits:
        raise BudgetExceededError(
            f"the frequency sum over {len(free)} free window points has 2^{len(free)} terms, "
            f"above the budget of 2^{max_subset_bits}; lower rho or raise --max-subset-bits",
            required=len(free),
        )
    s, k = params.exponent, params.k
    subsets = np.arange(1 << len(free), dtype=np.int64)
    sizes = np.bitwise_count(subsets).astype(np.int64)
    m = int(np.count_nonzero(inside)) + sizes
    signs = np.where(sizes % 2 == 1, -1.0, 1.0)

    # primes whose cosets can merge window points
    threshold = 2 * patch.rho / lat.min_norm
    root = integer_root(math.floor(threshold), k)
    exact_primes = sieve_primes(root).primes if root >= 2 else ()
    alive = np.ones(len(subsets), dtype=bool)
    exact_log = np.zeros(len(subsets))
    for p in exact_primes:
        bits = _class_bits(window, p**k)
        base = np.bitwise_or.reduce(bits[inside], axis=0, initial=np.uint64(0))
        masks = _subset_masks(base, bits[free])
        counts = np.bitwise_count(masks).sum(axis=1, dtype=np.int64)
        saturated = counts >= p**s
        alive &= ~saturated
        factor = 1.0 - np.where(saturated, 0, counts) / float(p**s)
        exact_log += np.log(np.where(saturated, 1.0, factor)) - m * math.log1p(-float(p) ** -s)

    m, signs, exact_log = m[alive], signs[alive], exact_log[alive]
    zeta_value = zeta(s, zeta_tolerance)
    log_zeta = math.log(zeta_value.value)
    m_values = np.unique(m)
    m_max = int(m_values.max()) if len(m_values) else 0
    cutoff = max(MIN_PRIME_CUTOFF, exact_primes[-1] if exact_primes else 0)
    cutoff = max(cutoff, math.ceil((2 * max(m_max, 1)) ** (1.0 / s)))
    exact_set = set(exact_primes)
    while True:
        primes = np.asarray(
            [p for p in sieve_primes(cutoff).primes if p not in exact_set], dtype=np.float64
        )
        x = primes**-s
        partial = {}
        for value in m_values:
            value = int(value)
            if np.any(value * x >= 1.0):
                partial[value] = -math.inf
            else:
                partial[value] = float(np.sum(np.log1p(-value * x)) - value * np.sum(np.log1p(-x)))
        lookup = np.asarray([partial[int(v)] for v in m], dtype=np.float64)
        magnitudes = np.exp(-m * log_zeta + exact_log + lookup)
        delta = m.astype(np.float64) ** 2 * float(cutoff) ** (1 - 2 * s) / (2 * s - 1)
        midpoint = (1.0 + np.exp(-delta)) / 2
        half_width = -np.expm1(-delta) / 2
        tail_error = math.fsum(magnitudes * half_width)
        if tail_error <= tolerance:
            break
        cutoff *= 2
        logger.debug("raising prime cut-off to %d (tail error %.3g)", cutoff, tail_error)

    terms = signs * magnitudes * midpoint
    value = math.fsum(terms)
    relative_zeta = (1 - zeta_value.truncation_error / zeta_value.value) ** (-m.astype(float)) - 1
    zeta_error = math.fsum(magnitudes * relative_zeta)
    rounding = 4 * sys.float_info.epsilon * (len(terms) + 16) * math.fsum(magnitudes)
    error = tail_error + zeta_error + rounding
    return FrequencyResult(
        value=max(value, 0.0),
        truncation_error=error,
        prime_cutoff=cutoff,
        term_count=int(len(terms)),
    )


def partition_total(
    params: KFreeParams,
    lat: Lattice,
    rho: float,
    tolerance: float = DEFAULT_TOLERANCE,
    *,
    max_subset_bits: int = DEFAULT_MAX_SUBSET_BITS,
) -> FrequencyResult:
    """Sum the exact frequencies of all subsets of the window; the result should be 1."""
    _check_dimension(params, lat)
    window = ball_offsets(lat, rho)
    if len(window) > max_subset_bits:
        raise BudgetExceededError(
            f"a window of {len(window)} points has 2^{len(window)} subsets, above the budget",
            required=len(window),
        )
    results = []
    for mask in range(1 << len(window)):
        points = [u for j, u in enumerate(window) if mask >> j & 1]
        patch = Patch(points=points, window_radius=rho)
        results.append(
            frequency_exact(patch, params, lat, tolerance, max_subset_bits=max_subset_bits)
        )
    return FrequencyResult(
        value=math.fsum(r.value for r in results),
        truncation_error=math.fsum(r.truncation_error for r in results),
        prime_cutoff=max(r.prime_cutoff for r in results),
        term_count=sum(r.term_count for r in results),
    )


def measure_consistency(
    params: KFreeParams,
    lat: Lattice,
    rho: float,
    tolerance: float = DEFAULT_TOLERANCE,
    *,
    scan_radius: float = 50.0,
    workers: int = 1,
) -> float:
    """Sum the exact frequencies of all patches found by a census; the result should be 1.

    Patches the census misses lower the sum by their total frequency.
    """
    found = census(params, lat, rho, scan_radius, workers=workers)
    results = [
        frequency_exact(found.patch(key), params, lat, tolerance)
        for key, _ in found.sorted_patches()
    ]
    total = math.fsum(r.value for r in results)
    logger.info(
        "frequencies of %d census patches sum to %.12f (truncation error %.3g)",
        len(results),
        total,
        math.fsum(r.truncation_error for r in results),
    )
    return total


def frequency_table(
    found: PatchCensus,
    params: KFreeParams,
    lat: Lattice,
    tolerance: float = DEFAULT_TOLERANCE,
    *,
    max_subset_bits: int = DEFAULT_MAX_SUBSET_BITS,
    zeta_tolerance: float = 1e-12,
) -> list[FrequencyRow]:
    """Empirical and exact frequency of every patch of a census."""
    rows = []
    for patch_id, (key, count) in enumerate(found.sorted_patches()):
        patch = found.patch(key)
        exact = frequency_exact(
            patch,
            params,
            lat,
            tolerance,
            max_subset_bits=max_subset_bits,
            zeta_tolerance=zeta_tolerance,
        )
        rows.append(
            FrequencyRow(
                patch_id=patch_id,
                points=key,
                count=count,
                empirical=frequency_empirical(found, patch),
                exact=exact.value,
                truncation_error=exact.truncation_error,
            )
        )
    return rows


def entropy_estimate(
    params: KFreeParams,
    lat: Lattice,
    rho: float,
    scan_radius: float,
    *,
    workers: int = 1,
) -> EntropyEstimate:
    """Finite-radius entropy figures next to the limit 1/zeta(nk).

    `interpolation_lower` is the density of V in B_rho(0): every subset of V within the ball is a
    rho-patch of some element of the hull, so log2 of the number of patches is at least the
    number of k-free points in the ball.
    """
    found = census(params, lat, rho, scan_radius, workers=workers)
    volume = ball_volume(params.n, rho)
    return EntropyEstimate(
        rho=rho,
        distinct_patches=found.distinct,
        empirical=math.log2(found.distinct) / volume,
        interpolation_lower=count_in_ball(params, lat, rho) / volume,
        ceiling=len(points_in_ball(lat, rho)) / volume,
        limit=1.0 / zeta(params.exponent).value,
    )
