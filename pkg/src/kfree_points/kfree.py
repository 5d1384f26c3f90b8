# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

"""The k-free points V(L, k) of a lattice.

A lattice point is k-free when the gcd of its coordinates is divisible by no non-trivial k-th
power; for k = 1 these are the points visible from the origin. The origin itself never belongs to
V. This module generates V in balls, estimates its density, builds and checks hole certificates
and decides admissibility of finite configurations:

```python
from kfree_points.kfree import KFreeParams, density_estimate, find_hole, verify_hole
from kfree_points.lattice import standard_lattice

params = KFreeParams(n=2, k=1)
lat = standard_lattice(2)
density_estimate(params, lat, 500.0)        # close to 6 / pi^2
cert = find_hole(params, lat, 1.0)
verify_hole(cert, params, lat)              # True
```

Hole certificates come from the Chinese Remainder Theorem: every offset u of the closed ball of
radius r receives its own prime p_u, and the centre c solves c = -u (mod p_u^k) in every
coordinate, so each point c + u has a coordinate gcd divisible by p_u^k. Every point of the coset
c + m^k L (m the product of the primes) is the centre of such a hole.
"""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from kfree_points.arithmetic import (
    CrtSystem,
    crt_solve,
    first_primes,
    integer_root,
    is_kfree_integer,
    kfree_table,
    prime_factors,
    sieve_primes,
)
from kfree_points.errors import BudgetExceededError, ParameterError
from kfree_points.lattice import (
    DEFAULT_CHUNK_SIZE,
    Lattice,
    LatticePoint,
    apply_matrix,
    ball_offsets,
    ball_volume,
    in_ball,
    iter_ball_chunks,
    map_ball_chunks,
    points_in_ball,
    reduce_mod,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_PRIME_BITS = 4096
MIN_DENSITY_RADIUS = 10.0


class KFreeParams(BaseModel):
    """Rank n and power k of V(L, k)."""

    model_config = ConfigDict(frozen=True)

    n: int
    k: int

    @model_validator(mode="after")
    def _check(self):
        if self.n < 1 or self.k < 1:
            raise ValueError(f"n and k must be at least 1, got n={self.n}, k={self.k}")
        if self.n == 1 and self.k == 1:
            raise ValueError(
                "the trivial case n = k = 1 is excluded: V would consist of the two lattice "
                "points closest to 0"
            )
        return self

    @property
    def exponent(self) -> int:
        """The exponent s = nk at which zeta is evaluated."""
        return self.n * self.k


class Configuration(BaseModel):
    """A finite set of lattice points, optionally known only within a window radius."""

    model_config = ConfigDict(frozen=True)

    points: tuple[LatticePoint, ...] = ()
    window_radius: float | None = None

    @field_validator("points", mode="before")
    @classmethod
    def _canonical(cls, points):
        if isinstance(points, np.ndarray):
            points = points.tolist()
        return tuple(sorted({tuple(int(c) for c in point) for point in points}))

    @model_validator(mode="after")
    def _check_dimension(self):
        dims = {len(point) for point in self.points}
        if len(dims) > 1:
            raise ValueError(f"points have mixed dimensions {sorted(dims)}")
        return self

    def __len__(self) -> int:
        """Number of points."""
        return len(self.points)

    def __contains__(self, point) -> bool:
        """Whether a lattice point belongs to the configuration."""
        return tuple(int(c) for c in point) in set(self.points)

    @property
    def key(self) -> tuple[LatticePoint, ...]:
        """Canonical encoding: the sorted tuple of coordinate tuples."""
        return self.points

    def as_array(self, n: int) -> np.ndarray:
        """Points as an integer array of shape (len, n)."""
        if not self.points:
            return np.zeros((0, n), dtype=np.int64)
        return np.asarray(self.points, dtype=np.int64)

    def within_window(self, lat: Lattice) -> bool:
        """Whether every point lies in the open ball of the window radius."""
        if self.points and len(self.points[0]) != lat.n:
            raise ParameterError(
                f"points of dimension {len(self.points[0])} on a rank {lat.n} lattice"
            )
        if self.window_radius is None or not self.points:
            return True
        return bool(np.all(in_ball(lat.norms_squared(self.as_array(lat.n)), self.window_radius)))


class HoleAssignment(BaseModel):
    """An offset u of a hole together with the prime p with center + u in p^k L."""

    model_config = ConfigDict(frozen=True)

    offset: LatticePoint
    prime: int


class HoleCertificate(BaseModel):
    """A constructive witness that no k-free point lies within `radius` of `center`."""

    model_config = ConfigDict(frozen=True)

    center: LatticePoint
    modulus: int
    radius: float
    assignment: tuple[HoleAssignment, ...]

    @model_validator(mode="after")
    def _check_primes(self):
        primes = [a.prime for a in self.assignment]
        if len(set(primes)) != len(primes):
            raise ValueError("hole primes must be pairwise distinct")
        if self.modulus < 1:
            raise ValueError(f"modulus must be positive, got {self.modulus}")
        return self

    def coset_modulus(self, k: int) -> int:
        """The modulus m^k of the coset of hole centres."""
        return self.modulus**k


def _check_dimension(params: KFreeParams, lat: Lattice):
    if lat.n != params.n:
        raise ParameterError(f"lattice has rank {lat.n} but V(L, k) was set up for n={params.n}")


def is_kfree_point(t, params: KFreeParams) -> bool:
    """Report whether a lattice point, given by its coordinates, belongs to V(L, k)."""
    if len(t) != params.n:
        raise ParameterError(f"point {tuple(t)} does not have {params.n} coordinates")
    g = math.gcd(*(int(c) for c in t))
    if g == 0:
        return False
    return is_kfree_integer(g, params.k)


def kfree_mask(coords: np.ndarray, k: int) -> np.ndarray:
    """Vectorised membership test for coordinate rows."""
    coords = np.asarray(coords, dtype=np.int64)
    if len(coords) == 0:
        return np.zeros(0, dtype=bool)
    g = np.gcd.reduce(np.abs(coords), axis=1)
    return kfree_table(int(g.max()), k)[g]


def window_mask(translates: np.ndarray, offsets: np.ndarray, k: int) -> np.ndarray:
    """Membership of `translate + offset` for every translate (rows) and offset (columns)."""
    translates = np.asarray(translates, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.int64).reshape(-1, translates.shape[1])
    points = translates[:, None, :] + offsets[None, :, :]
    mask = kfree_mask(points.reshape(-1, translates.shape[1]), k)
    return mask.reshape(len(translates), len(offsets))


def generate_array(
    params: KFreeParams,
    lat: Lattice,
    radius: float,
    *,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> np.ndarray:
    """V in the open ball of `radius` as lexicographic coordinate rows."""
    _check_dimension(params, lat)
    if radius <= 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    chunks = map_ball_chunks(
        lat,
        radius,
        lambda chunk: chunk[kfree_mask(chunk, params.k)],
        workers=workers,
        chunk_size=chunk_size,
    )
    chunks = [chunk for chunk in chunks if len(chunk)]
    if not chunks:
        return np.zeros((0, params.n), dtype=np.int64)
    return np.concatenate(chunks)


def generate(
    params: KFreeParams, lat: Lattice, radius: float, *, workers: int = 1
) -> Configuration:
    """All k-free points in the open ball of `radius` about the origin."""
    points = generate_array(params, lat, radius, workers=workers)
    logger.debug("generated %d k-free points within radius %s", len(points), radius)
    return Configuration(points=points, window_radius=radius)


def count_in_ball(
    params: KFreeParams,
    lat: Lattice,
    radius: float,
    *,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> int:
    """Number of k-free points in the open ball of `radius`."""
    _check_dimension(params, lat)
    counts = map_ball_chunks(
        lat,
        radius,
        lambda chunk: int(np.count_nonzero(kfree_mask(chunk, params.k))),
        workers=workers,
        chunk_size=chunk_size,
    )
    return sum(counts)


def density_estimate(
    params: KFreeParams, lat: Lattice, radius: float, *, workers: int = 1
) -> float:
    """Return |V within B_R(0)| / (v_n R^n)."""
    if radius < MIN_DENSITY_RADIUS:
        raise ParameterError(f"density needs radius >= {MIN_DENSITY_RADIUS}, got {radius}")
    count = count_in_ball(params, lat, radius, workers=workers)
    estimate = count / ball_volume(params.n, radius)
    logger.info("counted %d k-free points within radius %s, density %.6f", count, radius, estimate)
    return estimate


def hole_from_offsets(
    offsets,
    params: KFreeParams,
    radius: float,
    *,
    max_prime_bits: int = DEFAULT_MAX_PRIME_BITS,
) -> HoleCertificate:
    """Build a CRT hole certificate whose centre c makes every c + u (u in offsets) non-k-free.

    Offsets are sorted lexicographically and receive the primes in increasing order. The centre
    is reduced into [0, m^k) in every coordinate.
    """
    offsets = sorted({tuple(int(c) for c in u) for u in offsets})
    primes = first_primes(len(offsets))
    required = math.ceil(params.k * sum(math.log2(p) for p in primes))
    if required > max_prime_bits:
        raise BudgetExceededError(
            f"a hole over {len(offsets)} offsets needs a {required}-bit modulus m^k, above "
            f"the budget of {max_prime_bits} bits; raise --max-prime-bits or lower the radius",
            required=required,
        )
    system = CrtSystem(
        residues=[(p**params.k, tuple(-c for c in u)) for u, p in zip(offsets, primes)]
    )
    center = crt_solve(system)
    logger.debug("hole over %d offsets uses primes up to %d", len(offsets), primes[-1])
    return HoleCertificate(
        center=center,
        modulus=math.prod(primes),
        radius=radius,
        assignment=[HoleAssignment(offset=u, prime=p) for u, p in zip(offsets, primes)],
    )


def find_hole(
    params: KFreeParams,
    lat: Lattice,
    r: float,
    *,
    max_prime_bits: int = DEFAULT_MAX_PRIME_BITS,
) -> HoleCertificate:
    """Construct a hole of inradius at least `r`, i.e. no k-free point within distance r."""
    _check_dimension(params, lat)
    if r <= 0:
        raise ParameterError(f"hole radius must be positive, got {r}")
    offsets = ball_offsets(lat, r, closed=True)
    return hole_from_offsets(offsets, params, r, max_prime_bits=max_prime_bits)


def verify_hole(cert: HoleCertificate, params: KFreeParams, lat: Lattice) -> bool:
    """Check a hole certificate: every divisibility claim holds and a direct scan is empty."""
    _check_dimension(params, lat)
    if len(cert.center) != params.n:
        return False
    for entry in cert.assignment:
        if len(entry.offset) != params.n:
            return False
        point = [c + u for c, u in zip(cert.center, entry.offset)]
        if any(reduce_mod(point, entry.prime**params.k)):
            logger.debug("assignment %s fails divisibility", entry)
            return False
    for u in ball_offsets(lat, cert.radius, closed=True):
        point = tuple(c + d for c, d in zip(cert.center, u))
        if is_kfree_point(point, params):
            logger.debug("k-free point %s lies inside the claimed hole", point)
            return False
    return True


def nearest_hole(
    params: KFreeParams,
    lat: Lattice,
    r: float,
    search_radius: float,
) -> LatticePoint | None:
    """Brute-force the hole centre of smallest norm within `search_radius` (ranks 1 and 2 only).

    Returns None when no centre of a hole of inradius r exists in the searched ball.
    """
    _check_dimension(params, lat)
    if params.n > 2:
        raise ParameterError("the brute-force hole search is limited to ranks 1 and 2")
    offsets = np.asarray(ball_offsets(lat, r, closed=True), dtype=np.int64)
    best, best_norm = None, math.inf
    for chunk in iter_ball_chunks(lat, search_radius):
        holes = chunk[~window_mask(chunk, offsets, params.k).any(axis=1)]
        if not len(holes):
            continue
        norms = lat.norms_squared(holes)
        index = int(np.argmin(norms))
        # slabs are lexicographic, so the first minimum wins ties
        if norms[index] < best_norm:
            best, best_norm = tuple(int(c) for c in holes[index]), float(norms[index])
    return best


def is_admissible(cfg: Configuration, params: KFreeParams) -> bool:
    """Decide whether a finite configuration misses a residue class mod p^k L for every p.

    Only primes with p^(nk) <= |cfg| can be violated, so the test is a finite decision.
    """
    size = len(cfg)
    root = integer_root(size, params.exponent)
    if root < 2:
        return True
    for p in sieve_primes(root).primes:
        cosets = {reduce_mod(point, p**params.k) for point in cfg.points}
        if len(cosets) >= p**params.exponent:
            logger.debug("configuration contains every class mod %d^%d", p, params.k)
            return False
    return True


def nonperiodicity_witness(s, params: KFreeParams, lat: Lattice) -> LatticePoint:
    """Construct t in V with t + s outside V, showing that s is not a period of V.

    With p the smallest prime not dividing gcd(s), every t = -s + p^k a has t + s outside V.
    In rank n >= 2 the vector a is fixed by the CRT so that two coordinates of t are coprime,
    making t visible. In rank 1 the progression -s + p^k Z is walked outwards from -s; it is
    coprime to p and holds k-free integers.
    """
    _check_dimension(params, lat)
    shift = [int(c) for c in s]
    if len(shift) != params.n:
        raise ParameterError(f"shift {tuple(shift)} does not have {params.n} coordinates")
    if not any(shift):
        raise ParameterError("the zero translation is a period of every set")
    d = math.gcd(*shift)
    p = next(q for q in first_primes(d.bit_length() + 1) if d % q)
    step = p**params.k
    t = [-c for c in shift]
    if params.n == 1:
        a = 0
        while not is_kfree_integer(abs(t[0] + step * a), params.k):
            a = -a if a > 0 else 1 - a
        t[0] += step * a
    else:
        i = next(index for index, c in enumerate(shift) if c % p)
        j = 1 if i == 0 else 0
        # t_j = 1 mod every prime factor q of s_i
        residues = [
            (q, ((shift[j] + 1) * pow(step, -1, q) % q,)) for q in prime_factors(abs(shift[i]))
        ]
        if residues:
            (a,) = crt_solve(CrtSystem(residues=residues))
            t[j] += step * a
    logger.debug("shift %s is not a period: witness %s uses p=%d", tuple(shift), tuple(t), p)
    return tuple(t)


def is_gl_invariant(params: KFreeParams, lat: Lattice, matrix, radius: float) -> bool:
    """Check that an integer matrix of determinant +-1 maps V onto V on the ball of `radius`.

    The image of V within the ball must be exactly the set of k-free points among the images of
    all lattice points of the ball, and no two points may share an image.
    """
    _check_dimension(params, lat)
    matrix = np.asarray(matrix, dtype=np.int64)
    if round(abs(np.linalg.det(matrix))) != 1:
        raise ParameterError("matrix must be an integer matrix of determinant +-1")
    points = points_in_ball(lat, radius)
    images = apply_matrix(points, matrix)
    if len(np.unique(images, axis=0)) != len(points):
        return False
    return bool(np.array_equal(kfree_mask(points, params.k), kfree_mask(images, params.k)))
