# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

"""Unimodular lattices, ball enumeration, cosets and dual lattices.

Points are integer coordinate vectors in the lattice basis; the basis matrix (columns are the
basis vectors) and its Gram matrix only enter when distances are needed. Enumeration is
lexicographic in the coordinates, so every dump built on top of it is reproducible.

A lattice is described in JSON as `{"n": 2, "basis": [[1, 1], [0, 1]]}`; the identity basis is
used when `basis` is omitted, and the shorthand `"Z3"` names the standard lattice of rank 3.
"""

import json
import logging
import math
import re
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from kfree_points.errors import LatticeError, ParameterError

logger = logging.getLogger(__name__)

LatticePoint = tuple[int, ...]

DEFAULT_CHUNK_SIZE = 262144
# Relative slack used when deciding whether a point sits on a ball boundary.
BOUNDARY_SLACK = 1e-9
UNIMODULAR_TOLERANCE = 1e-9
# Above this rank the shortest vector is not searched for, the smallest singular value of the
# basis is used as a certified lower bound instead.
MAX_EXACT_MIN_NORM_RANK = 4

LATTICE_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "basis": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}},
        },
        "min_norm": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["n"],
    "additionalProperties": False,
}

_STANDARD_NAME = re.compile(r"^Z(\d+)$")


def _shortest_vector_length(matrix: np.ndarray) -> float:
    """Search a coordinate box for the shortest non-zero lattice vector."""
    gram = matrix.T @ matrix
    bound = float(np.min(np.linalg.norm(matrix, axis=0)))
    coords = _box_points(_coordinate_bounds(gram, bound, np.zeros(len(gram))))
    norms = np.einsum("ij,jk,ik->i", coords, gram, coords)
    return float(math.sqrt(np.min(norms[np.any(coords != 0, axis=1)])))


class Lattice(BaseModel):
    """A unimodular lattice given by a basis matrix whose columns are the basis vectors."""

    model_config = ConfigDict(frozen=True)

    n: int
    basis: tuple[tuple[float, ...], ...]
    min_norm: float

    @model_validator(mode="before")
    @classmethod
    def _complete(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        n = data.get("n")
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"lattice rank must be a positive integer, got {n!r}")
        if data.get("basis") is None:
            data["basis"] = np.eye(n).tolist()
        matrix = np.asarray(data["basis"], dtype=np.float64)
        if matrix.shape != (n, n):
            raise ValueError(f"basis must be a {n}x{n} matrix, got shape {matrix.shape}")
        det = float(np.linalg.det(matrix))
        if abs(abs(det) - 1.0) > UNIMODULAR_TOLERANCE:
            raise ValueError(f"lattice must be unimodular, |det| = {abs(det)}")
        data["basis"] = tuple(tuple(float(x) for x in row) for row in matrix)
        if data.get("min_norm") is None:
            if n <= MAX_EXACT_MIN_NORM_RANK:
                data["min_norm"] = _shortest_vector_length(matrix)
            else:
                data["min_norm"] = float(np.linalg.svd(matrix, compute_uv=False).min())
        return data

    @model_validator(mode="after")
    def _check_min_norm(self):
        lengths = np.linalg.norm(self.matrix, axis=0)
        if not 0 < self.min_norm <= float(lengths.min()) * (1 + BOUNDARY_SLACK):
            raise ValueError(
                f"min_norm {self.min_norm} must be positive and at most the shortest basis "
                f"vector length {float(lengths.min())}"
            )
        return self

    @property
    def matrix(self) -> np.ndarray:
        """The basis matrix; column j is the j-th basis vector."""
        return np.asarray(self.basis, dtype=np.float64)

    @property
    def gram(self) -> np.ndarray:
        """The Gram matrix `basis.T @ basis`."""
        matrix = self.matrix
        return matrix.T @ matrix

    @property
    def is_standard(self) -> bool:
        """Whether this is Z^n with the identity basis."""
        return bool(np.array_equal(self.matrix, np.eye(self.n)))

    def to_dict(self) -> dict:
        """Return the JSON description of the lattice."""
        return {"n": self.n, "basis": [list(row) for row in self.basis], "min_norm": self.min_norm}

    def to_ambient(self, coords) -> np.ndarray:
        """Map coordinate rows to points of R^n."""
        return np.asarray(coords, dtype=np.float64) @ self.matrix.T

    def norms_squared(self, coords) -> np.ndarray:
        """Squared Euclidean lengths of coordinate rows."""
        coords = np.atleast_2d(np.asarray(coords, dtype=np.float64))
        return np.einsum("ij,jk,ik->i", coords, self.gram, coords)


def standard_lattice(n: int) -> Lattice:
    """Return Z^n."""
    return Lattice(n=n)


def load_lattice(spec) -> Lattice:
    """Build a lattice from `"Zn"`, a JSON file path or an already parsed description."""
    if isinstance(spec, Lattice):
        return spec
    if isinstance(spec, str) and (match := _STANDARD_NAME.match(spec)):
        return standard_lattice(int(match.group(1)))
    if isinstance(spec, (str, Path)):
        path = Path(spec)
        try:
            spec = json.loads(path.read_text())
        except FileNotFoundError:
            raise LatticeError(f"lattice file {path} does not exist; pass a path or Zn")
        except json.JSONDecodeError as e:
            raise LatticeError(f"lattice file {path} is not valid JSON: {e}")
    try:
        jsonschema.validate(spec, LATTICE_SCHEMA)
        return Lattice(**spec)
    except jsonschema.ValidationError as e:
        raise LatticeError(f"malformed lattice description: {e.message}")
    except ValueError as e:
        raise LatticeError(f"invalid lattice: {e}")


def ball_volume(n: int, radius: float) -> float:
    """Volume v_n R^n of the n-dimensional ball of radius R."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * radius**n


def _coordinate_bounds(gram: np.ndarray, radius: float, center: np.ndarray):
    """Integer box containing every lattice point within `radius` of `center`."""
    reach = radius * np.sqrt(np.diag(np.linalg.inv(gram))) * (1 + BOUNDARY_SLACK)
    lo = np.floor(center - reach).astype(np.int64)
    hi = np.ceil(center + reach).astype(np.int64)
    return lo, hi


def _box_points(bounds) -> np.ndarray:
    """All integer points of a box, lexicographically ordered."""
    lo, hi = bounds
    axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


def in_ball(norms: np.ndarray, radius: float, *, closed: bool = False) -> np.ndarray:
    """Which squared norms fall in the ball of `radius`, with the slack used for enumeration."""
    slack = BOUNDARY_SLACK * max(radius * radius, 1.0)
    if closed:
        return norms <= radius * radius + slack
    return norms < radius * radius - slack


def iter_ball_chunks(
    lat: Lattice,
    radius: float,
    center=None,
    *,
    closed: bool = False,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> Iterator[np.ndarray]:
    """Yield the lattice points of a ball in slabs along the first coordinate.

    Concatenating the slabs gives the points in lexicographic order. `center` is given in
    lattice coordinates and may be fractional.
    """
    if radius < 0:
        raise ParameterError(f"radius must be non-negative, got {radius}")
    center = np.zeros(lat.n) if center is None else np.asarray(center, dtype=np.float64)
    if center.shape != (lat.n,):
        raise ParameterError(f"center must have {lat.n} coordinates, got {center.shape}")
    lo, hi = _coordinate_bounds(lat.gram, radius, center)
    per_row = int(np.prod(hi[1:] - lo[1:] + 1)) if lat.n > 1 else 1
    thickness = max(1, chunk_size // max(per_row, 1))
    for start in range(int(lo[0]), int(hi[0]) + 1, thickness):
        stop = min(start + thickness - 1, int(hi[0]))
        slab_lo = np.concatenate([[start], lo[1:]])
        slab_hi = np.concatenate([[stop], hi[1:]])
        coords = _box_points((slab_lo, slab_hi))
        norms = lat.norms_squared(coords - center)
        inside = coords[in_ball(norms, radius, closed=closed)]
        if len(inside):
            yield inside


def points_in_ball(
    lat: Lattice, radius: float, center=None, *, closed: bool = False
) -> np.ndarray:
    """Return the lattice points within `radius` of `center` as lexicographic coordinate rows.

    The ball is open by default (distance < radius); `closed=True` admits distance = radius.
    """
    chunks = list(iter_ball_chunks(lat, radius, center, closed=closed))
    if not chunks:
        return np.zeros((0, lat.n), dtype=np.int64)
    return np.concatenate(chunks)


def ball_offsets(lat: Lattice, radius: float, *, closed: bool = False) -> list[LatticePoint]:
    """Lattice points of the ball about the origin as sorted Python integer tuples."""
    return [tuple(int(c) for c in row) for row in points_in_ball(lat, radius, closed=closed)]


def reduce_mod(point, m: int):
    """Reduce a point (or coordinate rows) componentwise into [0, m)."""
    if m < 1:
        raise ParameterError(f"modulus must be a positive integer, got {m}")
    if isinstance(point, np.ndarray):
        return np.mod(point, m)
    return tuple(int(c) % m for c in point)


def dual_lattice(lat: Lattice) -> Lattice:
    """Return the dual lattice, whose basis is the inverse transpose of the input basis."""
    try:
        dual = np.linalg.inv(lat.matrix).T
    except np.linalg.LinAlgError:
        raise LatticeError("basis is singular; no dual lattice")
    return Lattice(n=lat.n, basis=dual.tolist())


def denominator(y: Sequence) -> int:
    """Least m >= 1 such that m*y has integral dual coordinates."""
    return math.lcm(1, *(Fraction(c).denominator for c in y))


def apply_matrix(coords, matrix) -> np.ndarray:
    """Apply an integer matrix to coordinate rows."""
    return np.asarray(coords, dtype=np.int64) @ np.asarray(matrix, dtype=np.int64).T


class DualPoint(BaseModel):
    """A rational point y = numerators / denominator in dual-basis coordinates."""

    model_config = ConfigDict(frozen=True)

    numerators: tuple[int, ...]
    denominator: int

    @model_validator(mode="after")
    def _check_reduced(self):
        if self.denominator < 1:
            raise ValueError(f"denominator must be positive, got {self.denominator}")
        if math.gcd(self.denominator, *self.numerators) != 1:
            raise ValueError("denominator is not the least common denominator")
        return self

    @classmethod
    def from_coords(cls, coords: Sequence) -> "DualPoint":
        """Build a dual point from rationals (`Fraction`, int or strings such as "1/2")."""
        fractions = [Fraction(c) for c in coords]
        q = denominator(fractions)
        return cls(numerators=tuple(int(f * q) for f in fractions), denominator=q)

    @property
    def coords(self) -> tuple[Fraction, ...]:
        """Coordinates as exact fractions."""
        return tuple(Fraction(a, self.denominator) for a in self.numerators)

    def __str__(self) -> str:
        """Return the point as comma-separated fractions."""
        return ",".join(str(c) for c in self.coords)


def map_ball_chunks(
    lat: Lattice,
    radius: float,
    fn: Callable[[np.ndarray], Any],
    *,
    center=None,
    closed: bool = False,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> list:
    """Apply `fn` to every enumeration slab of a ball, returning results in slab order."""
    chunks = iter_ball_chunks(lat, radius, center, closed=closed, chunk_size=chunk_size)
    if workers <= 1:
        return [fn(chunk) for chunk in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))
