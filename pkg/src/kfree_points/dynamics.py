# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

"""Finite-window views of the translation dynamics on the hull of V.

Hull elements are never materialised. They are described by finite windows (a `Configuration`
with a window radius) or generatively as translates V + s, which is enough for the metric,
proximality witnesses, cylinder-overlap evidence and orbit averages computed here.
"""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from kfree_points.errors import ParameterError
from kfree_points.kfree import (
    DEFAULT_MAX_PRIME_BITS,
    Configuration,
    HoleCertificate,
    KFreeParams,
    hole_from_offsets,
    is_kfree_point,
    verify_hole,
)
from kfree_points.lattice import Lattice, LatticePoint, ball_offsets, ball_volume
from kfree_points.patches import (
    DEFAULT_TOLERANCE,
    Patch,
    frequency_exact,
    locate_patch,
    occurrences,
)

logger = logging.getLogger(__name__)


class Distance(BaseModel):
    """A configuration distance, or an upper bound for it when the windows cannot decide."""

    model_config = ConfigDict(frozen=True)

    value: float
    decided: bool


class ProximalityWitness(BaseModel):
    """A translate t emptying the rho-balls of both V + t and V + shift + t."""

    model_config = ConfigDict(frozen=True)

    t: LatticePoint
    rho: float
    shift: LatticePoint
    certificate: HoleCertificate

    @property
    def distance_bound(self) -> float:
        """Upper bound for d(V + t, V + shift + t)."""
        return min(1.0, 1.0 / self.rho)


class ErgodicityEvidence(BaseModel):
    """Density of translates carrying a point of C_P into C_Q along the orbit of V."""

    model_config = ConfigDict(frozen=True)

    anchor: LatticePoint
    evidence: float
    frequency_q: float
    positive: bool


class GenericityCheck(BaseModel):
    """Orbit average of a cylinder indicator against its frequency."""

    model_config = ConfigDict(frozen=True)

    orbit_average: float
    nu_value: float
    gap: float


def _norms(points, lat: Lattice | None) -> np.ndarray:
    coords = np.asarray(points, dtype=np.float64)
    if lat is None:
        return np.sqrt(np.einsum("ij,ij->i", coords, coords))
    return np.sqrt(lat.norms_squared(coords))


def _window(radius: float | None) -> float:
    return math.inf if radius is None else radius


def config_distance(x: Configuration, y: Configuration, lat: Lattice | None = None) -> Distance:
    """Return min(1, 1/rho*) with rho* the radius up to which x and y agree.

    Only points inside both windows are compared. When x and y agree there, the result is the
    bound min(1, 1/window) and is flagged as undecided. Norms use the lattice Gram matrix, or
    the standard one when no lattice is given.
    """
    window = min(_window(x.window_radius), _window(y.window_radius))
    difference = sorted(set(x.points) ^ set(y.points))
    if difference:
        norms = _norms(difference, lat)
        norms = norms[norms < window]
        if len(norms):
            rho = float(norms.min())
            return Distance(value=1.0 if rho <= 1 else 1.0 / rho, decided=True)
    if math.isinf(window):
        return Distance(value=0.0, decided=True)
    return Distance(value=min(1.0, 1.0 / window), decided=False)


def proximality_witness(
    s,
    rho: float,
    params: KFreeParams,
    lat: Lattice,
    *,
    max_prime_bits: int = DEFAULT_MAX_PRIME_BITS,
) -> ProximalityWitness:
    """Find t with (V + t) and (V + s + t) both empty on the closed ball of radius rho.

    A hole over the joint offsets U = B u (B - s), B the closed ball, has a centre c with c + U
    free of k-free points; t = -c empties both translates.
    """
    if lat.n != params.n:
        raise ParameterError(f"lattice has rank {lat.n} but V(L, k) was set up for n={params.n}")
    if rho <= 0:
        raise ParameterError(f"rho must be positive, got {rho}")
    shift = tuple(int(c) for c in s)
    if len(shift) != params.n:
        raise ParameterError(f"shift {shift} does not have {params.n} coordinates")
    ball = ball_offsets(lat, rho, closed=True)
    offsets = set(ball) | {tuple(a - b for a, b in zip(u, shift)) for u in ball}
    certificate = hole_from_offsets(offsets, params, rho, max_prime_bits=max_prime_bits)
    logger.info(
        "proximality witness for shift %s at rho=%s uses %d offsets", shift, rho, len(offsets)
    )
    return ProximalityWitness(
        t=tuple(-c for c in certificate.center), rho=rho, shift=shift, certificate=certificate
    )


def verify_proximality(witness: ProximalityWitness, params: KFreeParams, lat: Lattice) -> bool:
    """Re-check a proximality witness by scanning both translated balls directly."""
    certificate = witness.certificate
    if tuple(-c for c in certificate.center) != witness.t:
        return False
    if not verify_hole(certificate, params, lat):
        return False
    for u in ball_offsets(lat, witness.rho, closed=True):
        # x in V + s + t within the ball means x - s - t is k-free
        point = tuple(a - b - c for a, b, c in zip(u, witness.shift, witness.t))
        if is_kfree_point(point, params):
            logger.debug("shifted translate has the point %s inside the ball", u)
            return False
    return True


def ergodicity_evidence(
    patch_p: Patch,
    patch_q: Patch,
    params: KFreeParams,
    lat: Lattice,
    scan: float,
    *,
    search_radius: float = 2000.0,
    tolerance: float = DEFAULT_TOLERANCE,
    workers: int = 1,
) -> ErgodicityEvidence:
    """Measure how often the orbit of a point of C_P passes through C_Q.

    The anchor s is a translate with V - s in C_P. The evidence is the density of t in the ball
    of radius `scan` with V - s - t in C_Q; it is bounded below by the frequency of Q up to
    finite-volume noise.
    """
    anchor = locate_patch(patch_p, params, lat, search_radius)
    if anchor is None:
        raise ParameterError(
            f"patch P was not found within radius {search_radius}; raise --search-radius"
        )
    count = occurrences(patch_q, params, lat, scan, anchor=anchor, workers=workers)
    evidence = count / ball_volume(params.n, scan)
    frequency = frequency_exact(patch_q, params, lat, tolerance)
    positive = evidence > 0
    if not positive:
        logger.warning("no translate within radius %s carries C_P into C_Q", scan)
    return ErgodicityEvidence(
        anchor=anchor, evidence=evidence, frequency_q=frequency.value, positive=positive
    )


def genericity_check(
    patch: Patch,
    params: KFreeParams,
    lat: Lattice,
    radius: float,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    workers: int = 1,
) -> GenericityCheck:
    """Compare the orbit average of the indicator of C_P over the ball of `radius` with nu(P)."""
    if radius <= 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    average = occurrences(patch, params, lat, radius, workers=workers) / ball_volume(
        params.n, radius
    )
    nu = frequency_exact(patch, params, lat, tolerance).value
    logger.debug("orbit average %.6f against frequency %.6f", average, nu)
    return GenericityCheck(orbit_average=average, nu_value=nu, gap=abs(average - nu))
