# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

"""Pure-point diffraction of V(L, k).

The diffraction of V is concentrated on the rational points y of the dual lattice span whose
denominator q = den(y) is (k+1)-free. The intensity at such a point only depends on q:

    I(y) = (1/zeta(nk) * prod over p | q of 1/(p^(nk) - 1))^2

so the spectrum is enumerated over denominators, never by scanning floats. The empirical
counterpart is the finite-volume Fourier-Bohr coefficient

    a_R(y) = 1/(v_n R^n) * sum over x in V within B_R(0) of exp(-2 pi i y.x)

whose squared modulus tends to I(y).
"""

import itertools
import logging
import math
from fractions import Fraction

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from kfree_points.arithmetic import integer_root, prime_factors, sieve_primes, zeta
from kfree_points.errors import NotInSpectrumError, ParameterError
from kfree_points.kfree import KFreeParams, kfree_mask
from kfree_points.lattice import DualPoint, Lattice, ball_volume, map_ball_chunks

logger = logging.getLogger(__name__)

MIN_AMPLITUDE_RADIUS = 50.0


class SpectrumPoint(BaseModel):
    """A Bragg peak: a dual point, its denominator and its intensity."""

    model_config = ConfigDict(frozen=True)

    y: DualPoint
    q: int
    intensity: float

    @model_validator(mode="after")
    def _check(self):
        if self.q != self.y.denominator:
            raise ValueError(f"q={self.q} differs from den(y)={self.y.denominator}")
        if self.intensity <= 0:
            raise ValueError("spectrum points carry a positive intensity")
        return self


class SpectrumWindow(BaseModel):
    """An axis-aligned box in dual coordinates with a relative intensity floor I(y)/I(0)."""

    model_config = ConfigDict(frozen=True)

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    threshold: float

    @model_validator(mode="after")
    def _check(self):
        if not 0 < self.threshold <= 1:
            raise ValueError(f"threshold must lie in (0, 1], got {self.threshold}")
        if len(self.lower) != len(self.upper):
            raise ValueError("box corners have different dimensions")
        if any(a > b for a, b in zip(self.lower, self.upper)):
            raise ValueError("lower box corner exceeds the upper corner")
        return self

    @classmethod
    def parse_box(cls, box: str, threshold: float) -> "SpectrumWindow":
        """Build a window from "lo_1,...,lo_n,hi_1,...,hi_n"."""
        values = [float(v) for v in box.split(",")]
        if len(values) % 2:
            raise ParameterError(f"box needs an even number of values, got {box!r}")
        half = len(values) // 2
        return cls(lower=values[:half], upper=values[half:], threshold=threshold)


class DiffractionRow(BaseModel):
    """One row of the plotting dataset."""

    model_config = ConfigDict(frozen=True)

    y: tuple[float, ...]
    q: int
    intensity: float
    ratio: float


def _check_dimension(params: KFreeParams, lat: Lattice):
    if lat.n != params.n:
        raise ParameterError(f"lattice has rank {lat.n} but V(L, k) was set up for n={params.n}")


def _inverse_factor(q: int, params: KFreeParams) -> Fraction:
    """prod over p | q of 1/(p^(nk) - 1), exactly."""
    factors = prime_factors(q)
    if any(exponent > params.k for exponent in factors.values()):
        raise NotInSpectrumError(
            f"denominator {q} is not {params.k + 1}-free, so y carries no intensity"
        )
    return Fraction(1, math.prod(p**params.exponent - 1 for p in factors))


def relative_intensity(q: int, params: KFreeParams) -> float:
    """I(y)/I(0) for a point with denominator q."""
    return float(_inverse_factor(q, params) ** 2)


def intensity(q: int, params: KFreeParams) -> float:
    """Intensity of the diffraction at any point whose denominator is q."""
    if q < 1:
        raise ParameterError(f"denominators are positive integers, got {q}")
    factor = _inverse_factor(q, params)
    return (float(factor) / zeta(params.exponent).value) ** 2


def spectrum_denominators(params: KFreeParams, threshold: float) -> list[int]:
    """All (k+1)-free q with I(q)/I(0) >= threshold, i.e. prod (p^(nk) - 1) <= threshold^(-1/2)."""
    floor = Fraction(repr(threshold))
    s = params.exponent

    def admissible(product: int) -> bool:
        return product * product * floor <= 1

    bound = integer_root(math.isqrt(int(1 / floor)) + 1, s) + 1
    primes = [p for p in sieve_primes(max(bound, 2)).primes if admissible(p**s - 1)]
    found = []

    def extend(start: int, q: int, product: int):
        found.append(q)
        for index in range(start, len(primes)):
            p = primes[index]
            weight = product * (p**s - 1)
            if not admissible(weight):
                break
            for exponent in range(1, params.k + 1):
                extend(index + 1, q * p**exponent, weight)

    extend(0, 1, 1)
    return sorted(found)


def _numerator_range(lo: float, hi: float, q: int) -> range:
    lo, hi = Fraction(repr(lo)), Fraction(repr(hi))
    return range(math.ceil(lo * q), math.floor(hi * q) + 1)


def enumerate_spectrum(
    window: SpectrumWindow, params: KFreeParams, lat: Lattice
) -> list[SpectrumPoint]:
    """All spectrum points in the window's box above its relative intensity floor.

    Points are sorted by decreasing intensity, then lexicographically.
    """
    _check_dimension(params, lat)
    if len(window.lower) != params.n:
        raise ParameterError(f"box has dimension {len(window.lower)}, lattice rank {params.n}")
    points = []
    for q in spectrum_denominators(params, window.threshold):
        value = intensity(q, params)
        ranges = [_numerator_range(a, b, q) for a, b in zip(window.lower, window.upper)]
        for numerators in itertools.product(*ranges):
            if math.gcd(q, *numerators) != 1:
                continue
            y = DualPoint(numerators=numerators, denominator=q)
            points.append(SpectrumPoint(y=y, q=q, intensity=value))
    points.sort(key=lambda point: (-point.intensity, point.y.coords))
    logger.debug("enumerated %d spectrum points", len(points))
    return points


def empirical_amplitude(
    y: DualPoint, params: KFreeParams, lat: Lattice, radius: float, *, workers: int = 1
) -> complex:
    """Finite-volume Fourier-Bohr coefficient of V at a rational dual point.

    The phase y.x = (a.c)/q is reduced exactly modulo q, so the sum is a residue histogram
    weighted by q-th roots of unity.
    """
    _check_dimension(params, lat)
    if radius < MIN_AMPLITUDE_RADIUS:
        raise ParameterError(f"amplitudes need radius >= {MIN_AMPLITUDE_RADIUS}, got {radius}")
    if len(y.numerators) != params.n:
        raise ParameterError(f"dual point {y} does not have {params.n} coordinates")
    q = y.denominator
    numerators = np.asarray(y.numerators, dtype=np.int64) % q

    def _histogram(chunk):
        points = chunk[kfree_mask(chunk, params.k)]
        return np.bincount((points @ numerators) % q, minlength=q)

    histogram = sum(map_ball_chunks(lat, radius, _histogram, workers=workers))
    roots = np.exp(-2j * np.pi * np.arange(q) / q)
    return complex(roots @ histogram) / ball_volume(params.n, radius)


def bragg_dataset(
    params: KFreeParams, lat: Lattice, window: SpectrumWindow | None = None
) -> list[DiffractionRow]:
    """Plot-ready rows (y, q, intensity, I(y)/I(0)) for the spectrum in a window."""
    window = window or SpectrumWindow(lower=(0.0, 0.0), upper=(2.0, 2.0), threshold=1e-6)
    peak = intensity(1, params)
    return [
        DiffractionRow(
            y=tuple(float(c) for c in point.y.coords),
            q=point.q,
            intensity=point.intensity,
            ratio=point.intensity / peak,
        )
        for point in enumerate_spectrum(window, params, lat)
    ]
