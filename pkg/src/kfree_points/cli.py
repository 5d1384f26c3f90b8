# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

"""Command line of kfree-points.

Every subcommand writes a machine-readable artifact (CSV or JSON) plus `run.yaml`, the resolved
configuration, into the output directory and prints a short human summary. Flag defaults and
their help texts come from the shipped option table; `--config` points at a YAML file of
overrides and explicit flags win over both.

Exit codes: 0 on success, 2 on invalid input (including a certificate that fails `verify` and a
configuration that fails `check-admissible`) and 3 when a resource budget is exceeded.
"""

import argparse
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema
import pydantic

from kfree_points import artifacts
from kfree_points.arithmetic import zeta
from kfree_points.config import (
    RunConfig,
    load_overrides,
    option_defaults,
    option_help,
    output_dir,
    resolve_workers,
)
from kfree_points.diffraction import (
    SpectrumWindow,
    bragg_dataset,
    empirical_amplitude,
    intensity,
)
from kfree_points.dynamics import proximality_witness
from kfree_points.errors import BudgetExceededError, NotInSpectrumError, ParameterError
from kfree_points.kfree import (
    KFreeParams,
    density_estimate,
    find_hole,
    generate_array,
    is_admissible,
    nearest_hole,
    verify_hole,
)
from kfree_points.lattice import DualPoint, load_lattice
from kfree_points.patches import (
    Patch,
    census,
    entropy_estimate,
    frequency_table,
    locate_patch,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3

_OPTION_TYPES = {
    "lattice": str,
    "k": int,
    "tolerance": float,
    "zeta-tolerance": float,
    "max-subset-bits": int,
    "max-prime-bits": int,
    "threshold": float,
    "box": str,
    "scan-radius": float,
    "search-radius": float,
    "workers": int,
    "chunk-size": int,
    "log-level": str,
}

_COMMON = ("lattice", "k", "workers", "chunk-size", "log-level")


def _option(parser: argparse.ArgumentParser, name: str):
    """Add a flag backed by the option table; None marks "not given on the command line"."""
    parser.add_argument(
        f"--{name}", type=_OPTION_TYPES[name], default=None, help=option_help(name)
    )


def _point(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(c) for c in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _dual_point(text: str) -> DualPoint:
    try:
        return DualPoint.from_coords([Fraction(c) for c in text.split(",")])
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected comma-separated fractions, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser with all subcommands."""
    common = argparse.ArgumentParser(add_help=False)
    for name in _COMMON:
        _option(common, name)
    common.add_argument("--config", type=Path, help="YAML file of option overrides")
    common.add_argument("--out", type=Path, help="artifact path, relative to the output directory")

    parser = argparse.ArgumentParser(
        prog="kfree-points", description="Compute with the k-free points V(L, k) of a lattice."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str, *options: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, parents=[common], help=help_text, description=help_text)
        for option in options:
            _option(sub, option)
        return sub

    sub = command("generate", "Dump V within the open ball of a radius as CSV.")
    sub.add_argument("--radius", type=float, required=True)

    sub = command("density", "Estimate the density of V and compare it with 1/zeta(nk).")
    sub.add_argument("--radius", type=float, required=True)

    sub = command(
        "holes",
        "Construct a certified hole of a given inradius.",
        "max-prime-bits",
        "search-radius",
    )
    sub.add_argument("--radius", type=float, required=True)
    sub.add_argument(
        "--nearest", action="store_true", help="also brute-force the nearest hole (rank <= 2)"
    )

    sub = command("patches", "Census of the rho-patches of V.", "scan-radius")
    sub.add_argument("--rho", type=float, required=True)

    sub = command(
        "freq",
        "Empirical and exact frequencies of all census patches.",
        "scan-radius",
        "tolerance",
        "zeta-tolerance",
        "max-subset-bits",
    )
    sub.add_argument("--rho", type=float, required=True)

    sub = command("entropy", "Finite-radius patch counting entropy figures.", "scan-radius")
    sub.add_argument("--rho", type=float, required=True)

    command("diffraction", "Plot-ready Bragg peak dataset in a box.", "box", "threshold")

    sub = command("spectrum", "Empirical Fourier-Bohr amplitude at a rational dual point.")
    sub.add_argument("--y", type=_dual_point, required=True, help="dual point, e.g. 1/2,1/2")
    sub.add_argument("--radius", type=float, required=True)

    sub = command("proximality", "Witness that V and V + s are proximal.", "max-prime-bits")
    sub.add_argument("--shift", type=_point, required=True, help="lattice vector s, e.g. 1,0")
    sub.add_argument("--rho", type=float, required=True)

    sub = command(
        "check-admissible",
        "Decide admissibility of a configuration JSON file.",
        "search-radius",
    )
    sub.add_argument("--configuration", type=Path, required=True)
    sub.add_argument(
        "--locate", action="store_true", help="search a translate realising it as a patch"
    )

    sub = commands.add_parser("verify", help="Re-check a hole or proximality certificate.")
    sub.add_argument("--certificate", type=Path, required=True)
    _option(sub, "log-level")
    return parser


def _resolve(args: argparse.Namespace):
    """Fill every flag left unset from the override file, then from the option table."""
    defaults = option_defaults()
    overrides = load_overrides(args.config) if getattr(args, "config", None) else {}
    for name, default in defaults.items():
        dest = name.replace("-", "_")
        if hasattr(args, dest) and getattr(args, dest) is None:
            setattr(args, dest, overrides.get(name, default))


def _artifact(args: argparse.Namespace, default_name: str) -> Path:
    return output_dir() / (args.out or default_name)


def _record(args: argparse.Namespace, path: Path, **parameters):
    run = RunConfig(
        command=args.command, lattice=args.lattice, n=args.n, k=args.k, parameters=parameters
    )
    (path.parent / "run.yaml").write_text(str(run))


def _generate(args, params, lat) -> int:
    points = generate_array(
        params, lat, args.radius, workers=args.workers, chunk_size=args.chunk_size
    )
    header = [f"x{i + 1}" for i in range(params.n)]
    path = artifacts.write_csv(_artifact(args, "points.csv"), header, points.tolist())
    _record(args, path, radius=args.radius)
    print(f"{len(points)} k-free points within radius {args.radius} written to {path}")
    return EXIT_OK


def _density(args, params, lat) -> int:
    estimate = density_estimate(params, lat, args.radius, workers=args.workers)
    limit = 1.0 / zeta(params.exponent).value
    path = artifacts.write_json(
        _artifact(args, "density.json"),
        {"radius": args.radius, "density": estimate, "limit": limit, "gap": estimate - limit},
    )
    _record(args, path, radius=args.radius)
    print(f"density {estimate:.9f}, 1/zeta({params.exponent}) = {limit:.9f}")
    return EXIT_OK


def _holes(args, params, lat) -> int:
    certificate = find_hole(params, lat, args.radius, max_prime_bits=args.max_prime_bits)
    if not verify_hole(certificate, params, lat):
        logger.error("constructed hole failed verification")
        return EXIT_INVALID
    document = artifacts.hole_document(certificate, params, lat).to_dict()
    if args.nearest:
        found = nearest_hole(params, lat, args.radius, args.search_radius)
        document["nearest"] = None if found is None else list(found)
        print(f"nearest hole centre within {args.search_radius}: {found}")
    path = artifacts.write_json(_artifact(args, "hole.json"), document)
    _record(args, path, radius=args.radius, max_prime_bits=args.max_prime_bits)
    print(
        f"hole of inradius {args.radius} over {len(certificate.assignment)} offsets, "
        f"modulus {certificate.modulus}, written to {path}"
    )
    return EXIT_OK


def _patches(args, params, lat) -> int:
    found = census(
        params, lat, args.rho, args.scan_radius, workers=args.workers, chunk_size=args.chunk_size
    )
    inadmissible = [
        key for key, _ in found.sorted_patches() if not is_admissible(found.patch(key), params)
    ]
    if inadmissible:
        logger.warning("%d census patches are not admissible", len(inadmissible))
    path = artifacts.write_json(_artifact(args, "patches.json"), found.to_dict())
    _record(args, path, rho=args.rho, scan_radius=args.scan_radius)
    print(f"{found.distinct} distinct {args.rho}-patches over {found.translates} translates")
    return EXIT_OK


def _freq(args, params, lat) -> int:
    found = census(
        params, lat, args.rho, args.scan_radius, workers=args.workers, chunk_size=args.chunk_size
    )
    rows = frequency_table(
        found,
        params,
        lat,
        args.tolerance,
        max_subset_bits=args.max_subset_bits,
        zeta_tolerance=args.zeta_tolerance,
    )
    path = artifacts.write_csv(
        _artifact(args, "freq.csv"),
        ["patch_id", "points", "count", "empirical", "exact", "truncation_error"],
        [
            (
                row.patch_id,
                json.dumps([list(p) for p in row.points]),
                row.count,
                row.empirical,
                row.exact,
                row.truncation_error,
            )
            for row in rows
        ],
    )
    _record(
        args,
        path,
        rho=args.rho,
        scan_radius=args.scan_radius,
        tolerance=args.tolerance,
        max_subset_bits=args.max_subset_bits,
    )
    total = math.fsum(row.exact for row in rows)
    print(f"{len(rows)} patches, exact frequencies sum to {total:.12f}")
    return EXIT_OK


def _entropy(args, params, lat) -> int:
    estimate = entropy_estimate(params, lat, args.rho, args.scan_radius, workers=args.workers)
    path = artifacts.write_json(_artifact(args, "entropy.json"), estimate.model_dump())
    _record(args, path, rho=args.rho, scan_radius=args.scan_radius)
    print(
        f"N({args.rho}) = {estimate.distinct_patches}, log2 N / vol = {estimate.empirical:.6f}, "
        f"lower {estimate.interpolation_lower:.6f}, limit {estimate.limit:.6f}"
    )
    return EXIT_OK


def _diffraction(args, params, lat) -> int:
    window = SpectrumWindow.parse_box(args.box, args.threshold)
    rows = bragg_dataset(params, lat, window)
    header = [f"y{i + 1}" for i in range(params.n)] + ["q", "intensity", "ratio"]
    path = artifacts.write_csv(
        _artifact(args, "diffraction.csv"),
        header,
        ([*row.y, row.q, row.intensity, row.ratio] for row in rows),
    )
    _record(args, path, box=args.box, threshold=args.threshold)
    denominators = sorted({row.q for row in rows})
    print(f"{len(rows)} Bragg peaks with denominators {denominators}")
    return EXIT_OK


def _spectrum(args, params, lat) -> int:
    amplitude = empirical_amplitude(args.y, params, lat, args.radius, workers=args.workers)
    try:
        expected = intensity(args.y.denominator, params)
    except NotInSpectrumError:
        expected = 0.0
    path = artifacts.write_json(
        _artifact(args, "spectrum.json"),
        {
            "y": str(args.y),
            "q": args.y.denominator,
            "radius": args.radius,
            "amplitude": [amplitude.real, amplitude.imag],
            "empirical_intensity": abs(amplitude) ** 2,
            "intensity": expected,
        },
    )
    _record(args, path, y=str(args.y), radius=args.radius)
    print(f"|a_R({args.y})|^2 = {abs(amplitude) ** 2:.6g}, intensity {expected:.6g}")
    return EXIT_OK


def _proximality(args, params, lat) -> int:
    witness = proximality_witness(
        args.shift, args.rho, params, lat, max_prime_bits=args.max_prime_bits
    )
    document = artifacts.proximality_document(witness, params, lat)
    if not document.verify():
        logger.error("constructed proximality witness failed verification")
        return EXIT_INVALID
    path = artifacts.write_json(_artifact(args, "proximality.json"), document.to_dict())
    _record(
        args,
        path,
        shift=list(args.shift),
        rho=args.rho,
        max_prime_bits=args.max_prime_bits,
    )
    print(f"d(V + t, V + s + t) <= {witness.distance_bound:.6g}, witness written to {path}")
    return EXIT_OK


def _check_admissible(args, params, lat) -> int:
    cfg = artifacts.read_configuration(args.configuration, lat)
    admissible = is_admissible(cfg, params)
    print(f"{args.configuration}: {'admissible' if admissible else 'not admissible'}")
    if admissible and args.locate:
        rho = cfg.window_radius
        if rho is None:
            raise ParameterError("locating a configuration needs its window_radius")
        patch = Patch(points=cfg.points, window_radius=rho)
        found = locate_patch(patch, params, lat, args.search_radius)
        if found is None:
            logger.warning("no realising translate within radius %s", args.search_radius)
        print(f"realised as the patch of V at {found} (search radius {args.search_radius})")
    return EXIT_OK if admissible else EXIT_INVALID


def _verify(args) -> int:
    document = artifacts.read_certificate(args.certificate)
    passed = document.verify()
    print(f"{document.kind} certificate {args.certificate}: {'valid' if passed else 'INVALID'}")
    return EXIT_OK if passed else EXIT_INVALID


_COMMANDS = {
    "generate": _generate,
    "density": _density,
    "holes": _holes,
    "patches": _patches,
    "freq": _freq,
    "entropy": _entropy,
    "diffraction": _diffraction,
    "spectrum": _spectrum,
    "proximality": _proximality,
    "check-admissible": _check_admissible,
}


def _dispatch(args: argparse.Namespace) -> int:
    _resolve(args)
    level = logging.getLevelName(args.log_level.upper())
    if not isinstance(level, int):
        raise ParameterError(
            f"unknown log level {args.log_level!r}; use DEBUG, INFO, WARNING, ERROR or CRITICAL"
        )
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    if args.command == "verify":
        return _verify(args)
    lat = load_lattice(args.lattice)
    params = KFreeParams(n=lat.n, k=args.k)
    args.n = lat.n
    args.workers = resolve_workers(args.workers)
    logger.debug("running %s on %s with k=%d", args.command, args.lattice, args.k)
    return _COMMANDS[args.command](args, params, lat)


def main(argv=None) -> int:
    """Run the command line and return its exit code."""
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except BudgetExceededError as e:
        logger.error("budget exceeded: %s", e)
        return EXIT_BUDGET
    except pydantic.ValidationError as e:
        logger.error("invalid input: %s", "; ".join(err["msg"] for err in e.errors()))
        return EXIT_INVALID
    except jsonschema.ValidationError as e:
        logger.error("invalid document: %s", e.message)
        return EXIT_INVALID
    except ParameterError as e:
        logger.error("%s", e)
        return EXIT_INVALID
