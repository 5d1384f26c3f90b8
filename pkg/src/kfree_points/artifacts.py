# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

"""Reading and writing the files produced by the command line.

CSV files carry a header row and print reals with 12 significant digits. JSON documents are
written with sorted keys and a two-space indent, so equal inputs give byte-identical files.
Certificates are self-contained:

```json
{"kind": "hole", "params": {"n": 2, "k": 1}, "lattice": {"n": 2, ...}, "certificate": {...}}
```

and `CertificateDocument.verify()` re-checks them without any other input.
"""

import csv
import json
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, Literal

import jsonschema
from pydantic import BaseModel, ConfigDict, model_validator

from kfree_points.dynamics import ProximalityWitness, verify_proximality
from kfree_points.errors import ParameterError
from kfree_points.kfree import Configuration, HoleCertificate, KFreeParams, verify_hole
from kfree_points.lattice import LATTICE_SCHEMA, Lattice, load_lattice

logger = logging.getLogger(__name__)

_POINT = {"type": "array", "items": {"type": "integer"}}

_HOLE = {
    "type": "object",
    "properties": {
        "center": _POINT,
        "modulus": {"type": "integer", "minimum": 1},
        "radius": {"type": "number", "exclusiveMinimum": 0},
        "assignment": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"offset": _POINT, "prime": {"type": "integer", "minimum": 2}},
                "required": ["offset", "prime"],
            },
        },
    },
    "required": ["center", "modulus", "radius", "assignment"],
}

CERTIFICATE_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["hole", "proximality"]},
        "params": {
            "type": "object",
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "k": {"type": "integer", "minimum": 1},
            },
            "required": ["n", "k"],
        },
        "lattice": LATTICE_SCHEMA,
        "certificate": _HOLE,
        "witness": {
            "type": "object",
            "properties": {
                "t": _POINT,
                "rho": {"type": "number", "exclusiveMinimum": 0},
                "shift": _POINT,
                "certificate": _HOLE,
            },
            "required": ["t", "rho", "shift", "certificate"],
        },
    },
    "required": ["kind", "params", "lattice"],
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "hole"}}},
            "then": {"required": ["certificate"]},
            "else": {"required": ["witness"]},
        }
    ],
}

CONFIGURATION_SCHEMA = {
    "type": "object",
    "properties": {
        "points": {"type": "array", "items": _POINT},
        "window_radius": {"type": ["number", "null"]},
    },
    "required": ["points"],
}


def format_cell(value: Any) -> str:
    """Render one CSV cell; reals get 12 significant digits."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV file with a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(value) for value in row])
            count += 1
    logger.debug("wrote %d rows to %s", count, path)
    return path


def dumps_json(document: Any) -> str:
    """Serialise a document with a stable key order."""
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def write_json(path, document: Any) -> Path:
    """Write a JSON document (UTF-8, sorted keys)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(document), encoding="utf-8")
    logger.debug("wrote %s", path)
    return path


def _read_json(path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParameterError(f"file {path} does not exist")
    except json.JSONDecodeError as e:
        raise ParameterError(f"{path} is not valid JSON: {e}")


class CertificateDocument(BaseModel):
    """A hole certificate or proximality witness together with everything needed to check it."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["hole", "proximality"]
    params: KFreeParams
    lattice: Lattice
    certificate: HoleCertificate | None = None
    witness: ProximalityWitness | None = None

    @model_validator(mode="after")
    def _check_payload(self):
        if self.kind == "hole" and self.certificate is None:
            raise ValueError("hole documents need a certificate")
        if self.kind == "proximality" and self.witness is None:
            raise ValueError("proximality documents need a witness")
        return self

    def to_dict(self) -> dict:
        """Return the JSON form of the document."""
        document = {
            "kind": self.kind,
            "params": self.params.model_dump(),
            "lattice": self.lattice.to_dict(),
        }
        if self.kind == "hole":
            document["certificate"] = self.certificate.model_dump(mode="json")
        else:
            document["witness"] = self.witness.model_dump(mode="json")
        return document

    def verify(self) -> bool:
        """Re-run the independent check of the certificate."""
        if self.kind == "hole":
            return verify_hole(self.certificate, self.params, self.lattice)
        return verify_proximality(self.witness, self.params, self.lattice)


def hole_document(
    certificate: HoleCertificate, params: KFreeParams, lat: Lattice
) -> CertificateDocument:
    """Wrap a hole certificate for writing."""
    return CertificateDocument(kind="hole", params=params, lattice=lat, certificate=certificate)


def proximality_document(
    witness: ProximalityWitness, params: KFreeParams, lat: Lattice
) -> CertificateDocument:
    """Wrap a proximality witness for writing."""
    return CertificateDocument(kind="proximality", params=params, lattice=lat, witness=witness)


def read_certificate(path) -> CertificateDocument:
    """Read and validate a certificate document."""
    raw = _read_json(path)
    jsonschema.validate(raw, CERTIFICATE_SCHEMA)
    return CertificateDocument(
        kind=raw["kind"],
        params=KFreeParams(**raw["params"]),
        lattice=load_lattice(raw["lattice"]),
        certificate=raw.get("certificate"),
        witness=raw.get("witness"),
    )


def configuration_document(cfg: Configuration) -> dict:
    """Return the JSON form of a configuration."""
    return {"points": [list(p) for p in cfg.points], "window_radius": cfg.window_radius}


def read_configuration(path, lat: Lattice | None = None) -> Configuration:
    """Read a configuration written as `{"points": [[...], ...], "window_radius": r}`.

    With a lattice, points outside the open ball of `window_radius` are rejected.
    """
    raw = _read_json(path)
    jsonschema.validate(raw, CONFIGURATION_SCHEMA)
    cfg = Configuration(points=raw["points"], window_radius=raw.get("window_radius"))
    if lat is not None and not cfg.within_window(lat):
        raise ParameterError(
            f"configuration {path} has points outside its window of radius {cfg.window_radius}"
        )
    return cfg
