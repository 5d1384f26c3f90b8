# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

import numpy as np
from pytest import fixture

from kfree_points.kfree import KFreeParams
from kfree_points.lattice import standard_lattice


@fixture(scope="module")
def visible():
    """Visible points of the square lattice."""
    return KFreeParams(n=2, k=1), standard_lattice(2)


@fixture(scope="module")
def squarefree():
    """Squarefree integers."""
    return KFreeParams(n=1, k=2), standard_lattice(1)


@fixture
def rng():
    return np.random.default_rng(20260101)


@fixture
def artifact_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("KFREE_POINTS_OUTPUT_DIR", str(tmp_path))
    return tmp_path
