# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

"""The k-free points V(L, k) of unimodular lattices: generation, patches, diffraction, dynamics."""

__version__ = "0.1.0"
