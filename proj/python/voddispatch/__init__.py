# Copyright 2026 The voddispatch Authors
# SPDX-License-Identifier: Apache-2.0
"""Learned VOD dispatch.

Configuration is passed as plain dicts using the same keys as the CLI's
``key = value`` files, e.g. ``generate_world({"videos": 200, "seed": 3})``.
"""

from ._core import (
    BlockPartition,
    ConfigError,
    MissingArtifact,
    NumericError,
    ShapeError,
    Trained,
    World,
    cluster_quality,
    compute_cp,
    generate_world,
    learned_dispatch,
    pearson,
    rank_frequency,
    read_world,
    stationarity,
    threshold_dispatch,
    train,
)

__all__ = [
    "BlockPartition",
    "ConfigError",
    "MissingArtifact",
    "NumericError",
    "ShapeError",
    "Trained",
    "World",
    "cluster_quality",
    "compute_cp",
    "generate_world",
    "learned_dispatch",
    "pearson",
    "rank_frequency",
    "read_world",
    "stationarity",
    "threshold_dispatch",
    "train",
]
