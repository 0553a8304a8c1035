"""Define package-wide constants."""

import logging

LOGGER = logging.getLogger(__package__)

# Norms below this are treated as zero vectors.
NORM_EPSILON = 1e-12

# Published statistics of the citation datasets: nodes, edges, features, classes.
REFERENCE_STATISTICS: dict[str, dict[str, int]] = {
    "cora": {"nodes": 2708, "edges": 5429, "features": 1433, "classes": 7},
    "citeseer": {"nodes": 3312, "edges": 4732, "features": 3703, "classes": 6},
}
