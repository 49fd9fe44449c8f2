import pathlib

import numpy as np
import pytest

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> pathlib.Path:
    return FIXTURES


def match_atoms(found: np.ndarray, listed: np.ndarray) -> float:
    """Greedy nearest-neighbour bijection; returns the max matched distance.

    Extraction orders atoms by eigenvalue internals, not by any printable
    convention, so comparisons against a published list must match points
    first.  Greedy is exact here because every fixture's atoms are separated
    by much more than the tolerances in play.
    """
    found = np.atleast_2d(np.asarray(found, dtype=float))
    listed = np.atleast_2d(np.asarray(listed, dtype=float))
    assert found.shape == listed.shape, f"{found.shape} vs {listed.shape}"
    remaining = list(range(len(found)))
    worst = 0.0
    for target in listed:
        dists = [np.linalg.norm(found[i] - target) for i in remaining]
        j = int(np.argmin(dists))
        worst = max(worst, dists[j])
        remaining.pop(j)
    return worst


def match_weights(found_pts, found_w, listed_pts, listed_w) -> float:
    """Max weight error under the same greedy point matching."""
    found_pts = np.atleast_2d(found_pts)
    listed_pts = np.atleast_2d(listed_pts)
    remaining = list(range(len(found_pts)))
    worst = 0.0
    for target, w in zip(listed_pts, listed_w):
        dists = [np.linalg.norm(found_pts[i] - target) for i in remaining]
        j = remaining[int(np.argmin(dists))]
        worst = max(worst, abs(found_w[j] - w))
        remaining.remove(j)
    return worst
