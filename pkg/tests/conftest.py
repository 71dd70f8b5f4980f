import numpy as np

from mobacc.ingest import Trajectory, make_trajectory


def traj(locations, user_id="u", start=0.0, step=3600.0) -> Trajectory:
    """Trajectory with evenly spaced timestamps over the given locations."""
    return make_trajectory(user_id, [(start + i * step, str(loc)) for i, loc in enumerate(locations)])


def spearman(x, y) -> float:
    """Rank correlation with average ranks for ties."""

    def ranks(v):
        v = np.asarray(v, dtype=float)
        order = np.argsort(v, kind="mergesort")
        raw = np.empty(len(v))
        raw[order] = np.arange(1, len(v) + 1)
        _, inverse, counts = np.unique(v, return_inverse=True, return_counts=True)
        sums = np.zeros(len(counts))
        np.add.at(sums, inverse, raw)
        return (sums / counts)[inverse]

    rx, ry = ranks(x), ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    return float(rx @ ry / np.sqrt((rx @ rx) * (ry @ ry)))
