"""Cross sections and the deterministic delimited report files.

All numbers are formatted with repr so identical runs produce byte
identical files; wall-clock timings are deliberately kept out of the
registration report.
"""

from __future__ import annotations

import numpy as np

from .cloud import PointCloud
from .pipeline import RegistrationReport

_AXES = {"x": 0, "y": 1, "z": 2}


def _fmt(x: float) -> str:
    return repr(float(x))


def cross_section(clouds, axis: str, position: float, thickness: float) -> np.ndarray:
    """Slab slice through one or more clouds.

    Returns rows (view, u, v): points within thickness/2 of position
    along the axis, projected onto the two remaining coordinates and
    tagged with their source view index.
    """
    if axis not in _AXES:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    if thickness <= 0.0:
        raise ValueError("thickness must be positive")
    a = _AXES[axis]
    keep = [k for k in range(3) if k != a]
    rows = []
    for view, cloud in enumerate(clouds):
        pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
        mask = np.abs(pts[:, a] - position) <= thickness / 2.0
        sliced = pts[mask][:, keep]
        if sliced.size:
            rows.append(np.column_stack([np.full(len(sliced), view, dtype=float), sliced]))
    if not rows:
        return np.zeros((0, 3))
    return np.concatenate(rows)


def write_section_csv(rows: np.ndarray, path) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write("view,u,v\n")
        for view, u, v in rows:
            f.write(f"{int(view)},{_fmt(u)},{_fmt(v)}\n")


def write_registration_report(report: RegistrationReport, path) -> None:
    """Flat CSV: objective, outer-iteration errors, overlap matrix."""
    with open(path, "w", encoding="ascii") as f:
        f.write("record,i,j,value\n")
        f.write(f"objective,,,{_fmt(report.objective)}\n")
        for k, err in enumerate(report.error_history):
            f.write(f"outer_error,{k},,{_fmt(err)}\n")
        n = report.overlap_matrix.shape[0]
        for i in range(n):
            for j in range(n):
                f.write(f"overlap,{i},{j},{_fmt(report.overlap_matrix[i, j])}\n")


def write_pairwise_report(result, path) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write("key,value\n")
        f.write(f"final_rms,{_fmt(result.final_rms)}\n")
        f.write(f"overlap_rate,{_fmt(result.overlap_rate)}\n")
        f.write(f"iterations_used,{result.iterations_used}\n")
        f.write(f"converged,{int(result.converged)}\n")


def write_retrieval_report(results, path) -> None:
    """One line per model: id, cluster count, best error, verdict."""
    with open(path, "w", encoding="ascii") as f:
        f.write("model,clusters,best_error,verdict\n")
        for r in results:
            err = _fmt(r.best_error) if np.isfinite(r.best_error) else "no_candidate"
            verdict = "face" if r.is_face else "non-face"
            f.write(f"{r.model_id},{r.cluster_count},{err},{verdict}\n")


def write_saliency_summary(values: np.ndarray, path) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write("statistic,value\n")
        f.write(f"count,{values.size}\n")
        f.write(f"min,{_fmt(values.min())}\n")
        f.write(f"max,{_fmt(values.max())}\n")
        f.write(f"mean,{_fmt(values.mean())}\n")
        for pct in (50, 70, 90, 95, 99):
            f.write(f"p{pct},{_fmt(np.percentile(values, pct))}\n")
