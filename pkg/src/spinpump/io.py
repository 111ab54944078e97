"""Artifact export: CSV / JSON / SVG writers with atomic file replacement.

All numeric output is serialized with 17 significant digits so that every
double round-trips exactly; times are in seconds.  Trajectory CSVs use the
fixed header

    t,Fx,Fy,Fz,Fzz,Azx,Azy,rho_ee,trace,fid_dplus,fid_dminus

where the last four columns are left empty for reduced-engine runs.
"""

from __future__ import annotations

import math
import os
import tempfile

import numpy as np

from . import __version__ as _pkg_version
from .integrate import Trajectory

__all__ = [
    "TRAJECTORY_HEADER",
    "dumps17",
    "atomic_write_text",
    "trajectory_csv_text",
    "scan_csv_text",
    "json_document",
    "write_trajectory_svg",
]

TRAJECTORY_HEADER = "t,Fx,Fy,Fz,Fzz,Azx,Azy,rho_ee,trace,fid_dplus,fid_dminus"


def _f17(x: float) -> str:
    if isinstance(x, float) and (math.isnan(x) or math.isinf(x)):
        raise ValueError(f"non-finite value {x!r} in output")
    return "%.17g" % x


def dumps17(obj, indent: int = 0) -> str:
    """JSON serialization with floats rendered to 17 significant digits.

    Supports dict/list/str/bool/None and numbers (numpy scalars and arrays
    included); rejects non-finite floats rather than emitting invalid JSON.
    """
    pad = " " * indent
    inner = " " * (indent + 2)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        out = ['"']
        for ch in obj:
            if ch == '"':
                out.append('\\"')
            elif ch == "\\":
                out.append("\\\\")
            elif ord(ch) < 0x20:
                out.append("\\u%04x" % ord(ch))
            else:
                out.append(ch)
        out.append('"')
        return "".join(out)
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _f17(float(obj))
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [dumps17(v, indent + 2) for v in obj]
        return "[\n" + ",\n".join(inner + s for s in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{inner}{dumps17(str(k))}: {dumps17(v, indent + 2)}" for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trajectory_csv_text(traj: Trajectory) -> str:
    lines = [TRAJECTORY_HEADER]
    has_diag = traj.rho is not None
    for i, t in enumerate(traj.times):
        row = [_f17(t)] + [_f17(v) for v in traj.moments[i]]
        if has_diag:
            row += [
                _f17(traj.rho_ee[i]),
                _f17(traj.trace[i]),
                _f17(traj.fid_dplus[i]),
                _f17(traj.fid_dminus[i]),
            ]
        else:
            row += ["", "", "", ""]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def scan_csv_text(result, parameter: str) -> str:
    lines = [f"{parameter},Fz,failed"]
    for x, fz, bad in zip(result.grid, result.Fz, result.failed):
        lines.append(f"{_f17(x)},{'' if bad else _f17(fz)},{int(bad)}")
    return "\n".join(lines) + "\n"


def trajectory_results(traj: Trajectory) -> dict:
    res = {
        "t": traj.times,
        "Fx": traj.Fx,
        "Fy": traj.Fy,
        "Fz": traj.Fz,
        "Fzz": traj.Fzz,
        "Azx": traj.Azx,
        "Azy": traj.Azy,
    }
    if traj.rho is not None:
        res.update(
            rho_ee=traj.rho_ee,
            trace=traj.trace,
            fid_dplus=traj.fid_dplus,
            fid_dminus=traj.fid_dminus,
        )
    return res


def trajectory_diagnostics(traj: Trajectory) -> dict:
    diag = {
        "engine": traj.engine,
        "backend": traj.backend_name,
        "n_steps": traj.n_steps,
        "moment_bound_violation": traj.moment_bound_violation(),
    }
    if traj.rho is not None:
        diag["max_trace_drift"] = float(np.max(np.abs(traj.trace - 1.0)))
        diag["max_herm_residual"] = float(np.max(traj.herm_residual))
        diag["max_rho_ee"] = float(np.max(traj.rho_ee))
    return diag


def json_document(config: dict, results: dict, diagnostics: dict) -> str:
    return dumps17(
        {
            "config": config,
            "results": results,
            "diagnostics": diagnostics,
            "version": _pkg_version,
        }
    ) + "\n"


def write_trajectory_svg(traj: Trajectory, path: str, title: str = "") -> None:
    """Three planar projections (xy, xz, yz) of the orientation vector with
    a green start marker and a red end marker."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    comps = {"x": traj.Fx, "y": traj.Fy, "z": traj.Fz}
    panels = (("x", "y"), ("x", "z"), ("y", "z"))
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.6))
    circle_t = np.linspace(0, 2 * np.pi, 181)
    for ax, (a, b) in zip(axes, panels):
        ax.plot(np.cos(circle_t), np.sin(circle_t), lw=0.5, color="0.7")
        ax.plot(comps[a], comps[b], lw=0.8)
        ax.plot(comps[a][0], comps[b][0], "o", color="green", ms=6, zorder=3)
        ax.plot(comps[a][-1], comps[b][-1], "o", color="red", ms=6, zorder=3)
        ax.set_xlabel(f"F{a}")
        ax.set_ylabel(f"F{b}")
        ax.set_xlim(-1.15, 1.15)
        ax.set_ylim(-1.15, 1.15)
        ax.set_aspect("equal")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".svg")
    os.close(fd)
    try:
        fig.savefig(tmp, format="svg")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    finally:
        plt.close(fig)
