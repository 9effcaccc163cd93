"""SVG time-series panels drawn from a metrics CSV.

One panel per file. Reference lines (zone radii, eye-image borders) come
from the summary sidecar written next to the CSV; sequence boundaries are
taken from the CSV's own ``seq`` column.
"""

from __future__ import annotations

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .costs import EthicsParams  # noqa: E402

PANELS = ("distance", "focal", "framing", "kinematics", "fovx")

# Fixed hash salt and no date stamp keep the SVG bytes reproducible.
_RC = {"svg.hashsalt": "cinewild", "svg.fonttype": "none", "font.size": 9}


def default_thresholds() -> dict:
    e = EthicsParams()
    return {"d_ac": e.d_ac, "d_sf": e.d_sf, "d_vis": e.d_vis,
            "eye_W_px": e.eye.sensor.W_px, "eye_H_px": e.eye.sensor.H_px, "eye_c_u": e.eye.c_u}


def _sequence_lines(ax, cols):
    seq, t = cols["seq"], cols["t"]
    for i in np.flatnonzero(np.diff(seq)) + 1:
        # Records are stamped at the end of their step; the boundary is one step earlier.
        dt = t[1] - t[0] if len(t) > 1 else 0.0
        ax.axvline(t[i] - dt, color="0.5", linestyle="--", linewidth=0.8)


def _hline(ax, y, label, color, style=":"):
    ax.axhline(y, color=color, linestyle=style, linewidth=1.0, label=label)


def _distance(ax, cols, th):
    ax.plot(cols["t"], cols["d_dt"], color="tab:green", label="d_dt")
    _hline(ax, th["d_ac"], f"d_ac = {th['d_ac']:g} m", "tab:orange")
    _hline(ax, th["d_sf"], f"d_sf = {th['d_sf']:g} m", "tab:red")
    _hline(ax, th["d_vis"], f"d_vis = {th['d_vis']:g} m", "tab:purple", "-.")
    ax.set_ylabel("drone-target distance [m]")


def _focal(ax, cols, th):
    ax.plot(cols["t"], cols["f"], color="tab:blue", label="f")
    ax.set_ylabel("focal length [mm]")


def _framing(ax, cols, th):
    ax.plot(cols["t"], cols["e_im_x"], label="e_im,x")
    ax.plot(cols["t"], cols["e_im_y"], label="e_im,y")
    ax.axhline(0.0, color="0.3", linewidth=0.6)
    ax.set_ylabel("framing error [px]")


def _kinematics(ax, cols, th):
    ax.plot(cols["t"], cols["v_norm"], label="|v| [m/s]")
    ax.plot(cols["t"], cols["a_norm"], label="|a| [m/s^2]")
    ax.set_ylabel("speed / acceleration")


def _fovx(ax, cols, th):
    near = cols["within_d_vis"]
    u = np.where(near, cols["im_d_x"], np.nan)
    ax.plot(cols["t"], u, color="tab:green", label="im_d,x (d < d_vis)")
    _hline(ax, 0.0, "eye image border", "tab:red")
    _hline(ax, th["eye_W_px"], None, "tab:red")
    _hline(ax, th["eye_c_u"], "eye image centre", "0.4", "-.")
    lo, hi = -0.5 * th["eye_W_px"], 1.5 * th["eye_W_px"]
    ax.set_ylim(lo, hi)
    ax.set_ylabel("drone column in the animal's eye image [px]")


_DRAW = {"distance": _distance, "focal": _focal, "framing": _framing,
         "kinematics": _kinematics, "fovx": _fovx}


def plot_panel(cols: dict, which: str, out_path: str | os.PathLike, thresholds: dict | None = None,
               title: str | None = None) -> Path:
    if which not in _DRAW:
        raise ValueError(f"unknown panel {which!r}; choose from {', '.join(PANELS)}")
    th = {**default_thresholds(), **(thresholds or {})}
    out_path = Path(out_path)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7.0, 3.2))
        try:
            _DRAW[which](ax, cols, th)
            _sequence_lines(ax, cols)
            ax.set_xlabel("time [s]")
            if title:
                ax.set_title(title)
            ax.legend(loc="best", fontsize=7)
            ax.grid(True, linewidth=0.3)
            fig.tight_layout()
            tmp = out_path.with_name(f".{out_path.name}.tmp")
            fig.savefig(tmp, format="svg", metadata={"Date": None})
            os.replace(tmp, out_path)
        finally:
            plt.close(fig)
    return out_path
