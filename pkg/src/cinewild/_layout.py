"""Packing of scalar parameters shared by both rollout kernels.

Kernels take one flat float64 vector so the compiled and the numpy
implementation read exactly the same numbers.
"""

from __future__ import annotations

import numpy as np

NAMES = (
    "dt",
    "w_prox", "w_fov", "w_soft", "w_im", "w_d", "w_R",
    "d_ac", "d_sf", "d_vis", "w_ac", "w_sf", "c_m",
    "eye_fx", "eye_fy", "eye_cu", "eye_cv", "eye_s", "eye_W", "eye_H",
    "cam_bx", "cam_by", "cam_cu", "cam_cv", "cam_s",
    "im_u", "im_v", "d_star", "use_d", "use_R", "extent_star", "behind_penalty",
    "a_max", "omega_max", "v_max", "pitch_lo", "pitch_hi", "f_min", "f_max", "vf_max", "z_min",
    "R00", "R01", "R02", "R10", "R11", "R12", "R20", "R21", "R22",
    "R_smooth",
)
IDX = {name: i for i, name in enumerate(NAMES)}
N_PARAMS = len(NAMES)

# Input channels per step: acceleration xyz, gimbal rates roll/pitch/yaw, zoom rate.
N_CHANNELS = 7
# Packed state: position xyz, velocity xyz, gimbal roll/pitch/yaw, focal length.
N_STATE = 10
# Per-stage breakdown columns.
TERMS = ("j_prox", "j_fov", "j_soft", "j_im", "j_p")


def pack_params(dt, weights, ethics, obj, lim, sensor, R_smooth: float = 0.0) -> np.ndarray:
    from .costs import BEHIND_CAMERA_FACTOR

    eye = ethics.eye
    v = {
        "dt": dt,
        "w_prox": weights.w_prox, "w_fov": weights.w_fov, "w_soft": weights.w_soft,
        "w_im": weights.w_im, "w_d": weights.w_d, "w_R": weights.w_R,
        "d_ac": ethics.d_ac, "d_sf": ethics.d_sf, "d_vis": ethics.d_vis,
        "w_ac": ethics.w_ac, "w_sf": ethics.w_sf, "c_m": ethics.c_m,
        "eye_fx": eye.fx, "eye_fy": eye.fy, "eye_cu": eye.c_u, "eye_cv": eye.c_v,
        "eye_s": eye.s, "eye_W": eye.sensor.W_px, "eye_H": eye.sensor.H_px,
        "cam_bx": sensor.beta_x, "cam_by": sensor.beta_y,
        "cam_cu": sensor.W_px / 2.0, "cam_cv": sensor.H_px / 2.0, "cam_s": 0.0,
        "im_u": obj.im_star.u, "im_v": obj.im_star.v, "d_star": obj.d_star,
        "use_d": float(obj.use_d), "use_R": float(obj.use_R),
        "extent_star": -1.0 if obj.extent_star is None else obj.extent_star,
        "behind_penalty": BEHIND_CAMERA_FACTOR * weights.w_im,
        "a_max": lim.a_max, "omega_max": lim.omega_max, "v_max": lim.v_max,
        "pitch_lo": lim.gimbal_pitch_range[0], "pitch_hi": lim.gimbal_pitch_range[1],
        "f_min": lim.f_min, "f_max": lim.f_max, "vf_max": lim.v_f_max, "z_min": lim.world_z_min,
        "R_smooth": R_smooth,
    }
    out = np.empty(N_PARAMS)
    for name, val in v.items():
        out[IDX[name]] = val
    out[IDX["R00"]:IDX["R22"] + 1] = np.asarray(obj.R_star, dtype=float).reshape(9)
    return out
