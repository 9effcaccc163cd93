"""Pure-numpy rollout-cost kernel, vectorised over the sample axis.

Same contract as the compiled ``batch_rollout``; used when the extension is
not built or when ``CINEWILD_PURE_PYTHON=1``.
"""

from __future__ import annotations

import numpy as np

from ._layout import IDX

DEPTH_EPS = 1e-6
_TWO_PI = 2.0 * np.pi


def _wrap(a):
    w = np.remainder(a + np.pi, _TWO_PI) - np.pi
    # remainder maps pi -> -pi; keep the (-pi, pi] convention
    return np.where(w <= -np.pi, w + _TWO_PI, w)


def _euler_rot(roll, pitch, yaw):
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    R = np.empty(roll.shape + (3, 3))
    R[..., 0, 0] = cy * cp
    R[..., 0, 1] = cy * sp * sr - sy * cr
    R[..., 0, 2] = cy * sp * cr + sy * sr
    R[..., 1, 0] = sy * cp
    R[..., 1, 1] = sy * sp * sr + cy * cr
    R[..., 1, 2] = sy * sp * cr - cy * sr
    R[..., 2, 0] = -sp
    R[..., 2, 1] = cp * sr
    R[..., 2, 2] = cp * cr
    return R


def batch_rollout(U, x0, tgt_p, tgt_R, kp, params, out, stages=None, start=0, stop=-1):
    P = params
    if stop < 0:
        stop = U.shape[0]
    U = U[start:stop]
    S, N, _ = U.shape
    K = kp.shape[0]
    dt = P[IDX["dt"]]

    p = np.tile(x0[0:3], (S, 1))
    v = np.tile(x0[3:6], (S, 1))
    g = np.tile(x0[6:9], (S, 1))
    f = np.full(S, x0[9])
    acc = np.zeros(S)

    a_max, om_max, v_max = P[IDX["a_max"]], P[IDX["omega_max"]], P[IDX["v_max"]]
    R_star = P[IDX["R00"]:IDX["R22"] + 1].reshape(3, 3)
    w_prox, w_fov, w_soft = P[IDX["w_prox"]], P[IDX["w_fov"]], P[IDX["w_soft"]]
    w_im, w_d, w_R = P[IDX["w_im"]], P[IDX["w_d"]], P[IDX["w_R"]]
    d_ac, d_sf = P[IDX["d_ac"]], P[IDX["d_sf"]]

    for k in range(N):
        a = U[:, k, 0:3].copy()
        n = np.sqrt(np.sum(a * a, axis=1))
        over = n > a_max
        a[over] *= (a_max / n[over])[:, None]
        w = np.clip(U[:, k, 3:6], -om_max, om_max)
        vf = np.clip(U[:, k, 6], -P[IDX["vf_max"]], P[IDX["vf_max"]])

        p = p + dt * v
        v = v + dt * a
        g = _wrap(g + dt * w)
        f = f + dt * vf

        p[:, 2] = np.maximum(p[:, 2], P[IDX["z_min"]])
        n = np.sqrt(np.sum(v * v, axis=1))
        over = n > v_max
        v[over] *= (v_max / n[over])[:, None]
        g[:, 1] = np.clip(g[:, 1], P[IDX["pitch_lo"]], P[IDX["pitch_hi"]])
        f = np.clip(f, P[IDX["f_min"]], P[IDX["f_max"]])

        Rt = tgt_R[k]
        rel = p - tgt_p[k]
        d = np.sqrt(np.sum(rel * rel, axis=1))

        jprox = np.where(
            d >= d_ac,
            w_prox * np.exp(-0.5 * (d - d_ac)),
            np.where(
                d >= d_sf,
                w_prox * (P[IDX["w_ac"]] * (d - d_ac) ** 2 + 1.0),
                w_prox * (P[IDX["w_sf"]] * (d - d_sf) ** 2 + P[IDX["c_m"]]),
            ),
        )

        jfov = np.zeros(S)
        if w_fov != 0.0:
            b = rel @ Rt  # R_t^T rel, row-wise
            near = d < P[IDX["d_vis"]]
            front = near & (b[:, 0] > DEPTH_EPS)
            if np.any(front):
                bf = b[front]
                xo, yo = -bf[:, 1] / bf[:, 0], -bf[:, 2] / bf[:, 0]
                uu = P[IDX["eye_fx"]] * xo + P[IDX["eye_s"]] * yo + P[IDX["eye_cu"]]
                vv = P[IDX["eye_fy"]] * yo + P[IDX["eye_cv"]]
                W, H = P[IDX["eye_W"]], P[IDX["eye_H"]]
                cu, cv = P[IDX["eye_cu"]], P[IDX["eye_cv"]]
                inside = (uu >= 0) & (uu <= W) & (vv >= 0) & (vv <= H)
                dmax = np.sqrt(cu * cu + cv * cv)
                m = np.sqrt((uu - cu) ** 2 + (vv - cv) ** 2) / dmax
                vin = np.exp(-m * m)
                vout = (
                    np.maximum(0, uu - W) ** 2 + np.maximum(0, -uu) ** 2
                    + np.maximum(0, vv - H) ** 2 + np.maximum(0, -vv) ** 2
                )
                jfov[front] = w_fov * np.where(inside, vin, vout)

        jsoft = w_soft * np.sum(a * a, axis=1)

        Rd = _euler_rot(g[:, 0], g[:, 1], g[:, 2])

        jim = np.zeros(S)
        if w_im != 0.0:
            behind = np.zeros(S, dtype=bool)
            us, vs = [], []
            for i in range(K):
                wpt = tgt_p[k] + Rt @ kp[i]
                rel_k = wpt - p
                b = np.einsum("sji,sj->si", Rd, rel_k)
                behind |= b[:, 0] <= DEPTH_EPS
                x = np.where(b[:, 0] > DEPTH_EPS, b[:, 0], 1.0)
                us.append(P[IDX["cam_bx"]] * f * (-b[:, 1] / x) + P[IDX["cam_s"]] * (-b[:, 2] / x) + P[IDX["cam_cu"]])
                vs.append(P[IDX["cam_by"]] * f * (-b[:, 2] / x) + P[IDX["cam_cv"]])
            du = sum(us) / K - P[IDX["im_u"]]
            dv = sum(vs) / K - P[IDX["im_v"]]
            e = np.zeros(S)
            if P[IDX["extent_star"]] >= 0.0 and K == 2:
                e = np.sqrt((us[0] - us[1]) ** 2 + (vs[0] - vs[1]) ** 2) - P[IDX["extent_star"]]
            jim = np.where(behind, P[IDX["behind_penalty"]], w_im * (du * du + dv * dv + e * e))

        jp = np.zeros(S)
        if P[IDX["use_d"]] != 0.0:
            jp = jp + w_d * (d - P[IDX["d_star"]]) ** 2
        if P[IDX["use_R"]] != 0.0:
            M = np.einsum("ji,sjk->sik", Rt, Rd) - R_star
            eps = P[IDX["R_smooth"]]
            jp = jp + w_R * (np.sqrt(np.sum(M * M, axis=(1, 2)) + eps * eps) - eps)

        acc = acc + (jprox + jfov + jsoft + jim + jp)
        if stages is not None:
            stages[start:stop, k, 0] = jprox
            stages[start:stop, k, 1] = jfov
            stages[start:stop, k, 2] = jsoft
            stages[start:stop, k, 3] = jim
            stages[start:stop, k, 4] = jp

    out[start:stop] = acc
