"""Independent reference implementations used by the tests.

``mp_rollout_cost`` re-derives the horizon cost from the written cost
definitions using mpmath at 32 significant digits (about twice float64),
without touching the package's kernels or cost functions.
"""

from __future__ import annotations

import mpmath as mp

DPS = 32


def _rot(roll, pitch, yaw):
    cr, sr, cp, sp, cy, sy = mp.cos(roll), mp.sin(roll), mp.cos(pitch), mp.sin(pitch), mp.cos(yaw), mp.sin(yaw)
    Rz = mp.matrix([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    Ry = mp.matrix([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rx = mp.matrix([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    return Rz * Ry * Rx


def _mpf(x):
    return x if isinstance(x, mp.mpf) else mp.mpf(float(x))


def _col(v):
    return mp.matrix([_mpf(x) for x in v])


def _norm(v):
    return mp.sqrt(sum(x * x for x in v))


def _project(fx, fy, cu, cv, body):
    # optical: x = -body y, y = -body z, z = body x
    return fx * (-body[1] / body[0]) + cu, fy * (-body[2] / body[0]) + cv


def mp_rollout_cost(x_d, x_c, forecast, U, obj, weights, ethics, lim, dt, sensor) -> mp.mpf:
    """Horizon cost of the (N, 7) input array ``U`` in 32-digit arithmetic.

    Inputs and states are projected onto the limits exactly as in the
    simulator: radial caps on acceleration and velocity, boxes elsewhere.
    """
    with mp.workdps(DPS):
        m = _mpf
        dt = m(dt)
        p, v = _col(x_d.p_d), _col(x_d.v_d)
        g = [m(x_d.gimbal.roll), m(x_d.gimbal.pitch), m(x_d.gimbal.yaw)]
        f = min(max(m(x_c.f), m(lim.f_min)), m(lim.f_max))
        R_star = mp.matrix([[m(x) for x in row] for row in obj.R_star])
        kps = [[m(c) for c in row] for row in obj.keypoint_offsets()]
        eye = ethics.eye
        efx, efy = m(eye.sensor.W_px) / m(eye.sensor.W_mm) * m(eye.f), m(eye.sensor.H_px) / m(eye.sensor.H_mm) * m(eye.f)
        ecu, ecv = m(eye.c_u), m(eye.c_v)
        EW, EH = m(eye.sensor.W_px), m(eye.sensor.H_px)
        cbx, cby = m(sensor.W_px) / m(sensor.W_mm), m(sensor.H_px) / m(sensor.H_mm)
        ccu, ccv = m(sensor.W_px) / 2, m(sensor.H_px) / 2
        d_ac, d_sf, d_vis, w_ac, w_sf = (m(x) for x in (ethics.d_ac, ethics.d_sf, ethics.d_vis, ethics.w_ac, ethics.w_sf))
        total = mp.mpf(0)
        for k, row in enumerate(U):
            a = _col(row[0:3])
            na = _norm(a)
            if na > m(lim.a_max):
                a = a * (m(lim.a_max) / na)
            w = [min(max(m(x), -m(lim.omega_max)), m(lim.omega_max)) for x in row[3:6]]
            vf = min(max(m(row[6]), -m(lim.v_f_max)), m(lim.v_f_max))
            p = p + dt * v
            v = v + dt * a
            g = [g[i] + dt * w[i] for i in range(3)]
            f = f + dt * vf
            if p[2] < m(lim.world_z_min):
                p[2] = m(lim.world_z_min)
            nv = _norm(v)
            if nv > m(lim.v_max):
                v = v * (m(lim.v_max) / nv)
            g[1] = min(max(g[1], m(lim.gimbal_pitch_range[0])), m(lim.gimbal_pitch_range[1]))
            f = min(max(f, m(lim.f_min)), m(lim.f_max))

            tgt = forecast[k]
            pt = _col(tgt.p_t)
            Rt = _rot(m(tgt.heading.roll), m(tgt.heading.pitch), m(tgt.heading.yaw))
            Rd = _rot(*g)
            diff = p - pt
            d = _norm(diff)

            if d >= d_ac:
                jprox = mp.exp(-(d - d_ac) / 2)
            elif d >= d_sf:
                jprox = w_ac * (d - d_ac) ** 2 + 1
            else:
                jprox = w_sf * (d - d_sf) ** 2 + w_ac * (d_sf - d_ac) ** 2 + 1
            jprox *= m(weights.w_prox)

            jfov = mp.mpf(0)
            if d < d_vis:
                body = Rt.T * diff
                if body[0] > 0:
                    uu, vv = _project(efx, efy, ecu, ecv, body)
                    if 0 <= uu <= EW and 0 <= vv <= EH:
                        dhat = mp.sqrt((uu - ecu) ** 2 + (vv - ecv) ** 2) / mp.sqrt(ecu ** 2 + ecv ** 2)
                        jfov = mp.exp(-dhat ** 2)
                    else:
                        jfov = max(0, uu - EW) ** 2 + max(0, -uu) ** 2 + max(0, vv - EH) ** 2 + max(0, -vv) ** 2
            jfov *= m(weights.w_fov)

            jsoft = m(weights.w_soft) * sum(x * x for x in a)

            pix = []
            for kp in kps:
                world = pt + Rt * mp.matrix(kp)
                body = Rd.T * (world - p)
                pix.append(_project(cbx * f, cby * f, ccu, ccv, body))
            cu = sum(q[0] for q in pix) / len(pix)
            cv = sum(q[1] for q in pix) / len(pix)
            err = (cu - m(obj.im_star.u)) ** 2 + (cv - m(obj.im_star.v)) ** 2
            if obj.extent_star is not None:
                span = mp.sqrt((pix[0][0] - pix[1][0]) ** 2 + (pix[0][1] - pix[1][1]) ** 2)
                err += (span - m(obj.extent_star)) ** 2
            jim = m(weights.w_im) * err

            jp = mp.mpf(0)
            if obj.use_d:
                jp += m(weights.w_d) * (d - m(obj.d_star)) ** 2
            if obj.use_R:
                Rdt = Rd.T * Rt
                E = Rdt.T - R_star
                jp += m(weights.w_R) * mp.sqrt(sum(E[i, j] ** 2 for i in range(3) for j in range(3)))
            total += jprox + jfov + jsoft + jim + jp
        return total


def mp_central_gradient(fun, U, h):
    """Central differences of ``fun`` at the float array ``U``, in 32-digit arithmetic."""
    import numpy as np

    with mp.workdps(DPS):
        grad = np.empty(U.shape)
        hh = mp.mpf(h)
        for idx in np.ndindex(U.shape):
            Up = [[_mpf(x) for x in row] for row in U]
            Um = [[_mpf(x) for x in row] for row in U]
            Up[idx[0]][idx[1]] += hh
            Um[idx[0]][idx[1]] -= hh
            grad[idx] = float((fun(Up) - fun(Um)) / (2 * hh))
        return grad
