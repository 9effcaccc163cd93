# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled rollout-cost kernel.

Mirrors ``cinewild._pykernels`` operation for operation. Parameter offsets
must match ``cinewild._layout.NAMES``; ``LAYOUT`` is checked by the tests.
"""

from libc.math cimport sqrt, exp, sin, cos, remainder, M_PI

LAYOUT = (
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

cdef enum:
    P_DT = 0
    P_WPROX = 1
    P_WFOV = 2
    P_WSOFT = 3
    P_WIM = 4
    P_WD = 5
    P_WR = 6
    P_DAC = 7
    P_DSF = 8
    P_DVIS = 9
    P_WAC = 10
    P_WSF = 11
    P_CM = 12
    P_EFX = 13
    P_EFY = 14
    P_ECU = 15
    P_ECV = 16
    P_ES = 17
    P_EW = 18
    P_EH = 19
    P_CBX = 20
    P_CBY = 21
    P_CCU = 22
    P_CCV = 23
    P_CS = 24
    P_IMU = 25
    P_IMV = 26
    P_DSTAR = 27
    P_USED = 28
    P_USER = 29
    P_EXT = 30
    P_BEHIND = 31
    P_AMAX = 32
    P_OMAX = 33
    P_VMAX = 34
    P_PLO = 35
    P_PHI = 36
    P_FMIN = 37
    P_FMAX = 38
    P_VFMAX = 39
    P_ZMIN = 40
    P_RSTAR = 41
    P_RSMOOTH = 50

cdef double DEPTH_EPS = 1e-6


cdef inline double wrap(double a) noexcept nogil:
    cdef double w = remainder(a, 2.0 * M_PI)
    if w <= -M_PI:
        w += 2.0 * M_PI
    return w


cdef inline double clip(double x, double lo, double hi) noexcept nogil:
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


cdef inline void euler_rot(double roll, double pitch, double yaw, double* R) noexcept nogil:
    cdef double cr = cos(roll), sr = sin(roll)
    cdef double cp = cos(pitch), sp = sin(pitch)
    cdef double cy = cos(yaw), sy = sin(yaw)
    R[0] = cy * cp
    R[1] = cy * sp * sr - sy * cr
    R[2] = cy * sp * cr + sy * sr
    R[3] = sy * cp
    R[4] = sy * sp * sr + cy * cr
    R[5] = sy * sp * cr - cy * sr
    R[6] = -sp
    R[7] = cp * sr
    R[8] = cp * cr


cdef void rollout_one(
    const double[:, ::1] u,
    const double[::1] x0,
    const double[:, ::1] tgt_p,
    const double[:, :, ::1] tgt_R,
    const double[:, ::1] kp,
    const double[::1] P,
    double* total,
    double[:, ::1] stages,
    bint want_stages,
) noexcept nogil:
    cdef int N = u.shape[0]
    cdef int K = kp.shape[0]
    cdef int k, i, j, q
    cdef double px = x0[0], py = x0[1], pz = x0[2]
    cdef double vx = x0[3], vy = x0[4], vz = x0[5]
    cdef double gr = x0[6], gp = x0[7], gy = x0[8]
    cdef double f = x0[9]
    cdef double dt = P[P_DT]
    cdef double ax, ay, az, wx, wy, wz, vf, n, s
    cdef double dx, dy, dz, d, jprox, jfov, jsoft, jim, jp
    cdef double bx, by, bz, uu, vv, du, dv, W, H, dmax
    cdef double Rd[9]
    cdef double Rt[9]
    cdef double wpt[3]
    cdef double cu_sum, cv_sum, u0 = 0.0, v0 = 0.0, u1 = 0.0, v1 = 0.0
    cdef bint behind
    cdef double acc = 0.0
    cdef double m, fro

    for k in range(N):
        # input projection
        ax = u[k, 0]; ay = u[k, 1]; az = u[k, 2]
        n = sqrt(ax * ax + ay * ay + az * az)
        if n > P[P_AMAX]:
            s = P[P_AMAX] / n
            ax = ax * s; ay = ay * s; az = az * s
        wx = clip(u[k, 3], -P[P_OMAX], P[P_OMAX])
        wy = clip(u[k, 4], -P[P_OMAX], P[P_OMAX])
        wz = clip(u[k, 5], -P[P_OMAX], P[P_OMAX])
        vf = clip(u[k, 6], -P[P_VFMAX], P[P_VFMAX])

        # explicit Euler
        px = px + dt * vx; py = py + dt * vy; pz = pz + dt * vz
        vx = vx + dt * ax; vy = vy + dt * ay; vz = vz + dt * az
        gr = wrap(gr + dt * wx); gp = wrap(gp + dt * wy); gy = wrap(gy + dt * wz)
        f = f + dt * vf

        # state projection
        if pz < P[P_ZMIN]:
            pz = P[P_ZMIN]
        n = sqrt(vx * vx + vy * vy + vz * vz)
        if n > P[P_VMAX]:
            s = P[P_VMAX] / n
            vx = vx * s; vy = vy * s; vz = vz * s
        gp = clip(gp, P[P_PLO], P[P_PHI])
        f = clip(f, P[P_FMIN], P[P_FMAX])

        for q in range(9):
            Rt[q] = tgt_R[k, q // 3, q % 3]
        dx = px - tgt_p[k, 0]; dy = py - tgt_p[k, 1]; dz = pz - tgt_p[k, 2]
        d = sqrt(dx * dx + dy * dy + dz * dz)

        # proximity
        if d >= P[P_DAC]:
            jprox = P[P_WPROX] * exp(-0.5 * (d - P[P_DAC]))
        elif d >= P[P_DSF]:
            jprox = P[P_WPROX] * (P[P_WAC] * (d - P[P_DAC]) * (d - P[P_DAC]) + 1.0)
        else:
            jprox = P[P_WPROX] * (P[P_WSF] * (d - P[P_DSF]) * (d - P[P_DSF]) + P[P_CM])

        # animal visibility
        jfov = 0.0
        if P[P_WFOV] != 0.0 and d < P[P_DVIS]:
            bx = Rt[0] * dx + Rt[3] * dy + Rt[6] * dz
            by = Rt[1] * dx + Rt[4] * dy + Rt[7] * dz
            bz = Rt[2] * dx + Rt[5] * dy + Rt[8] * dz
            if bx > DEPTH_EPS:
                uu = P[P_EFX] * (-by / bx) + P[P_ES] * (-bz / bx) + P[P_ECU]
                vv = P[P_EFY] * (-bz / bx) + P[P_ECV]
                W = P[P_EW]; H = P[P_EH]
                if uu >= 0.0 and uu <= W and vv >= 0.0 and vv <= H:
                    dmax = sqrt(P[P_ECU] * P[P_ECU] + P[P_ECV] * P[P_ECV])
                    du = uu - P[P_ECU]; dv = vv - P[P_ECV]
                    m = sqrt(du * du + dv * dv) / dmax
                    jfov = P[P_WFOV] * exp(-m * m)
                else:
                    m = 0.0
                    if uu > W:
                        m = m + (uu - W) * (uu - W)
                    if uu < 0.0:
                        m = m + uu * uu
                    if vv > H:
                        m = m + (vv - H) * (vv - H)
                    if vv < 0.0:
                        m = m + vv * vv
                    jfov = P[P_WFOV] * m

        jsoft = P[P_WSOFT] * (ax * ax + ay * ay + az * az)

        euler_rot(gr, gp, gy, Rd)

        # framing
        jim = 0.0
        if P[P_WIM] != 0.0:
            behind = False
            cu_sum = 0.0; cv_sum = 0.0
            for i in range(K):
                for j in range(3):
                    wpt[j] = tgt_p[k, j] + Rt[3 * j] * kp[i, 0] + Rt[3 * j + 1] * kp[i, 1] + Rt[3 * j + 2] * kp[i, 2]
                dx = wpt[0] - px; dy = wpt[1] - py; dz = wpt[2] - pz
                bx = Rd[0] * dx + Rd[3] * dy + Rd[6] * dz
                by = Rd[1] * dx + Rd[4] * dy + Rd[7] * dz
                bz = Rd[2] * dx + Rd[5] * dy + Rd[8] * dz
                if bx <= DEPTH_EPS:
                    behind = True
                    break
                uu = P[P_CBX] * f * (-by / bx) + P[P_CS] * (-bz / bx) + P[P_CCU]
                vv = P[P_CBY] * f * (-bz / bx) + P[P_CCV]
                if i == 0:
                    u0 = uu; v0 = vv
                else:
                    u1 = uu; v1 = vv
                cu_sum = cu_sum + uu
                cv_sum = cv_sum + vv
            if behind:
                jim = P[P_BEHIND]
            else:
                du = cu_sum / K - P[P_IMU]
                dv = cv_sum / K - P[P_IMV]
                m = 0.0
                if P[P_EXT] >= 0.0 and K == 2:
                    m = sqrt((u0 - u1) * (u0 - u1) + (v0 - v1) * (v0 - v1)) - P[P_EXT]
                jim = P[P_WIM] * (du * du + dv * dv + m * m)

        # perspective
        jp = 0.0
        if P[P_USED] != 0.0:
            jp = jp + P[P_WD] * (d - P[P_DSTAR]) * (d - P[P_DSTAR])
        if P[P_USER] != 0.0:
            # (R_d^T R_t)^T = R_t^T R_d
            fro = 0.0
            for i in range(3):
                for j in range(3):
                    m = Rt[i] * Rd[j] + Rt[3 + i] * Rd[3 + j] + Rt[6 + i] * Rd[6 + j] - P[P_RSTAR + 3 * i + j]
                    fro = fro + m * m
            # R_smooth > 0 rounds off the kink of the norm at R = R*; 0 is exact.
            jp = jp + P[P_WR] * (sqrt(fro + P[P_RSMOOTH] * P[P_RSMOOTH]) - P[P_RSMOOTH])

        acc = acc + (jprox + jfov + jsoft + jim + jp)
        if want_stages:
            stages[k, 0] = jprox
            stages[k, 1] = jfov
            stages[k, 2] = jsoft
            stages[k, 3] = jim
            stages[k, 4] = jp

    total[0] = acc


def batch_rollout(
    const double[:, :, ::1] U,
    const double[::1] x0,
    const double[:, ::1] tgt_p,
    const double[:, :, ::1] tgt_R,
    const double[:, ::1] kp,
    const double[::1] params,
    double[::1] out,
    double[:, :, ::1] stages=None,
    Py_ssize_t start=0,
    Py_ssize_t stop=-1,
):
    """Total cost of each input sequence ``U[s]`` for ``s`` in ``[start, stop)``."""
    cdef Py_ssize_t s
    cdef bint want = stages is not None
    cdef double[:, ::1] dummy
    if stop < 0:
        stop = U.shape[0]
    if not want:
        dummy = None
    with nogil:
        for s in range(start, stop):
            if want:
                rollout_one(U[s], x0, tgt_p, tgt_R, kp, params, &out[s], stages[s], True)
            else:
                rollout_one(U[s], x0, tgt_p, tgt_R, kp, params, &out[s], dummy, False)
