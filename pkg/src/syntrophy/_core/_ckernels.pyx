# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the Monod product family.

Mirrors ``_pykernels`` step for step: same bisection, same Dormand-Prince
tableau, same step-size controller and exit codes.  The growth law is
inlined, so only ``monod_product`` models are routed here.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, pow, INFINITY, NAN, isfinite
from libc.stdlib cimport malloc, realloc, free

cnp.import_array()

cdef double GRAPH_TOL = 1e-12
cdef int GRAPH_MAX_ITER = 200
cdef double SAFETY = 0.9
cdef double MIN_FAC = 0.2
cdef double MAX_FAC = 10.0
cdef double ALPHA = 0.7 / 5
cdef double BETA = 0.4 / 5
cdef double STAB_LIMIT = 2.5

cdef enum:
    EXIT_T_END = 0
    EXIT_CONVERGED = 1
    EXIT_FAILED = 2
    EXIT_LEFT_REGION = 3
    EXIT_ARC_CAP = 4

cdef struct Monod:
    double m1, K1, L1, m2, K2, L2, s1in, s2in, D, direction

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40

# dense output weights, row k = stage k
cdef double PD[28]
PD[:] = [
    1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432,
    0.0, 0.0, 0.0, 0.0,
    0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799,
    0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072,
    0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632,
    0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844,
    0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423,
]


cdef inline double _f1(const Monod* p, double s1, double s2) noexcept nogil:
    return p.m1 * s1 / ((p.K1 + s1) * (p.L1 + s2))

cdef inline double _f2(const Monod* p, double s1, double s2) noexcept nogil:
    return p.m2 * s2 / ((p.K2 + s2) * (p.L2 + s1))

cdef inline double _rate(const Monod* p, int which, double s1, double s2) noexcept nogil:
    if which == 1:
        return _f1(p, s1, s2)
    return _f2(p, s1, s2)


cdef Monod _unpack(double[::1] prm, double D, double direction):
    cdef Monod p
    if prm.shape[0] != 8:
        raise ValueError("expected [m1, K1, L1, m2, K2, L2, s1in, s2in]")
    p.m1 = prm[0]; p.K1 = prm[1]; p.L1 = prm[2]
    p.m2 = prm[3]; p.K2 = prm[4]; p.L2 = prm[5]
    p.s1in = prm[6]; p.s2in = prm[7]
    p.D = D
    p.direction = direction
    return p


cdef double _graph_value(const Monod* p, int which, double D, double x1) noexcept nogil:
    cdef double s1 = p.s1in - x1
    cdef double base = p.s2in + x1
    cdef double lo = 0.0, hi = base, mid
    cdef double glo = _rate(p, which, s1, base) - D
    cdef double ghi = _rate(p, which, s1, 0.0) - D
    cdef double sgn = 1.0 if which == 1 else -1.0
    cdef int it
    if sgn * glo > 0.0 or sgn * ghi < 0.0:
        return NAN
    if glo == 0.0:
        return 0.0
    if ghi == 0.0:
        return hi
    for it in range(GRAPH_MAX_ITER):
        if hi - lo <= GRAPH_TOL:
            break
        mid = 0.5 * (lo + hi)
        if sgn * (_rate(p, which, s1, base - mid) - D) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def graph_value(double[::1] prm, int which, double D, double x1):
    cdef Monod p = _unpack(prm, D, 1.0)
    return _graph_value(&p, which, D, x1)


def graph_values(double[::1] prm, int which, double D, double[::1] xs):
    cdef Monod p = _unpack(prm, D, 1.0)
    cdef Py_ssize_t i, n = xs.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _graph_value(&p, which, D, xs[i])
    return out


cdef inline void _field(const Monod* p, int dim, const double* y, double* f) noexcept nogil:
    cdef double s1, s2, g1, g2
    if dim == 2:
        s1 = p.s1in - y[0]
        s2 = p.s2in + y[0] - y[1]
        f[0] = p.direction * (_f1(p, s1, s2) - p.D) * y[0]
        f[1] = p.direction * (_f2(p, s1, s2) - p.D) * y[1]
    else:
        g1 = _f1(p, y[0], y[2]) * y[1]
        g2 = _f2(p, y[0], y[2]) * y[3]
        f[0] = p.direction * (p.D * (p.s1in - y[0]) - g1)
        f[1] = p.direction * (g1 - p.D * y[1])
        f[2] = p.direction * (p.D * (p.s2in - y[2]) - g2 + g1)
        f[3] = p.direction * (g2 - p.D * y[3])


cdef struct Buffer:
    double* data
    Py_ssize_t n
    Py_ssize_t cap
    int width

cdef int _push(Buffer* b, double t, const double* y) noexcept nogil:
    cdef Py_ssize_t newcap
    cdef double* d
    cdef int j
    if b.n == b.cap:
        newcap = 2 * b.cap + 64
        d = <double*> realloc(b.data, newcap * b.width * sizeof(double))
        if d == NULL:
            return -1
        b.data = d
        b.cap = newcap
    b.data[b.n * b.width] = t
    for j in range(b.width - 1):
        b.data[b.n * b.width + 1 + j] = y[j]
    b.n += 1
    return 0


cdef inline double _norm(int dim, const double* v) noexcept nogil:
    cdef double s = 0.0
    cdef int j
    for j in range(dim):
        s += v[j] * v[j]
    return sqrt(s)


cdef inline double _rms_scaled(int dim, const double* v, const double* sc) noexcept nogil:
    cdef double s = 0.0
    cdef int j
    for j in range(dim):
        s += (v[j] / sc[j]) * (v[j] / sc[j])
    return sqrt(s / dim)


cdef double _region_exit(const double* y, const double* yn, double s1in, double s2in) noexcept nogil:
    """Chord fraction where y -> yn leaves the closed region; -1 when it stays."""
    cdef double g0[4]
    cdef double gn[4]
    cdef double th = 1.0
    cdef int i
    cdef bint inside0 = True, outside = False
    g0[0] = y[0]; g0[1] = y[1]; g0[2] = s1in - y[0]; g0[3] = y[0] + s2in - y[1]
    gn[0] = yn[0]; gn[1] = yn[1]; gn[2] = s1in - yn[0]; gn[3] = yn[0] + s2in - yn[1]
    for i in range(4):
        if gn[i] < 0.0:
            outside = True
        if g0[i] < 0.0:
            inside0 = False
    if not outside:
        return -1.0
    if not inside0:
        return 0.0
    for i in range(4):
        if gn[i] < 0.0:
            if g0[i] / (g0[i] - gn[i]) < th:
                th = g0[i] / (g0[i] - gn[i])
    return th


cdef struct Settle:
    const double* targets
    const double* radii
    const double* speeds
    int n_targets
    double stop_speed


cdef inline int _settled(const Settle* s, int dim, const double* y, double speed) noexcept nogil:
    cdef int i, a, b
    cdef double dx, dy
    if s.n_targets == 0:
        if s.stop_speed > 0.0 and speed < s.stop_speed:
            return -1
        return -2
    if dim == 2:
        a = 0; b = 1
    else:
        a = 1; b = 3
    for i in range(s.n_targets):
        dx = y[a] - s.targets[2 * i]
        dy = y[b] - s.targets[2 * i + 1]
        if sqrt(dx * dx + dy * dy) < s.radii[i] and speed < s.speeds[i]:
            return i
    return -2


cdef int _run(const Monod* p, int dim, double* y, double* t_out, double t_end,
              double rtol, double atol, const Settle* st, long max_steps, double max_step,
              bint region, double arc_cap, bint clip,
              Buffer* rec, const double* t_eval, Py_ssize_t n_eval,
              int* hit, double* speed_out) noexcept nogil:
    cdef double K[7][4]
    cdef double yi[4]
    cdef double yn[4]
    cdef double sc[4]
    cdef double tmp[4]
    cdef double t = 0.0, h, err, err_prev = 1e-4, fac, d0, d1, d2, h0, h1, m
    cdef double sden, snum, h_stab
    cdef double arclen = 0.0, th, t_new, speed, acc, bm, seg, pw1, pw2, pw3, pw4, ymin
    cdef bint rejected = False, last
    cdef long steps = 0
    cdef Py_ssize_t ei = 0
    cdef int j, k, status = EXIT_T_END, hh

    hit[0] = -1
    if rec != NULL:
        if t_eval == NULL:
            if _push(rec, 0.0, y) < 0:
                return EXIT_FAILED
        else:
            while ei < n_eval and t_eval[ei] <= 0.0:
                if _push(rec, t_eval[ei], y) < 0:
                    return EXIT_FAILED
                ei += 1

    _field(p, dim, y, K[0])
    speed = _norm(dim, K[0])
    hh = _settled(st, dim, y, speed)
    if hh != -2:
        hit[0] = hh
        speed_out[0] = speed
        t_out[0] = 0.0
        return EXIT_CONVERGED
    if t_end <= 0.0:
        speed_out[0] = speed
        t_out[0] = 0.0
        return EXIT_T_END

    # initial step
    for j in range(dim):
        sc[j] = atol + rtol * fabs(y[j])
    d0 = _rms_scaled(dim, y, sc)
    d1 = _rms_scaled(dim, K[0], sc)
    if d0 >= 1e-5 and d1 >= 1e-5:
        h0 = 0.01 * d0 / d1
    else:
        h0 = 1e-6
    for j in range(dim):
        yi[j] = y[j] + h0 * K[0][j]
    _field(p, dim, yi, K[1])
    for j in range(dim):
        tmp[j] = (K[1][j] - K[0][j])
    d2 = _rms_scaled(dim, tmp, sc) / h0
    m = d1 if d1 > d2 else d2
    if m > 1e-15:
        h1 = pow(0.01 / m, 0.2)
    else:
        h1 = 1e-6 if 1e-6 > h0 * 1e-3 else h0 * 1e-3
    h = 100.0 * h0
    if h1 < h:
        h = h1
    if t_end < h:
        h = t_end
    if h > max_step:
        h = max_step

    while True:
        if steps >= max_steps:
            status = EXIT_FAILED
            break
        if h <= 1e-14 * (t if t > 1.0 else 1.0):
            status = EXIT_FAILED
            break
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        for j in range(dim):
            yi[j] = y[j] + h * A21 * K[0][j]
        _field(p, dim, yi, K[1])
        for j in range(dim):
            yi[j] = y[j] + h * (A31 * K[0][j] + A32 * K[1][j])
        _field(p, dim, yi, K[2])
        for j in range(dim):
            yi[j] = y[j] + h * (A41 * K[0][j] + A42 * K[1][j] + A43 * K[2][j])
        _field(p, dim, yi, K[3])
        for j in range(dim):
            yi[j] = y[j] + h * (A51 * K[0][j] + A52 * K[1][j] + A53 * K[2][j] + A54 * K[3][j])
        _field(p, dim, yi, K[4])
        for j in range(dim):
            yi[j] = y[j] + h * (A61 * K[0][j] + A62 * K[1][j] + A63 * K[2][j] + A64 * K[3][j] + A65 * K[4][j])
        _field(p, dim, yi, K[5])
        for j in range(dim):
            yn[j] = y[j] + h * (B1 * K[0][j] + B3 * K[2][j] + B4 * K[3][j] + B5 * K[4][j] + B6 * K[5][j])
        _field(p, dim, yn, K[6])
        err = 0.0
        for j in range(dim):
            acc = h * (E1 * K[0][j] + E3 * K[2][j] + E4 * K[3][j] + E5 * K[4][j] + E6 * K[5][j] + E7 * K[6][j])
            sc[j] = atol + rtol * (fabs(y[j]) if fabs(y[j]) > fabs(yn[j]) else fabs(yn[j]))
            err += (acc / sc[j]) * (acc / sc[j])
        err = sqrt(err / dim)
        sden = 0.0
        snum = 0.0
        for j in range(dim):
            sden += (yn[j] - yi[j]) * (yn[j] - yi[j])
            snum += (K[6][j] - K[5][j]) * (K[6][j] - K[5][j])
        h_stab = INFINITY
        if sden > 0.0 and snum > 0.0:
            h_stab = STAB_LIMIT * sqrt(sden / snum)
        if err > 1.0 or not isfinite(err):
            if not isfinite(err):
                fac = MIN_FAC
            else:
                fac = SAFETY * pow(err, -0.2)
                if fac < MIN_FAC:
                    fac = MIN_FAC
            h *= fac
            rejected = True
            steps += 1
            continue
        if clip:
            ymin = yn[0]
            for j in range(1, dim):
                if yn[j] < ymin:
                    ymin = yn[j]
            if ymin < -atol:
                h *= 0.5
                rejected = True
                steps += 1
                continue
            if ymin < 0.0:
                for j in range(dim):
                    if yn[j] < 0.0:
                        yn[j] = 0.0
                _field(p, dim, yn, K[6])
        steps += 1
        t_new = t_end if last else t + h

        if region:
            th = _region_exit(y, yn, p.s1in, p.s2in)
            if th >= 0.0:
                seg = 0.0
                for j in range(dim):
                    tmp[j] = y[j] + th * (yn[j] - y[j])
                    seg += (yn[j] - y[j]) * (yn[j] - y[j])
                arclen += th * sqrt(seg)
                t = t + th * h
                for j in range(dim):
                    y[j] = tmp[j]
                if rec != NULL:
                    if _push(rec, t, y) < 0:
                        return EXIT_FAILED
                _field(p, dim, y, tmp)
                speed = _norm(dim, tmp)
                status = EXIT_LEFT_REGION
                break

        if rec != NULL and t_eval != NULL:
            while ei < n_eval and t_eval[ei] <= t_new:
                th = (t_eval[ei] - t) / h
                pw1 = th; pw2 = th * th; pw3 = pw2 * th; pw4 = pw3 * th
                for j in range(dim):
                    acc = 0.0
                    for k in range(7):
                        bm = PD[4 * k] * pw1 + PD[4 * k + 1] * pw2 + PD[4 * k + 2] * pw3 + PD[4 * k + 3] * pw4
                        acc += bm * K[k][j]
                    tmp[j] = y[j] + h * acc
                if _push(rec, t_eval[ei], tmp) < 0:
                    return EXIT_FAILED
                ei += 1

        seg = 0.0
        for j in range(dim):
            seg += (yn[j] - y[j]) * (yn[j] - y[j])
        arclen += sqrt(seg)
        t = t_new
        for j in range(dim):
            y[j] = yn[j]
            K[0][j] = K[6][j]
        speed = _norm(dim, K[0])
        if rec != NULL and t_eval == NULL:
            if _push(rec, t, y) < 0:
                return EXIT_FAILED

        if err == 0.0:
            fac = MAX_FAC
        else:
            fac = SAFETY * pow(err, -ALPHA) * pow(err_prev, BETA)
            if fac < MIN_FAC:
                fac = MIN_FAC
            if fac > MAX_FAC:
                fac = MAX_FAC
        if rejected and fac > 1.0:
            fac = 1.0
        err_prev = err if err > 1e-4 else 1e-4
        rejected = False

        hh = _settled(st, dim, y, speed)
        if hh != -2:
            hit[0] = hh
            status = EXIT_CONVERGED
            break
        if arclen >= arc_cap:
            status = EXIT_ARC_CAP
            break
        if last:
            break
        h *= fac
        if h > max_step:
            h = max_step
        if h > h_stab:
            h = h_stab
    speed_out[0] = speed
    t_out[0] = t
    return status


cdef object _as_targets(targets, radii, speeds):
    if targets is None or len(targets) == 0:
        return (np.zeros(2, dtype=np.float64), np.zeros(1, dtype=np.float64),
                np.zeros(1, dtype=np.float64), 0)
    tg = np.ascontiguousarray(targets, dtype=np.float64).reshape(-1)
    rd = np.ascontiguousarray(radii, dtype=np.float64)
    sp = np.ascontiguousarray(speeds, dtype=np.float64)
    return tg, rd, sp, rd.shape[0]


def integrate(double[::1] prm, double D, y0, double t_end, double rtol, double atol, *,
              double direction=1.0, t_eval=None, targets=None, radii=None, speeds=None,
              double stop_speed=0.0, long max_steps=1000000, double max_step=INFINITY, bint region=False,
              double arc_cap=INFINITY, bint clip=True, bint record=True):
    """Single trajectory; same contract as ``_pykernels.integrate``."""
    cdef Monod p = _unpack(prm, D, direction)
    cdef double[::1] yv = np.array(y0, dtype=np.float64)
    cdef int dim = yv.shape[0]
    if dim != 2 and dim != 4:
        raise ValueError("state must have 2 or 4 components")
    tg, rd, sp, nt = _as_targets(targets, radii, speeds)
    cdef double[::1] tgv = tg
    cdef double[::1] rdv = rd
    cdef double[::1] spv = sp
    cdef Settle st
    st.targets = &tgv[0]
    st.radii = &rdv[0]
    st.speeds = &spv[0]
    st.n_targets = nt
    st.stop_speed = stop_speed
    cdef double[::1] tev
    cdef const double* tep = NULL
    cdef Py_ssize_t n_eval = 0
    if t_eval is not None:
        tev = np.ascontiguousarray(t_eval, dtype=np.float64)
        n_eval = tev.shape[0]
        if n_eval > 0:
            tep = &tev[0]
    cdef Buffer buf
    buf.data = NULL
    buf.n = 0
    buf.cap = 0
    buf.width = dim + 1
    cdef int hit = -1, status
    cdef double speed = 0.0, t_fin = 0.0
    cdef Buffer* bp = &buf if record else NULL
    with nogil:
        status = _run(&p, dim, &yv[0], &t_fin, t_end, rtol, atol, &st, max_steps, max_step,
                      region, arc_cap, clip, bp, tep, n_eval, &hit, &speed)
    try:
        if record:
            if buf.n > 0:
                arr = np.asarray(<double[:buf.n * buf.width]> buf.data).copy().reshape(buf.n, buf.width)
            else:
                arr = np.empty((0, buf.width))
            ts = arr[:, 0].tolist()
            ys = arr[:, 1:].tolist()
        else:
            ts = [t_fin]
            ys = [list(yv)]
    finally:
        free(buf.data)
    return ts, ys, status, hit, speed


def integrate_batch(double[::1] prm, double D, Y0, double t_end, double rtol, double atol, *,
                    targets=None, radii=None, speeds=None, double stop_speed=0.0,
                    long max_steps=1000000, double max_step=INFINITY, bint clip=True):
    """Final states of many trajectories; the loop runs without the GIL.

    Returns ``(finals, status, hit, t_final, speed)`` arrays.
    """
    cdef Monod p = _unpack(prm, D, 1.0)
    finals = np.array(Y0, dtype=np.float64, order="C", copy=True)
    if finals.ndim != 2 or finals.shape[1] not in (2, 4):
        raise ValueError("Y0 must have shape (n, 2) or (n, 4)")
    cdef double[:, ::1] F = finals
    cdef Py_ssize_t n = finals.shape[0], i
    cdef int dim = finals.shape[1]
    status_arr = np.zeros(n, dtype=np.int32)
    hit_arr = np.full(n, -1, dtype=np.int32)
    tf_arr = np.zeros(n, dtype=np.float64)
    sp_arr = np.zeros(n, dtype=np.float64)
    cdef int[::1] S = status_arr
    cdef int[::1] H = hit_arr
    cdef double[::1] TF = tf_arr
    cdef double[::1] SP = sp_arr
    tg, rd, sp, nt = _as_targets(targets, radii, speeds)
    cdef double[::1] tgv = tg
    cdef double[::1] rdv = rd
    cdef double[::1] spv = sp
    cdef Settle st
    st.targets = &tgv[0]
    st.radii = &rdv[0]
    st.speeds = &spv[0]
    st.n_targets = nt
    st.stop_speed = stop_speed
    cdef int hit
    cdef double speed, t_fin
    with nogil:
        for i in range(n):
            S[i] = _run(&p, dim, &F[i, 0], &t_fin, t_end, rtol, atol, &st, max_steps, max_step,
                        False, INFINITY, clip, NULL, NULL, 0, &hit, &speed)
            H[i] = hit
            TF[i] = t_fin
            SP[i] = speed
    return finals, status_arr, hit_arr, tf_arr, sp_arr
