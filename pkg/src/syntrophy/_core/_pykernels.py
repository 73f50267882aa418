"""Pure-Python kernels.

Reference implementation of everything in ``_ckernels.pyx``.  It works with
any growth family through a ``rate(which, s1, s2)`` callable and is used when
the compiled extension is unavailable or the family is not Monod-type.
"""
import math

import numpy as np

EXIT_T_END = 0
EXIT_CONVERGED = 1
EXIT_FAILED = 2
EXIT_LEFT_REGION = 3
EXIT_ARC_CAP = 4

GRAPH_TOL = 1e-12
GRAPH_MAX_ITER = 200

# Dormand-Prince 5(4) tableau
C = (0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0)
A = (
    (),
    (1.0 / 5,),
    (3.0 / 40, 9.0 / 40),
    (44.0 / 45, -56.0 / 15, 32.0 / 9),
    (19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729),
    (9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656),
    (35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84),
)
B = (35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0)
E = (71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525, -1.0 / 40)
# dense output: y(t + th*h) = y + h * sum_k K_k * (P[k] . [th, th^2, th^3, th^4])
P = (
    (1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799),
    (0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072),
    (0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632),
    (0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844),
    (0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423),
)

SAFETY = 0.9
MIN_FAC = 0.2
MAX_FAC = 10.0
ALPHA = 0.7 / 5
BETA = 0.4 / 5
# keeps |R(h lambda)| of the fifth-order method near 0.24 on the real axis
STAB_LIMIT = 2.5


def graph_value(rate, s1in, s2in, which, D, x1):
    """x2 with Phi_which(x1, x2) = D on [0, x1 + s2in], or nan."""
    s1 = s1in - x1
    base = s2in + x1
    lo = 0.0
    hi = base
    glo = rate(which, s1, base) - D
    ghi = rate(which, s1, 0.0) - D
    # Phi_1 increases with x2, Phi_2 decreases
    sgn = 1.0 if which == 1 else -1.0
    if sgn * glo > 0.0 or sgn * ghi < 0.0:
        return math.nan
    if glo == 0.0:
        return 0.0
    if ghi == 0.0:
        return hi
    for _ in range(GRAPH_MAX_ITER):
        if hi - lo <= GRAPH_TOL:
            break
        mid = 0.5 * (lo + hi)
        if sgn * (rate(which, s1, base - mid) - D) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def graph_values(rate, s1in, s2in, which, D, xs):
    return np.array([graph_value(rate, s1in, s2in, which, D, float(x)) for x in xs])


def reduced_field(rate, s1in, s2in, D):
    def field(y):
        x1, x2 = y
        s1 = s1in - x1
        s2 = s2in + x1 - x2
        return [(rate(1, s1, s2) - D) * x1, (rate(2, s1, s2) - D) * x2]
    return field


def full_field(rate, s1in, s2in, D):
    def field(y):
        s1, x1, s2, x2 = y
        g1 = rate(1, s1, s2) * x1
        g2 = rate(2, s1, s2) * x2
        return [D * (s1in - s1) - g1, g1 - D * x1, D * (s2in - s2) - g2 + g1, g2 - D * x2]
    return field


def _rms(v):
    return math.sqrt(sum(a * a for a in v) / len(v))


def _initial_step(field, y, f0, rtol, atol, direction, t_end):
    sc = [atol + rtol * abs(a) for a in y]
    d0 = _rms([a / s for a, s in zip(y, sc)])
    d1 = _rms([a / s for a, s in zip(f0, sc)])
    h0 = 0.01 * d0 / d1 if d0 >= 1e-5 and d1 >= 1e-5 else 1e-6
    y1 = [a + h0 * direction * b for a, b in zip(y, f0)]
    f1 = field(y1)
    d2 = _rms([(a - b) * direction / s for a, b, s in zip(f1, f0, sc)]) / h0
    m = max(d1, d2)
    h1 = (0.01 / m) ** 0.2 if m > 1e-15 else max(1e-6, h0 * 1e-3)
    return min(100.0 * h0, h1, t_end)


def _stability_cap(yn, y6, kn, k6):
    """Largest step keeping ``h * rho`` below ``STAB_LIMIT``.

    ``rho`` estimates the Jacobian norm from the last two stages, which are
    taken at the same time; inf when they coincide.
    """
    den = math.sqrt(sum((a - b) ** 2 for a, b in zip(yn, y6)))
    if den == 0.0:
        return math.inf
    num = math.sqrt(sum((a - b) ** 2 for a, b in zip(kn, k6)))
    return math.inf if num == 0.0 else STAB_LIMIT * den / num


def _region_exit(y, yn, s1in, s2in):
    """Chord fraction at which the segment y -> yn leaves the closed region, or None."""
    def gaps(p):
        # all nonnegative inside
        return (p[0], p[1], s1in - p[0], p[0] + s2in - p[1])
    gn = gaps(yn)
    if min(gn) >= 0.0:
        return None
    g0 = gaps(y)
    th = 1.0
    for a, b in zip(g0, gn):
        if b < 0.0 and a >= 0.0:
            th = min(th, a / (a - b))
    if all(a >= 0.0 for a in g0):
        return th
    return 0.0


def integrate(field, y0, t_end, rtol, atol, *, direction=1.0, t_eval=None,
              targets=None, radii=None, speeds=None, stop_speed=0.0,
              max_steps=1_000_000, max_step=math.inf, region=None, arc_cap=math.inf, clip=True,
              record=True):
    """Adaptive Dormand-Prince integration of an autonomous field.

    Returns ``(ts, ys, status, hit, final_speed)``.  ``hit`` is the index of
    the settled target (or -1).  Times are integration times, always
    increasing, also when ``direction`` is -1.
    """
    dim = len(y0)
    pos = (0, 1) if dim == 2 else (1, 3)
    y = [float(a) for a in y0]

    def rhs(v):
        f = field(v)
        if direction != 1.0:
            f = [direction * a for a in f]
        return f

    t = 0.0
    ts, ys = [], []
    eval_pts = None if t_eval is None else [float(a) for a in t_eval]
    ei = 0
    if record:
        if eval_pts is None:
            ts.append(0.0)
            ys.append(list(y))
        else:
            while ei < len(eval_pts) and eval_pts[ei] <= 0.0:
                ts.append(eval_pts[ei])
                ys.append(list(y))
                ei += 1

    k1 = rhs(y)
    speed = math.sqrt(sum(a * a for a in k1))
    status = EXIT_T_END
    hit = -1

    def settled(v, spd):
        if targets is None or len(targets) == 0:
            return (stop_speed > 0.0 and spd < stop_speed), -1
        for i in range(len(targets)):
            dx = v[pos[0]] - targets[i][0]
            dy = v[pos[1]] - targets[i][1]
            if math.sqrt(dx * dx + dy * dy) < radii[i] and spd < speeds[i]:
                return True, i
        return False, -1

    ok, hit = settled(y, speed)
    if ok:
        return ts, ys, EXIT_CONVERGED, hit, speed
    if t_end <= 0.0:
        return ts, ys, status, hit, speed

    h = min(_initial_step(rhs, y, k1, rtol, atol, 1.0, t_end), max_step)
    err_prev = 1e-4
    rejected = False
    arclen = 0.0
    steps = 0
    K = [k1] + [None] * 6
    while True:
        if steps >= max_steps:
            status = EXIT_FAILED
            break
        if h <= 1e-14 * max(1.0, t):
            status = EXIT_FAILED
            break
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        for s in range(1, 7):
            a = A[s]
            yi = [y[j] + h * sum(a[m] * K[m][j] for m in range(s)) for j in range(dim)]
            if s == 5:
                y6 = yi
            K[s] = rhs(yi)
        yn = [y[j] + h * sum(B[m] * K[m][j] for m in range(6)) for j in range(dim)]
        sq = 0.0
        for j in range(dim):
            e = h * sum(E[m] * K[m][j] for m in range(7))
            sc = atol + rtol * max(abs(y[j]), abs(yn[j]))
            sq += (e / sc) ** 2
        err = math.sqrt(sq / dim)
        if err > 1.0 or not math.isfinite(err):
            fac = MIN_FAC if not math.isfinite(err) else max(MIN_FAC, SAFETY * err ** -0.2)
            h *= fac
            rejected = True
            steps += 1
            continue
        h_stab = _stability_cap(yn, y6, K[6], K[5])
        knew = K[6]
        if clip:
            if min(yn) < -atol:
                h *= 0.5
                rejected = True
                steps += 1
                continue
            if min(yn) < 0.0:
                yn = [max(a, 0.0) for a in yn]
                knew = rhs(yn)
        steps += 1
        t_new = t_end if last else t + h

        if region is not None:
            th = _region_exit(y, yn, region[0], region[1])
            if th is not None:
                yb = [a + th * (b - a) for a, b in zip(y, yn)]
                arclen += th * math.sqrt(sum((b - a) ** 2 for a, b in zip(y, yn)))
                t = t + th * h
                y = yb
                if record:
                    ts.append(t)
                    ys.append(list(y))
                speed = math.sqrt(sum(a * a for a in rhs(y)))
                status = EXIT_LEFT_REGION
                break

        if record and eval_pts is not None:
            while ei < len(eval_pts) and eval_pts[ei] <= t_new:
                th = (eval_pts[ei] - t) / h
                pw = (th, th * th, th ** 3, th ** 4)
                yo = []
                for j in range(dim):
                    acc = 0.0
                    for m in range(7):
                        bm = P[m][0] * pw[0] + P[m][1] * pw[1] + P[m][2] * pw[2] + P[m][3] * pw[3]
                        acc += bm * K[m][j]
                    yo.append(y[j] + h * acc)
                ts.append(eval_pts[ei])
                ys.append(yo)
                ei += 1

        arclen += math.sqrt(sum((b - a) ** 2 for a, b in zip(y, yn)))
        t = t_new
        y = yn
        K[0] = knew
        speed = math.sqrt(sum(a * a for a in knew))
        if record and eval_pts is None:
            ts.append(t)
            ys.append(list(y))

        if err == 0.0:
            fac = MAX_FAC
        else:
            fac = min(MAX_FAC, max(MIN_FAC, SAFETY * err ** -ALPHA * err_prev ** BETA))
        if rejected:
            fac = min(fac, 1.0)
        err_prev = max(err, 1e-4)
        rejected = False

        ok, hit = settled(y, speed)
        if ok:
            status = EXIT_CONVERGED
            break
        if arclen >= arc_cap:
            status = EXIT_ARC_CAP
            break
        if last:
            break
        h = min(h * fac, max_step, h_stab)
    if not record:
        ts, ys = [t], [list(y)]
    return ts, ys, status, hit, speed
