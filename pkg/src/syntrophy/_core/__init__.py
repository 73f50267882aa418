"""Backend selection for the numerical kernels.

The compiled extension handles the ``monod_product`` family; everything else,
or every model when ``SYNTROPHY_PURE_PYTHON`` is set, goes through the
pure-Python kernels.  ``BACKEND`` names the backend picked at import.
"""
import math
import os

import numpy as np

from . import _pykernels as py
from ._pykernels import (EXIT_ARC_CAP, EXIT_CONVERGED, EXIT_FAILED,  # noqa: F401
                         EXIT_LEFT_REGION, EXIT_T_END)

try:
    if os.environ.get("SYNTROPHY_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _ckernels as ck
    BACKEND = "compiled"
except ImportError:
    ck = None
    BACKEND = "python"


def _compiled(model, force_python):
    return ck is not None and not force_python and model.family == "monod_product"


def _rate_fn(model):
    from ..growth import get_family
    fam = get_family(model.family)
    p = model.params
    value = fam.value
    return lambda which, s1, s2: value(which, s1, s2, p)


def _prm(model, config):
    return np.array(model.params + (config.s1_in, config.s2_in), dtype=np.float64)


def graph_value(model, config, which, D, x1, *, force_python=False):
    if _compiled(model, force_python):
        return ck.graph_value(_prm(model, config), which, D, float(x1))
    return py.graph_value(_rate_fn(model), config.s1_in, config.s2_in, which, D, float(x1))


def graph_values(model, config, which, D, xs, *, force_python=False):
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if _compiled(model, force_python):
        return ck.graph_values(_prm(model, config), which, D, xs)
    return py.graph_values(_rate_fn(model), config.s1_in, config.s2_in, which, D, xs)


def field(model, config, D, dim):
    """Python callable for the reduced (dim 2) or full (dim 4) vector field."""
    make = py.reduced_field if dim == 2 else py.full_field
    return make(_rate_fn(model), config.s1_in, config.s2_in, D)


def integrate(model, config, D, y0, t_end, rtol, atol, *, force_python=False, **kw):
    """One trajectory; returns ``(ts, ys, status, hit, final_speed)``."""
    if _compiled(model, force_python):
        kw.setdefault("arc_cap", math.inf)
        return ck.integrate(_prm(model, config), D, y0, t_end, rtol, atol, **kw)
    region = kw.pop("region", False)
    reg = (config.s1_in, config.s2_in) if region else None
    return py.integrate(field(model, config, D, len(y0)), y0, t_end, rtol, atol,
                        region=reg, **kw)


def integrate_batch(model, config, D, Y0, t_end, rtol, atol, *, force_python=False, **kw):
    """Final states of many trajectories: ``(finals, status, hit, t_final, speed)``."""
    Y0 = np.asarray(Y0, dtype=np.float64)
    if _compiled(model, force_python):
        return ck.integrate_batch(_prm(model, config), D, Y0, t_end, rtol, atol, **kw)
    n = Y0.shape[0]
    finals = np.empty_like(Y0)
    status = np.zeros(n, dtype=np.int32)
    hit = np.full(n, -1, dtype=np.int32)
    tf = np.zeros(n)
    sp = np.zeros(n)
    f = field(model, config, D, Y0.shape[1]) if n else None
    for i in range(n):
        ts, ys, status[i], hit[i], sp[i] = py.integrate(f, Y0[i], t_end, rtol, atol,
                                                        record=False, **kw)
        finals[i] = ys[-1]
        tf[i] = ts[-1]
    return finals, status, hit, tf, sp
