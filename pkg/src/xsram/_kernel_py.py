"""Pure numpy fallback for the bit-line integration kernel.

Vectorized over nodes and paths; loops only over time steps and the
series-chain bisection. Must stay numerically equivalent to ``_kernel.pyx``.
"""

import numpy as np

IMPL = "python"


def _current(vgs, vds, vt, w, k, alpha, derate):
    vov = vgs - vt
    on = (vov > 0.0) & (vds > 0.0)
    vov_c = np.where(on, vov, 1.0)
    isat = k * w * vov_c ** alpha * derate
    lin = np.where(vds < vov_c, isat * vds / vov_c, isat)
    return np.where(on, lin, 0.0)


def _chain_current(v, rail, ndev, g_n, vt_n, w_n, g_f, vt_f, w_f,
                   k, alpha, derate, n_bisect):
    hi = np.maximum(v, rail)
    lo = np.minimum(v, rail)
    # near device sits on the node side; it is the top device when discharging
    node_high = v >= rail
    g_top = np.where(node_high, g_n, g_f)
    vt_top = np.where(node_high, vt_n, vt_f)
    w_top = np.where(node_high, w_n, w_f)
    g_bot = np.where(node_high, g_f, g_n)
    vt_bot = np.where(node_high, vt_f, vt_n)
    w_bot = np.where(node_high, w_f, w_n)

    single = _current(g_n - lo, hi - lo, vt_n, w_n, k, alpha, derate)

    a = lo.copy()
    b = hi.copy()
    for _ in range(n_bisect):
        x = 0.5 * (a + b)
        i_top = _current(g_top - x, hi - x, vt_top, w_top, k, alpha, derate)
        i_bot = _current(g_bot - lo, x - lo, vt_bot, w_bot, k, alpha, derate)
        up = i_top > i_bot
        a = np.where(up, x, a)
        b = np.where(up, b, x)
    x = 0.5 * (a + b)
    i_top = _current(g_top - x, hi - x, vt_top, w_top, k, alpha, derate)
    i_bot = _current(g_bot - lo, x - lo, vt_bot, w_bot, k, alpha, derate)
    pair = np.minimum(i_top, i_bot)

    cur = np.where(ndev == 1, single, np.where(ndev == 2, pair, 0.0))
    return np.where(node_high, -cur, cur)


def integrate(v0, rail, ndev, g_n, vt_n, w_n, g_f, vt_f, w_f,
              nsteps, dt, c_node, k, alpha, derate, vmin, vmax,
              max_dv, n_bisect, record):
    """Explicit-Euler integration of ``N`` independent capacitive nodes.

    ``rail``, ``ndev`` and the device arrays are shaped ``(N, P)``; path
    ``p`` of node ``n`` is a chain of ``ndev[n, p]`` (0, 1 or 2) NMOS
    devices between the node and ``rail[n, p]``. Returns the final
    voltages, the full ``(nsteps + 1, N)`` trace (or None), and the index
    of the first step that violated ``max_dv`` (-1 if none).
    """
    v = np.array(v0, dtype=np.float64, copy=True)
    trace = np.empty((nsteps + 1, v.shape[0])) if record else None
    if record:
        trace[0] = v
    scale = dt / c_node
    bad = -1
    for step in range(nsteps):
        vb = v[:, None]
        i_in = _chain_current(vb, rail, ndev, g_n, vt_n, w_n, g_f, vt_f, w_f,
                              k, alpha, derate, n_bisect).sum(axis=1)
        dv = i_in * scale
        if bad < 0 and np.any(np.abs(dv) > max_dv):
            bad = step
        v = np.clip(v + dv, vmin, vmax)
        if record:
            trace[step + 1] = v
    return v, trace, bad
