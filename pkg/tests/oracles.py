"""Independent oracles used across the test suite.

These implement the expected one-step population update directly from the
per-group balance bookkeeping (who leaves, who arrives), not the closed-form
recursions under test. Steady states are found by iterating the update to a
fixed point, so agreement with the library is evidence, not tautology.
"""

import numpy as np


def expected_update_plain(props, survival):
    """Expected next distribution of the plain process.

    First group: keeps its own dead (replaced in place), loses survivors,
    gains every other group's dead. Intermediate group i: emptied entirely,
    refilled by survivors of i-1. Last group: keeps survivors, loses dead,
    gains survivors of the previous group.
    """
    n = np.asarray(props, dtype=float)
    p = np.asarray(survival, dtype=float)
    out = np.empty_like(n)
    out[0] = n[0] - p[0] * n[0] + np.sum((1.0 - p[1:]) * n[1:])
    for i in range(1, len(n) - 1):
        out[i] = p[i - 1] * n[i - 1]
    out[-1] = n[-1] - (1.0 - p[-1]) * n[-1] + p[-2] * n[-2]
    return out


def expected_update_activated(props, survival, activation):
    """Expected next distribution of the activation-rate process.

    Inactive agents are untouched; active agents follow the plain rules.
    """
    n = np.asarray(props, dtype=float)
    p = np.asarray(survival, dtype=float)
    a = np.asarray(activation, dtype=float)
    out = np.empty_like(n)
    out[0] = n[0] - a[0] * p[0] * n[0] + np.sum(a[1:] * (1.0 - p[1:]) * n[1:])
    for i in range(1, len(n) - 1):
        out[i] = n[i] - a[i] * n[i] + a[i - 1] * p[i - 1] * n[i - 1]
    out[-1] = (
        n[-1] - a[-1] * (1.0 - p[-1]) * n[-1] + a[-2] * p[-2] * n[-2]
    )
    return out


def fixed_point(update, n_groups, tol=1e-14, max_iter=2_000_000):
    """Iterate the half-lazy map x -> (x + update(x)) / 2 from uniform.

    The averaging keeps the same fixed points but also converges for
    periodic corner cases (all intermediate survivals 1 with last survival
    0 turns the raw update into a pure cycle).
    """
    x = np.full(n_groups, 1.0 / n_groups)
    for _ in range(max_iter):
        nxt = 0.5 * (x + update(x))
        nxt = nxt / nxt.sum()
        if np.abs(nxt - x).sum() < tol:
            return nxt
        x = nxt
    raise AssertionError("oracle iteration did not converge")
