"""Numpy fallback for the Bellman sweep kernel.

Semantics shared with the compiled kernel in _sweep.pyx: one synchronous
sweep over all states, returning the maximized value table and the greedy
action table (ties broken by lowest command id). Immediate shaping terms are
undiscounted; the goal reward and successor value are received at arrival
and discounted once.
"""
from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def sweep(values: np.ndarray, tensors) -> tuple[np.ndarray, np.ndarray]:
    """values: [n_prev, n, n, n] indexed (prev, z, y, x)."""
    t = tensors
    n = t.n_cells
    c0 = t.center
    n_prev = values.shape[0]
    n_actions = t.trans.shape[0]

    best = np.full_like(values, -np.inf)
    best_a = np.full(values.shape, -1, np.int16)
    for a in range(n_actions):
        P = t.trans[a]
        axis = int(t.axis_of[a])
        vp = values[int(t.prev_of[a])]
        if axis == 0:
            ev = vp @ P.T
            ev[c0, c0, :] += t.goal_reward * P[:, c0]
        elif axis == 1:
            ev = np.einsum("ij,zjx->zix", P, vp)
            ev[c0, :, c0] += t.goal_reward * P[:, c0]
        else:
            ev = np.einsum("ij,jyx->iyx", P, vp)
            ev[:, c0, c0] += t.goal_reward * P[:, c0]
        ev *= t.gamma
        for p in range(n_prev):
            pa = int(t.prev_axis[p])
            if pa < 0:
                q = ev + t.imm[a, p, 0]
            else:
                shape = [1, 1, 1]
                shape[2 - pa] = n  # value dims are (z, y, x)
                q = ev + t.imm[a, p].reshape(shape)
            better = q > best[p]
            best[p][better] = q[better]
            best_a[p][better] = a
    return best, best_a
