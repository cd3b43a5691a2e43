# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Bellman sweep kernel. Mirrors _sweep_py.sweep exactly:
same backup convention, same lowest-command-id tie break."""

import numpy as np
cimport numpy as cnp

BACKEND = "cython"


def sweep(values, tensors):
    t = tensors
    cdef double[:, :, :, ::1] V = np.ascontiguousarray(values)
    cdef double[:, :, ::1] trans = np.ascontiguousarray(t.trans)
    cdef double[:, :, ::1] imm = np.ascontiguousarray(t.imm)
    cdef int[::1] axis_of = np.ascontiguousarray(t.axis_of, dtype=np.int32)
    cdef int[::1] prev_of = np.ascontiguousarray(t.prev_of, dtype=np.int32)
    cdef int[::1] prev_axis = np.ascontiguousarray(t.prev_axis, dtype=np.int32)
    cdef double gamma = t.gamma
    cdef double goal = t.goal_reward
    cdef int c0 = t.center
    cdef int n = t.n_cells
    cdef int n_prev = V.shape[0]
    cdef int n_actions = trans.shape[0]

    best_np = np.full(values.shape, -np.inf)
    best_a_np = np.full(values.shape, -1, np.int16)
    ev_np = np.empty((n, n, n))
    cdef double[:, :, :, ::1] best = best_np
    cdef short[:, :, :, ::1] best_a = best_a_np
    cdef double[:, :, ::1] ev = ev_np

    cdef int a, p, pa, axis, z, y, x, i, j, k
    cdef double s, pij, q, base
    cdef double[:, :, ::1] vp

    for a in range(n_actions):
        axis = axis_of[a]
        vp = V[prev_of[a]]
        ev[:, :, :] = 0.0
        if axis == 0:
            for z in range(n):
                for y in range(n):
                    for i in range(n):
                        s = 0.0
                        for j in range(n):
                            s += trans[a, i, j] * vp[z, y, j]
                        ev[z, y, i] = s
            for i in range(n):
                ev[c0, c0, i] += goal * trans[a, i, c0]
        elif axis == 1:
            for z in range(n):
                for i in range(n):
                    for j in range(n):
                        pij = trans[a, i, j]
                        if pij == 0.0:
                            continue
                        for x in range(n):
                            ev[z, i, x] += pij * vp[z, j, x]
            for i in range(n):
                ev[c0, i, c0] += goal * trans[a, i, c0]
        else:
            for i in range(n):
                for j in range(n):
                    pij = trans[a, i, j]
                    if pij == 0.0:
                        continue
                    for y in range(n):
                        for x in range(n):
                            ev[i, y, x] += pij * vp[j, y, x]
            for i in range(n):
                ev[i, c0, c0] += goal * trans[a, i, c0]

        for p in range(n_prev):
            pa = prev_axis[p]
            for z in range(n):
                for y in range(n):
                    for x in range(n):
                        if pa == 0:
                            k = x
                        elif pa == 1:
                            k = y
                        elif pa == 2:
                            k = z
                        else:
                            k = 0
                        q = imm[a, p, k] + gamma * ev[z, y, x]
                        if q > best[p, z, y, x]:
                            best[p, z, y, x] = q
                            best_a[p, z, y, x] = a
    return best_np, best_a_np
