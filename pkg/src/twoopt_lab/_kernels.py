"""Compiled inner loops for the 2-Opt engine.

Tours are int64 arrays in canonical form: ``t[0] == 0`` and
``t[1] < t[n-1]``. Edge ``i`` is ``(t[i], t[(i+1) % n])``. A move ``(i, j)``
with ``i < j`` removes edges ``i`` and ``j`` and reverses ``t[i+1..j]``;
vertex 0 never moves, so only the orientation has to be restored.
"""

from numba import njit

MODE_FIRST = 0
MODE_BEST = 1

# replay_script failure codes
OK = 0
SHARED_VERTEX = 1
EDGE_MISSING = 2
NOT_IMPROVING = 3


@njit(cache=True)
def tour_length(t, D):
    n = t.shape[0]
    s = 0.0
    for k in range(n - 1):
        s += D[t[k], t[k + 1]]
    s += D[t[n - 1], t[0]]
    return s


@njit(cache=True)
def move_delta(t, D, i, j):
    n = t.shape[0]
    a = t[i]
    b = t[i + 1]
    c = t[j]
    d = t[(j + 1) % n]
    return D[a, b] + D[c, d] - D[a, c] - D[b, d]


@njit(cache=True)
def first_improving(t, D, eps):
    n = t.shape[0]
    for i in range(n - 2):
        a = t[i]
        b = t[i + 1]
        dab = D[a, b]
        jmax = n - 1 if i > 0 else n - 2
        for j in range(i + 2, jmax + 1):
            c = t[j]
            d = t[(j + 1) % n]
            delta = dab + D[c, d] - D[a, c] - D[b, d]
            if delta > eps:
                return i, j, delta
    return -1, -1, 0.0


@njit(cache=True)
def best_improving(t, D, eps):
    n = t.shape[0]
    bi = -1
    bj = -1
    best = eps
    for i in range(n - 2):
        a = t[i]
        b = t[i + 1]
        dab = D[a, b]
        jmax = n - 1 if i > 0 else n - 2
        for j in range(i + 2, jmax + 1):
            c = t[j]
            d = t[(j + 1) % n]
            delta = dab + D[c, d] - D[a, c] - D[b, d]
            if delta > best:
                best = delta
                bi = i
                bj = j
    if bi < 0:
        return -1, -1, 0.0
    return bi, bj, best


@njit(cache=True)
def all_improving(t, D, eps, out_i, out_j, out_d):
    n = t.shape[0]
    k = 0
    for i in range(n - 2):
        a = t[i]
        b = t[i + 1]
        dab = D[a, b]
        jmax = n - 1 if i > 0 else n - 2
        for j in range(i + 2, jmax + 1):
            c = t[j]
            d = t[(j + 1) % n]
            delta = dab + D[c, d] - D[a, c] - D[b, d]
            if delta > eps:
                out_i[k] = i
                out_j[k] = j
                out_d[k] = delta
                k += 1
    return k


@njit(cache=True)
def _reverse(t, lo, hi):
    while lo < hi:
        tmp = t[lo]
        t[lo] = t[hi]
        t[hi] = tmp
        lo += 1
        hi -= 1


@njit(cache=True)
def apply_move(t, i, j):
    n = t.shape[0]
    _reverse(t, i + 1, j)
    if t[1] > t[n - 1]:
        _reverse(t, 1, n - 1)


@njit(cache=True)
def run_greedy(t, D, eps, mode, max_steps, out_edges, out_delta, out_len):
    """Apply up to ``max_steps`` moves in place.

    Returns ``(steps, at_local_opt)``.
    """
    n = t.shape[0]
    for s in range(max_steps):
        if mode == MODE_FIRST:
            i, j, delta = first_improving(t, D, eps)
        else:
            i, j, delta = best_improving(t, D, eps)
        if i < 0:
            return s, True
        out_edges[s, 0] = t[i]
        out_edges[s, 1] = t[i + 1]
        out_edges[s, 2] = t[j]
        out_edges[s, 3] = t[(j + 1) % n]
        out_delta[s] = delta
        apply_move(t, i, j)
        out_len[s] = tour_length(t, D)
    if mode == MODE_FIRST:
        i, j, delta = first_improving(t, D, eps)
    else:
        i, j, delta = best_improving(t, D, eps)
    return max_steps, i < 0


@njit(cache=True)
def _edge_index(t, pos, a, b):
    n = t.shape[0]
    pa = pos[a]
    pb = pos[b]
    if (pa + 1) % n == pb:
        return pa
    if (pb + 1) % n == pa:
        return pb
    return -1


@njit(cache=True)
def _rebuild_pos(t, pos, lo, hi):
    for k in range(lo, hi + 1):
        pos[t[k]] = k


@njit(cache=True)
def replay_script(t, pos, D, moves, eps, out_edges, out_delta, out_len):
    """Replay label-addressed moves in place.

    Returns ``(applied, code)``. On failure ``out_delta[applied]`` holds the
    offending delta when it could be computed.
    """
    n = t.shape[0]
    m = moves.shape[0]
    for s in range(m):
        a = moves[s, 0]
        b = moves[s, 1]
        c = moves[s, 2]
        d = moves[s, 3]
        if a == b or a == c or a == d or b == c or b == d or c == d:
            return s, SHARED_VERTEX
        if a < 0 or b < 0 or c < 0 or d < 0 or a >= n or b >= n or c >= n or d >= n:
            return s, EDGE_MISSING
        e1 = _edge_index(t, pos, a, b)
        e2 = _edge_index(t, pos, c, d)
        if e1 < 0 or e2 < 0:
            return s, EDGE_MISSING
        i = min(e1, e2)
        j = max(e1, e2)
        delta = move_delta(t, D, i, j)
        out_delta[s] = delta
        if not delta > eps:
            return s, NOT_IMPROVING
        out_edges[s, 0] = t[i]
        out_edges[s, 1] = t[i + 1]
        out_edges[s, 2] = t[j]
        out_edges[s, 3] = t[(j + 1) % n]
        _reverse(t, i + 1, j)
        _rebuild_pos(t, pos, i + 1, j)
        if t[1] > t[n - 1]:
            _reverse(t, 1, n - 1)
            _rebuild_pos(t, pos, 1, n - 1)
        out_len[s] = tour_length(t, D)
    return m, OK

