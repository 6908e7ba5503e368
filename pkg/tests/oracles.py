"""Slow, independent reference implementations used only by the tests.

Nothing here imports the package: each oracle rebuilds its object from the
textbook definition.
"""

from collections import deque
import itertools
import math

import numpy as np


# -- cubical persistence -------------------------------------------------------

def elementary_cubes(m, n):
    """All cubes of [0,m]x[0,n] as pairs of intervals (lo, hi), hi in {lo, lo+1}."""
    def intervals(k):
        return [(a, a) for a in range(k + 1)] + [(a, a + 1) for a in range(k)]
    return [(I, J) for I in intervals(m) for J in intervals(n)]


def cube_dim(q):
    return sum(hi - lo for lo, hi in q)


def cube_value(grid, q):
    """Min over the squares containing the cube."""
    (i0, i1), (j0, j1) = q
    m, n = grid.shape
    best = math.inf
    for a in range(m):
        for b in range(n):
            if a <= i0 and i1 <= a + 1 and b <= j0 and j1 <= b + 1:
                best = min(best, grid[a, b])
    return best


def primary_faces(q):
    faces = []
    for axis in range(2):
        lo, hi = q[axis]
        if hi > lo:
            for x in (lo, hi):
                f = list(q)
                f[axis] = (x, x)
                faces.append(tuple(f))
    return faces


def _filtered_complex(grid, tie_key):
    grid = np.asarray(grid, dtype=float)
    cubes = elementary_cubes(*grid.shape)
    vals = {q: cube_value(grid, q) for q in cubes}
    cubes.sort(key=lambda q: (vals[q], cube_dim(q), tie_key(q)))
    return cubes, vals


def naive_reduction_diagram(grid, dim=1, tie_key=lambda q: q):
    """Dense Z2 boundary matrix, plain left-to-right reduction, no optimisations."""
    cubes, vals = _filtered_complex(grid, tie_key)
    index = {q: k for k, q in enumerate(cubes)}
    N = len(cubes)
    D = np.zeros((N, N), dtype=np.uint8)
    for j, q in enumerate(cubes):
        for f in primary_faces(q):
            D[index[f], j] = 1

    def low(col):
        nz = np.flatnonzero(col)
        return nz[-1] if nz.size else -1

    lows = {}
    pairs = []
    paired = set()
    for j in range(N):
        col = D[:, j]
        L = low(col)
        while L >= 0 and L in lows:
            col ^= D[:, lows[L]]
            L = low(col)
        if L >= 0:
            lows[L] = j
            paired.update((L, j))
            if cube_dim(cubes[L]) == dim:
                pairs.append((vals[cubes[L]], vals[cubes[j]]))
    for k, q in enumerate(cubes):
        if k not in paired and cube_dim(q) == dim:
            pairs.append((vals[q], math.inf))
    return sorted((b, d) for b, d in pairs if b < d)


def _gf2_rank(M):
    M = np.array(M, dtype=np.uint8) % 2
    rows, cols = M.shape
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if M[i, c]), None)
        if pivot is None:
            continue
        M[[r, pivot]] = M[[pivot, r]]
        for i in range(rows):
            if i != r and M[i, c]:
                M[i] ^= M[r]
        r += 1
        if r == rows:
            break
    return r


def _gf2_nullspace(M):
    """Basis (as rows) of {x : M x = 0} over GF(2)."""
    M = np.array(M, dtype=np.uint8) % 2
    rows, cols = M.shape
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if M[i, c]), None)
        if pivot is None:
            continue
        M[[r, pivot]] = M[[pivot, r]]
        for i in range(rows):
            if i != r and M[i, c]:
                M[i] ^= M[r]
        pivots.append(c)
        r += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        x = np.zeros(cols, dtype=np.uint8)
        x[f] = 1
        for i, p in enumerate(pivots):
            x[p] = M[i, f]
        basis.append(x)
    return np.array(basis, dtype=np.uint8).reshape(-1, cols)


def rank_diagram_h1(grid):
    """Dimension-1 diagram from ranks of inclusion-induced maps.

    beta(a, b) = dim image(H1(K_a) -> H1(K_b)) = dim(Z1(K_a) + B1(K_b)) - dim B1(K_b);
    multiplicities follow by inclusion-exclusion over the distinct values.
    """
    grid = np.asarray(grid, dtype=float)
    cubes = elementary_cubes(*grid.shape)
    vals = {q: cube_value(grid, q) for q in cubes}
    verts = [q for q in cubes if cube_dim(q) == 0]
    edges = [q for q in cubes if cube_dim(q) == 1]
    squares = [q for q in cubes if cube_dim(q) == 2]
    vi = {q: k for k, q in enumerate(verts)}
    ei = {q: k for k, q in enumerate(edges)}
    d1 = np.zeros((len(verts), len(edges)), dtype=np.uint8)
    for k, e in enumerate(edges):
        for f in primary_faces(e):
            d1[vi[f], k] = 1
    d2 = np.zeros((len(edges), len(squares)), dtype=np.uint8)
    for k, s in enumerate(squares):
        for f in primary_faces(s):
            d2[ei[f], k] = 1

    levels = sorted(set(vals.values()))

    def cycles(a):
        sel = [k for k, e in enumerate(edges) if vals[e] <= a]
        if not sel:
            return np.zeros((0, len(edges)), dtype=np.uint8)
        ns = _gf2_nullspace(d1[:, sel])
        Z = np.zeros((ns.shape[0], len(edges)), dtype=np.uint8)
        Z[:, sel] = ns
        return Z

    def boundaries(b):
        sel = [k for k, s in enumerate(squares) if vals[s] <= b]
        return d2[:, sel].T

    def beta(i, j):
        if i < 0:
            return 0
        Z = cycles(levels[i])
        B = boundaries(levels[j])
        if Z.shape[0] == 0:
            return 0
        return _gf2_rank(np.vstack([B, Z])) - _gf2_rank(B) if B.shape[0] else _gf2_rank(Z)

    L = len(levels)
    B = {(i, j): beta(i, j) for i in range(-1, L) for j in range(max(i, 0), L)}
    B.update({(-1, j): 0 for j in range(L)})
    pairs = []
    for i in range(L):
        for j in range(i + 1, L):
            mult = B[i, j - 1] - B[i, j] - B[i - 1, j - 1] + B[i - 1, j]
            assert mult >= 0
            pairs += [(levels[i], levels[j])] * mult
    assert B[L - 1, L - 1] == 0  # no essential loops in a filled rectangle
    return sorted(pairs)


# -- distance transform and morphology ------------------------------------------

def bfs_chebyshev(mask):
    """Multi-source BFS from every 0 pixel over 8-connected unit steps."""
    mask = np.asarray(mask, dtype=bool)
    rows, cols = mask.shape
    dist = np.full(mask.shape, -1, dtype=np.int64)
    q = deque()
    for i, j in zip(*np.nonzero(~mask)):
        dist[i, j] = 0
        q.append((i, j))
    while q:
        i, j = q.popleft()
        for di, dj in itertools.product((-1, 0, 1), repeat=2):
            a, b = i + di, j + dj
            if 0 <= a < rows and 0 <= b < cols and dist[a, b] < 0:
                dist[a, b] = dist[i, j] + 1
                q.append((a, b))
    return dist


def brute_chebyshev(mask):
    """All-pairs minimum Chebyshev distance to a 0 pixel."""
    mask = np.asarray(mask, dtype=bool)
    zeros = np.argwhere(~mask)
    out = np.zeros(mask.shape, dtype=np.int64)
    for i, j in np.ndindex(mask.shape):
        out[i, j] = np.max(np.abs(zeros - (i, j)), axis=1).min()
    return out


def _offsets(kr, kc):
    ar, ac = (kr - 1) // 2, (kc - 1) // 2
    return [(dr, dc) for dr in range(-ar, kr - ar) for dc in range(-ac, kc - ac)]


def brute_erode(b, kr, kc):
    b = np.asarray(b, dtype=bool)
    rows, cols = b.shape
    out = np.zeros_like(b)
    for i, j in np.ndindex(b.shape):
        out[i, j] = all(0 <= i + dr < rows and 0 <= j + dc < cols and b[i + dr, j + dc]
                        for dr, dc in _offsets(kr, kc))
    return out


def brute_dilate(b, kr, kc):
    """1 where some kernel placement covering the pixel contains a 1."""
    b = np.asarray(b, dtype=bool)
    rows, cols = b.shape
    out = np.zeros_like(b)
    for i, j in np.ndindex(b.shape):
        out[i, j] = any(0 <= i - dr < rows and 0 <= j - dc < cols and b[i - dr, j - dc]
                        for dr, dc in _offsets(kr, kc))
    return out


# -- spectral ---------------------------------------------------------------

def naive_dft(f):
    f = np.asarray(f, dtype=np.complex128)
    N = f.size
    k = np.arange(N)
    return np.array([np.sum(f * np.exp(-2j * np.pi * n * k / N)) for n in range(N)])


def naive_idft(F):
    F = np.asarray(F, dtype=np.complex128)
    N = F.size
    n = np.arange(N)
    return np.array([np.sum(F * np.exp(2j * np.pi * n * k / N)) / N for k in range(N)])
