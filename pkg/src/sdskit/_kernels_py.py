"""Pure numpy implementations of the cosine-measure kernels.

These mirror the compiled versions in ``_kernels.pyx`` function for function
and are used whenever the extension is not built.
"""

import itertools

import numpy as np

_CHUNK = 32768


def exact_candidates(D, cond_max):
    """Scan every linearly independent subset of rows of ``D``.

    For a subset ``B`` of size ``k <= n`` the candidate is the unit vector in
    ``span(B)`` making equal inner products with every row of ``B``, taken
    with both signs.  Subsets of size ``n - 1`` also contribute the two unit
    normals of their span.  Candidates are visited in the order
    (size, lexicographic subset, +v, -v, +u, -u) and the first strict minimum
    of ``max_d <cand, d>`` wins.

    Returns
    -------
    best_value : float
    best_vector : ndarray of shape (n,)
    full_rank_subsets : int
        Number of independent subsets of size ``n`` seen.
    """
    D = np.ascontiguousarray(D, dtype=np.float64)
    p, n = D.shape
    best_value = np.inf
    best_vector = np.zeros(n)
    full_rank = 0
    cond2 = cond_max * cond_max
    for k in range(1, n + 1):
        combos = itertools.combinations(range(p), k)
        while True:
            block = np.fromiter(
                itertools.chain.from_iterable(itertools.islice(combos, _CHUNK)),
                dtype=np.intp,
            )
            if block.size == 0:
                break
            idx = block.reshape(-1, k)
            B = D[idx]  # (m, k, n)
            G = B @ B.transpose(0, 2, 1)
            w, Q = np.linalg.eigh(G)
            ok = (w[:, 0] > 0) & (w[:, -1] <= cond2 * w[:, 0])
            if not ok.any():
                continue
            B, w, Q = B[ok], w[ok], Q[ok]
            if k == n:
                full_rank += B.shape[0]
            # y = G^{-1} 1 through the eigendecomposition
            qt1 = Q.sum(axis=1)  # Q^T 1, shape (m, k)
            y = np.einsum("mij,mj->mi", Q, qt1 / w)
            v = np.einsum("mkn,mk->mn", B, y)
            v /= np.linalg.norm(v, axis=1)[:, None]
            proj = v @ D.T
            cands = [v, -v]
            vals = [proj.max(axis=1), -proj.min(axis=1)]
            if k == n - 1:
                Ginv = np.einsum("mij,mj,mlj->mil", Q, 1.0 / w, Q)
                # diagonal of I - B^T G^{-1} B, pick the best-conditioned column
                GB = Ginv @ B  # (m, k, n)
                diagP = 1.0 - np.einsum("mkn,mkn->mn", B, GB)
                j = np.argmax(diagP, axis=1)
                rows = np.arange(B.shape[0])
                u = -np.einsum("mkn,mk->mn", B, GB[rows, :, j])
                u[rows, j] += 1.0
                u /= np.linalg.norm(u, axis=1)[:, None]
                pu = u @ D.T
                cands += [u, -u]
                vals += [pu.max(axis=1), -pu.min(axis=1)]
            table = np.stack(vals, axis=1)  # (m, c) in visiting order
            flat = int(np.argmin(table))
            value = float(table.flat[flat])
            if value < best_value:
                row, col = divmod(flat, table.shape[1])
                best_value = value
                best_vector = cands[col][row].copy()
    return best_value, best_vector, full_rank


def sampled_minmax(D, V):
    """Return ``(min_i max_d <V[i], d>, argmin i)`` with the first index on ties."""
    vals = (np.asarray(V, dtype=np.float64) @ np.asarray(D, dtype=np.float64).T).max(axis=1)
    i = int(np.argmin(vals))
    return float(vals[i]), i


def max_inner(D, v):
    """Return ``(argmax_d <v, d>, max)`` with the lowest index on ties."""
    vals = np.asarray(D) @ np.asarray(v)
    i = int(np.argmax(vals))
    return i, float(vals[i])
