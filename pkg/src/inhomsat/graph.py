"""Compressed adjacency and iterative strongly connected components."""

from __future__ import annotations

from collections import deque

import numpy as np


def csr(n: int, tails, heads) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(indptr, indices)`` with successors of node ``u`` in
    ``indices[indptr[u]:indptr[u + 1]]``, in ascending order."""
    tails = np.asarray(tails, dtype=np.int64)
    heads = np.asarray(heads, dtype=np.int64)
    order = np.lexsort((heads, tails))
    counts = np.bincount(tails, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, heads[order]


def tarjan_scc(n: int, indptr, indices) -> tuple[np.ndarray, int]:
    """Strong components of a digraph given in CSR form.

    Returns ``(comp, count)``. Components are numbered in the order Tarjan's
    lowlink method closes them, which is a reverse topological order of the
    condensation: every arc ``u -> v`` satisfies ``comp[u] >= comp[v]``.
    Uses an explicit stack so depth is bounded only by memory.
    """
    ptr = indptr.tolist() if isinstance(indptr, np.ndarray) else list(indptr)
    adj = indices.tolist() if isinstance(indices, np.ndarray) else list(indices)
    index = [-1] * n
    low = [0] * n
    comp = [-1] * n
    on_stack = [False] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        work = [(root, ptr[root])]
        while work:
            v, i = work[-1]
            end = ptr[v + 1]
            descended = False
            while i < end:
                w = adj[i]
                i += 1
                if index[w] == -1:
                    work[-1] = (v, i)
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, ptr[w]))
                    descended = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            work.pop()
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
    return np.asarray(comp, dtype=np.int64), ncomp


def bfs_path(indptr, indices, source: int, target: int, allowed=None, banned=None) -> list[int] | None:
    """Shortest path ``source -> ... -> target`` (inclusive), or None.

    ``allowed`` restricts intermediate and end nodes to a set; ``banned``
    excludes nodes. A path from a node to itself has length >= 1.
    """
    parent: dict[int, int] = {}
    queue = deque([source])
    seen = {source} if source != target else set()
    while queue:
        u = queue.popleft()
        for w in indices[indptr[u]:indptr[u + 1]]:
            w = int(w)
            if allowed is not None and w not in allowed:
                continue
            if banned is not None and w in banned:
                continue
            if w == target:
                path = [target, u]
                while path[-1] != source:
                    path.append(parent[path[-1]])
                return path[::-1]
            if w in seen:
                continue
            seen.add(w)
            parent[w] = u
            queue.append(w)
    return None
