"""Array kernels for partition refinement and reachability.

Each kernel has a numba ``@njit`` implementation and a pure-numpy one with
identical results. Set ``PAIRWISE_NF_DISABLE_JIT=1`` to force the numpy path
(numba is also skipped if it fails to import).
"""

import os

import numpy as np

_DISABLED = os.environ.get("PAIRWISE_NF_DISABLE_JIT", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("disabled by PAIRWISE_NF_DISABLE_JIT")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f


def csr(n, src, dst, lab):
    """Group edges by ``src``: returns (indptr, dst, lab) sorted by (src, lab, dst)."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    lab = np.asarray(lab, dtype=np.int64)
    order = np.lexsort((dst, lab, src))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    return np.cumsum(indptr), dst[order], lab[order]


def canonical_blocks(block):
    """Renumber blocks by first occurrence so equal partitions compare equal."""
    _, first, inverse = np.unique(block, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.reshape(-1)]


# --------------------------------------------------------------------------
# partition refinement


@njit(cache=True)
def _refine_nb(n, rev_indptr, rev_src, rev_lab, n_labels, block0):
    """Worklist refinement over a refinable partition: the members of block b
    are ``elems[first[b]:end[b]]``, and while a splitter is processed the
    marked members of b sit at the front of that range."""
    block = block0.copy()
    nblocks = 0
    for s in range(n):
        if block[s] + 1 > nblocks:
            nblocks = block[s] + 1
    first = np.zeros(n + 1, dtype=np.int64)
    end = np.zeros(n + 1, dtype=np.int64)
    for s in range(n):
        end[block[s]] += 1
    acc = 0
    for b in range(nblocks):
        first[b] = acc
        acc += end[b]
        end[b] = first[b]
    elems = np.empty(n, dtype=np.int64)
    loc = np.empty(n, dtype=np.int64)
    for s in range(n):
        b = block[s]
        elems[end[b]] = s
        loc[s] = end[b]
        end[b] += 1
    marked = np.zeros(n + 1, dtype=np.int64)
    queue = np.empty(3 * n + 2, dtype=np.int64)
    in_queue = np.zeros(n + 1, dtype=np.bool_)
    head = 0
    tail = 0
    for b in range(nblocks):
        queue[tail] = b
        tail += 1
        in_queue[b] = True
    members = np.empty(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    while head < tail:
        splitter = queue[head]
        head += 1
        in_queue[splitter] = False
        nm = end[splitter] - first[splitter]
        for k in range(nm):
            members[k] = elems[first[splitter] + k]
        for a in range(n_labels):
            nt = 0
            for k in range(nm):
                t = members[k]
                for e in range(rev_indptr[t], rev_indptr[t + 1]):
                    if rev_lab[e] != a:
                        continue
                    s = rev_src[e]
                    b = block[s]
                    pos = loc[s]
                    front = first[b] + marked[b]
                    if pos < front:
                        continue
                    other = elems[front]
                    elems[front] = s
                    loc[s] = front
                    elems[pos] = other
                    loc[other] = pos
                    if marked[b] == 0:
                        touched[nt] = b
                        nt += 1
                    marked[b] += 1
            for k in range(nt):
                b = touched[k]
                mk = marked[b]
                marked[b] = 0
                if mk == end[b] - first[b]:
                    continue
                nb = nblocks
                nblocks += 1
                first[nb] = first[b]
                end[nb] = first[b] + mk
                first[b] = end[nb]
                for q in range(first[nb], end[nb]):
                    block[elems[q]] = nb
                if not in_queue[b]:
                    queue[tail] = b
                    tail += 1
                    in_queue[b] = True
                queue[tail] = nb
                tail += 1
                in_queue[nb] = True
    return block


def _refine_np(n, rev_indptr, rev_src, rev_lab, n_labels, block0):
    """Round-based refinement: each round regroups states by their block and
    the set of (label, target block) pairs they reach, until no block splits.

    One round is a few sorts over the edges, but the number of rounds is the
    depth of the refinement, which reaches n on a long cycle with a single
    distinguished state.
    """
    block = block0.copy()
    if n == 0:
        return block
    tgt = np.repeat(np.arange(n, dtype=np.int64), np.diff(rev_indptr))
    src = np.asarray(rev_src, dtype=np.int64)
    lab = np.asarray(rev_lab, dtype=np.int64)
    count = int(block.max()) + 1
    while True:
        if src.size:
            pairs = np.unique(np.stack([src, lab * n + block[tgt]], axis=1), axis=0)
            starts = np.searchsorted(pairs[:, 0], np.arange(n))
            deg = np.bincount(pairs[:, 0], minlength=n)
            width = int(deg.max())
        else:
            pairs = np.zeros((0, 2), dtype=np.int64)
            width = 0
        rows = np.full((n, width + 1), -1, dtype=np.int64)
        rows[:, 0] = block
        if pairs.size:
            col = np.arange(len(pairs)) - starts[pairs[:, 0]]
            rows[pairs[:, 0], col + 1] = pairs[:, 1]
        _, new = np.unique(rows, axis=0, return_inverse=True)
        new = new.reshape(-1).astype(np.int64)
        new_count = int(new.max()) + 1
        if new_count == count:
            return new
        block, count = new, new_count


def refine(n, src, lab, dst, block0, n_labels=None, use_jit=None):
    """Coarsest refinement of ``block0`` stable under every (label, block)
    splitter. Labels must be small non-negative ints. Returns canonical ids."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    lab = np.asarray(lab, dtype=np.int64)
    block0 = canonical_blocks(np.asarray(block0, dtype=np.int64)) if n else np.zeros(0, dtype=np.int64)
    if n_labels is None:
        n_labels = int(lab.max()) + 1 if lab.size else 0
    # reverse CSR: for each target the incoming (src, label)
    rev_indptr, rev_src, rev_lab = csr(n, dst, src, lab)
    if use_jit is None:
        use_jit = HAVE_NUMBA
    kernel = _refine_nb if (use_jit and HAVE_NUMBA) else _refine_np
    if n == 0:
        return block0
    return canonical_blocks(kernel(n, rev_indptr, rev_src, rev_lab, n_labels, block0))


# --------------------------------------------------------------------------
# reachability


@njit(cache=True)
def _reach_nb(n, indptr, dst, seeds):
    seen = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for s in seeds:
        if not seen[s]:
            seen[s] = True
            stack[top] = s
            top += 1
    while top > 0:
        top -= 1
        s = stack[top]
        for e in range(indptr[s], indptr[s + 1]):
            t = dst[e]
            if not seen[t]:
                seen[t] = True
                stack[top] = t
                top += 1
    return seen


def _reach_np(n, indptr, dst, seeds):
    seen = np.zeros(n, dtype=bool)
    frontier = np.unique(np.asarray(seeds, dtype=np.int64))
    seen[frontier] = True
    src_of = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    while frontier.size:
        mask = np.zeros(n, dtype=bool)
        mask[frontier] = True
        nxt = np.unique(dst[mask[src_of]])
        frontier = nxt[~seen[nxt]]
        seen[frontier] = True
    return seen


def reachable(n, src, dst, seeds, use_jit=None):
    """Boolean mask of nodes reachable from ``seeds``."""
    indptr, d, _ = csr(n, src, dst, np.zeros(len(src), dtype=np.int64))
    seeds = np.asarray(list(seeds), dtype=np.int64)
    if use_jit is None:
        use_jit = HAVE_NUMBA
    kernel = _reach_nb if (use_jit and HAVE_NUMBA) else _reach_np
    if n == 0:
        return np.zeros(0, dtype=bool)
    return kernel(n, indptr, d, seeds)
