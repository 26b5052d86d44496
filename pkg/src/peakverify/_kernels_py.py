"""Pure-Python (numpy) versions of the hot loops in ``_kernels_c``."""

import numpy as np


def median_positions(peaks, counts):
    """n-th smallest of each row of ``peaks`` joined with the phantom multiset.

    ``counts[t]`` is the number of phantoms at position ``t``. Sorts instead
    of counting, so it doubles as an independent check on the compiled path.
    """
    peaks = np.asarray(peaks, dtype=np.int64)
    n = peaks.shape[1]
    phantoms = np.repeat(np.arange(len(counts), dtype=np.int64), counts)
    merged = np.concatenate([peaks, np.broadcast_to(phantoms, (len(peaks), len(phantoms)))], axis=1)
    merged.sort(axis=1)
    return merged[:, n - 1].astype(np.int8)


def nash_mask(g, k, cands, score, bonus):
    """Flag every candidate profile at which no agent has a profitable deviation.

    ``g`` is the flattened outcome tensor of shape ``(k,) * n``; agent ``i``
    values profile ``m`` at ``score[i, g[m]] + bonus[i, m_i]``. Candidates are
    the C-order product of ``cands``.
    """
    n = len(cands)
    cands = [np.asarray(c, dtype=np.int64) for c in cands]
    tensor = np.asarray(g).reshape((k,) * n)
    mask = np.ones(tuple(len(c) for c in cands), dtype=bool)
    full = np.arange(k)
    for i in range(n):
        axes = [full if j == i else cands[j] for j in range(n)]
        sub = tensor[np.ix_(*axes)]
        shape = [1] * n
        shape[i] = k
        u = score[i][sub] + bonus[i].reshape(shape)
        best = u.max(axis=i, keepdims=True)
        current = np.take(u, cands[i], axis=i)
        mask &= (current >= best)
    return mask.reshape(-1).astype(np.uint8)
