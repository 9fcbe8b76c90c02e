"""Pure-Python worst-case enumeration kernel (fallback for ``_kernels``)."""


def max_distortion_range(worker_files, n_files, q, threshold, first_lo, first_hi):
    """Best coalition among the q-subsets whose smallest worker lies in ``[first_lo, first_hi)``.

    Subsets are visited in lexicographic order while a per-file counter of
    Byzantine copies is updated incrementally; a file counts as distorted once
    its counter reaches ``threshold``. Only strict improvements replace the
    witness, so the witness is the lexicographically smallest maximiser.

    Returns ``(best, witness, visited)``; ``best`` is -1 and ``witness`` empty
    when the range holds no subset.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    rows = [tuple(int(x) for x in row) for row in worker_files]
    K = len(rows)
    counts = [0] * n_files
    comb = [0] * q
    best = -1
    witness = ()
    visited = 0
    distorted = 0
    last = q - 1

    def descend(level, start):
        nonlocal best, witness, visited, distorted
        hi = K - q + level + 1
        if level == 0:
            hi = min(hi, first_hi)
        for w in range(start, hi):
            row = rows[w]
            for fi in row:
                c = counts[fi] + 1
                counts[fi] = c
                if c == threshold:
                    distorted += 1
            comb[level] = w
            if level == last:
                visited += 1
                if distorted > best:
                    best = distorted
                    witness = tuple(comb)
            else:
                descend(level + 1, w + 1)
            for fi in row:
                c = counts[fi]
                if c == threshold:
                    distorted -= 1
                counts[fi] = c - 1

    descend(0, first_lo)
    return best, witness, visited
