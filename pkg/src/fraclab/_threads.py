"""Worker-count plumbing for row-parallel kernels.

Rows are distributed in fixed contiguous chunks and each row is computed
with a fixed summation order, so results are bitwise independent of the
worker count.
"""

from concurrent.futures import ThreadPoolExecutor

_num_threads = 1


def set_num_threads(k):
    global _num_threads
    _num_threads = max(1, int(k))


def get_num_threads():
    return _num_threads


def run_rows(fn, n_rows):
    """Call fn(row) for every row index, possibly across a thread pool.

    fn must only write to per-row slots of preallocated output arrays.
    """
    k = _num_threads
    if k <= 1 or n_rows < 2 * k:
        for i in range(n_rows):
            fn(i)
        return
    chunk = (n_rows + k - 1) // k

    def worker(start):
        for i in range(start, min(start + chunk, n_rows)):
            fn(i)

    with ThreadPoolExecutor(max_workers=k) as pool:
        list(pool.map(worker, range(0, n_rows, chunk)))
