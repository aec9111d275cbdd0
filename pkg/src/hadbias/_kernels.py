"""Hot kernels for the product-distribution sampler.

Sign strings are stored packed, one bit per qubit (1 means '-'), in rows
of uint64 words: qubit q lives at bit ``q & 63`` of word ``q >> 6``.  A
batch is a (shots, n_words) array.  Each shot is processed independently:
the permutation gates are applied in order by table lookup on at most 3
bits, then the eigenvalue tables are multiplied up in order.

Two interchangeable implementations exist: a numba ``@njit`` kernel that
loops over shots (parallel across shots), and a pure-numpy path that
vectorizes each gate across the whole batch.  Both consume identical
pre-sampled bits and multiply eigenvalues in the same order, so their
outputs agree bit for bit.  Selection: the ``HADBIAS_BACKEND`` environment
variable ("numba" or "numpy"); numba is the default when importable.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "HADBIAS_BACKEND"

_env = os.environ.get(_ENV_FLAG, "").strip().lower()
if _env not in ("", "numba", "numpy"):
    raise RuntimeError(f"{_ENV_FLAG} must be 'numba' or 'numpy', got {_env!r}")

HAVE_NUMBA = False
if _env != "numpy":
    try:
        import numba

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        if _env == "numba":
            raise

DEFAULT_BACKEND = "numba" if HAVE_NUMBA else "numpy"


def backend_name() -> str:
    return DEFAULT_BACKEND


def set_num_threads(n: int) -> None:
    """Bound the numba worker count; the numpy path is single-threaded anyway."""
    if HAVE_NUMBA and n > 0:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


# ---------------------------------------------------------------------------
# packing


def n_words(n: int) -> int:
    return max(1, (n + 63) >> 6)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (shots, n) 0/1 array into (shots, n_words) uint64 rows."""
    shots, n = bits.shape
    pad = (-n) % 64
    if pad:
        bits = np.concatenate(
            [bits, np.zeros((shots, pad), dtype=bits.dtype)], axis=1
        )
    packed = np.packbits(bits.astype(np.uint8), axis=1, bitorder="little")
    return packed.view(np.uint64).reshape(shots, n_words(n))


def unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`."""
    shots = words.shape[0]
    as_bytes = words.reshape(shots, -1).view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
    return bits[:, :n]


# ---------------------------------------------------------------------------
# numpy backend


def run_batch_numpy(
    words: np.ndarray,
    p_wi: np.ndarray,
    p_bi: np.ndarray,
    p_k: np.ndarray,
    p_tab: np.ndarray,
    e_wi: np.ndarray,
    e_bi: np.ndarray,
    e_k: np.ndarray,
    e_tab: np.ndarray,
) -> np.ndarray:
    """Vectorized-over-shots fallback; mutates ``words`` in place."""
    shots = words.shape[0]
    one = np.uint64(1)
    for g in range(p_k.shape[0]):
        k = int(p_k[g])
        idx = np.zeros(shots, dtype=np.int64)
        for j in range(k):
            bit = (words[:, p_wi[g, j]] >> p_bi[g, j]) & one
            idx |= bit.astype(np.int64) << (k - 1 - j)
        new = p_tab[g, idx]
        for j in range(k):
            bit = ((new >> (k - 1 - j)) & 1).astype(np.uint64)
            col = p_wi[g, j]
            keep = words[:, col] & ~(one << p_bi[g, j])
            words[:, col] = keep | (bit << p_bi[g, j])
    acc = np.ones(shots, dtype=np.complex128)
    for g in range(e_k.shape[0]):
        k = int(e_k[g])
        idx = np.zeros(shots, dtype=np.int64)
        for j in range(k):
            bit = (words[:, e_wi[g, j]] >> e_bi[g, j]) & one
            idx |= bit.astype(np.int64) << (k - 1 - j)
        acc *= e_tab[g, idx]
    return acc


# ---------------------------------------------------------------------------
# numba backend

if HAVE_NUMBA:

    @numba.njit(cache=True, parallel=True)
    def _run_batch_numba(words, p_wi, p_bi, p_k, p_tab, e_wi, e_bi, e_k, e_tab, out):
        one = np.uint64(1)
        n_perm = p_k.shape[0]
        n_eig = e_k.shape[0]
        for s in numba.prange(words.shape[0]):
            for g in range(n_perm):
                k = p_k[g]
                idx = np.int64(0)
                for j in range(k):
                    bit = (words[s, p_wi[g, j]] >> p_bi[g, j]) & one
                    idx = (idx << 1) | np.int64(bit)
                new = p_tab[g, idx]
                for j in range(k):
                    b = np.uint64((new >> (k - 1 - j)) & 1)
                    col = p_wi[g, j]
                    shift = p_bi[g, j]
                    words[s, col] = (words[s, col] & ~(one << shift)) | (b << shift)
            acc = complex(1.0)
            for g in range(n_eig):
                k = e_k[g]
                idx = np.int64(0)
                for j in range(k):
                    bit = (words[s, e_wi[g, j]] >> e_bi[g, j]) & one
                    idx = (idx << 1) | np.int64(bit)
                acc = acc * e_tab[g, idx]
            out[s] = acc

    def run_batch_numba(words, p_wi, p_bi, p_k, p_tab, e_wi, e_bi, e_k, e_tab):
        out = np.empty(words.shape[0], dtype=np.complex128)
        _run_batch_numba(words, p_wi, p_bi, p_k, p_tab, e_wi, e_bi, e_k, e_tab, out)
        return out

else:  # pragma: no cover - exercised only when numba is absent

    def run_batch_numba(*args, **kwargs):
        raise RuntimeError("numba backend requested but numba is not available")


def run_batch(words, p_wi, p_bi, p_k, p_tab, e_wi, e_bi, e_k, e_tab, backend=None):
    """Dispatch one packed batch through the selected backend."""
    name = backend or DEFAULT_BACKEND
    if name == "numba":
        return run_batch_numba(words, p_wi, p_bi, p_k, p_tab, e_wi, e_bi, e_k, e_tab)
    if name == "numpy":
        return run_batch_numpy(words, p_wi, p_bi, p_k, p_tab, e_wi, e_bi, e_k, e_tab)
    raise ValueError(f"unknown backend {name!r}")
