"""Hot kernels: sparse matrix-vector products and Hamiltonian assembly.

Two interchangeable backends produce bit-identical results: numba-jitted
loops (default whenever numba imports) and a pure-numpy path.  Setting the
environment variable FERMICHAIN_NUMBA to 0/false/off selects the numpy path
at import time; use_backend() switches at runtime (used by the benchmark and
the backend-equivalence tests).

Matrices are canonical CSR: both triangles stored, column indices sorted
within each row, no duplicates.  Given equal inputs both backends emit the
same arrays byte for byte, because every floating-point accumulation runs in
the same (ascending-site) order.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "FERMICHAIN_NUMBA"


def _env_wants_numba() -> bool:
    return os.environ.get(_ENV_FLAG, "1").strip().lower() not in ("0", "false", "off", "no")


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _csr_matvec_numpy(indptr, indices, data, x):
    out = np.zeros(len(indptr) - 1, dtype=np.complex128)
    if len(indices) == 0:
        return out
    prod = data * x[indices]
    nonempty = np.flatnonzero(np.diff(indptr))
    out[nonempty] = np.add.reduceat(prod, indptr[nonempty])
    return out


def _species_hops_numpy(L, masks):
    """All allowed nearest-neighbor moves within one species: (src, dst) index pairs."""
    src, dst = [], []
    for j in range(L - 1):
        b0 = np.int64(1) << j
        b1 = np.int64(1) << (j + 1)
        pair = masks & (b0 | b1)
        movable = (pair == b0) | (pair == b1)
        idx = np.flatnonzero(movable)
        dst.append(np.searchsorted(masks, masks[idx] ^ (b0 | b1)))
        src.append(idx)
    if not src:
        empty = np.empty(0, np.int64)
        return empty, empty
    return np.concatenate(src), np.concatenate(dst)


def _assemble_numpy(L, up_masks, down_masks, j_up, j_down, U, V):
    du, dd = len(up_masks), len(down_masks)
    dim = du * dd

    # diagonal: interaction + external potential, accumulated site-ascending
    diag = U * np.bitwise_count(up_masks[:, None] & down_masks[None, :]).astype(np.float64)
    for j in range(L):
        bu = ((up_masks >> j) & 1).astype(np.float64)
        bd = ((down_masks >> j) & 1).astype(np.float64)
        diag += V[j] * (bu[:, None] + bd[None, :])

    su, tu = _species_hops_numpy(L, up_masks)
    sd, td = _species_hops_numpy(L, down_masks)
    rd = np.arange(dd, dtype=np.int64)
    ru = np.arange(du, dtype=np.int64)
    g = np.arange(dim, dtype=np.int64)

    rows = np.concatenate([g, (su[:, None] * dd + rd).ravel(), (ru[:, None] * dd + sd).ravel()])
    cols = np.concatenate([g, (tu[:, None] * dd + rd).ravel(), (ru[:, None] * dd + td).ravel()])
    vals = np.concatenate([
        diag.ravel(),
        np.full(len(su) * dd, -j_up),
        np.full(len(sd) * du, -j_down),
    ])

    order = np.argsort(rows * dim + cols)  # (row, col) pairs are unique
    rows = rows[order]
    indptr = np.zeros(dim + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(np.bincount(rows, minlength=dim))
    return indptr, cols[order], vals[order]


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    NUMBA_AVAILABLE = False

if NUMBA_AVAILABLE:

    @njit(cache=True, nogil=True)
    def _csr_matvec_numba(indptr, indices, data, x):
        n = indptr.shape[0] - 1
        out = np.zeros(n, dtype=np.complex128)
        for i in range(n):
            acc = 0.0 + 0.0j
            for k in range(indptr[i], indptr[i + 1]):
                acc += data[k] * x[indices[k]]
            out[i] = acc
        return out

    @njit(cache=True)
    def _popcount_nb(x):
        c = 0
        while x:
            x &= x - np.int64(1)
            c += 1
        return c

    @njit(cache=True)
    def _species_hops_nb(L, masks):
        dim = masks.shape[0]
        src = np.empty(dim * (L - 1), np.int64)
        dst = np.empty(dim * (L - 1), np.int64)
        cnt = 0
        for i in range(dim):
            m = masks[i]
            for j in range(L - 1):
                b0 = np.int64(1) << j
                b1 = np.int64(1) << (j + 1)
                pair = m & (b0 | b1)
                if pair == b0 or pair == b1:
                    src[cnt] = i
                    dst[cnt] = np.searchsorted(masks, m ^ (b0 | b1))
                    cnt += 1
        return src[:cnt].copy(), dst[:cnt].copy()

    @njit(cache=True)
    def _assemble_numba(L, up_masks, down_masks, j_up, j_down, U, V):
        du = up_masks.shape[0]
        dd = down_masks.shape[0]
        dim = du * dd

        su, tu = _species_hops_nb(L, up_masks)
        sd, td = _species_hops_nb(L, down_masks)

        # per-source adjacency offsets; hop lists are emitted source-ascending
        up_off = np.zeros(du + 1, np.int64)
        for k in range(su.shape[0]):
            up_off[su[k] + 1] += 1
        for i in range(du):
            up_off[i + 1] += up_off[i]
        dn_off = np.zeros(dd + 1, np.int64)
        for k in range(sd.shape[0]):
            dn_off[sd[k] + 1] += 1
        for i in range(dd):
            dn_off[i + 1] += dn_off[i]

        nnz = dim + su.shape[0] * dd + sd.shape[0] * du
        indptr = np.empty(dim + 1, np.int64)
        indices = np.empty(nnz, np.int64)
        data = np.empty(nnz, np.float64)

        indptr[0] = 0
        p = 0
        for iu in range(du):
            mu = up_masks[iu]
            u0, u1 = up_off[iu], up_off[iu + 1]
            for idn in range(dd):
                md = down_masks[idn]
                row_start = p
                acc = U * _popcount_nb(mu & md)
                for j in range(L):
                    bu = (mu >> j) & 1
                    bd = (md >> j) & 1
                    acc += V[j] * (bu + bd)
                gidx = iu * dd + idn
                indices[p] = gidx
                data[p] = acc
                p += 1
                for k in range(u0, u1):
                    indices[p] = tu[k] * dd + idn
                    data[p] = -j_up
                    p += 1
                for k in range(dn_off[idn], dn_off[idn + 1]):
                    indices[p] = iu * dd + td[k]
                    data[p] = -j_down
                    p += 1
                # insertion sort the row segment by column (rows are short)
                for a in range(row_start + 1, p):
                    ci = indices[a]
                    dv = data[a]
                    b = a - 1
                    while b >= row_start and indices[b] > ci:
                        indices[b + 1] = indices[b]
                        data[b + 1] = data[b]
                        b -= 1
                    indices[b + 1] = ci
                    data[b + 1] = dv
                indptr[gidx + 1] = p
        return indptr, indices, data


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

_BACKENDS = {"numpy": (_csr_matvec_numpy, _assemble_numpy)}
if NUMBA_AVAILABLE:
    _BACKENDS["numba"] = (_csr_matvec_numba, _assemble_numba)

_active = "numba" if (NUMBA_AVAILABLE and _env_wants_numba()) else "numpy"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def active_backend() -> str:
    return _active


def use_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    _active = name


def csr_matvec(indptr, indices, data, x) -> np.ndarray:
    """y = A @ x for a canonical-CSR matrix A and complex vector x."""
    x = np.ascontiguousarray(x, dtype=np.complex128)
    return _BACKENDS[_active][0](indptr, indices, data, x)


def assemble_hubbard(L, up_masks, down_masks, j_up, j_down, U, V):
    """Sector Hamiltonian of the Hubbard chain as canonical CSR arrays.

    Terms: -j_up (-j_down) nearest-neighbor hops within the up (down) species,
    open boundaries; diagonal U per doubly occupied site plus the external
    potential V dotted with total site occupations.
    """
    V = np.ascontiguousarray(V, dtype=np.float64)
    return _BACKENDS[_active][1](
        L, up_masks, down_masks, float(j_up), float(j_down), float(U), V
    )
