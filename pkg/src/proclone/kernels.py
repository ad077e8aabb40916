"""Hot table kernels, compiled with numba when available.

Two implementations of every kernel live here: a pure-numpy one and a numba
``@njit`` one.  The module-level names dispatch to numba unless the
environment variable ``PROCLONE_NUMBA`` is set to ``0`` (or numba cannot be
imported).  Both variants are importable explicitly through
:data:`NUMPY_KERNELS` and :data:`NUMBA_KERNELS` for parity tests and
benchmarks.

Tables follow one convention throughout: an operation ``Q^n -> Q`` is a flat
int64 array of length ``q**n`` indexed row-major, first argument most
significant.
"""
from __future__ import annotations

import os

import numpy as np

# Upper bound on the temporary (chunk x G x pairs) boolean block in the numpy path.
_BLOCK = 1 << 22


def _np_endo_compose(head, args, q):
    m, width = args.shape
    idx = np.zeros(width, dtype=np.int64)
    for i in range(m):
        idx = idx * q + args[i]
    return head[idx]


def _np_endo_compose_batch(heads, args, q):
    m, p, width = args.shape
    idx = np.zeros((p, width), dtype=np.int64)
    for i in range(m):
        idx = idx * q + args[i]
    return np.take_along_axis(heads, idx, axis=1)


def _np_arrow_relation(app_left, app_right, rel_dom, rel_cod):
    px, py = np.nonzero(rel_dom)
    nf, ng = app_left.shape[0], app_right.shape[0]
    out = np.ones((nf, ng), dtype=np.bool_)
    if px.size == 0:
        return out
    right = app_right[:, py]
    chunk = max(1, _BLOCK // max(1, ng * px.size))
    for start in range(0, nf, chunk):
        left = app_left[start:start + chunk][:, px]
        out[start:start + chunk] = rel_cod[left[:, None, :], right[None, :, :]].all(axis=2)
    return out


def _np_pair_related(tab_left, tab_right, rel_dom, rel_cod):
    px, py = np.nonzero(rel_dom)
    return bool(np.all(rel_cod[tab_left[px], tab_right[py]]))


NUMPY_KERNELS = {
    "endo_compose": _np_endo_compose,
    "endo_compose_batch": _np_endo_compose_batch,
    "arrow_relation": _np_arrow_relation,
    "pair_related": _np_pair_related,
}


def _build_numba():
    from numba import njit

    @njit(cache=True)
    def endo_compose(head, args, q):
        m, width = args.shape
        out = np.empty(width, dtype=np.int64)
        for x in range(width):
            k = 0
            for i in range(m):
                k = k * q + args[i, x]
            out[x] = head[k]
        return out

    @njit(cache=True)
    def endo_compose_batch(heads, args, q):
        m, p, width = args.shape
        out = np.empty((p, width), dtype=np.int64)
        for r in range(p):
            for x in range(width):
                k = 0
                for i in range(m):
                    k = k * q + args[i, r, x]
                out[r, x] = heads[r, k]
        return out

    @njit(cache=True)
    def _arrow_relation(app_left, app_right, px, py, rel_cod):
        nf, ng = app_left.shape[0], app_right.shape[0]
        out = np.ones((nf, ng), dtype=np.bool_)
        for f in range(nf):
            for g in range(ng):
                for k in range(px.size):
                    if not rel_cod[app_left[f, px[k]], app_right[g, py[k]]]:
                        out[f, g] = False
                        break
        return out

    @njit(cache=True)
    def _pair_related(tab_left, tab_right, px, py, rel_cod):
        for k in range(px.size):
            if not rel_cod[tab_left[px[k]], tab_right[py[k]]]:
                return False
        return True

    def arrow_relation(app_left, app_right, rel_dom, rel_cod):
        px, py = np.nonzero(rel_dom)
        return _arrow_relation(app_left, app_right, px.astype(np.int64), py.astype(np.int64), rel_cod)

    def pair_related(tab_left, tab_right, rel_dom, rel_cod):
        px, py = np.nonzero(rel_dom)
        return bool(_pair_related(tab_left, tab_right, px.astype(np.int64), py.astype(np.int64), rel_cod))

    return {
        "endo_compose": endo_compose,
        "endo_compose_batch": endo_compose_batch,
        "arrow_relation": arrow_relation,
        "pair_related": pair_related,
    }


try:
    NUMBA_KERNELS = _build_numba()
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_KERNELS = None

USE_NUMBA = NUMBA_KERNELS is not None and os.environ.get("PROCLONE_NUMBA", "1") != "0"
BACKEND = "numba" if USE_NUMBA else "numpy"
_ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS

endo_compose = _ACTIVE["endo_compose"]
endo_compose_batch = _ACTIVE["endo_compose_batch"]
arrow_relation = _ACTIVE["arrow_relation"]
pair_related = _ACTIVE["pair_related"]
