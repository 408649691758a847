# cython: language_level=3, boundscheck=False, wraparound=False
"""Cython term-dict kernels; same contract as _poly_py."""

BACKEND = "cython"


cpdef dict td_add(dict a, dict b):
    cdef dict out = dict(a)
    cdef object m, c, s
    for m, c in b.items():
        s = out.get(m)
        if s is None:
            out[m] = c
        else:
            s = s + c
            if s:
                out[m] = s
            else:
                del out[m]
    return out


cpdef dict td_sub(dict a, dict b):
    cdef dict out = dict(a)
    cdef object m, c, s
    for m, c in b.items():
        s = out.get(m)
        if s is None:
            out[m] = -c
        else:
            s = s - c
            if s:
                out[m] = s
            else:
                del out[m]
    return out


cpdef dict td_scale(dict a, object c):
    cdef dict out = {}
    cdef object m, cm
    if not c:
        return out
    for m, cm in a.items():
        out[m] = cm * c
    return out


cpdef dict td_mul(dict a, dict b):
    cdef dict out = {}
    cdef object ma, ca, mb, cb, s
    cdef tuple m
    cdef Py_ssize_t i, r
    if not a or not b:
        return out
    if len(a) > len(b):
        a, b = b, a
    for ma, ca in a.items():
        r = len(<tuple>ma)
        for mb, cb in b.items():
            m = tuple([<object>((<tuple>ma)[i]) + (<tuple>mb)[i] for i in range(r)])
            s = out.get(m)
            if s is None:
                out[m] = ca * cb
            else:
                s = s + ca * cb
                if s:
                    out[m] = s
                else:
                    del out[m]
    return out
