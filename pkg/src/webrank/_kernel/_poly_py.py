"""Pure-Python term-dict kernels.

A polynomial is stored as a dict mapping exponent tuples to nonzero
coefficients (ints or Fractions).  These four functions are the hot inner
loops of fraction-free elimination and jet-table construction; the Cython
twin in _poly_core.pyx implements the same contract.
"""

BACKEND = "python"


def td_add(a, b):
    out = dict(a)
    get = out.get
    for m, c in b.items():
        s = get(m)
        if s is None:
            out[m] = c
        else:
            s = s + c
            if s:
                out[m] = s
            else:
                del out[m]
    return out


def td_sub(a, b):
    out = dict(a)
    get = out.get
    for m, c in b.items():
        s = get(m)
        if s is None:
            out[m] = -c
        else:
            s = s - c
            if s:
                out[m] = s
            else:
                del out[m]
    return out


def td_scale(a, c):
    if not c:
        return {}
    return {m: cm * c for m, cm in a.items()}


def td_mul(a, b):
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    out = {}
    get = out.get
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(i + j for i, j in zip(ma, mb))
            s = get(m)
            if s is None:
                out[m] = ca * cb
            else:
                s = s + ca * cb
                if s:
                    out[m] = s
                else:
                    del out[m]
    return out
