"""Tautological connection and curvature for calibrated ordinary webs.

The frame is the symbolic kernel of the order-(k_top - 1) system; each
section is lifted one order by solving the inhomogeneous top system, the
chain rule predicts the derivatives the jet structure imposes, and the
connection form measures the defect.  Curvature obstructs maximal rank.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import combinat
from .jets import ClosedJetBlocks, JetBlocks, build_closed, build_plain, closed_jet_basis
from .symbolic import (
    InconsistentSystem,
    RationalFunction,
    SymbolicMatrix,
    kernel_basis_symbolic,
    matvec,
    multi_indices,
    p_subsets,
    rank_symbolic,
    solve_symbolic,
)
from .symbolic.multiindex import add_unit
from .webmodel import Web

__all__ = [
    "ConnectionData",
    "NotCalibrated",
    "NotOrdinary",
    "TranscendentalUnsupported",
    "TemplateMismatch",
    "build_connection",
    "connection_form_components",
    "template_hk_closed_forms",
    "flatness_verdict",
]


class NotCalibrated(ValueError):
    pass


class NotOrdinary(ArithmeticError):
    pass


class TranscendentalUnsupported(TypeError):
    pass


class TemplateMismatch(ValueError):
    pass


@dataclass
class ConnectionData:
    p: int
    variant: str
    k_top: int
    coords: List[tuple]
    frame: List[List[RationalFunction]]
    eta: List[List[Dict[str, RationalFunction]]]
    omega: List[List[Dict[Tuple[str, str], RationalFunction]]]
    flat: Optional[bool]
    pi: int

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "variant": self.variant,
            "k_top": self.k_top,
            "rank": self.pi,
            "frame": [[str(x) for x in vec] for vec in self.frame],
            "eta": [
                [{lam: str(v) for lam, v in entry.items()} for entry in row]
                for row in self.eta
            ],
            "omega": [
                [
                    {f"{lam}^{mu}": str(v) for (lam, mu), v in entry.items()}
                    for entry in row
                ]
                for row in self.omega
            ],
            "flat": self.flat,
        }


def _pair_labels(q: int, p: int, h: int) -> List[tuple]:
    return [(A, K) for A in p_subsets(q, p) for K in multi_indices(q, h)]


def _basis_vectors(blocks, h: int):
    """Per-foliation column basis over the plain (A,K) pairs at order h."""
    q, p = blocks.web.q, blocks.p
    if blocks.variant == "closed":
        return [list(v) for v in closed_jet_basis(q, p, h)]
    dim = len(_pair_labels(q, p, h))
    return [
        [Fraction(1) if t == j else Fraction(0) for t in range(dim)]
        for j in range(dim)
    ]


def _left_inverse(cols: List[List[Fraction]]) -> List[List[Fraction]]:
    """Left inverse of the (tall, full-column-rank) matrix whose columns are given."""
    z = len(cols)
    gram = [
        [sum(a * b for a, b in zip(cols[i], cols[j])) for j in range(z)]
        for i in range(z)
    ]
    aug = [gram[i] + [Fraction(1) if j == i else Fraction(0) for j in range(z)] for i in range(z)]
    for c in range(z):
        piv = next(i for i in range(c, z) if aug[i][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for i in range(z):
            if i != c and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    ginv = [row[z:] for row in aug]
    # L = G^{-1} B^T
    n = len(cols[0])
    return [
        [sum(ginv[i][j] * cols[j][r] for j in range(z)) for r in range(n)]
        for i in range(z)
    ]


def build_connection(
    web: Web, p: int, variant: str = "plain", compute_curvature: bool = True
) -> ConnectionData:
    """Connection data per the order-by-order lift; see module docstring.

    Sign convention: the lift solves P_top w = -(Q_top s) and the covariant
    derivative is (d/dx_lam of s) minus the chain-rule prediction.  With
    compute_curvature=False only the frame and eta are produced (omega stays
    empty, flat is None); curvature arithmetic can be much heavier than the
    connection form itself.
    """
    if not web.is_rational:
        raise TranscendentalUnsupported(
            "the symbolic connection path needs a rational web"
        )
    if variant not in ("plain", "closed"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "plain" and p == web.q:
        variant = "closed"  # the plain p=q system belongs to the closed theory
    n, q, d = web.n, web.q, web.d
    if variant == "closed":
        k_top = combinat.k_one(n, d, q, p)
        calibrated = combinat.is_strongly_calibrated(n, d, q, p)
        pi = combinat.pi_prime(n, d, q, p)
    else:
        k_top = combinat.k_zero(n, d, q, p)
        calibrated = combinat.is_calibrated(n, d, q, p)
        pi = combinat.pi_zero(n, d, q, p)
    if k_top is None or not calibrated or k_top < 1:
        raise NotCalibrated(
            f"web is not {'strongly ' if variant == 'closed' else ''}{p}-calibrated "
            f"with threshold >= 1 (threshold={k_top})"
        )
    builder = build_closed if variant == "closed" else build_plain
    blocks = builder(web, p, k_top)

    P_top = blocks.P(k_top)
    if rank_symbolic(P_top) != P_top.ncols:
        raise NotOrdinary(
            f"top matrix at order {k_top} does not reach full column rank "
            f"{P_top.ncols}; web not {p}-ordinary on this path"
        )
    M_prev = blocks.M(k_top - 1)
    frame = kernel_basis_symbolic(M_prev)
    if len(frame) != pi:
        raise NotOrdinary(
            f"kernel of the order-{k_top - 1} system has rank {len(frame)}, "
            f"expected {pi}; web not {p}-ordinary on this path"
        )
    coords = blocks.coords(k_top - 1)
    top_labels = blocks.col_labels(k_top)
    Q_top = blocks.Q(k_top)
    fld = web.field
    zero = fld.const(0)

    pair_labels = {h: _pair_labels(q, p, h) for h in range(k_top + 1)}
    bases = {h: _basis_vectors(blocks, h) for h in range(k_top + 1)}
    left_inv = {h: _left_inverse(bases[h]) for h in range(k_top)}
    du = {
        (i, alpha, lam): web.generator_derivative(i, alpha, lam)
        for i in range(d)
        for alpha in range(q)
        for lam in range(n)
    }

    def coord_positions(labels):
        return {lab: idx for idx, lab in enumerate(labels)}

    coord_pos = coord_positions(coords)
    top_pos = coord_positions(top_labels)

    def raw_values(section, lifted):
        """Map (i, A, K) -> scalar for all orders <= k_top."""
        raw: Dict[tuple, RationalFunction] = {}
        for h in range(k_top + 1):
            basis = bases[h]
            labels = pair_labels[h]
            for i in range(d):
                for idx, (A, K) in enumerate(labels):
                    acc = zero
                    for j, vec in enumerate(basis):
                        comp = vec[idx]
                        if comp == 0:
                            continue
                        if blocks.variant == "closed":
                            lab = (i, "ker", h, j)
                        else:
                            lab = (i,) + (labels[j][0], labels[j][1])
                        if h == k_top:
                            val = lifted[top_pos[lab]]
                        else:
                            val = section[coord_pos[lab]]
                        if comp != 1:
                            val = fld.const(comp) * val
                        acc = acc + val
                    raw[(i, A, K)] = acc
        return raw

    def predicted_vector(raw, lam: int):
        """Chain-rule lambda-derivative of every order <= k_top-1 coordinate,
        mapped back to column coordinates (the prediction must stay in the
        closed symbol span; verified entrywise)."""
        pred_map: Dict[tuple, RationalFunction] = {}
        for h in range(k_top):
            labels = pair_labels[h]
            basis = bases[h]
            linv = left_inv[h]
            for i in range(d):
                raw_pred = []
                for (A, K) in labels:
                    acc = zero
                    for alpha in range(q):
                        acc = acc + raw[(i, A, add_unit(K, alpha))] * du[(i, alpha, lam)]
                    raw_pred.append(acc)
                closed_pred = []
                for j in range(len(basis)):
                    acc = zero
                    for r, comp in enumerate(linv[j]):
                        if comp and not raw_pred[r].is_zero():
                            acc = acc + fld.const(comp) * raw_pred[r]
                    closed_pred.append(acc)
                for r in range(len(raw_pred)):
                    recon = zero
                    for j in range(len(basis)):
                        if basis[j][r]:
                            recon = recon + fld.const(basis[j][r]) * closed_pred[j]
                    if not (recon - raw_pred[r]).is_zero():
                        raise NotOrdinary(
                            "chain-rule prediction left the closed symbol span"
                        )
                if blocks.variant == "closed":
                    for j, val in enumerate(closed_pred):
                        pred_map[(i, "ker", h, j)] = val
                else:
                    for (A, K), val in zip(labels, closed_pred):
                        pred_map[(i, A, K)] = val
        return [pred_map[lab] for lab in coords]

    # covariant derivatives of every frame section
    nabla: List[List[List[RationalFunction]]] = []  # [section][lam] -> vector
    for s in frame:
        rhs = [-(v) for v in matvec(Q_top, s)]
        w = solve_symbolic(P_top, rhs, require_unique=True)
        raw = raw_values(s, w)
        per_lam = []
        for lam in range(n):
            var = web.variables[lam]
            predicted = predicted_vector(raw, lam)
            per_lam.append(
                [s[t].diff_name(var) - predicted[t] for t in range(len(coords))]
            )
        nabla.append(per_lam)

    # expand in the frame: eta[a][j][var] with nabla_lam s_j = sum_a eta[a][j] s_a
    F = SymbolicMatrix(fld, [[frame[j][t] for j in range(pi)] for t in range(len(coords))])
    eta: List[List[Dict[str, RationalFunction]]] = [
        [dict() for _ in range(pi)] for _ in range(pi)
    ]
    for j in range(pi):
        for lam in range(n):
            try:
                x = solve_symbolic(F, nabla[j][lam], require_unique=True)
            except InconsistentSystem as exc:
                raise NotOrdinary(
                    "covariant derivative left the frame span "
                    "(system rank not constant?)"
                ) from exc
            var = web.variables[lam]
            for a in range(pi):
                if not x[a].is_zero():
                    eta[a][j][var] = x[a]

    omega: List[List[Dict[Tuple[str, str], RationalFunction]]] = [
        [dict() for _ in range(pi)] for _ in range(pi)
    ]
    flat: Optional[bool] = True
    if not compute_curvature:
        flat = None
    else:
        for a in range(pi):
            for j in range(pi):
                for li in range(n):
                    for mi in range(li + 1, n):
                        vl, vm = web.variables[li], web.variables[mi]
                        val = eta[a][j].get(vm, zero).diff_name(vl) - eta[a][j].get(
                            vl, zero
                        ).diff_name(vm)
                        for m in range(pi):
                            val = val + eta[a][m].get(vl, zero) * eta[m][j].get(vm, zero)
                            val = val - eta[a][m].get(vm, zero) * eta[m][j].get(vl, zero)
                        if not val.is_zero():
                            omega[a][j][(vl, vm)] = val
                            flat = False
    return ConnectionData(
        p=p,
        variant=variant,
        k_top=k_top,
        coords=coords,
        frame=frame,
        eta=eta,
        omega=omega,
        flat=flat,
        pi=pi,
    )


def flatness_verdict(cd: ConnectionData) -> dict:
    """The bound is attained exactly when the curvature vanishes."""
    return {"max_rank": cd.flat, "pi": cd.pi}


def _template_phi_psi(web: Web):
    """The dim-3 curve-web template: coordinate foliations plus (phi, psi)."""
    if web.n != 3 or web.q != 2 or web.d != 4 or not web.is_rational:
        raise TemplateMismatch("template needs n=3, q=2, d=4, rational generators")
    x, y, z = web.variables
    expected = [(x, y), (y, z), (z, x)]
    for i, (u_name, v_name) in enumerate(expected):
        gu = web.generator(i, 0)
        gv = web.generator(i, 1)
        if gu != web.field.var(u_name) or gv != web.field.var(v_name):
            raise TemplateMismatch(
                f"foliation {i + 1} must be the coordinate pair ({u_name},{v_name})"
            )
    return web.generator(3, 0), web.generator(3, 1)


def template_hk_closed_forms(web: Web) -> Tuple[RationalFunction, RationalFunction]:
    """The template's connection coefficients from the displayed closed forms."""
    phi, psi = _template_phi_psi(web)
    x, y, z = web.variables
    a, c = phi.diff_name(x), phi.diff_name(z)
    pp, rr = psi.diff_name(x), psi.diff_name(z)
    b, qq = phi.diff_name(y), psi.diff_name(y)
    A = b * rr - qq * c
    B = c * pp - a * rr
    C = a * qq - pp * b
    ABC = A * B * C
    if ABC.is_zero():
        raise TemplateMismatch("closed forms need ABC != 0")
    H = (pp * A * C.diff_name(z) - rr * A.diff_name(x) * C) / ABC
    K = (c * A.diff_name(x) * C - a * A * C.diff_name(z)) / ABC
    return H, K


def connection_form_components(web: Web) -> Tuple[RationalFunction, RationalFunction]:
    """Extract (H, K) with eta = H d(phi) + K d(psi) from the general algorithm."""
    phi, psi = _template_phi_psi(web)
    cd = build_connection(web, 2, "closed", compute_curvature=False)
    if cd.pi != 1:
        raise TemplateMismatch(f"template connection should have rank 1, got {cd.pi}")
    fld = web.field
    zero = fld.const(0)
    rows = []
    rhs = []
    for v in web.variables:
        rows.append([phi.diff_name(v), psi.diff_name(v)])
        rhs.append(cd.eta[0][0].get(v, zero))
    M = SymbolicMatrix(fld, rows)
    H, K = solve_symbolic(M, rhs, require_unique=True)
    return H, K
