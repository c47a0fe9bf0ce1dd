"""Weak (pentagonal) and standard interleavings, found by an exact search."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .diagrams import (ISO_CAP, Module, ModuleMap, SearchCapExceeded, SetCategory,
                       hom_basis_matrix, map_from_flat, set_nat_trans)
from .fflinalg import rref
from .kan import pullback, pushforward
from .translate import INF, IntrinsicShift, RelativeShift, fmt_rational

log = logging.getLogger(__name__)

WEAK, STANDARD = "weak", "standard"


@dataclass
class InterleavingCertificate:
    epsilon: Fraction
    phi: ModuleMap
    psi: ModuleMap
    mode: str
    provenance: str

    def to_json(self) -> dict:
        def comps(m: ModuleMap):
            P = m.source.poset
            out = {}
            for p, c in enumerate(m.components):
                out[P.labels[p]] = c.tolist() if hasattr(c, "tolist") else list(c)
            return out
        return {"epsilon": fmt_rational(self.epsilon), "mode": self.mode,
                "provenance": self.provenance, "phi": comps(self.phi), "psi": comps(self.psi)}


def _provenance(shift) -> str:
    return getattr(shift, "kind", "custom")


# ---------------------------------------------------------------------------
# the defining equations

def weak_sides(shift, M: Module, N: Module, phi: ModuleMap, psi: ModuleMap, eps):
    """Both sides of the two pentagons, as module maps out of ``M`` and ``N``."""
    e2 = 2 * Fraction(eps)
    lhs_M = shift.sigma(M, eps, eps).compose(shift.map(psi, eps)).compose(phi)
    rhs_M = shift.eta_between(M, 0, e2).compose(shift.eta(M, 0))
    lhs_N = shift.sigma(N, eps, eps).compose(shift.map(phi, eps)).compose(psi)
    rhs_N = shift.eta_between(N, 0, e2).compose(shift.eta(N, 0))
    return (lhs_M, rhs_M), (lhs_N, rhs_N)


def standard_sides(shift, M: Module, N: Module, phi: ModuleMap, psi: ModuleMap, eps):
    lhs_M = shift.map(psi, eps).compose(phi)
    rhs_M = shift.eta(shift.module(M, eps), eps).compose(shift.eta(M, eps))
    lhs_N = shift.map(phi, eps).compose(psi)
    rhs_N = shift.eta(shift.module(N, eps), eps).compose(shift.eta(N, eps))
    return (lhs_M, rhs_M), (lhs_N, rhs_N)


def check_certificate(shift, M: Module, N: Module, phi: ModuleMap, psi: ModuleMap, eps,
                      mode: str = WEAK) -> bool:
    """Re-verify the interleaving equations from scratch."""
    if not (phi.is_natural() and psi.is_natural()):
        return False
    if phi.target.objs != shift.module(N, eps).objs or psi.target.objs != shift.module(M, eps).objs:
        return False
    sides = weak_sides if mode == WEAK else standard_sides
    return all(l.equals(r) for l, r in sides(shift, M, N, phi, psi, eps))


# ---------------------------------------------------------------------------
def _vect_search(shift, M, N, eps, mode, cap):
    """Solve the bilinear system ``sum a_i c_j U_ij = rhs``.

    Only the class of ``a`` modulo the left kernel of ``U`` matters, so the
    enumeration runs over the row space of ``U`` from whichever side is smaller.
    """
    p = M.category.p
    Ne, Me = shift.module(N, eps), shift.module(M, eps)
    A = hom_basis_matrix(M, Ne)
    B = hom_basis_matrix(N, Me)
    kA, kB = A.cols, B.cols
    As = [map_from_flat(M, Ne, A.a[:, i]) for i in range(kA)]
    Bs = [map_from_flat(N, Me, B.a[:, j]) for j in range(kB)]
    As_sh = [shift.map(a, eps) for a in As]
    Bs_sh = [shift.map(b, eps) for b in Bs]
    zero_phi = map_from_flat(M, Ne, np.zeros(A.rows, dtype=np.int64))
    zero_psi = map_from_flat(N, Me, np.zeros(B.rows, dtype=np.int64))
    if mode == WEAK:
        SM, SN = shift.sigma(M, eps, eps), shift.sigma(N, eps, eps)
        (_, rM), (_, rN) = weak_sides(shift, M, N, zero_phi, zero_psi, eps)
        SMB = [SM.compose(b) for b in Bs_sh]
        SNA = [SN.compose(a) for a in As_sh]
        t1 = lambda i, j: SMB[j].compose(As[i]).flat()
        t2 = lambda i, j: SNA[i].compose(Bs[j]).flat()
    else:
        (_, rM), (_, rN) = standard_sides(shift, M, N, zero_phi, zero_psi, eps)
        t1 = lambda i, j: Bs_sh[j].compose(As[i]).flat()
        t2 = lambda i, j: As_sh[i].compose(Bs[j]).flat()
    rhs = np.concatenate([rM.flat(), rN.flat()]) % p
    R = rhs.size
    U = np.zeros((kA, R, kB), dtype=np.int64)
    for i in range(kA):
        for j in range(kB):
            U[i, :, j] = np.concatenate([t1(i, j), t2(i, j)])
    zero_a, zero_c = np.zeros(kA, np.int64), np.zeros(kB, np.int64)
    if not rhs.any():
        return _pack(M, N, Ne, Me, A, B, zero_a, zero_c, p)
    found = solve_bilinear(U, rhs, p, cap=cap, rng=np.random.default_rng(0))
    if found is None:
        return None
    a, c = found
    return _pack(M, N, Ne, Me, A, B, a, c, p)


def solve_bilinear(U: np.ndarray, rhs: np.ndarray, p: int, *, cap: int = ISO_CAP,
                   samples: int = 256, rng=None, chunk: int = 2048):
    """Find ``(a, c)`` with ``sum_ij a_i c_j U[i, :, j] = rhs`` or prove there is none.

    Raises SearchCapExceeded when neither a witness nor a proof is found within ``cap``.
    """
    kA, R, kB = U.shape
    if not rhs.any():
        return np.zeros(kA, np.int64), np.zeros(kB, np.int64)
    # equivalent system on an independent set of equations
    W = np.hstack([U.transpose(1, 0, 2).reshape(R, kA * kB), rhs[:, None]]) % p
    red, piv = rref(W, p)
    if kA * kB in piv:
        return None  # rhs is not even in the span of the products
    rows = len(piv)
    U = red[:rows, :kA * kB].reshape(rows, kA, kB).transpose(1, 0, 2)
    rhs = red[:rows, kA * kB]
    sideA = _row_space(U.reshape(kA, rows * kB), p)
    sideB = _row_space(U.transpose(2, 1, 0).reshape(kB, rows * kA), p)
    enumerate_a = len(sideA[0]) <= len(sideB[0])
    basis_rows, combos = sideA if enumerate_a else sideB
    r, other = len(basis_rows), (kB if enumerate_a else kA)
    basis = np.array(basis_rows, dtype=np.int64).reshape(r, rows, other) if r else np.zeros((0, rows, other), np.int64)
    combos = np.array(combos, dtype=np.int64).reshape(r, -1) if r else np.zeros((0, kA if enumerate_a else kB), np.int64)

    def finish(x):
        G = np.tensordot(x, basis, axes=(0, 0)) % p if r else np.zeros((rows, other), np.int64)
        redg, pv = rref(np.hstack([G, rhs[:, None]]), p)
        if other in pv:
            return None
        y = np.zeros(other, dtype=np.int64)
        for k, col in enumerate(pv):
            y[col] = redg[k, other]
        known = (x @ combos) % p if r else np.zeros(combos.shape[1], np.int64)
        return (known, y) if enumerate_a else (y, known)

    rng = rng or np.random.default_rng(0)
    if r and p ** r > samples:
        xs = rng.integers(0, p, size=(samples, r))
        ok = _batched_consistent(np.tensordot(xs, basis, axes=(1, 0)) % p, rhs, p)
        hit = np.flatnonzero(ok)
        if hit.size:
            return finish(xs[hit[0]])
    if p ** r > cap:
        raise SearchCapExceeded(f"effective search space {p}^{r} exceeds the cap")
    total = p ** r
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        xs = (idx[:, None] // (p ** np.arange(r - 1, -1, -1))[None, :]) % p if r else np.zeros((idx.size, 0), np.int64)
        Gs = np.tensordot(xs, basis, axes=(1, 0)) % p if r else np.zeros((idx.size, rows, other), np.int64)
        ok = _batched_consistent(Gs, rhs, p)
        hit = np.flatnonzero(ok)
        if hit.size:
            return finish(xs[hit[0]])
    return None


def _batched_consistent(Gs: np.ndarray, rhs: np.ndarray, p: int) -> np.ndarray:
    """For each ``G`` in the batch, whether ``G y = rhs`` is solvable over F_p."""
    from .fflinalg import _inverse_table
    inv = _inverse_table(p)
    Bn, R, k = Gs.shape
    aug = np.concatenate([Gs % p, np.broadcast_to(rhs[None, :, None], (Bn, R, 1))], axis=2).copy()
    rank = np.zeros(Bn, dtype=np.int64)
    ar = np.arange(Bn)
    rows_idx = np.arange(R)[None, :]
    for col in range(k):
        colv = aug[:, :, col]
        cand = (colv != 0) & (rows_idx >= rank[:, None])
        has = cand.any(axis=1) & (rank < R)
        if not has.any():
            continue
        prow = np.argmax(cand, axis=1)
        b = ar[has]
        pr, rk = prow[has], rank[has]
        tmp = aug[b, rk].copy()
        aug[b, rk] = aug[b, pr]
        aug[b, pr] = tmp
        pivval = aug[b, rk, col]
        aug[b, rk] = (aug[b, rk] * inv[pivval][:, None]) % p
        factors = aug[b, :, col].copy()
        factors[np.arange(b.size), rk] = 0
        aug[b] = (aug[b] - factors[:, :, None] * aug[b, rk][:, None, :]) % p
        rank[has] += 1
    last = aug[:, :, k]
    return ~((last != 0) & (rows_idx >= rank[:, None])).any(axis=1)


def _row_space(mat: np.ndarray, p: int):
    """Independent rows spanning the row space and their coefficients on the input rows."""
    k = mat.shape[0]
    if k == 0:
        return [], []
    red, piv = rref(np.hstack([mat % p, np.eye(k, dtype=np.int64)]), p)
    rank = sum(1 for c in piv if c < mat.shape[1])
    return [red[i, :mat.shape[1]] for i in range(rank)], [red[i, mat.shape[1]:] for i in range(rank)]


def _pack(M, N, Ne, Me, A, B, a, c, p):
    return map_from_flat(M, Ne, (A.a @ a) % p), map_from_flat(N, Me, (B.a @ c) % p)


def _set_search(shift, M, N, eps, mode, cap):
    Ne, Me = shift.module(N, eps), shift.module(M, eps)
    phis = list(set_nat_trans(M, Ne, cap=cap))
    psis = list(set_nat_trans(N, Me, cap=cap))
    if len(phis) * len(psis) > cap:
        raise SearchCapExceeded(f"{len(phis)} x {len(psis)} candidate pairs")
    for phi in phis:
        for psi in psis:
            if all(l.equals(r) for l, r in
                   (weak_sides if mode == WEAK else standard_sides)(shift, M, N, phi, psi, eps)):
                return phi, psi
    return None


def _exists(M, N, shift, eps, mode, cap) -> InterleavingCertificate | None:
    if M.poset is not N.poset or M.poset is not shift.poset:
        raise ValueError("modules and shift must share a poset")
    eps = Fraction(eps)
    search = _set_search if isinstance(M.category, SetCategory) else _vect_search
    found = search(shift, M, N, eps, mode, cap)
    if found is None:
        return None
    phi, psi = found
    cert = InterleavingCertificate(eps, phi, psi, mode, _provenance(shift))
    if not check_certificate(shift, M, N, phi, psi, eps, mode):
        raise AssertionError("search returned a certificate that fails re-verification")
    return cert


def weak_exists(M: Module, N: Module, shift, eps, *, cap: int = ISO_CAP) -> InterleavingCertificate | None:
    return _exists(M, N, shift, eps, WEAK, cap)


def standard_exists(M: Module, N: Module, shift, eps, *, cap: int = ISO_CAP) -> InterleavingCertificate | None:
    return _exists(M, N, shift, eps, STANDARD, cap)


# ---------------------------------------------------------------------------
@dataclass
class DistanceResult:
    status: str  # "finite" | "inf" | "indeterminate"
    epsilon: Fraction | None = None
    certificate: InterleavingCertificate | None = None
    mode: str = WEAK
    monotone: bool | None = None
    scanned: dict = field(default_factory=dict)

    @property
    def value(self):
        """Exact value, ``INF`` or ``None`` when indeterminate."""
        if self.status == "finite":
            return self.epsilon
        if self.status == "inf":
            return INF
        return None

    def __str__(self):
        if self.status == "finite":
            return fmt_rational(self.epsilon)
        return self.status

    def to_json(self) -> dict:
        return {"epsilon": str(self), "mode": self.mode,
                "certificate": self.certificate.to_json() if self.certificate else None}


def distance(M: Module, N: Module, shift, mode: str = WEAK, *, cap: int = ISO_CAP,
             check_monotone: bool = False, threads: int = 1) -> DistanceResult:
    """Smallest eps admitting an interleaving; the scan is ascending so the
    result is the infimum regardless of monotonicity."""
    cands = [c for c in shift.candidates(halves=(mode == WEAK)) if c <= shift.ladder[-1]]

    def attempt(c):
        try:
            return _exists(M, N, shift, c, mode, cap)
        except SearchCapExceeded:
            return "cap"

    scanned: dict = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(attempt, cands))
        scanned = dict(zip(cands, outcomes))
    else:
        for c in cands:
            scanned[c] = attempt(c)
            if scanned[c] not in (None, "cap") and not check_monotone:
                break
    capped = False
    result = DistanceResult("inf", mode=mode)
    for c in cands:
        if c not in scanned:
            break
        out = scanned[c]
        if out == "cap":
            capped = True
            continue
        if out is not None:
            result = DistanceResult("indeterminate" if capped else "finite",
                                    None if capped else c, None if capped else out, mode)
            break
    else:
        if capped:
            result = DistanceResult("indeterminate", mode=mode)
    if len(scanned) == len(cands):
        seen = False
        mono = True
        for c in cands:
            ok = scanned[c] not in (None, "cap")
            if seen and scanned[c] is None:
                mono = False
            seen = seen or ok
        result.monotone = mono
        if not mono:
            log.warning("existence is not monotone along the ladder")
    result.scanned = {c: (v if v == "cap" else v is not None) for c, v in scanned.items()}
    return result


def distortion_report(f, T, M: Module, N: Module, *, cap: int = ISO_CAP, mode: str = WEAK) -> dict:
    """Both distances and the two pixelisation gaps for ``Q``-modules ``M, N``."""
    over_q = IntrinsicShift(T)
    rel = RelativeShift(f, T)
    d_q = distance(M, N, over_q, mode, cap=cap)
    d_p = distance(pullback(f, M), pullback(f, N), rel, mode, cap=cap)
    pix_m = pushforward(f, pullback(f, M))
    pix_n = pushforward(f, pullback(f, N))
    gap_m = distance(M, pix_m, over_q, mode, cap=cap)
    gap_n = distance(N, pix_n, over_q, mode, cap=cap)
    a, b, g1, g2 = (d.value for d in (d_q, d_p, gap_m, gap_n))
    bound = None if g1 is None or g2 is None else g1 + g2
    if bound is not None and math.isinf(bound):
        holds = True  # whatever the distances are
    elif None in (a, b, bound):
        holds = None
    elif math.isinf(a) or math.isinf(b):
        holds = math.isinf(a) and math.isinf(b)
    else:
        holds = abs(a - b) <= bound
    return {"d_Q": d_q, "d_P": d_p, "gap_M": gap_m, "gap_N": gap_n, "holds": holds}


def restriction_probe(f, T, M: Module, N: Module, eps, *, cap: int = ISO_CAP) -> dict:
    """Compare standard interleavings of ``f_*M, f_*N`` over ``Q`` with relative
    standard interleavings of ``M, N``; a counterexample to restriction is a
    ``True``/``False`` pair."""
    over_q = standard_exists(pushforward(f, M), pushforward(f, N), IntrinsicShift(T), eps, cap=cap)
    relative = standard_exists(M, N, RelativeShift(f, T), eps, cap=cap)
    return {"over_Q": over_q is not None, "relative": relative is not None,
            "counterexample": over_q is not None and relative is None}


def pixelization_certificate(f, T, M: Module, eps) -> InterleavingCertificate:
    """Explicit interleaving of ``M`` with ``f_*f*M`` when ``f`` is an ``eps``-approximation respecting joins.

    ``psi`` is the counit followed by the structure map into ``M^eps``; ``phi``
    routes ``M(q)`` through ``M(f(x))`` for ``x = flat(T_eps(q))``.
    """
    from .kan import counit, left_kan
    from .translate import galois
    shift = IntrinsicShift(T)
    chi = counit(f, M)
    pix = chi.source
    psi = shift.eta(M, eps).compose(chi)
    flat = galois(f).flat
    t = T.at(eps)
    K = left_kan(f, pullback(f, M))
    Q = f.target
    comps = []
    for q in range(len(Q)):
        r = t[q]
        x = flat[r]
        if not (Q.leq(q, f.image[x]) and Q.leq(f.image[x], r)):
            raise ValueError(f"f is not an {eps}-approximation at {Q.labels[q]}")
        comps.append(M.category.compose(K.leg(r, x), M.map(q, f.image[x])))
    phi = ModuleMap(M, shift.module(pix, eps), comps)
    return InterleavingCertificate(Fraction(eps), phi, psi, WEAK, _provenance(shift))
