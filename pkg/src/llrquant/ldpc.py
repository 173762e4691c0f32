"""Regular LDPC codes: construction, systematic encoding, BP decoding.

Codes are built by a random edge permutation between variable and check
sockets (configuration model); parallel edges are removed and 4-cycles
reduced by local edge swaps where achievable. The encoder comes from
GF(2) Gaussian elimination on bit-packed rows: the pivot columns become
parity positions and each parity bit is an AND/popcount against the
reduced rows.

The decoder is flooding sum-product in the LLR domain with the exact
tanh rule, early stopping on a zero syndrome. Sign convention: positive
LLR means bit 1, matching levels defined as log(p_1k / p_0k).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LLR_CLIP = 50.0
_PHI_FLOOR = 1e-12


class CodeConstructionError(RuntimeError):
    pass


@dataclass
class ParityCheckCode:
    n: int
    checks_of_edge: np.ndarray       # (E,) check index, edge-sorted by check
    vars_of_edge: np.ndarray         # (E,) variable index
    parity_cols: np.ndarray          # (n-k,) parity bit positions
    info_cols: np.ndarray            # (k,) information bit positions
    parity_rows_packed: np.ndarray   # (n-k, words) encoder rows over info bits
    dv: int = 3
    dc: int = 6
    # decoder scratch tables, built lazily
    _dec: dict = field(default_factory=dict, repr=False)

    @property
    def k(self) -> int:
        return len(self.info_cols)

    @property
    def n_checks(self) -> int:
        return self.n - self.k

    @property
    def rate(self) -> float:
        return self.k / self.n

    def h_dense(self) -> np.ndarray:
        h = np.zeros((self.n_checks, self.n), dtype=np.uint8)
        h[self.checks_of_edge, self.vars_of_edge] = 1
        return h


@dataclass
class DecodeResult:
    bits: np.ndarray        # hard decisions on the info positions
    iterations: int
    converged: bool


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def _edge_permutation(n: int, dv: int, dc: int, rng: np.random.Generator):
    e = n * dv
    var_sockets = np.repeat(np.arange(n), dv)
    chk_sockets = np.repeat(np.arange(e // dc), dc)
    perm = rng.permutation(e)
    return chk_sockets, var_sockets[perm]


def _remove_parallel_edges(chk, var, rng, max_passes=200):
    e = len(chk)
    for _ in range(max_passes):
        key = chk.astype(np.int64) * (var.max() + 1) + var
        order = np.argsort(key, kind="stable")
        dup = np.zeros(e, dtype=bool)
        sk = key[order]
        dup[order[1:]] = sk[1:] == sk[:-1]
        bad = np.flatnonzero(dup)
        if bad.size == 0:
            return chk, var
        others = rng.integers(0, e, size=bad.size)
        for b, o in zip(bad, others):
            var[b], var[o] = var[o], var[b]
    raise CodeConstructionError("could not remove parallel edges")


def _reduce_4cycles(chk, var, n, rng, max_passes=60):
    """Break check pairs sharing two variables by random edge swaps."""
    import scipy.sparse as sp

    e = len(chk)
    m = int(chk.max()) + 1
    for _ in range(max_passes):
        h = sp.csr_matrix((np.ones(e, dtype=np.int32), (chk, var)), shape=(m, n))
        overlap = (h @ h.T).tocoo()
        mask = (overlap.row < overlap.col) & (overlap.data >= 2)
        rows = overlap.row[mask]
        cols = overlap.col[mask]
        if rows.size == 0:
            return chk, var, True
        hl = sp.csr_matrix((np.arange(e) + 1, (chk, var)), shape=(m, n))
        for r, c in zip(rows, cols):
            shared = np.intersect1d(hl.getrow(r).indices, hl.getrow(c).indices)
            if shared.size < 2:
                continue
            edge = int(hl[r, shared[0]]) - 1
            o = int(rng.integers(0, e))
            var[edge], var[o] = var[o], var[edge]
        chk, var = _remove_parallel_edges(chk, var, rng)
    return chk, var, False


def _pack_rows(h: np.ndarray) -> np.ndarray:
    return np.packbits(h, axis=1)


def _gf2_eliminate(h: np.ndarray):
    """Full row reduction; returns (pivot columns, reduced rows, ok)."""
    m, n = h.shape
    rows = _pack_rows(h)
    piv_cols = []
    r = 0
    for col in range(n):
        if r == m:
            break
        byte, bit = divmod(col, 8)
        colbits = (rows[:, byte] >> (7 - bit)) & 1
        cand = np.flatnonzero(colbits[r:])
        if cand.size == 0:
            continue
        p = r + cand[0]
        if p != r:
            rows[[r, p]] = rows[[p, r]]
            colbits[[r, p]] = colbits[[p, r]]
        hit = np.flatnonzero(colbits)
        hit = hit[hit != r]
        if hit.size:
            rows[hit] ^= rows[r]
        piv_cols.append(col)
        r += 1
    return np.array(piv_cols, dtype=np.int64), rows, r == m


def build_code(n: int, dv: int = 3, dc: int = 6, seed: int = 0,
               girth6_required: bool = False) -> ParityCheckCode:
    """Random (dv, dc)-regular code with a derived systematic encoder.

    Retries a bounded number of deterministic sub-seeds when the random
    graph has parallel edges that cannot be swapped away or a rank
    deficient check matrix.
    """
    if n % 2 or (n * dv) % dc:
        raise ValueError("need n even and n*dv divisible by dc")
    from . import rng as rngmod

    for attempt in range(10):
        rng = rngmod.substream(seed, rngmod.STAGE_CODE, attempt)
        try:
            chk, var = _edge_permutation(n, dv, dc, rng)
            chk, var = _remove_parallel_edges(chk, var, rng)
            chk, var, girth_ok = _reduce_4cycles(chk, var, n, rng)
            if girth6_required and not girth_ok:
                continue
            h = np.zeros((n * dv // dc, n), dtype=np.uint8)
            h[chk, var] = 1
            piv, rows, full_rank = _gf2_eliminate(h)
            if not full_rank:
                continue
            info = np.setdiff1d(np.arange(n), piv)
            # parity p solves I*p = A*u with A the info columns of the RREF
            unpacked = np.unpackbits(rows, axis=1, count=n)
            a = unpacked[:, info]
            order = np.argsort(chk, kind="stable")
            return ParityCheckCode(
                n=n,
                checks_of_edge=chk[order].astype(np.int32),
                vars_of_edge=var[order].astype(np.int32),
                parity_cols=piv,
                info_cols=info,
                parity_rows_packed=np.packbits(a, axis=1),
                dv=dv,
                dc=dc,
            )
        except CodeConstructionError:
            continue
    raise CodeConstructionError(f"construction failed for n={n} after retries")


def encode(code: ParityCheckCode, info_bits) -> np.ndarray:
    """Systematic codeword; info bits are recoverable at info_cols."""
    u = np.asarray(info_bits, dtype=np.uint8).ravel()
    if u.size != code.k:
        raise ValueError(f"expected {code.k} info bits, got {u.size}")
    packed_u = np.packbits(u)
    acc = code.parity_rows_packed & packed_u[None, :]
    parity = (np.bitwise_count(acc).sum(axis=1) & 1).astype(np.uint8)
    cw = np.empty(code.n, dtype=np.uint8)
    cw[code.info_cols] = u
    cw[code.parity_cols] = parity
    return cw


def _check_ptr(code: ParityCheckCode) -> np.ndarray:
    return np.flatnonzero(np.diff(code.checks_of_edge, prepend=-1))


def syndrome_ok(code: ParityCheckCode, bits: np.ndarray) -> bool:
    s = np.bitwise_xor.reduceat(bits[code.vars_of_edge], _check_ptr(code))
    return not np.any(s)


def _decoder_tables(code: ParityCheckCode) -> dict:
    if not code._dec:
        order_v = np.argsort(code.vars_of_edge, kind="stable")
        code._dec = {
            "check_ptr": _check_ptr(code),
            "var_order": order_v,
            "var_ptr": np.flatnonzero(np.diff(code.vars_of_edge[order_v], prepend=-1)),
            "inv_var_order": np.argsort(order_v, kind="stable"),
        }
    return code._dec


def _phi(x: np.ndarray) -> np.ndarray:
    return -np.log(np.tanh(np.clip(x, _PHI_FLOOR, None) / 2.0))


def decode_bp(code: ParityCheckCode, llrs, max_iter: int = 50) -> DecodeResult:
    """Flooding sum-product decoding of one codeword.

    ``llrs`` are channel LLRs for all n code bits, positive for bit 1,
    finite (quantized levels or clipped raw values).
    """
    llrs = np.asarray(llrs, dtype=float).ravel()
    if llrs.size != code.n:
        raise ValueError(f"expected {code.n} LLRs, got {llrs.size}")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("LLRs must be finite; clip before decoding")

    t = _decoder_tables(code)
    cptr, vorder, vptr = t["check_ptr"], t["var_order"], t["var_ptr"]
    inv_vorder = t["inv_var_order"]
    dc_edges = np.diff(np.append(cptr, len(code.checks_of_edge)))
    dv_edges = np.diff(np.append(vptr, len(code.checks_of_edge)))

    # run internally in the textbook "positive means bit 0" orientation so
    # the product-of-signs check rule is valid for any check degree
    lch = -llrs
    hard = (lch < 0).astype(np.uint8)
    if syndrome_ok(code, hard):
        return DecodeResult(hard[code.info_cols], 0, True)

    m_vc = lch[code.vars_of_edge].copy()  # check-sorted edge order
    for it in range(1, max_iter + 1):
        # check update, exact tanh rule via sign and phi magnitudes
        mag = _phi(np.abs(m_vc))
        neg = (m_vc < 0).astype(np.int64)
        tot_mag = np.add.reduceat(mag, cptr)
        tot_neg = np.add.reduceat(neg, cptr)
        ext_mag = _phi(np.repeat(tot_mag, dc_edges) - mag)
        ext_sgn = 1 - 2 * ((np.repeat(tot_neg, dc_edges) - neg) & 1)
        m_cv = ext_sgn * np.minimum(ext_mag, LLR_CLIP)

        # variable update on var-sorted views
        mv = m_cv[vorder]
        tot = np.add.reduceat(mv, vptr)
        post = lch + tot
        hard = (post < 0).astype(np.uint8)
        if syndrome_ok(code, hard):
            return DecodeResult(hard[code.info_cols], it, True)
        ext = np.repeat(post, dv_edges) - mv
        m_vc = ext[inv_vorder]

    return DecodeResult(hard[code.info_cols], max_iter, False)


# ---------------------------------------------------------------------------
# alist serialization
# ---------------------------------------------------------------------------


def save_alist(code: ParityCheckCode, path) -> None:
    """Sparse text format: sizes, degrees, then per-node adjacency (1-based)."""
    h = code.h_dense()
    m, n = h.shape
    col_deg = h.sum(axis=0)
    row_deg = h.sum(axis=1)
    lines = [f"{n} {m}", f"{col_deg.max()} {row_deg.max()}"]
    lines.append(" ".join(str(d) for d in col_deg))
    lines.append(" ".join(str(d) for d in row_deg))
    for j in range(n):
        lines.append(" ".join(str(i + 1) for i in np.flatnonzero(h[:, j])))
    for i in range(m):
        lines.append(" ".join(str(j + 1) for j in np.flatnonzero(h[i])))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def load_alist(path) -> ParityCheckCode:
    with open(path) as f:
        tokens = f.read().split("\n")
    n, m = (int(v) for v in tokens[0].split())
    col_deg = np.array([int(v) for v in tokens[2].split()])
    rows, cols = [], []
    for j in range(n):
        for i in tokens[4 + j].split():
            rows.append(int(i) - 1)
            cols.append(j)
    h = np.zeros((m, n), dtype=np.uint8)
    h[rows, cols] = 1
    return code_from_dense(h)


def code_from_dense(h: np.ndarray, dv: int | None = None,
                    dc: int | None = None) -> ParityCheckCode:
    """Wrap an explicit parity-check matrix (must be full rank)."""
    h = np.asarray(h, dtype=np.uint8)
    m, n = h.shape
    piv, rows, full_rank = _gf2_eliminate(h)
    if not full_rank:
        raise CodeConstructionError("parity-check matrix is rank deficient")
    info = np.setdiff1d(np.arange(n), piv)
    unpacked = np.unpackbits(rows, axis=1, count=n)
    chk, var = np.nonzero(h)
    order = np.argsort(chk, kind="stable")
    return ParityCheckCode(
        n=n,
        checks_of_edge=chk[order].astype(np.int32),
        vars_of_edge=var[order].astype(np.int32),
        parity_cols=piv,
        info_cols=info,
        parity_rows_packed=np.packbits(unpacked[:, info], axis=1),
        dv=int(h.sum(axis=0).max()) if dv is None else dv,
        dc=int(h.sum(axis=1).max()) if dc is None else dc,
    )
