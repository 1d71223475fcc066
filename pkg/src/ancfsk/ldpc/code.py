"""Parity-check matrices, their file formats, and systematic encoders."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

DVBS2_SHORT_N = 16200
DVBS2_GROUP = 360
# name -> (address table file, codeword length, group size)
BUILTIN_CODES = {
    "dvbs2-short-r12": ("dvbs2_short_r12.txt", DVBS2_SHORT_N, DVBS2_GROUP),
    "ira-2160-r12": ("ira_2160_r12.txt", 2160, 36),
}


class CodeLoadError(ValueError):
    """Malformed or unusable code description."""


@dataclass(frozen=True, eq=False)
class ParityCheckMatrix:
    """Sparse binary ``(L-K) x L`` matrix in edge-list form.

    Edges are sorted check-major: edge ``e`` joins check ``edge_check[e]`` to
    variable ``edge_var[e]``, and check ``c`` owns edges ``chk_ptr[c]:chk_ptr[c+1]``.
    """

    n_checks: int
    n_vars: int
    edge_check: np.ndarray
    edge_var: np.ndarray
    chk_ptr: np.ndarray
    info_positions: np.ndarray
    name: str = ""
    _encoder: object = field(default=None, repr=False)

    @property
    def L(self) -> int:
        return self.n_vars

    @property
    def K(self) -> int:
        return self.info_positions.size

    @property
    def n_edges(self) -> int:
        return self.edge_var.size

    @property
    def rate(self) -> float:
        return self.K / self.L

    def col_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_var, minlength=self.n_vars)

    def row_degrees(self) -> np.ndarray:
        return np.diff(self.chk_ptr)

    def dense(self) -> np.ndarray:
        H = np.zeros((self.n_checks, self.n_vars), dtype=np.uint8)
        H[self.edge_check, self.edge_var] = 1
        return H

    def syndrome(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.uint8)
        return (np.bincount(self.edge_check, weights=bits[self.edge_var], minlength=self.n_checks) % 2).astype(np.uint8)

    def is_codeword(self, bits) -> bool:
        return not self.syndrome(bits).any()

    def encode(self, u) -> np.ndarray:
        return self._encoder(np.asarray(u, dtype=np.uint8).ravel())


def _from_edges(rows, cols, n_checks, n_vars, name) -> tuple:
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if rows.size == 0:
        raise CodeLoadError("code has no edges")
    if rows.min() < 0 or rows.max() >= n_checks or cols.min() < 0 or cols.max() >= n_vars:
        raise CodeLoadError("edge index outside matrix dimensions")
    key = rows * n_vars + cols
    if np.unique(key).size != key.size:
        raise CodeLoadError("duplicate edge")
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    if np.bincount(cols, minlength=n_vars).min() == 0:
        raise CodeLoadError("parity-check matrix has an empty column")
    chk_ptr = np.zeros(n_checks + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n_checks), out=chk_ptr[1:])
    return rows, cols, chk_ptr


# -- generic codes -------------------------------------------------------------------


def _systematic_encoder(H: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gaussian elimination over GF(2); returns (info cols, parity cols, P) with p = P u."""
    m, n = H.shape
    A = H.astype(bool).copy()
    pivots = []
    row = 0
    for col in range(n):
        if row == m:
            break
        hits = np.nonzero(A[row:, col])[0]
        if hits.size == 0:
            continue
        r = row + hits[0]
        if r != row:
            A[[row, r]] = A[[r, row]]
        others = np.nonzero(A[:, col])[0]
        others = others[others != row]
        A[others] ^= A[row]
        pivots.append(col)
        row += 1
    if row < m:
        raise CodeLoadError(f"parity-check matrix is rank deficient (rank {row} < {m} rows)")
    parity = np.array(pivots, dtype=np.int64)
    info = np.setdiff1d(np.arange(n), parity)
    # reduced form: row i reads p_i + sum_j A[i, info_j] u_j = 0
    P = A[:, info].astype(np.uint8)
    return info, parity, P


def from_dense(H, name: str = "") -> ParityCheckMatrix:
    H = np.asarray(H, dtype=np.uint8)
    rows, cols = np.nonzero(H)
    m, n = H.shape
    rows, cols, ptr = _from_edges(rows, cols, m, n, name)
    info, parity, P = _systematic_encoder(H)
    Pf = P.astype(np.float64)

    def encode(u):
        if u.size != info.size:
            raise ValueError(f"expected {info.size} information bits, got {u.size}")
        c = np.zeros(n, dtype=np.uint8)
        c[info] = u
        c[parity] = (Pf @ u).astype(np.int64) % 2
        return c

    return ParityCheckMatrix(m, n, rows, cols, ptr, info, name, encode)


def read_alist(path) -> ParityCheckMatrix:
    """Parse an alist file: header, degrees, then one line per column and per row.

    Indices are 1-based; zero padding is accepted but not required.
    """
    path = Path(path)
    try:
        lines = [ln.split() for ln in path.read_text().splitlines()]
        lines = [[int(t) for t in ln] for ln in lines if ln]
    except (OSError, ValueError) as exc:
        raise CodeLoadError(f"cannot read alist {path}: {exc}") from exc
    if len(lines) < 4 or len(lines[0]) != 2:
        raise CodeLoadError(f"alist {path} has a malformed header")
    n, m = lines[0]
    col_deg, row_deg = lines[2], lines[3]
    if len(col_deg) != n or len(row_deg) != m:
        raise CodeLoadError(f"alist {path}: degree lists do not match {n} x {m}")
    body = lines[4:]
    if len(body) < n + m:
        raise CodeLoadError(f"alist {path} is truncated")
    col_lists = [[e for e in ln if e != 0] for ln in body[:n]]
    row_lists = [[e for e in ln if e != 0] for ln in body[n : n + m]]

    rows, cols = [], []
    for j, lst in enumerate(col_lists):
        if len(lst) != col_deg[j]:
            raise CodeLoadError(f"column {j + 1} lists {len(lst)} entries, degree says {col_deg[j]}")
        for i in lst:
            if not 1 <= i <= m:
                raise CodeLoadError(f"column {j + 1} refers to row {i} outside 1..{m}")
            rows.append(i - 1)
            cols.append(j)
    by_rows = set()
    for i, lst in enumerate(row_lists):
        if len(lst) != row_deg[i]:
            raise CodeLoadError(f"row {i + 1} lists {len(lst)} entries, degree says {row_deg[i]}")
        for j in lst:
            if not 1 <= j <= n:
                raise CodeLoadError(f"row {i + 1} refers to column {j} outside 1..{n}")
            by_rows.add((i, j - 1))
    if by_rows != set(zip(rows, cols)):
        raise CodeLoadError("row and column lists disagree")
    H = np.zeros((m, n), dtype=np.uint8)
    H[rows, cols] = 1
    return from_dense(H, name=path.stem)


def write_alist(code: ParityCheckMatrix, path) -> None:
    H = code.dense()
    m, n = H.shape
    cols = [np.nonzero(H[:, j])[0] + 1 for j in range(n)]
    rows = [np.nonzero(H[i])[0] + 1 for i in range(m)]
    max_c = max(len(c) for c in cols)
    max_r = max(len(r) for r in rows)
    pad = lambda v, w: " ".join(str(x) for x in list(v) + [0] * (w - len(v)))
    lines = [f"{n} {m}", f"{max_c} {max_r}", " ".join(str(len(c)) for c in cols), " ".join(str(len(r)) for r in rows)]
    lines += [pad(c, max_c) for c in cols]
    lines += [pad(r, max_r) for r in rows]
    Path(path).write_text("\n".join(lines) + "\n")


# -- DVB-S2 style IRA codes -------------------------------------------------------------


def read_address_table(text: str) -> list[list[int]]:
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append([int(t) for t in line.split()])
    return rows


def ira_code(table: list[list[int]], n: int, group: int = DVBS2_GROUP, name: str = "") -> ParityCheckMatrix:
    """IRA code from an accumulator address table, DVB-S2 layout.

    Information bits come first, parity bits last; check ``i`` also sees
    parity bits ``i`` and ``i-1`` (the accumulator).
    """
    k = len(table) * group
    m = n - k
    if m <= 0 or m % group:
        raise CodeLoadError(f"table with {len(table)} groups does not fit n={n}")
    q = m // group
    info_rows, info_cols = [], []
    j = np.arange(group)
    for g, addrs in enumerate(table):
        for x in addrs:
            if not 0 <= x < m:
                raise CodeLoadError(f"address {x} outside 0..{m - 1}")
            info_rows.append((x + j * q) % m)
            info_cols.append(g * group + j)
    info_rows = np.concatenate(info_rows)
    info_cols = np.concatenate(info_cols)
    acc_rows = np.concatenate([np.arange(m), np.arange(1, m)])
    acc_cols = np.concatenate([k + np.arange(m), k + np.arange(m - 1)])
    rows, cols, ptr = _from_edges(
        np.concatenate([info_rows, acc_rows]), np.concatenate([info_cols, acc_cols]), m, n, name
    )

    def encode(u):
        if u.size != k:
            raise ValueError(f"expected {k} information bits, got {u.size}")
        pre = np.bincount(info_rows, weights=u[info_cols], minlength=m).astype(np.int64) % 2
        parity = np.cumsum(pre) % 2
        return np.concatenate([u, parity.astype(np.uint8)])

    return ParityCheckMatrix(m, n, rows, cols, ptr, np.arange(k), name, encode)


def random_ira_table(n_groups: int, m: int, group: int, degrees, seed: int, max_tries: int = 10000) -> list[list[int]]:
    """Seeded address table whose information part has no length-4 cycles.

    ``degrees[g]`` is the column weight of group ``g``; addresses are redrawn
    until the candidate column shares at most one check with every earlier one.
    """
    if m % group:
        raise ValueError("m must be a multiple of the group size")
    q = m // group
    rng = np.random.default_rng(seed)
    H = np.zeros((m, n_groups * group), dtype=np.int32)
    j = np.arange(group)
    table = []
    for g in range(n_groups):
        for _ in range(max_tries):
            addrs = rng.choice(m, size=degrees[g], replace=False)
            cols = np.zeros((m, group), dtype=np.int32)
            for x in addrs:
                cols[(x + j * q) % m, j] += 1
            if cols.max() > 1:
                continue
            prev = H[:, : g * group]
            if g and (cols.T @ prev).max() > 1:
                continue
            if (cols.T @ cols - np.diag(cols.sum(axis=0))).max() > 1:
                continue
            H[:, g * group : (g + 1) * group] = cols
            table.append(sorted(int(a) for a in addrs))
            break
        else:
            raise CodeLoadError(f"no cycle-free placement for group {g} after {max_tries} tries")
    return table


def builtin_code(name: str) -> ParityCheckMatrix:
    try:
        fname, n, group = BUILTIN_CODES[name]
    except KeyError:
        raise CodeLoadError(f"unknown built-in code {name!r}; known: {', '.join(BUILTIN_CODES)}") from None
    text = resources.files("ancfsk.ldpc").joinpath("data", fname).read_text()
    return ira_code(read_address_table(text), n, group=group, name=name)


def dvbs2_short_r12() -> ParityCheckMatrix:
    return builtin_code("dvbs2-short-r12")


def load_code(source) -> ParityCheckMatrix:
    """Resolve a built-in code name, ``alist:PATH`` or a bare alist path."""
    if isinstance(source, ParityCheckMatrix):
        return source
    source = str(source)
    if source in BUILTIN_CODES:
        return builtin_code(source)
    if source.startswith("alist:"):
        source = source[len("alist:") :]
    return read_alist(source)
