"""Dense bit-packed linear algebra over F2, plus randomized minimum-weight search.

Every parity-check matrix, logical basis, detector matrix and adapter map in
this package is a :class:`BinaryMatrix`: a dense, row-major matrix whose rows
are packed into 64-bit words.  Dense packing is deliberate -- nothing in scope
exceeds ~1000 columns, and word-parallel row XOR makes Gaussian elimination
and information-set decoding fast enough without sparse machinery.

Two text formats are provided and round-trip exactly:

* coordinate: ``"rows cols"`` header line, then one ``"r c"`` pair per
  nonzero entry (0-indexed),
* dense: one ``0/1`` string per row.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BinaryMatrix",
    "CosetSearchReport",
    "rank",
    "kernel",
    "solve",
    "kron",
    "min_coset_weight",
    "min_weight_outside",
    "exhaustive_coset_floor",
    "min_logical_fault_weight",
]

_WORD = 64


def _pack(arr: np.ndarray) -> np.ndarray:
    """Pack a (m, n) 0/1 array into (m, ceil(n/64)) little-endian uint64 words."""
    arr = np.asarray(arr, dtype=np.uint8) & 1
    if arr.ndim != 2:
        raise ValueError("expected a 2D array")
    m, n = arr.shape
    nbytes = 8 * ((n + _WORD - 1) // _WORD)
    packed = np.packbits(arr, axis=1, bitorder="little")
    if packed.shape[1] < nbytes:
        pad = np.zeros((m, nbytes - packed.shape[1]), dtype=np.uint8)
        packed = np.hstack([packed, pad])
    return np.ascontiguousarray(packed).view(np.uint64)


def _unpack(words: np.ndarray, n: int) -> np.ndarray:
    m = words.shape[0]
    if m == 0:
        return np.zeros((0, n), dtype=np.uint8)
    bits = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")
    return np.ascontiguousarray(bits[:, :n])


def _popcount(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=-1).astype(np.int64)


class BinaryMatrix:
    """Dense matrix over F2 with bit-packed rows.

    Construct from any 0/1 array-like via ``BinaryMatrix(arr)`` or the
    ``zeros`` / ``identity`` helpers.  Values are immutable by convention:
    all operations return new matrices.
    """

    __slots__ = ("rows", "cols", "_words", "_arr")

    def __init__(self, arr, cols: int | None = None):
        if isinstance(arr, BinaryMatrix):
            self.rows, self.cols = arr.rows, arr.cols
            self._words = arr._words
            self._arr = arr._arr
            return
        a = np.atleast_2d(np.asarray(arr, dtype=np.uint8)) & 1
        if a.size == 0 and cols is not None:
            a = a.reshape(0, cols)
        self.rows, self.cols = a.shape
        self._words = _pack(a)
        self._arr = a

    # -- constructors ------------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BinaryMatrix":
        return cls(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> "BinaryMatrix":
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def _from_words(cls, words: np.ndarray, cols: int) -> "BinaryMatrix":
        self = cls.__new__(cls)
        self.rows = words.shape[0]
        self.cols = cols
        self._words = words
        self._arr = None
        return self

    # -- views -------------------------------------------------------------
    @property
    def A(self) -> np.ndarray:
        """The matrix as a (rows, cols) uint8 array."""
        if self._arr is None:
            self._arr = _unpack(self._words, self.cols)
        return self._arr

    @property
    def words(self) -> np.ndarray:
        return self._words

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row(self, i: int) -> np.ndarray:
        return self.A[i]

    def row_supports(self) -> list[np.ndarray]:
        """Column indices of the nonzeros of each row (decoder-graph helper)."""
        return [np.nonzero(r)[0] for r in self.A]

    def col_supports(self) -> list[np.ndarray]:
        return [np.nonzero(c)[0] for c in self.A.T]

    def row_weights(self) -> np.ndarray:
        return _popcount(self._words)

    # -- algebra -----------------------------------------------------------
    def transpose(self) -> "BinaryMatrix":
        return BinaryMatrix(self.A.T)

    @property
    def T(self) -> "BinaryMatrix":
        return self.transpose()

    def __add__(self, other: "BinaryMatrix") -> "BinaryMatrix":
        other = BinaryMatrix(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return BinaryMatrix._from_words(self._words ^ other._words, self.cols)

    def __matmul__(self, other) -> "BinaryMatrix":
        return self.mm(other)

    def mm(self, other) -> "BinaryMatrix":
        """Matrix product over F2."""
        other = BinaryMatrix(other)
        if self.cols != other.rows:
            raise ValueError(f"inner dimension mismatch {self.shape} @ {other.shape}")
        prod = (self.A.astype(np.int32) @ other.A.astype(np.int32)) & 1
        return BinaryMatrix(prod.astype(np.uint8))

    def mv(self, v) -> np.ndarray:
        """Matrix-vector product over F2; returns a uint8 vector."""
        v = np.asarray(v, dtype=np.uint8) & 1
        if v.shape != (self.cols,):
            raise ValueError(f"vector length {v.shape} incompatible with {self.shape}")
        return ((self.A.astype(np.int32) @ v.astype(np.int32)) & 1).astype(np.uint8)

    def is_zero(self) -> bool:
        return not self._words.any()

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._words, other._words)

    def __hash__(self):
        return hash((self.rows, self.cols, self._words.tobytes()))

    def __repr__(self):
        return f"BinaryMatrix({self.rows}x{self.cols})"

    # -- structure ---------------------------------------------------------
    def hstack(self, *others) -> "BinaryMatrix":
        mats = [self.A] + [BinaryMatrix(o).A for o in others]
        return BinaryMatrix(np.hstack(mats))

    def vstack(self, *others) -> "BinaryMatrix":
        mats = [self.A] + [BinaryMatrix(o).A for o in others]
        return BinaryMatrix(np.vstack(mats))

    def take_rows(self, idx) -> "BinaryMatrix":
        return BinaryMatrix(self.A[np.asarray(idx, dtype=np.intp)], cols=self.cols)

    def take_cols(self, idx) -> "BinaryMatrix":
        return BinaryMatrix(self.A[:, np.asarray(idx, dtype=np.intp)])

    def permute_cols(self, perm) -> "BinaryMatrix":
        return self.take_cols(perm)

    # -- elimination -------------------------------------------------------
    def rref(self) -> tuple["BinaryMatrix", list[int]]:
        """Reduced row echelon form; returns (rref matrix, pivot columns)."""
        w = self._words.copy()
        pivots: list[int] = []
        r = 0
        m = self.rows
        for c in range(self.cols):
            if r >= m:
                break
            wi, bi = divmod(c, _WORD)
            col = (w[r:, wi] >> np.uint64(bi)) & np.uint64(1)
            nz = np.nonzero(col)[0]
            if nz.size == 0:
                continue
            p = r + int(nz[0])
            if p != r:
                w[[r, p]] = w[[p, r]]
            hit = ((w[:, wi] >> np.uint64(bi)) & np.uint64(1)).astype(bool)
            hit[r] = False
            if hit.any():
                w[hit] ^= w[r]
            pivots.append(c)
            r += 1
        return BinaryMatrix._from_words(w, self.cols), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def kernel(self) -> "BinaryMatrix":
        """Basis of the right kernel, one vector per row; cols - rank rows."""
        red, pivots = self.rref()
        pivset = set(pivots)
        free = [c for c in range(self.cols) if c not in pivset]
        ker = np.zeros((len(free), self.cols), dtype=np.uint8)
        red_arr = red.A
        for i, f in enumerate(free):
            ker[i, f] = 1
            for r, p in enumerate(pivots):
                ker[i, p] = red_arr[r, f]
        return BinaryMatrix(ker, cols=self.cols)

    def solve(self, b) -> np.ndarray | None:
        """Solve self @ x = b; returns one solution or None if inconsistent."""
        b = np.asarray(b, dtype=np.uint8) & 1
        if b.shape != (self.rows,):
            raise ValueError("right-hand side length mismatch")
        aug = BinaryMatrix(np.hstack([self.A, b.reshape(-1, 1)]))
        red, pivots = aug.rref()
        if self.cols in pivots:
            return None
        x = np.zeros(self.cols, dtype=np.uint8)
        red_arr = red.A
        for r, p in enumerate(pivots):
            x[p] = red_arr[r, self.cols]
        return x

    def row_space_basis(self) -> "BinaryMatrix":
        """Canonical (RREF, nonzero rows) basis of the row space."""
        red, pivots = self.rref()
        return red.take_rows(range(len(pivots)))

    def in_row_space(self, v) -> bool:
        v = np.asarray(v, dtype=np.uint8) & 1
        basis = self.row_space_basis()
        aug = basis.vstack(v.reshape(1, -1))
        return aug.rank() == basis.rows

    def same_row_space(self, other: "BinaryMatrix") -> bool:
        return self.row_space_basis() == BinaryMatrix(other).row_space_basis()

    # -- serialization -----------------------------------------------------
    def to_coords(self) -> str:
        r, c = np.nonzero(self.A)
        lines = [f"{self.rows} {self.cols}"]
        lines += [f"{int(i)} {int(j)}" for i, j in zip(r, c)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_coords(cls, text: str) -> "BinaryMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        rows, cols = map(int, lines[0].split())
        arr = np.zeros((rows, cols), dtype=np.uint8)
        for ln in lines[1:]:
            i, j = map(int, ln.split())
            arr[i, j] ^= 1
        return cls(arr, cols=cols)

    def to_dense_text(self) -> str:
        return "\n".join("".join(str(int(b)) for b in row) for row in self.A) + "\n"

    @classmethod
    def from_dense_text(cls, text: str) -> "BinaryMatrix":
        rows = [[int(ch) for ch in ln.strip()] for ln in text.splitlines() if ln.strip()]
        return cls(np.array(rows, dtype=np.uint8))


# -- module-level conveniences ----------------------------------------------

def rank(m) -> int:
    return BinaryMatrix(m).rank()


def kernel(m) -> BinaryMatrix:
    return BinaryMatrix(m).kernel()


def solve(m, b) -> np.ndarray | None:
    return BinaryMatrix(m).solve(b)


def kron(a, b) -> BinaryMatrix:
    a, b = BinaryMatrix(a), BinaryMatrix(b)
    return BinaryMatrix(np.kron(a.A, b.A))


def assemble_blocks(blocks: list[list], row_sizes: list[int], col_sizes: list[int]) -> BinaryMatrix:
    """Assemble a block matrix; None entries are zero blocks of the given sizes."""
    out_rows = []
    for bi, brow in enumerate(blocks):
        row_parts = []
        for bj, blk in enumerate(brow):
            if blk is None:
                row_parts.append(np.zeros((row_sizes[bi], col_sizes[bj]), dtype=np.uint8))
            else:
                m = BinaryMatrix(blk)
                if m.shape != (row_sizes[bi], col_sizes[bj]):
                    raise ValueError(
                        f"block ({bi},{bj}) has shape {m.shape}, "
                        f"expected {(row_sizes[bi], col_sizes[bj])}"
                    )
                row_parts.append(m.A)
        out_rows.append(np.hstack(row_parts))
    return BinaryMatrix(np.vstack(out_rows))


# -- minimum-weight coset search ---------------------------------------------

@dataclass(frozen=True)
class CosetSearchReport:
    """Result of a minimum-weight search over a coset ``offset + rowspace(span)``.

    ``best_weight`` is always a valid upper bound; it is the exact minimum
    iff ``exhaustive_floor >= best_weight - 1``.  ``exhaustive_floor`` is the
    largest w such that all vectors of weight <= w were exhaustively excluded
    from the coset (0 if no exhaustive pass ran).
    """

    best_weight: int
    best_vector: np.ndarray
    trials: int
    exhaustive_floor: int

    @property
    def is_exact(self) -> bool:
        return self.exhaustive_floor >= self.best_weight - 1

    def __str__(self):
        tag = "exact" if self.is_exact else f"upper bound (floor {self.exhaustive_floor})"
        return f"weight {self.best_weight} [{tag}, {self.trials} trials]"


def _lex_less(a: np.ndarray, b: np.ndarray) -> bool:
    return _pack(a.reshape(1, -1)).tobytes() < _pack(b.reshape(1, -1)).tobytes()


def min_coset_weight(
    span,
    offset,
    *,
    trials: int = 200,
    seed: int = 0,
    exhaustive_cap: int = 0,
    exclude_span=None,
) -> CosetSearchReport:
    """Randomized information-set search for the minimum weight of a coset.

    The coset is ``{offset + x : x in rowspace(span)}``.  Each trial applies a
    random column permutation, row-reduces the span, reduces the offset
    against the pivots, and enumerates combinations of up to two reduced rows.
    Ties between equal-weight vectors are broken toward the lexicographically
    smallest packed representation, so reports are deterministic per seed.

    If ``exhaustive_cap > 0``, all coset vectors of weight <= cap are
    additionally excluded (or found) by a meet-in-the-middle enumeration,
    which sets ``exhaustive_floor``.

    ``exclude_span``, if given, restricts the search to coset elements
    *outside* ``rowspace(exclude_span)`` (used for min weights over
    nontrivial logical classes, where offset itself may be trivial).
    """
    span = BinaryMatrix(span)
    offset = np.asarray(offset, dtype=np.uint8) & 1
    n = span.cols
    if offset.shape != (n,):
        raise ValueError("offset length must equal span.cols")
    rng = np.random.default_rng(seed)
    exclude = BinaryMatrix(exclude_span).row_space_basis() if exclude_span is not None else None
    excl_words = excl_pivots = None
    if exclude is not None:
        red, excl_pivots = exclude.rref()
        excl_words = red.words[: len(excl_pivots)]

    def admissible(vec: np.ndarray) -> bool:
        if exclude is None:
            return True
        # reduce against the exclusion span; in-span vectors reduce to zero
        v = _pack(vec.reshape(1, -1))[0].copy()
        for i, p in enumerate(excl_pivots):
            wi, bi = divmod(p, _WORD)
            if (v[wi] >> np.uint64(bi)) & np.uint64(1):
                v ^= excl_words[i]
        return bool(v.any())

    best_vec: np.ndarray | None = None
    best_w = n + 1
    basis = span.row_space_basis()
    r = basis.rows

    def consider(vec: np.ndarray):
        nonlocal best_vec, best_w
        w = int(vec.sum())
        if w > best_w or (w == best_w and (best_vec is None or not _lex_less(vec, best_vec))):
            return
        if not admissible(vec):
            return
        best_w = w
        best_vec = vec.copy()

    if r == 0:
        consider(offset)
        trials_done = 0
    else:
        trials_done = trials
        for _ in range(trials):
            perm = rng.permutation(n)
            inv = np.empty(n, dtype=np.intp)
            inv[perm] = np.arange(n)
            red, pivots = basis.take_cols(perm).rref()
            rows_p = red.words[: len(pivots)]
            # reduce the offset against the pivots
            off_p = _pack((offset[perm]).reshape(1, -1))[0].copy()
            for i, p in enumerate(pivots):
                wi, bi = divmod(p, _WORD)
                if (off_p[wi] >> np.uint64(bi)) & np.uint64(1):
                    off_p ^= rows_p[i]
            cand = off_p.reshape(1, -1) ^ np.vstack([np.zeros_like(off_p), rows_p])
            weights = _popcount(cand)
            order = np.argsort(weights)
            for idx in order[: min(8, len(order))]:
                consider(_unpack(cand[idx : idx + 1], n)[0][inv])
            # depth-2 combinations
            for i in range(len(pivots)):
                batch = cand[i + 1 :] ^ rows_p[i]
                if batch.shape[0] == 0:
                    continue
                bw = _popcount(batch)
                good = np.nonzero(bw <= max(best_w, 1))[0]
                for g in good[:16]:
                    consider(_unpack(batch[g : g + 1], n)[0][inv])

    floor = 0
    if exhaustive_cap > 0:
        dual = basis.kernel() if r > 0 else BinaryMatrix.identity(n)
        s0 = dual.mv(offset)
        found = exhaustive_coset_floor(
            dual, s0, exhaustive_cap, exclude=exclude
        )
        if found is not None:
            consider(found)
            floor = int(found.sum()) - 1
        else:
            floor = exhaustive_cap
    if best_vec is None:
        # nothing admissible found; report the raw offset as the fallback bound
        best_vec = offset.copy()
        best_w = int(offset.sum())
    floor = min(floor, best_w - 1)
    return CosetSearchReport(best_w, best_vec, trials_done, max(floor, 0))


def exhaustive_coset_floor(dual, s0, max_weight: int, *, exclude=None) -> np.ndarray | None:
    """Meet-in-the-middle search for a minimum-weight v with ``dual @ v = s0``.

    Returns the lowest-weight vector of weight <= max_weight satisfying the
    syndrome equation (and outside ``exclude``'s row space if given), or None
    if no such vector exists.  Enumerates all ``C(n, <= ceil(w/2))`` column
    combinations per side, so it is exhaustive, not sampled.
    """
    dual = BinaryMatrix(dual)
    n = dual.cols
    s0 = np.asarray(s0, dtype=np.uint8) & 1
    cols = _pack(dual.A.T) if dual.rows else np.zeros((n, 1), dtype=np.uint64)
    zero = np.zeros_like(cols[0]) if n else np.zeros(1, dtype=np.uint64)
    s0_packed = _pack(s0.reshape(1, -1))[0] if dual.rows else zero
    excl_words = excl_pivots = None
    if exclude is not None:
        red, excl_pivots = BinaryMatrix(exclude).rref()
        excl_words = red.words[: len(excl_pivots)]

    def outside_exclusion(v: np.ndarray) -> bool:
        if exclude is None:
            return True
        pv = _pack(v.reshape(1, -1))[0].copy()
        for i, p in enumerate(excl_pivots):
            wi, bi = divmod(p, _WORD)
            if (pv[wi] >> np.uint64(bi)) & np.uint64(1):
                pv ^= excl_words[i]
        return bool(pv.any())

    half_a = (max_weight + 1) // 2
    half_b = max_weight // 2
    table: dict[bytes, list[tuple[int, ...]]] = {}

    def combos(limit):
        yield ()
        for w in range(1, limit + 1):
            yield from itertools.combinations(range(n), w)

    for combo in combos(half_a):
        syn = zero.copy()
        for c in combo:
            syn ^= cols[c]
        table.setdefault(syn.tobytes(), []).append(combo)

    best: np.ndarray | None = None
    best_w = max_weight + 1
    for combo in combos(half_b):
        syn = s0_packed.copy()
        for c in combo:
            syn ^= cols[c]
        for other in table.get(syn.tobytes(), ()):
            v = np.zeros(n, dtype=np.uint8)
            for c in combo:
                v[c] ^= 1
            for c in other:
                v[c] ^= 1
            w = int(v.sum())
            if w == 0 and s0.any():
                continue
            if w > best_w or (w == best_w and best is not None and not _lex_less(v, best)):
                continue
            if not outside_exclusion(v):
                continue
            # confirm: MITM combos can overlap, re-check the syndrome
            if dual.rows == 0 or np.array_equal(dual.mv(v), s0):
                best, best_w = v, w
    return best


def min_weight_outside(full_span, exclude_span, *, trials=200, seed=0, exhaustive_cap=0) -> CosetSearchReport:
    """Minimum weight of a vector in rowspace(full_span) \\ rowspace(exclude_span).

    This is the standard CSS distance search: with ``full_span`` the kernel of
    one check matrix and ``exclude_span`` the row space of the other, the
    result is the minimum weight of a nontrivial logical representative over
    all logical classes.
    """
    full = BinaryMatrix(full_span)
    offset = np.zeros(full.cols, dtype=np.uint8)
    return min_coset_weight(
        full, offset, trials=trials, seed=seed,
        exhaustive_cap=exhaustive_cap, exclude_span=exclude_span,
    )


def min_logical_fault_weight(detector_cols: list[int], observable_cols: list[int], weight_cap: int) -> int | None:
    """Exhaustive minimum weight of an undetected, observable-flipping fault set.

    The matrices are given column-wise as Python int bitmasks.  Searches all
    fault sets of size <= weight_cap for D.f = 0 and O.f != 0; returns the
    minimum size, or None if every such set is detected or silent.
    """
    ncols = len(detector_cols)
    pairs = list(zip(detector_cols, observable_cols))
    for w in range(1, weight_cap + 1):
        for combo in itertools.combinations(range(ncols), w):
            det = 0
            obs = 0
            for c in combo:
                det ^= pairs[c][0]
                obs ^= pairs[c][1]
            if det == 0 and obs != 0:
                return w
    return None
