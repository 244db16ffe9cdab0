"""Classical and CSS quantum code constructions with canonical logical bases.

Provides the code families used across the package: two-block circulant
bicycle codes over a bivariate monomial torus, hypergraph products, toric and
rotated surface codes, the [[7,1,3]] color code, small classical codes
(Hamming, repetition, a searched [12,3,6] quasi-cyclic code) and randomized
biregular LDPC ensembles with an exhaustive expansion tester.

Every :class:`CssCode` carries a canonical logical basis in Gottesman
standard form, ``L_Z = (I A 0)`` / ``L_X = (I 0 B)`` under a stored qubit
permutation that partitions qubits into L/Z/X zones.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .f2 import BinaryMatrix, CosetSearchReport, kron, min_weight_outside

__all__ = [
    "ClassicalCode",
    "CssCode",
    "BbSpec",
    "ExpansionReport",
    "bb_code",
    "disjoint_logical_basis",
    "check_automorphism_shift",
    "canonical_basis",
    "hgp",
    "toric",
    "rotated_surface",
    "steane_color",
    "hamming74",
    "repetition",
    "quasi_cyclic_search",
    "random_ldpc_pair",
    "expansion_check",
    "dual",
    "tensor_copies",
]

_DATA_DIR = Path(__file__).parent / "data"


# ---------------------------------------------------------------------------
# classical codes
# ---------------------------------------------------------------------------

@dataclass
class ClassicalCode:
    """Binary linear code given by a parity-check matrix."""

    h: BinaryMatrix
    name: str = ""
    split_col: int | None = None  # column where a marked (H0 | H1) split begins
    d_est: CosetSearchReport | None = None

    @property
    def n(self) -> int:
        return self.h.cols

    @property
    def k(self) -> int:
        return self.n - self.h.rank()

    @property
    def num_checks(self) -> int:
        return self.h.rows

    def generator(self) -> BinaryMatrix:
        """A basis of the codeword space (the kernel of h)."""
        return self.h.kernel()

    def distance(self, *, trials: int = 100, exhaustive_cap: int = 0, seed: int = 0) -> CosetSearchReport:
        """Minimum nonzero codeword weight; exhaustive when k is small."""
        gen = self.generator()
        if gen.rows == 0:
            rep = CosetSearchReport(self.n + 1, np.zeros(self.n, dtype=np.uint8), 0, self.n)
            self.d_est = rep
            return rep
        if gen.rows <= 20:
            best = None
            for bits in range(1, 1 << gen.rows):
                v = np.zeros(self.n, dtype=np.uint8)
                for i in range(gen.rows):
                    if (bits >> i) & 1:
                        v ^= gen.A[i]
                w = int(v.sum())
                if best is None or w < best[0]:
                    best = (w, v)
            rep = CosetSearchReport(best[0], best[1], 0, best[0] - 1)
        else:
            rep = min_weight_outside(
                gen, BinaryMatrix.zeros(0, self.n),
                trials=trials, exhaustive_cap=exhaustive_cap, seed=seed,
            )
        self.d_est = rep
        return rep


def hamming74() -> ClassicalCode:
    """The [7,4,3] Hamming code (columns are 1..7 in binary)."""
    h = np.array(
        [[0, 0, 0, 1, 1, 1, 1],
         [0, 1, 1, 0, 0, 1, 1],
         [1, 0, 1, 0, 1, 0, 1]], dtype=np.uint8)
    return ClassicalCode(BinaryMatrix(h), name="hamming74")


def repetition(n: int) -> ClassicalCode:
    """The [n,1,n] repetition code with the chain check matrix."""
    if n < 1:
        raise ValueError("repetition length must be >= 1")
    h = np.zeros((n - 1, n), dtype=np.uint8)
    for i in range(n - 1):
        h[i, i] = h[i, i + 1] = 1
    return ClassicalCode(BinaryMatrix(h, cols=n), name=f"repetition{n}")


def _circulant(first_row: tuple[int, ...], size: int) -> np.ndarray:
    m = np.zeros((size, size), dtype=np.uint8)
    for i in range(size):
        for j, bit in enumerate(first_row):
            m[i, (i + j) % size] = bit
    return m


def quasi_cyclic_search(n: int = 12, k: int = 3, d: int = 6) -> ClassicalCode:
    """Search for an [n, k, d] quasi-cyclic code with circulant generator blocks.

    The generator is G = (I_k | A | B | C) with k x k circulant blocks; the
    check matrix (P^T | I_{n-k}) with P = (A B C) is returned in canonical
    split form.  Distance is validated exhaustively (2^k - 1 codewords).
    The discovered generator is pinned in ``data/`` and loaded when present;
    pass nothing and the pinned code is used if it exists.
    """
    if n != 12 or k != 3 or d != 6:
        raise ValueError("only the [12,3,6] search is supported")
    pinned = _DATA_DIR / "qc_12_3_6.txt"
    if pinned.exists():
        gen = BinaryMatrix.from_dense_text(pinned.read_text())
        code = _qc_code_from_generator(gen)
        if code.distance().best_weight == d:
            return code
    for rows in itertools.product(range(8), repeat=3):
        blocks = [_circulant(tuple((r >> b) & 1 for b in range(3)), 3) for r in rows]
        gen = BinaryMatrix(np.hstack([np.eye(3, dtype=np.uint8)] + blocks))
        code = _qc_code_from_generator(gen)
        if code.distance().best_weight == d:
            if not pinned.exists():
                pinned.parent.mkdir(exist_ok=True)
                pinned.write_text(gen.to_dense_text())
            return code
    raise ValueError(f"no [{n},{k},{d}] quasi-cyclic code found in the search space")


def _qc_code_from_generator(gen: BinaryMatrix) -> ClassicalCode:
    k, n = gen.shape
    p = gen.A[:, k:]
    h = BinaryMatrix(np.hstack([p.T, np.eye(n - k, dtype=np.uint8)]))
    return ClassicalCode(h, name=f"qc_{n}_{k}", split_col=k)


def _biregular_graph(rng, n_bits: int, n_checks: int, bit_deg: int, max_repair: int = 10000) -> np.ndarray:
    """Simple biregular bipartite adjacency via configuration model + edge swaps."""
    n_edges = n_bits * bit_deg
    if n_edges % n_checks:
        raise ValueError("degrees do not balance")
    check_deg = n_edges // n_checks
    bit_stubs = np.repeat(np.arange(n_bits), bit_deg)
    check_stubs = np.repeat(np.arange(n_checks), check_deg)
    rng.shuffle(check_stubs)
    edges = list(zip(bit_stubs.tolist(), check_stubs.tolist()))
    for _ in range(max_repair):
        seen: dict[tuple[int, int], int] = {}
        dup = None
        for idx, e in enumerate(edges):
            if e in seen:
                dup = idx
                break
            seen[e] = idx
        if dup is None:
            break
        other = int(rng.integers(len(edges)))
        b1, c1 = edges[dup]
        b2, c2 = edges[other]
        edges[dup], edges[other] = (b1, c2), (b2, c1)
    else:
        raise ValueError("could not repair multi-edges; retry with another seed")
    adj = np.zeros((n_checks, n_bits), dtype=np.uint8)
    for b, c in edges:
        adj[c, b] ^= 1
    if (adj.sum(axis=0) != bit_deg).any() or (adj.sum(axis=1) != check_deg).any():
        raise ValueError("repair failed to preserve degrees; retry with another seed")
    return adj


def random_ldpc_pair(m: int, delta_c0: int, delta_v: int, seed: int = 0, retries: int = 50) -> ClassicalCode:
    """Random split LDPC code H_C = (H0 | H1) from two biregular ensembles.

    H0 is (delta_v*m) x (delta_c0*m) with bit degree delta_v; H1 is a square
    (delta_v*m) x (delta_v*m) bit-degree-delta_v block, resampled until full
    rank.  The returned code carries the split column marker.
    """
    if delta_v < 2:
        raise ValueError("bit degree must be >= 2 for any expansion")
    if not delta_c0 < delta_v:
        raise ValueError("requires delta_c0 < delta_v (rate below one half)")
    sigma = delta_v * m
    for attempt in range(retries):
        rng = np.random.default_rng((seed, attempt))
        try:
            h0 = _biregular_graph(rng, delta_c0 * m, sigma, delta_v)
            h1 = _biregular_graph(rng, sigma, sigma, delta_v)
        except ValueError:
            continue
        h = BinaryMatrix(np.hstack([h0, h1]))
        if BinaryMatrix(h1).rank() == sigma:
            return ClassicalCode(h, name=f"ldpc_m{m}_c{delta_c0}_v{delta_v}_s{seed}",
                                 split_col=delta_c0 * m)
    raise ValueError(f"no full-rank H1 found after {retries} retries (seed={seed})")


@dataclass(frozen=True)
class ExpansionReport:
    """Result of an exhaustive bounded-size bipartite expansion check."""

    gamma_fraction: Fraction
    delta_bound: Fraction
    max_set_size_checked: int
    violations: list[tuple[int, ...]]

    @property
    def ok(self) -> bool:
        return not self.violations


def expansion_check(h, gamma, delta, max_set_size: int, *, budget: int = 5_000_000) -> ExpansionReport:
    """Exhaustively test (gamma, delta)-left-expansion of a Tanner graph.

    Checks every bit subset S with |S| <= min(gamma*n, max_set_size) for
    |neighbors(S)| >= (1 - delta) * Delta * |S|, with Delta the maximum bit
    degree.  Violating subsets are returned as witnesses.
    """
    h = BinaryMatrix(h)
    gamma = Fraction(gamma).limit_denominator(10**6)
    delta = Fraction(delta).limit_denominator(10**6)
    n = h.cols
    cap = min(int(gamma * n), max_set_size)
    work = sum(_comb(n, s) for s in range(1, cap + 1))
    if work > budget:
        raise ValueError(f"enumeration of {work} subsets exceeds budget {budget}; lower max_set_size")
    col_masks = [0] * n
    for r, row in enumerate(h.A):
        for c in np.nonzero(row)[0]:
            col_masks[int(c)] |= 1 << r
    delta_a = int(h.A.sum(axis=0).max()) if n else 0
    violations: list[tuple[int, ...]] = []
    for s in range(1, cap + 1):
        for combo in itertools.combinations(range(n), s):
            mask = 0
            for c in combo:
                mask |= col_masks[c]
            if Fraction(bin(mask).count("1")) < (1 - delta) * delta_a * s:
                violations.append(combo)
                if len(violations) >= 128:
                    return ExpansionReport(gamma, delta, cap, violations)
    return ExpansionReport(gamma, delta, cap, violations)


def _comb(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


# ---------------------------------------------------------------------------
# CSS codes
# ---------------------------------------------------------------------------

def canonical_basis(hx, hz) -> tuple[BinaryMatrix, BinaryMatrix, np.ndarray]:
    """Logical bases in Gottesman standard form plus the zone permutation.

    Returns (lx, lz, perm) in the *original* qubit ordering, where perm lists
    qubit indices ordered (L zone, Z zone, X zone): under that ordering
    ``lz[:, perm] = (I_k A 0)`` and ``lx[:, perm] = (I_k 0 B)``.  The Z zone
    has size rank(hx), the X zone rank(hz).
    """
    hx, hz = BinaryMatrix(hx), BinaryMatrix(hz)
    n = hx.cols
    if hz.cols != n:
        raise ValueError("hx and hz act on different qubit counts")
    if not (hx @ hz.T).is_zero():
        raise ValueError("check matrices do not commute (hx @ hz.T != 0)")
    _, pivots_z = hz.rref()
    x_zone = list(pivots_z)
    rest = [c for c in range(n) if c not in set(x_zone)]
    # pivots of hx restricted to the complement of the X zone
    _, piv = hx.take_cols(rest).rref()
    z_zone = [rest[c] for c in piv]
    used = set(x_zone) | set(z_zone)
    l_zone = [c for c in range(n) if c not in used]
    perm = np.array(l_zone + z_zone + x_zone, dtype=np.intp)
    k, r_x, r_z = len(l_zone), len(z_zone), len(x_zone)

    inv = np.empty(n, dtype=np.intp)
    inv[perm] = np.arange(n)

    def std_rows(h, zone_lo, zone_hi):
        # row-reduce with the given zone's columns leading, so they come out I
        basis = h.take_cols(perm)
        order = list(range(zone_lo, zone_hi)) + [c for c in range(n) if not zone_lo <= c < zone_hi]
        back = np.empty(n, dtype=np.intp)
        back[np.array(order, dtype=np.intp)] = np.arange(n)
        red, piv_cols = basis.take_cols(order).rref()
        red = red.take_rows(range(len(piv_cols)))
        return red.take_cols(back)

    sx = std_rows(hx, k, k + r_x)  # (A^T I D) on zones (L, Z, X)
    sz = std_rows(hz, k + r_x, n)  # (B^T C I)
    a = sx.A[:, :k].T  # k x r_x
    b = sz.A[:, :k].T  # k x r_z
    lz_p = np.hstack([np.eye(k, dtype=np.uint8), a, np.zeros((k, r_z), dtype=np.uint8)])
    lx_p = np.hstack([np.eye(k, dtype=np.uint8), np.zeros((k, r_x), dtype=np.uint8), b])
    lz = BinaryMatrix(lz_p[:, inv], cols=n)
    lx = BinaryMatrix(lx_p[:, inv], cols=n)
    return lx, lz, perm


class CssCode:
    """CSS code with cached canonical logical bases and zone bookkeeping."""

    def __init__(self, hx, hz, name: str = "", lx=None, lz=None):
        self.hx = BinaryMatrix(hx)
        self.hz = BinaryMatrix(hz)
        if self.hx.cols != self.hz.cols:
            raise ValueError("hx and hz disagree on qubit count")
        if not (self.hx @ self.hz.T).is_zero():
            raise ValueError(f"{name or 'code'}: hx @ hz.T != 0")
        self.name = name
        self.n = self.hx.cols
        self.r_x = self.hx.rank()
        self.r_z = self.hz.rank()
        self.k = self.n - self.r_x - self.r_z
        clx, clz, perm = canonical_basis(self.hx, self.hz)
        self.zone_perm = perm
        if lx is None:
            self.lx, self.lz = clx, clz
        else:
            self.lx, self.lz = BinaryMatrix(lx), BinaryMatrix(lz)
        self.dx_est: CosetSearchReport | None = None
        self.dz_est: CosetSearchReport | None = None
        self.validate()

    # -- invariants ---------------------------------------------------------
    def validate(self):
        if not (self.lx @ self.hz.T).is_zero():
            raise ValueError(f"{self.name}: lx does not commute with hz")
        if not (self.lz @ self.hx.T).is_zero():
            raise ValueError(f"{self.name}: lz does not commute with hx")
        pairing = self.lx @ self.lz.T
        if pairing != BinaryMatrix.identity(self.k):
            raise ValueError(f"{self.name}: lx @ lz.T is not the identity pairing")
        if self.lx.rows != self.k:
            raise ValueError(f"{self.name}: logical count != n - rank(hx) - rank(hz)")

    # -- zones --------------------------------------------------------------
    @property
    def l_zone(self) -> np.ndarray:
        return self.zone_perm[: self.k]

    @property
    def z_zone(self) -> np.ndarray:
        return self.zone_perm[self.k : self.k + self.r_x]

    @property
    def x_zone(self) -> np.ndarray:
        return self.zone_perm[self.k + self.r_x :]

    def zone_labels(self) -> np.ndarray:
        labels = np.empty(self.n, dtype="<U1")
        labels[self.l_zone] = "L"
        labels[self.z_zone] = "Z"
        labels[self.x_zone] = "X"
        return labels

    def canonical_lx_lz(self) -> tuple[BinaryMatrix, BinaryMatrix]:
        """The canonical (zone-form) basis, regardless of any override."""
        lx, lz, _ = canonical_basis(self.hx, self.hz)
        return lx, lz

    def zone_matrices(self) -> tuple[BinaryMatrix, BinaryMatrix]:
        """(A, B) with lz[:, perm] = (I A 0) and lx[:, perm] = (I 0 B)."""
        lx, lz, perm = canonical_basis(self.hx, self.hz)
        lzp = lz.take_cols(perm)
        lxp = lx.take_cols(perm)
        a = lzp.A[:, self.k : self.k + self.r_x]
        b = lxp.A[:, self.k + self.r_x :]
        return BinaryMatrix(a, cols=self.r_x), BinaryMatrix(b, cols=self.r_z)

    # -- distance -----------------------------------------------------------
    def distance(self, basis: str, *, trials: int = 200, exhaustive_cap: int = 0, seed: int = 0) -> CosetSearchReport:
        """Search the minimum weight of a nontrivial logical in the given basis.

        ``basis='Z'`` searches Z-type logicals (kernel of hx modulo rowspace
        of hz); ``basis='X'`` the mirror.  Reports are cached on the code.
        """
        if basis.upper() == "Z":
            rep = min_weight_outside(self.hx.kernel(), self.hz,
                                     trials=trials, exhaustive_cap=exhaustive_cap, seed=seed)
            self.dz_est = rep
        elif basis.upper() == "X":
            rep = min_weight_outside(self.hz.kernel(), self.hx,
                                     trials=trials, exhaustive_cap=exhaustive_cap, seed=seed)
            self.dx_est = rep
        else:
            raise ValueError("basis must be 'X' or 'Z'")
        return rep

    # -- structure ----------------------------------------------------------
    def params(self) -> tuple[int, int]:
        return (self.n, self.k)

    def __repr__(self):
        return f"CssCode({self.name or 'anon'}: [[{self.n},{self.k}]])"

    def descriptor(self) -> dict:
        """JSON-serializable description with explicit matrices."""
        out = {
            "name": self.name,
            "n": self.n,
            "k": self.k,
            "hx": self.hx.to_coords(),
            "hz": self.hz.to_coords(),
            "lx": self.lx.to_coords(),
            "lz": self.lz.to_coords(),
            "zones": {
                "L": [int(i) for i in self.l_zone],
                "Z": [int(i) for i in self.z_zone],
                "X": [int(i) for i in self.x_zone],
            },
            "provenance": {"kind": "css"},
        }
        if self.dx_est is not None:
            out["dx"] = {"upper": self.dx_est.best_weight, "floor": self.dx_est.exhaustive_floor}
        if self.dz_est is not None:
            out["dz"] = {"upper": self.dz_est.best_weight, "floor": self.dz_est.exhaustive_floor}
        return out

    def save(self, path):
        Path(path).write_text(json.dumps(self.descriptor(), indent=1))

    @classmethod
    def load(cls, path) -> "CssCode":
        doc = json.loads(Path(path).read_text())
        return cls(
            BinaryMatrix.from_coords(doc["hx"]),
            BinaryMatrix.from_coords(doc["hz"]),
            name=doc.get("name", ""),
            lx=BinaryMatrix.from_coords(doc["lx"]),
            lz=BinaryMatrix.from_coords(doc["lz"]),
        )


def dual(code: CssCode) -> CssCode:
    """Swap the X and Z sides of a CSS code."""
    out = CssCode(code.hz, code.hx, name=f"dual({code.name})", lx=code.lz, lz=code.lx)
    return out


def tensor_copies(code: CssCode, copies: int) -> CssCode:
    """Block-diagonal stack of independent copies (copy-major qubit order)."""
    eye = BinaryMatrix.identity(copies)
    out = CssCode(
        kron(eye, code.hx), kron(eye, code.hz),
        name=f"{code.name}^{copies}",
        lx=kron(eye, code.lx), lz=kron(eye, code.lz),
    )
    return out


# ---------------------------------------------------------------------------
# two-block bivariate circulant (BB) codes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BbSpec:
    """Spec for a two-block code over F2[x,y]/(x^l - 1, y^m - 1).

    ``c_poly``/``d_poly`` are sets of (i, j) exponent pairs for monomials
    x^i y^j; exponents are reduced mod (l, m).
    """

    l: int
    m: int
    c_poly: frozenset[tuple[int, int]]
    d_poly: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.l < 1 or self.m < 1:
            raise ValueError("l and m must be >= 1")
        if not self.c_poly or not self.d_poly:
            raise ValueError("polynomials must be nonempty")
        for (i, j) in itertools.chain(self.c_poly, self.d_poly):
            if not (0 <= i < self.l and 0 <= j < self.m):
                raise ValueError(f"exponent ({i},{j}) out of range for ({self.l},{self.m})")

    @classmethod
    def make(cls, l: int, m: int, c_poly, d_poly=None) -> "BbSpec":
        c = frozenset((i % l, j % m) for i, j in c_poly)
        d = frozenset((i % l, j % m) for i, j in (d_poly if d_poly is not None else transpose_poly(c, l, m)))
        return cls(l, m, c, d)

    @property
    def self_dual(self) -> bool:
        return self.d_poly == transpose_poly(self.c_poly, self.l, self.m)


def transpose_poly(poly, l: int, m: int) -> frozenset[tuple[int, int]]:
    """Monomial-wise inverse: x^i y^j -> x^(l-i) y^(m-j)."""
    return frozenset(((-i) % l, (-j) % m) for i, j in poly)


def parse_poly(text: str, l: int, m: int) -> frozenset[tuple[int, int]]:
    """Parse a polynomial like ``"1+y3+x*y2+x*y4"`` into exponent pairs."""
    terms = text.replace(" ", "").split("+")
    out = set()
    for t in terms:
        if not t:
            continue
        if t == "1":
            out.add((0, 0))
            continue
        i = j = 0
        for factor in t.split("*"):
            match = re.fullmatch(r"(x|y)(\^?\d*)", factor)
            if not match:
                raise ValueError(f"cannot parse monomial {t!r}")
            var, exp = match.groups()
            e = int(exp.lstrip("^")) if exp else 1
            if var == "x":
                i += e
            else:
                j += e
        out.add((i % l, j % m))
    if not out:
        raise ValueError("empty polynomial")
    return frozenset(out)


def monomial_matrix(poly, l: int, m: int) -> BinaryMatrix:
    """The lm x lm multiplication matrix of a polynomial on the monomial basis."""
    shift_l = np.roll(np.eye(l, dtype=np.uint8), 1, axis=0)
    shift_m = np.roll(np.eye(m, dtype=np.uint8), 1, axis=0)
    total = np.zeros((l * m, l * m), dtype=np.uint8)
    for (i, j) in poly:
        xi = np.linalg.matrix_power(shift_l, i % l).astype(np.uint8) if i % l else np.eye(l, dtype=np.uint8)
        yj = np.linalg.matrix_power(shift_m, j % m).astype(np.uint8) if j % m else np.eye(m, dtype=np.uint8)
        total ^= np.kron(xi, yj)
    return BinaryMatrix(total)


def bb_code(spec: BbSpec, name: str | None = None) -> CssCode:
    """Construct the two-block code with checks H_X = (c | d), H_Z = (d^T | c^T).

    Qubits are ordered U block then D block, monomials x-major: qubit
    (U, x^i y^j) has index i*m + j.  For self-dual specs (d = c^T with odd
    l, m) the disjoint row-supported logical basis is validated and attached
    as the code's logical basis.
    """
    l, m = spec.l, spec.m
    mc = monomial_matrix(spec.c_poly, l, m)
    md = monomial_matrix(spec.d_poly, l, m)
    hx = mc.hstack(md)
    hz = md.T.hstack(mc.T)
    label = name or f"bb_{2 * l * m}"
    lx = lz = None
    if spec.self_dual and l % 2 == 1 and m % 2 == 1:
        code_tmp = CssCode(hx, hz, name=label)
        if code_tmp.k == 2 * l:
            lx, lz = _disjoint_basis_matrices(l, m)
            _validate_disjoint_basis(code_tmp, lx, lz)
    code = CssCode(hx, hz, name=label, lx=lx, lz=lz)
    code.spec = spec
    return code


def _disjoint_basis_matrices(l: int, m: int) -> tuple[BinaryMatrix, BinaryMatrix]:
    k = 2 * l
    n = 2 * l * m
    basis = np.zeros((k, n), dtype=np.uint8)
    for i in range(l):
        basis[i, i * m : (i + 1) * m] = 1          # U block, row i
        basis[l + i, l * m + i * m : l * m + (i + 1) * m] = 1  # D block, row i
    mat = BinaryMatrix(basis, cols=n)
    return mat, BinaryMatrix(basis.copy(), cols=n)


def _validate_disjoint_basis(code: CssCode, lx: BinaryMatrix, lz: BinaryMatrix):
    if not (lx @ code.hz.T).is_zero() or not (lz @ code.hx.T).is_zero():
        raise ValueError("row-supported basis does not commute with the checks")
    if (lx @ lz.T) != BinaryMatrix.identity(lx.rows):
        raise ValueError("row-supported basis pairing is not the identity")
    # independence from the stabilizers
    full = code.hz.vstack(lz.A)
    if full.rank() != code.hz.rank() + lz.rows:
        raise ValueError("row-supported Z basis overlaps the stabilizer group")


def disjoint_logical_basis(code: CssCode) -> tuple[BinaryMatrix, BinaryMatrix]:
    """The 2l disjoint row-supported logical pairs of a self-dual two-block code.

    Each pair (X_i, Z_i) is supported on exactly one row of one of the two
    qubit blocks (weight m); distinct pairs have disjoint support.  Raises if
    any pair fails commutation, pairing or independence.
    """
    spec = getattr(code, "spec", None)
    if spec is None or not spec.self_dual:
        raise ValueError("disjoint basis requires a self-dual two-block code")
    if spec.l % 2 == 0 or spec.m % 2 == 0:
        raise ValueError("disjoint basis requires odd l and m")
    lx, lz = _disjoint_basis_matrices(spec.l, spec.m)
    _validate_disjoint_basis(code, lx, lz)
    return lx, lz


def check_automorphism_shift(code: CssCode, axis: str = "x") -> tuple[np.ndarray, np.ndarray]:
    """Qubit permutation of the x (or y) cyclic shift, with its logical action.

    Returns (qubit_perm, logical_perm): position q maps to qubit_perm[q], and
    disjoint-basis logical i maps to logical_perm[i].  Verifies that both
    check row spaces are preserved and that the permuted disjoint basis maps
    onto itself.  The x shift cycles logical i -> i+1 mod l within each of
    the U and D groups; the y shift fixes every logical.
    """
    spec = getattr(code, "spec", None)
    if spec is None:
        raise ValueError("shift automorphisms are defined for two-block codes only")
    l, m = spec.l, spec.m
    lm = l * m

    def block_perm():
        p = np.empty(lm, dtype=np.intp)
        for i in range(l):
            for j in range(m):
                if axis == "x":
                    p[i * m + j] = ((i + 1) % l) * m + j
                elif axis == "y":
                    p[i * m + j] = i * m + (j + 1) % m
                else:
                    raise ValueError("axis must be 'x' or 'y'")
        return p

    bp = block_perm()
    perm = np.concatenate([bp, bp + lm])
    # column-permuted checks: new[:, perm[q]] = old[:, q]
    inv = np.empty(2 * lm, dtype=np.intp)
    inv[perm] = np.arange(2 * lm)
    hx_p = code.hx.take_cols(inv)
    hz_p = code.hz.take_cols(inv)
    if not hx_p.same_row_space(code.hx) or not hz_p.same_row_space(code.hz):
        raise ValueError("shift does not preserve the stabilizer group")
    lx, _ = disjoint_logical_basis(code)
    logical_perm = np.empty(2 * l, dtype=np.intp)
    for i in range(lx.rows):
        moved = np.zeros(2 * lm, dtype=np.uint8)
        moved[perm] = lx.A[i]
        hits = [j for j in range(lx.rows) if np.array_equal(moved, lx.A[j])]
        if len(hits) != 1:
            raise ValueError("shift does not permute the disjoint basis")
        logical_perm[i] = hits[0]
    return perm, logical_perm


# ---------------------------------------------------------------------------
# hypergraph products and topological codes
# ---------------------------------------------------------------------------

def hgp(h1, h2, name: str = "") -> CssCode:
    """Hypergraph product of two classical check matrices.

    With h1 (r1 x n1) and h2 (r2 x n2): n = n1*n2 + r1*r2,
    hx = (I_{n1} x h2 | h1^T x I_{r2}), hz = (h1 x I_{n2} | I_{r1} x h2^T).
    """
    h1, h2 = BinaryMatrix(h1), BinaryMatrix(h2)
    if h1.cols == 0 or h2.cols == 0:
        raise ValueError("hypergraph product factors must have at least one bit")
    r1, n1 = h1.shape
    r2, n2 = h2.shape
    hx = kron(BinaryMatrix.identity(n1), h2).hstack(kron(h1.T, BinaryMatrix.identity(r2)))
    hz = kron(h1, BinaryMatrix.identity(n2)).hstack(kron(BinaryMatrix.identity(r1), h2.T))
    return CssCode(hx, hz, name=name or f"hgp_{n1 * n2 + r1 * r2}")


def toric(d: int) -> CssCode:
    """Distance-d toric code: [[2d^2, 2, d]] on a periodic d x d lattice."""
    if d < 2:
        raise ValueError("toric code needs d >= 2")
    n = 2 * d * d

    def h_edge(i, j):  # edge from vertex (i,j) to (i, j+1)
        return (i % d) * d + (j % d)

    def v_edge(i, j):  # edge from vertex (i,j) to (i+1, j)
        return d * d + (i % d) * d + (j % d)

    hx = np.zeros((d * d, n), dtype=np.uint8)
    hz = np.zeros((d * d, n), dtype=np.uint8)
    for i in range(d):
        for j in range(d):
            v = i * d + j
            hx[v, h_edge(i, j)] ^= 1
            hx[v, h_edge(i, j - 1)] ^= 1
            hx[v, v_edge(i, j)] ^= 1
            hx[v, v_edge(i - 1, j)] ^= 1
            hz[v, h_edge(i, j)] ^= 1
            hz[v, h_edge(i + 1, j)] ^= 1
            hz[v, v_edge(i, j)] ^= 1
            hz[v, v_edge(i, j + 1)] ^= 1
    return CssCode(hx, hz, name=f"toric{d}")


def rotated_surface(dx: int, dz: int) -> CssCode:
    """Rotated surface code [[dx*dz, 1, d_X = dx, d_Z = dz]].

    Qubits on a dx-row by dz-column grid; the X logical runs down column 0
    (weight dx) and the Z logical along row 0 (weight dz).
    """
    if dx < 1 or dz < 1:
        raise ValueError("distances must be >= 1")
    n = dx * dz

    def q(r, c):
        return r * dz + c

    x_checks, z_checks = [], []
    # bulk faces, checkerboard colored
    for r in range(dx - 1):
        for c in range(dz - 1):
            face = [q(r, c), q(r, c + 1), q(r + 1, c), q(r + 1, c + 1)]
            if (r + c) % 2 == 0:
                z_checks.append(face)
            else:
                x_checks.append(face)
    # boundary halves: X pairs on top/bottom rows, Z pairs on left/right cols
    for c in range(dz - 1):
        if (c % 2) == 0:
            x_checks.append([q(0, c), q(0, c + 1)])
        if ((dx - 1 + c) % 2) == 1:
            x_checks.append([q(dx - 1, c), q(dx - 1, c + 1)])
    for r in range(dx - 1):
        if (r % 2) == 1:
            z_checks.append([q(r, 0), q(r + 1, 0)])
        if ((r + dz - 1) % 2) == 0:
            z_checks.append([q(r, dz - 1), q(r + 1, dz - 1)])

    hx = np.zeros((len(x_checks), n), dtype=np.uint8)
    hz = np.zeros((len(z_checks), n), dtype=np.uint8)
    for i, chk in enumerate(x_checks):
        hx[i, chk] = 1
    for i, chk in enumerate(z_checks):
        hz[i, chk] = 1
    code = CssCode(hx, hz, name=f"surface_{dx}x{dz}")
    if code.k != 1:
        raise ValueError(f"rotated surface construction failed: k={code.k}")
    lx = np.zeros((1, n), dtype=np.uint8)
    lx[0, [q(r, 0) for r in range(dx)]] = 1
    lz = np.zeros((1, n), dtype=np.uint8)
    lz[0, [q(0, c) for c in range(dz)]] = 1
    return CssCode(hx, hz, name=code.name, lx=lx, lz=lz)


def steane_color() -> CssCode:
    """The [[7,1,3]] self-dual color code with Hamming checks on both sides."""
    h = hamming74().h
    lx = np.zeros((1, 7), dtype=np.uint8)
    lx[0, [0, 1, 2]] = 1  # weight-3 logical on a boundary side
    code = CssCode(h, h, name="steane", lx=lx, lz=lx.copy())
    return code
