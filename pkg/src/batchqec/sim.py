"""Stabilizer-tableau simulation, Pauli-frame sampling, decoders, experiments.

The tableau simulator is the noiseless ground-truth oracle: it runs
:class:`~batchqec.circuits.StabilizerCircuit` ops exactly, supports forced
measurement outcomes (Pauli-frame convention for stabilizer rounds marked
``frame``), and can extract and canonically compare stabilizer groups on
qubit subsets.

The Pauli-frame sampler propagates fault markers linearly through a circuit,
producing detector and observable flip bits.  Because propagation is linear
over F2, each marker contributes a fixed (detector, observable) column; the
sampler compiles those columns once and then draws Monte Carlo shots as
vectorized column XORs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuits import StabilizerCircuit
from .f2 import BinaryMatrix

__all__ = [
    "Tableau",
    "NoiseModel",
    "ShotResult",
    "tableau_run",
    "frame_propagate",
    "compile_fault_columns",
    "pauli_frame_sample",
    "decode_bp_osd",
    "decode_exhaustive",
    "experiment",
    "wilson_interval",
]


# ---------------------------------------------------------------------------
# tableau simulator
# ---------------------------------------------------------------------------

class Tableau:
    """Aaronson-Gottesman stabilizer tableau with destabilizers.

    Rows 0..n-1 are destabilizers, n..2n-1 stabilizers; each row stores
    x-bits, z-bits and a sign bit.  Initial state is |0...0>.
    """

    def __init__(self, n: int, rng=None):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        self.x[:n] = np.eye(n, dtype=np.uint8)
        self.z[n:] = np.eye(n, dtype=np.uint8)
        self.rng = rng if rng is not None else np.random.default_rng()

    # -- gates ---------------------------------------------------------------
    def h(self, q: int):
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int):
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def cx(self, c: int, t: int):
        self.r ^= self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def cz(self, a: int, b: int):
        self.h(b)
        self.cx(a, b)
        self.h(b)

    def apply_pauli(self, x_vec, z_vec):
        """Apply the Pauli with the given X/Z support (phase convention-free)."""
        x_vec = np.asarray(x_vec, dtype=np.uint8)
        z_vec = np.asarray(z_vec, dtype=np.uint8)
        anti = ((self.x @ z_vec.astype(np.int32)) + (self.z @ x_vec.astype(np.int32))) & 1
        self.r ^= anti.astype(np.uint8)

    # -- row arithmetic --------------------------------------------------------
    def _phase_g(self, x1, z1, x2, z2):
        # per-qubit exponent of i when multiplying (x1,z1) into rows (x2,z2)
        x1 = x1.astype(np.int8)
        z1 = z1.astype(np.int8)
        x2 = x2.astype(np.int8)
        z2 = z2.astype(np.int8)
        g = (x1 * z1) * (z2 - x2)
        g += (x1 * (1 - z1)) * (z2 * (2 * x2 - 1))
        g += ((1 - x1) * z1) * (x2 * (1 - 2 * z2))
        return g.sum(axis=-1)

    def _rowsum_into(self, targets: np.ndarray, sx, sz, sr):
        """Multiply the source row (sx, sz, sr) into all target row indices."""
        if len(targets) == 0:
            return
        g = self._phase_g(sx, sz, self.x[targets], self.z[targets])
        total = 2 * self.r[targets].astype(np.int32) + 2 * int(sr) + g.astype(np.int32)
        self.r[targets] = ((total % 4) // 2).astype(np.uint8)
        self.x[targets] ^= sx
        self.z[targets] ^= sz

    # -- measurement ------------------------------------------------------------
    def measure_pauli(self, x_vec, z_vec, sign: int = 0, force: int | None = None) -> tuple[int, bool]:
        """Measure the Pauli (-1)^sign * P(x_vec, z_vec).

        Returns (outcome_bit, was_deterministic).  ``force`` picks the branch
        of a random outcome; forcing a deterministic measurement to the other
        value raises.
        """
        n = self.n
        x_vec = np.asarray(x_vec, dtype=np.uint8)
        z_vec = np.asarray(z_vec, dtype=np.uint8)
        anti = ((self.x @ z_vec.astype(np.int32)) + (self.z @ x_vec.astype(np.int32))) & 1
        stab_anti = np.nonzero(anti[n:])[0]
        if stab_anti.size:
            p = int(stab_anti[0]) + n
            others = np.nonzero(anti)[0]
            others = others[others != p]
            self._rowsum_into(others, self.x[p].copy(), self.z[p].copy(), int(self.r[p]))
            # destabilizer of the new row is the old stabilizer row
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r[p - n] = self.r[p]
            outcome = int(self.rng.integers(2)) if force is None else int(force)
            self.x[p] = x_vec
            self.z[p] = z_vec
            self.r[p] = (outcome + sign) % 2
            return outcome, False
        # deterministic: accumulate stabilizer product via destabilizer pairing
        acc_x = np.zeros(n, dtype=np.uint8)
        acc_z = np.zeros(n, dtype=np.uint8)
        acc_r = 0
        for i in np.nonzero(anti[:n])[0]:
            g = self._phase_g(self.x[n + i], self.z[n + i], acc_x[None, :], acc_z[None, :])
            total = 2 * acc_r + 2 * int(self.r[n + i]) + int(g[0])
            acc_r = (total % 4) // 2
            acc_x ^= self.x[n + i]
            acc_z ^= self.z[n + i]
        if not (np.array_equal(acc_x, x_vec) and np.array_equal(acc_z, z_vec)):
            raise RuntimeError("deterministic measurement accumulation failed")
        outcome = (acc_r + sign) % 2
        if force is not None and int(force) != outcome:
            raise ValueError("cannot force a deterministic measurement to the opposite value")
        return outcome, True

    def measure_z(self, q: int, force: int | None = None) -> tuple[int, bool]:
        z = np.zeros(self.n, dtype=np.uint8)
        z[q] = 1
        return self.measure_pauli(np.zeros(self.n, dtype=np.uint8), z, force=force)

    def measure_x(self, q: int, force: int | None = None) -> tuple[int, bool]:
        x = np.zeros(self.n, dtype=np.uint8)
        x[q] = 1
        return self.measure_pauli(x, np.zeros(self.n, dtype=np.uint8), force=force)

    def reset(self, q: int, basis: str = "Z"):
        if basis.upper() == "Z":
            out, _ = self.measure_z(q)
            if out:
                xv = np.zeros(self.n, dtype=np.uint8)
                xv[q] = 1
                self.apply_pauli(xv, np.zeros(self.n, dtype=np.uint8))
        else:
            out, _ = self.measure_x(q)
            if out:
                zv = np.zeros(self.n, dtype=np.uint8)
                zv[q] = 1
                self.apply_pauli(np.zeros(self.n, dtype=np.uint8), zv)

    # -- group inspection ---------------------------------------------------------
    def stabilizer_group(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.n
        return self.x[n:].copy(), self.z[n:].copy(), self.r[n:].copy()

    def restricted_group(self, qubits) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Generators supported entirely on the given qubits, eliminated + canonical.

        Valid when the complement is in a product state (e.g. measured out):
        then the result generates the reduced state's full stabilizer group.
        """
        qubits = list(qubits)
        inside = np.zeros(self.n, dtype=bool)
        inside[qubits] = True
        outside = np.nonzero(~inside)[0]
        x, z, r = self.stabilizer_group()
        rows = _SignedRows(x, z, r)
        # eliminate outside support column by column
        for q in outside:
            for part in ("x", "z"):
                rows.eliminate_column(q, part)
        keep = []
        for i in range(rows.m):
            if not rows.x[i, outside].any() and not rows.z[i, outside].any():
                keep.append(i)
        sub_x = rows.x[keep][:, qubits]
        sub_z = rows.z[keep][:, qubits]
        sub_r = rows.r[keep]
        return _canonical_signed(sub_x, sub_z, sub_r)


class _SignedRows:
    """Pauli rows with sign tracking under row multiplication (for elimination)."""

    def __init__(self, x, z, r):
        self.x = x.astype(np.uint8).copy()
        self.z = z.astype(np.uint8).copy()
        self.r = r.astype(np.uint8).copy()
        self.m = self.x.shape[0]
        self._used = np.zeros(self.m, dtype=bool)

    def _mul_into(self, targets, src):
        if len(targets) == 0:
            return
        x1, z1, r1 = self.x[src], self.z[src], int(self.r[src])
        x2 = self.x[targets].astype(np.int8)
        z2 = self.z[targets].astype(np.int8)
        g = ((x1 * z1).astype(np.int8) * (z2 - x2)
             + (x1 * (1 - z1)).astype(np.int8) * (z2 * (2 * x2 - 1))
             + ((1 - x1) * z1).astype(np.int8) * (x2 * (1 - 2 * z2))).sum(axis=1)
        total = 2 * self.r[targets].astype(np.int32) + 2 * r1 + g.astype(np.int32)
        self.r[targets] = ((total % 4) // 2).astype(np.uint8)
        self.x[targets] ^= x1
        self.z[targets] ^= z1

    def eliminate_column(self, q, part):
        col = self.x[:, q] if part == "x" else self.z[:, q]
        cand = [i for i in np.nonzero(col)[0] if not self._used[i]]
        if not cand:
            return
        pivot = cand[0]
        self._used[pivot] = True
        col = self.x[:, q] if part == "x" else self.z[:, q]
        targets = np.array([i for i in np.nonzero(col)[0] if i != pivot], dtype=np.intp)
        self._mul_into(targets, pivot)


def _canonical_signed(x, z, r) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Canonical generators (symplectic RREF with sign tracking)."""
    rows = _SignedRows(x, z, r)
    n = x.shape[1]
    order = []
    for q in range(n):
        order.append((q, "x"))
    for q in range(n):
        order.append((q, "z"))
    rank_rows = []
    used = np.zeros(rows.m, dtype=bool)
    for q, part in order:
        col = rows.x[:, q] if part == "x" else rows.z[:, q]
        cand = [i for i in np.nonzero(col)[0] if not used[i]]
        if not cand:
            continue
        pivot = cand[0]
        used[pivot] = True
        col = rows.x[:, q] if part == "x" else rows.z[:, q]
        targets = np.array([i for i in np.nonzero(col)[0] if i != pivot], dtype=np.intp)
        rows._mul_into(targets, pivot)
        rank_rows.append(pivot)
    idx = np.array(rank_rows, dtype=np.intp)
    # drop identity rows (possible if input rows were dependent)
    keep = [i for i in idx if rows.x[i].any() or rows.z[i].any()]
    keep = np.array(keep, dtype=np.intp)
    return rows.x[keep], rows.z[keep], rows.r[keep]


def groups_equal(g1, g2) -> bool:
    """Exact equality of two canonicalized signed stabilizer groups."""
    x1, z1, r1 = g1
    x2, z2, r2 = g2
    if x1.shape != x2.shape:
        return False
    return bool(np.array_equal(x1, x2) and np.array_equal(z1, z2) and np.array_equal(r1, r2))


def tableau_run(
    circuit: StabilizerCircuit,
    *,
    seed: int | None = None,
    frame_policy: str = "force",
    inject: set[int] | None = None,
    tableau: Tableau | None = None,
) -> tuple[Tableau, dict[int, int]]:
    """Run a circuit on a tableau; returns (tableau, record values).

    ``frame_policy='force'`` folds measurements whose ops carry the frame
    flag into the Pauli frame by forcing their outcome to +1 (the standard
    frame-tracking convention); ``'random'`` leaves them random.  ``inject``
    is a set of marker ids whose Paulis are applied (record-flip markers are
    not physical and raise here).
    """
    inject = inject or set()
    tab = tableau if tableau is not None else Tableau(circuit.n_qubits, np.random.default_rng(seed))
    if tableau is not None and seed is not None:
        tab.rng = np.random.default_rng(seed)
    records: dict[int, int] = {}
    for op in circuit.ops:
        kind = op[0]
        if kind == "R":
            for q in op[2]:
                tab.reset(q, op[1])
        elif kind == "H":
            for q in op[1]:
                tab.h(q)
        elif kind == "S":
            for q in op[1]:
                tab.s(q)
        elif kind == "CX":
            for c, t in op[1]:
                tab.cx(c, t)
        elif kind == "CZ":
            for a, b in op[1]:
                tab.cz(a, b)
        elif kind == "M":
            _, basis, qubits, recs = op[:4]
            frame = len(op) > 4 and op[4]
            for q, rec in zip(qubits, recs):
                force = 0 if (frame and frame_policy == "force") else None
                out = tab.measure_z(q, force=force) if basis == "Z" else tab.measure_x(q, force=force)
                records[rec] = out[0]
        elif kind == "MPP":
            _, paulis, qubits, rec = op[:4]
            frame = len(op) > 4 and op[4]
            xv = np.zeros(circuit.n_qubits, dtype=np.uint8)
            zv = np.zeros(circuit.n_qubits, dtype=np.uint8)
            for q, p in zip(qubits, paulis):
                if p in ("X", "Y"):
                    xv[q] = 1
                if p in ("Z", "Y"):
                    zv[q] = 1
            force = 0 if (frame and frame_policy == "force") else None
            out, _ = tab.measure_pauli(xv, zv, force=force)
            records[rec] = out
        elif kind == "P":
            _, pauli, qubits = op
            xv = np.zeros(circuit.n_qubits, dtype=np.uint8)
            zv = np.zeros(circuit.n_qubits, dtype=np.uint8)
            for q in qubits:
                if pauli in ("X", "Y"):
                    xv[q] = 1
                if pauli in ("Z", "Y"):
                    zv[q] = 1
            tab.apply_pauli(xv, zv)
        elif kind == "T":
            raise ValueError("tableau oracle is Clifford-only; T layers cannot be simulated here")
        elif kind == "CP":
            _, pauli, q, recs = op
            if sum(records[r] for r in recs) % 2:
                xv = np.zeros(circuit.n_qubits, dtype=np.uint8)
                zv = np.zeros(circuit.n_qubits, dtype=np.uint8)
                if pauli in ("X", "Y"):
                    xv[q] = 1
                if pauli in ("Z", "Y"):
                    zv[q] = 1
                tab.apply_pauli(xv, zv)
        elif kind == "MARK":
            if op[1] in inject:
                m = circuit.markers[op[1]]
                if m.kind != "P":
                    raise ValueError("record-flip markers cannot be injected into a tableau run")
                xv = np.zeros(circuit.n_qubits, dtype=np.uint8)
                zv = np.zeros(circuit.n_qubits, dtype=np.uint8)
                if m.pauli in ("X", "Y"):
                    xv[m.qubit] = 1
                if m.pauli in ("Z", "Y"):
                    zv[m.qubit] = 1
                tab.apply_pauli(xv, zv)
        else:
            raise ValueError(f"unknown op {kind}")
    return tab, records


def circuit_detector_values(circuit: StabilizerCircuit, records: dict[int, int]) -> np.ndarray:
    return np.array(
        [sum(records[r] for r in d.records) % 2 for d in circuit.detectors], dtype=np.uint8
    )


# ---------------------------------------------------------------------------
# Pauli-frame propagation
# ---------------------------------------------------------------------------

def frame_propagate(circuit: StabilizerCircuit, inject: set[int]) -> np.ndarray:
    """Propagate injected markers through the circuit; returns record flip bits.

    The frame is tracked relative to the noiseless reference execution, so
    resets clear it and classically-controlled Paulis act when the *flip*
    parity of their control records is odd.
    """
    fx = np.zeros(circuit.n_qubits, dtype=np.uint8)  # pending X errors
    fz = np.zeros(circuit.n_qubits, dtype=np.uint8)
    flips = np.zeros(circuit.num_records, dtype=np.uint8)
    for op in circuit.ops:
        kind = op[0]
        if kind == "R":
            for q in op[2]:
                fx[q] = fz[q] = 0
        elif kind == "H":
            for q in op[1]:
                fx[q], fz[q] = fz[q], fx[q]
        elif kind == "S":
            for q in op[1]:
                fz[q] ^= fx[q]
        elif kind == "CX":
            for c, t in op[1]:
                fx[t] ^= fx[c]
                fz[c] ^= fz[t]
        elif kind == "CZ":
            for a, b in op[1]:
                fz[a] ^= fx[b]
                fz[b] ^= fx[a]
        elif kind == "M":
            _, basis, qubits, recs = op[:4]
            for q, rec in zip(qubits, recs):
                flips[rec] ^= fx[q] if basis == "Z" else fz[q]
        elif kind == "MPP":
            _, paulis, qubits, rec = op[:4]
            for q, p in zip(qubits, paulis):
                if p == "Z":
                    flips[rec] ^= fx[q]
                elif p == "X":
                    flips[rec] ^= fz[q]
                else:
                    flips[rec] ^= fx[q] ^ fz[q]
        elif kind == "P":
            pass  # fixed gates act identically in the reference run
        elif kind == "T":
            _, qubits = op
            if any(fx[q] or fz[q] for q in qubits):
                raise ValueError("cannot propagate Pauli frames through a T layer")
        elif kind == "CP":
            _, pauli, q, recs = op
            if sum(int(flips[r]) for r in recs) % 2:
                if pauli in ("X", "Y"):
                    fx[q] ^= 1
                if pauli in ("Z", "Y"):
                    fz[q] ^= 1
        elif kind == "MARK":
            if op[1] in inject:
                m = circuit.markers[op[1]]
                if m.kind == "F":
                    flips[m.record] ^= 1
                else:
                    if m.pauli in ("X", "Y"):
                        fx[m.qubit] ^= 1
                    if m.pauli in ("Z", "Y"):
                        fz[m.qubit] ^= 1
    return flips


def compile_fault_columns(circuit: StabilizerCircuit, marker_ids: list[int]) -> tuple[np.ndarray, np.ndarray]:
    """Per-marker detector and observable flip columns via single-fault runs.

    Returns (D, O) uint8 arrays of shapes (num_detectors, len(marker_ids))
    and (num_observables, len(marker_ids)).
    """
    det = np.zeros((len(circuit.detectors), len(marker_ids)), dtype=np.uint8)
    obs = np.zeros((len(circuit.observables), len(marker_ids)), dtype=np.uint8)
    for j, mid in enumerate(marker_ids):
        flips = frame_propagate(circuit, {mid})
        for i, d in enumerate(circuit.detectors):
            det[i, j] = sum(int(flips[r]) for r in d.records) % 2
        for i, o in enumerate(circuit.observables):
            obs[i, j] = sum(int(flips[r]) for r in o.records) % 2
    return det, obs


# ---------------------------------------------------------------------------
# noise models and sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseModel:
    """Fault-location noise binding.

    ``phenomenological`` activates exactly the named fault-family markers of
    a gadget, each independently with probability p.  ``inject_one`` turns on
    a single chosen marker deterministically (for consistency oracles).
    """

    kind: str = "phenomenological"
    p: float = 0.0
    marker: int = -1

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must be a probability")


@dataclass
class ShotResult:
    detectors: np.ndarray
    observables: np.ndarray
    accepted: bool = True


def pauli_frame_sample(circuit, dm, noise: NoiseModel, shots: int, seed: int = 0):
    """Sample detector/observable flips for faults drawn on the model's markers.

    Yields :class:`ShotResult` per shot; reproducible per (seed, shot index).
    ``dm`` is a :class:`~batchqec.gadgets.DetectorModel`; its fault columns
    are taken as ground truth for propagation (they are validated against the
    circuit by the consistency oracle in the test suite).
    """
    d_all, o_all, _ = dm.stacked()
    nf = d_all.shape[1]
    for shot in range(shots):
        rng = np.random.default_rng((seed, shot))
        if noise.kind == "inject_one":
            f = np.zeros(nf, dtype=np.uint8)
            f[noise.marker] = 1
        elif noise.kind == "phenomenological":
            f = (rng.random(nf) < noise.p).astype(np.uint8)
        else:
            raise ValueError(f"unsupported noise kind {noise.kind!r}")
        det = (d_all.astype(np.int32) @ f.astype(np.int32)) & 1
        obs = (o_all.astype(np.int32) @ f.astype(np.int32)) & 1
        yield ShotResult(det.astype(np.uint8), obs.astype(np.uint8))


# ---------------------------------------------------------------------------
# decoders
# ---------------------------------------------------------------------------

def decode_bp_osd(dmat, syndrome, *, iters: int = 30, scaling: float = 0.625, prior: float = 0.01):
    """Min-sum belief propagation with order-0 ordered-statistics completion.

    ``dmat`` is the detector-fault incidence matrix (rows = detectors).
    Always returns a fault estimate whose syndrome matches exactly.
    """
    h = BinaryMatrix(dmat)
    syndrome = np.asarray(syndrome, dtype=np.uint8) & 1
    m, n = h.shape
    if m != syndrome.shape[0]:
        raise ValueError("syndrome length mismatch")
    rows = h.row_supports()
    cols = h.col_supports()
    llr0 = np.log((1 - prior) / prior)
    # messages indexed by (check, var) pairs present in the graph
    edges = [(i, int(j)) for i in range(m) for j in rows[i]]
    msg_cv = {e: 0.0 for e in edges}
    post = np.full(n, llr0)
    for _ in range(iters):
        # variable-to-check
        msg_vc = {}
        for (i, j) in edges:
            msg_vc[(i, j)] = llr0 + sum(msg_cv[(i2, j)] for i2 in cols[j] if i2 != i)
        # check-to-variable (min-sum with normalization)
        for i in range(m):
            vs = rows[i]
            vals = [msg_vc[(i, int(j))] for j in vs]
            signs = [1 if v >= 0 else -1 for v in vals]
            mags = [abs(v) for v in vals]
            total_sign = (-1) ** int(syndrome[i]) * int(np.prod(signs))
            for idx, j in enumerate(vs):
                other_sign = total_sign * signs[idx]
                other_mag = min(mags[:idx] + mags[idx + 1 :]) if len(vs) > 1 else 0.0
                msg_cv[(i, int(j))] = scaling * other_sign * other_mag
        post = np.full(n, llr0)
        for (i, j) in edges:
            post[j] += msg_cv[(i, j)]
        hard = (post < 0).astype(np.uint8)
        if np.array_equal(h.mv(hard), syndrome):
            return hard
    # OSD order-0: greedy pivot on most-likely-error columns
    order = np.argsort(post)  # most negative (most likely error) first
    red, pivots = h.take_cols(order).rref()
    sol_perm = np.zeros(n, dtype=np.uint8)
    # reduce the syndrome through the same row transform: solve on pivot columns
    sub = h.take_cols(order)
    x = sub.solve(syndrome)
    if x is None:
        raise ValueError("syndrome outside the column space of the detector matrix")
    sol = np.zeros(n, dtype=np.uint8)
    sol[order] = x
    return sol


def decode_exhaustive(dmat, syndrome, weight_cap: int):
    """True minimum-weight syndrome-consistent fault (lexicographic tie-break)."""
    h = BinaryMatrix(dmat)
    syndrome = np.asarray(syndrome, dtype=np.uint8) & 1
    if not syndrome.any():
        return np.zeros(h.cols, dtype=np.uint8)
    from .f2 import exhaustive_coset_floor

    sol = exhaustive_coset_floor(h, syndrome, weight_cap)
    if sol is None:
        raise ValueError(f"no fault of weight <= {weight_cap} matches the syndrome")
    return sol


class TableDecoder:
    """Minimum-weight lookup decoder with a bounded enumeration table.

    Precomputes syndrome -> minimum-weight fault for all faults up to
    ``table_weight``; falls back to BP+OSD for rarer, heavier syndromes.
    """

    def __init__(self, dmat, obs, table_weight: int = 3):
        self.h = BinaryMatrix(dmat)
        self.obs = BinaryMatrix(obs)
        m, n = self.h.shape
        self.table: dict[bytes, tuple[int, np.ndarray, np.ndarray]] = {}
        cols_d = self.h.A.T.copy()
        cols_o = self.obs.A.T.copy()
        import itertools as _it

        zero = np.zeros(m, dtype=np.uint8)
        self.table[zero.tobytes()] = (0, np.zeros(n, dtype=np.uint8), np.zeros(self.obs.rows, dtype=np.uint8))
        for w in range(1, table_weight + 1):
            for combo in _it.combinations(range(n), w):
                syn = zero.copy()
                ob = np.zeros(self.obs.rows, dtype=np.uint8)
                for c in combo:
                    syn ^= cols_d[c]
                    ob ^= cols_o[c]
                key = syn.tobytes()
                if key not in self.table:
                    f = np.zeros(n, dtype=np.uint8)
                    f[list(combo)] = 1
                    self.table[key] = (w, f, ob)

    def decode_obs(self, syndrome: np.ndarray) -> np.ndarray:
        """Observable flips of the decoded correction for the given syndrome."""
        hit = self.table.get(syndrome.astype(np.uint8).tobytes())
        if hit is not None:
            return hit[2]
        f = decode_bp_osd(self.h, syndrome)
        return self.obs.mv(f)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def wilson_interval(failures: int, shots: int, z: float = 1.96) -> tuple[float, float]:
    if shots == 0:
        return (0.0, 1.0)
    phat = failures / shots
    denom = 1 + z * z / shots
    center = (phat + z * z / (2 * shots)) / denom
    half = z * np.sqrt(phat * (1 - phat) / shots + z * z / (4 * shots * shots)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class ExperimentPoint:
    p: float
    shots: int
    accepted: int
    failures: np.ndarray       # per observable
    any_failures: int
    lfp: float
    ci_low: float
    ci_high: float
    lfp_per_logical: float
    wall_time: float = 0.0

    def row(self) -> dict:
        return {
            "p": self.p,
            "shots": self.shots,
            "accepted": self.accepted,
            "any_failures": self.any_failures,
            "lfp": self.lfp,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "lfp_per_logical": self.lfp_per_logical,
            "wall_time": self.wall_time,
        }


def _sample_side(d, o, p, shots, seed, decoder: TableDecoder, batch=100_000, rng_stream=0):
    """Vectorized Monte Carlo of one CSS side; returns per-observable failures."""
    m, n = d.shape
    n_obs = o.shape[0]
    fails = np.zeros(n_obs, dtype=np.int64)
    any_fail = 0
    done = 0
    d_arr = d.A.astype(np.uint8)
    o_arr = o.A.astype(np.uint8)
    while done < shots:
        take = min(batch, shots - done)
        rng = np.random.default_rng((seed, rng_stream, done))
        faults = (rng.random((take, n)) < p).astype(np.uint8)
        syn = (faults @ d_arr.T.astype(np.int32)) & 1
        raw_obs = (faults @ o_arr.T.astype(np.int32)) & 1
        syn = syn.astype(np.uint8)
        raw_obs = raw_obs.astype(np.uint8)
        # decode unique syndromes only
        uniq, inverse = np.unique(syn, axis=0, return_inverse=True)
        corr = np.zeros((uniq.shape[0], n_obs), dtype=np.uint8)
        for i in range(uniq.shape[0]):
            corr[i] = decoder.decode_obs(uniq[i])
        flips = raw_obs ^ corr[inverse]
        fails += flips.sum(axis=0)
        any_fail += int((flips.any(axis=1)).sum())
        done += take
    return fails, any_fail


def experiment(kind: str, config: dict) -> list[ExperimentPoint]:
    """Run a Monte Carlo experiment over a grid of physical error rates.

    ``kind='bse_prep'`` runs the combined memory + syndrome-reliability
    experiment for a batched-extraction state-prep gadget: ``config`` needs
    ``q`` (CssCode), ``c`` (ClassicalCode), and optionally ``basis``,
    ``p_grid``, ``shots``, ``seed``, ``decoder`` ('exhaustive' table or
    'bp_osd'), ``table_weight``.
    """
    import time

    from . import gadgets

    if kind not in ("bse_prep", "memory", "stability"):
        raise ValueError(f"unknown experiment kind {kind!r}")
    q = config["q"]
    c = config["c"]
    basis = config.get("basis", "X")
    p_grid = config.get("p_grid", [1e-3, 3e-3, 1e-2])
    shots = int(config.get("shots", 10_000))
    seed = int(config.get("seed", 0))
    table_weight = int(config.get("table_weight", 3))
    circuit, dm = gadgets.build_batched_prep(q, c, basis)
    dec_x = TableDecoder(dm.dx, dm.ox, table_weight)
    dec_z = TableDecoder(dm.dz, dm.oz, table_weight)
    n_obs = dm.ox.rows + dm.oz.rows
    k_logical = max(1, dm.num_logical)
    points = []
    for p in p_grid:
        t0 = time.time()
        if kind == "stability":
            fails_x, any_x = _sample_side(dm.dx, dm.ox, p, shots, seed, dec_x, rng_stream=1)
            fails = fails_x
            any_fail = any_x
        elif kind == "memory":
            fails_z, any_z = _sample_side(dm.dz, dm.oz, p, shots, seed, dec_z, rng_stream=2)
            fails = fails_z
            any_fail = any_z
        else:
            fails_x, any_x = _sample_side(dm.dx, dm.ox, p, shots, seed, dec_x, rng_stream=1)
            fails_z, any_z = _sample_side(dm.dz, dm.oz, p, shots, seed, dec_z, rng_stream=2)
            fails = np.concatenate([fails_x, fails_z])
            # sides are decoded independently; a shot fails if either side fails
            px = any_x / shots
            pz = any_z / shots
            any_fail = int(round(shots * (px + pz - px * pz)))
        lfp = any_fail / shots
        lo, hi = wilson_interval(any_fail, shots)
        per_logical = 1 - (1 - lfp) ** (1 / k_logical) if lfp < 1 else 1.0
        points.append(
            ExperimentPoint(
                p=p, shots=shots, accepted=shots,
                failures=fails, any_failures=any_fail,
                lfp=lfp, ci_low=lo, ci_high=hi,
                lfp_per_logical=per_logical,
                wall_time=time.time() - t0,
            )
        )
    return points


def points_to_csv(points: list[ExperimentPoint]) -> str:
    if not points:
        return ""
    header = ["p", "shots", "accepted"]
    n_obs = len(points[0].failures)
    header += [f"failures_obs{i}" for i in range(n_obs)]
    header += ["any_failures", "lfp", "ci_low", "ci_high", "lfp_per_logical", "wall_time"]
    lines = [",".join(header)]
    for pt in points:
        row = [f"{pt.p:g}", str(pt.shots), str(pt.accepted)]
        row += [str(int(f)) for f in pt.failures]
        row += [str(pt.any_failures), f"{pt.lfp:.8g}", f"{pt.ci_low:.8g}", f"{pt.ci_high:.8g}",
                f"{pt.lfp_per_logical:.8g}", f"{pt.wall_time:.3f}"]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
