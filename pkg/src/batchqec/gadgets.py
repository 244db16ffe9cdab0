"""Batched gadget circuits: syndrome extraction, state prep, code switching,
addressable-Clifford building blocks, and single-shot surgery.

Each builder returns an explicit :class:`~batchqec.circuits.StabilizerCircuit`
plus the structures a decoder needs: a :class:`DetectorModel` holding the
fault-to-detector and fault-to-observable incidence matrices and the Pauli
feedback rules.  Fault locations are threaded through the circuits as named
markers, so the matrices can be validated column-by-column against actual
frame propagation.

Stabilizer rounds that prepare or deform codes are emitted with a ``frame``
flag on their measurement ops: their outcomes are folded into the Pauli
frame (forced to +1 in noiseless tableau runs) rather than corrected with
physical gates.  Transversal readouts keep real random records, and the
printed feedback rules act on those through classically-controlled Paulis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuits import StabilizerCircuit
from .codes import ClassicalCode, CssCode
from .f2 import BinaryMatrix, kron, min_logical_fault_weight, min_weight_outside

__all__ = [
    "DetectorModel",
    "GaugeDeformation",
    "split_canonical",
    "build_bse",
    "build_batched_prep",
    "bse_fault_distance",
    "encode_decode_schedule",
    "build_bcs",
    "BcsLayout",
    "bcs_gauge_group",
    "deformation_distance",
    "addressable_t_template",
    "s_teleport_template",
    "y_catalysis_template",
    "build_single_shot_surgery",
]


# ---------------------------------------------------------------------------
# detector model
# ---------------------------------------------------------------------------

@dataclass
class DetectorModel:
    """Fault-to-detector/observable incidence for one gadget.

    The X side (``dx``/``ox``) covers Z-type faults (data-Z Paulis and
    X-check record flips); the Z side (``dz``/``oz``) covers X-type faults.
    Column order matches the corresponding marker lists, so the matrices can
    be validated fault-by-fault against frame propagation through the
    circuit.  ``feedback`` summarizes the classically-controlled Pauli rules.
    """

    dx: BinaryMatrix
    ox: BinaryMatrix
    dz: BinaryMatrix
    oz: BinaryMatrix
    x_fault_markers: list[int] = field(default_factory=list)
    z_fault_markers: list[int] = field(default_factory=list)
    x_detector_ids: list[int] = field(default_factory=list)
    z_detector_ids: list[int] = field(default_factory=list)
    x_observable_ids: list[int] = field(default_factory=list)
    z_observable_ids: list[int] = field(default_factory=list)
    feedback: list[tuple] = field(default_factory=list)
    num_logical: int = 0

    def stacked(self) -> tuple[np.ndarray, np.ndarray, int]:
        """Block-diagonal (D, O) over all faults (X-side columns first)."""
        nx, nz = self.dx.cols, self.dz.cols
        d = np.zeros((self.dx.rows + self.dz.rows, nx + nz), dtype=np.uint8)
        d[: self.dx.rows, :nx] = self.dx.A
        d[self.dx.rows :, nx:] = self.dz.A
        o = np.zeros((self.ox.rows + self.oz.rows, nx + nz), dtype=np.uint8)
        o[: self.ox.rows, :nx] = self.ox.A
        o[self.ox.rows :, nx:] = self.oz.A
        return d, o, nx

    def to_text(self) -> str:
        lines = []
        for tag, mat in (("DX", self.dx), ("OX", self.ox), ("DZ", self.dz), ("OZ", self.oz)):
            lines.append(f"{tag} {mat.rows} {mat.cols}")
            r, c = np.nonzero(mat.A)
            lines += [f"{tag} {int(i)} {int(j)}" for i, j in zip(r, c)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DetectorModel":
        dims: dict[str, tuple[int, int]] = {}
        entries: dict[str, list[tuple[int, int]]] = {"DX": [], "OX": [], "DZ": [], "OZ": []}
        for ln in text.splitlines():
            parts = ln.split()
            if not parts:
                continue
            tag = parts[0]
            if tag not in entries:
                raise ValueError(f"bad detector model line {ln!r}")
            if tag not in dims:
                dims[tag] = (int(parts[1]), int(parts[2]))
            else:
                entries[tag].append((int(parts[1]), int(parts[2])))
        mats = {}
        for tag in entries:
            rows, cols = dims.get(tag, (0, 0))
            arr = np.zeros((rows, cols), dtype=np.uint8)
            for i, j in entries[tag]:
                arr[i, j] = 1
            mats[tag] = BinaryMatrix(arr, cols=cols)
        return cls(mats["DX"], mats["OX"], mats["DZ"], mats["OZ"])


# ---------------------------------------------------------------------------
# classical-code canonicalization for batching
# ---------------------------------------------------------------------------

def split_canonical(c: ClassicalCode) -> tuple[BinaryMatrix, np.ndarray, BinaryMatrix]:
    """Bit permutation putting the check matrix into (H0 | H1) split form.

    Returns (h_permuted, bit_perm, p_matrix) with H1 (the last sigma columns)
    invertible and the conjugate generator (I | P) satisfying H G^T = 0.
    Bits are permuted, never row-reduced, to preserve check sparsity.
    Raises if no column permutation yields an invertible H1.
    """
    h = c.h.row_space_basis()
    sigma = h.rows
    n = h.cols
    if c.split_col is not None:
        perm = np.arange(n)
        h1 = h.take_cols(range(c.split_col, n))
        if h1.rank() == sigma and n - c.split_col == sigma:
            hp = h
            p_t = _solve_matrix(h1, h.take_cols(range(c.split_col)))
            return hp, perm, p_t.T
    # greedy pivot selection from the right for H1
    _, pivots = h.rref()
    piv = list(pivots)
    if len(piv) != sigma:
        raise ValueError("check matrix is not full rank after reduction")
    rest = [j for j in range(n) if j not in set(piv)]
    perm = np.array(rest + piv, dtype=np.intp)
    hp = h.take_cols(perm)
    h1 = hp.take_cols(range(len(rest), n))
    if h1.rank() != sigma:
        raise ValueError("no bit permutation gives an invertible trailing block")
    p_t = _solve_matrix(h1, hp.take_cols(range(len(rest))))
    return hp, perm, p_t.T


def _solve_matrix(a: BinaryMatrix, b: BinaryMatrix) -> BinaryMatrix:
    """X with a @ X = b (a square invertible)."""
    cols = []
    for j in range(b.cols):
        x = a.solve(b.A[:, j])
        if x is None:
            raise ValueError("inconsistent system")
        cols.append(x)
    return BinaryMatrix(np.array(cols, dtype=np.uint8).T, cols=b.cols)


# ---------------------------------------------------------------------------
# batched syndrome extraction
# ---------------------------------------------------------------------------

def _se_round(circuit, block, h: BinaryMatrix, basis: str, label: str,
              frame: bool, flip_family: str | None):
    """One product-measurement round of the given checks on a block."""
    qs = list(circuit.block_qubits(block))
    recs = []
    for s, row in enumerate(h.A):
        sup = [qs[int(q)] for q in np.nonzero(row)[0]]
        rec = circuit.measure_pauli_product(basis, sup, f"{label}[{s}]")
        if frame:
            circuit.ops[-1] = circuit.ops[-1] + (True,)
        if flip_family is not None:
            circuit.mark_record_flip(flip_family, rec)
        recs.append(rec)
    return recs


def _bse_body(circuit: StabilizerCircuit, q: CssCode, hc: BinaryMatrix,
              p_mat: BinaryMatrix, basis: str):
    """Shared six-step batched-extraction body; returns the record bookkeeping.

    For basis X the gadget measures the X checks of the data blocks: ancilla
    "bit" blocks reset in |0>, "check" blocks in |+>, transversal CNOTs from
    the check blocks onto the bit blocks, then transversal Z/X readouts with
    the generator-matrix feedback.  Basis Z is the exact mirror.
    """
    sigma_c, n_c = hc.shape
    k_c = n_c - sigma_c
    n = q.n
    if basis == "X":
        hm, hcomp = q.hx, q.hz
        b_reset, a_reset = "Z", "X"
        b_meas, a_meas = "Z", "X"
        fb_pauli = "X"
        data_fault_b1, data_fault_a = "data_x", "data_z"
        synd_fault_init, synd_fault_a = "synd_x", "synd_z"
    else:
        hm, hcomp = q.hz, q.hx
        b_reset, a_reset = "X", "Z"
        b_meas, a_meas = "X", "Z"
        fb_pauli = "Z"
        data_fault_b1, data_fault_a = "data_z", "data_x"
        synd_fault_init, synd_fault_a = "synd_z", "synd_x"

    b0 = [f"B0_{b}" for b in range(k_c)]
    b1 = [f"B1_{j}" for j in range(sigma_c)]
    anc = [f"A_{i}" for i in range(sigma_c)]
    for name in b0 + b1 + anc:
        circuit.add_block(name, n)

    rec_init: list[list[int]] = []
    for b in range(k_c):
        rec_init.append(_se_round(circuit, b0[b], hm, basis, f"s{basis}_B0_{b}", False, synd_fault_init))
    for j in range(sigma_c):
        circuit.reset(b_reset, list(circuit.block_qubits(b1[j])))
        rec_init.append(_se_round(circuit, b1[j], hm, basis, f"s{basis}_B1_{j}", False, synd_fault_init))
    rec_a: list[list[int]] = []
    comp_basis = "Z" if basis == "X" else "X"
    for i in range(sigma_c):
        circuit.reset(a_reset, list(circuit.block_qubits(anc[i])))
        rec_a.append(_se_round(circuit, anc[i], hcomp, comp_basis, f"s{comp_basis}_A_{i}", False, synd_fault_a))
    # transversal CNOTs per the classical checks
    for i in range(sigma_c):
        for b in range(n_c):
            if hc.A[i, b]:
                tgt = b0[b] if b < k_c else b1[b - k_c]
                if basis == "X":
                    circuit.transversal_cx(anc[i], tgt)
                else:
                    circuit.transversal_cx(tgt, anc[i])
    # data-fault markers just before the final readouts
    for i in range(sigma_c):
        for qq in circuit.block_qubits(anc[i]):
            circuit.mark_pauli(data_fault_a, "Z" if basis == "X" else "X", qq)
    for j in range(sigma_c):
        for qq in circuit.block_qubits(b1[j]):
            circuit.mark_pauli(data_fault_b1, "X" if basis == "X" else "Z", qq)
    # final transversal readouts
    recm_b1 = [circuit.measure(b_meas, list(circuit.block_qubits(b1[j])), f"m{b_meas}_B1_{j}")
               for j in range(sigma_c)]
    recm_a = [circuit.measure(a_meas, list(circuit.block_qubits(anc[i])), f"m{a_meas}_A_{i}")
              for i in range(sigma_c)]
    # feedback: classically-controlled transversal CNOT pattern from (I | P)
    feedback = []
    for bi in range(k_c):
        for j in range(sigma_c):
            if p_mat.A[bi, j]:
                qs = list(circuit.block_qubits(b0[bi]))
                for t in range(n):
                    circuit.classical_pauli(fb_pauli, qs[t], [recm_b1[j][t]])
                feedback.append((f"B1_{j}", f"B0_{bi}", fb_pauli))
    # detectors
    main_det = []  # catching faults of the measured-check type
    for i in range(sigma_c):
        for s in range(hm.rows):
            recs = [recm_a[i][int(t)] for t in np.nonzero(hm.A[s])[0]]
            recs += [rec_init[b][s] for b in range(n_c) if hc.A[i, b]]
            main_det.append(circuit.add_detector(f"bse_{basis}[{i},{s}]", basis, recs))
    comp_det = []
    hc1 = hc.take_cols(range(k_c, n_c))
    for j in range(sigma_c):
        for s in range(hcomp.rows):
            recs = [recm_b1[j][int(t)] for t in np.nonzero(hcomp.A[s])[0]]
            recs += [rec_a[i][s] for i in range(sigma_c) if hc1.A[i, j]]
            comp_det.append(circuit.add_detector(f"bse_{comp_basis}[{j},{s}]", comp_basis, recs))
    return {
        "b0": b0, "b1": b1, "anc": anc,
        "rec_init": rec_init, "rec_a": rec_a,
        "recm_b1": recm_b1, "recm_a": recm_a,
        "main_det": main_det, "comp_det": comp_det,
        "feedback": feedback, "hm": hm, "hcomp": hcomp,
        "k_c": k_c, "sigma_c": sigma_c, "n_c": n_c, "hc": hc, "hc1": hc1,
    }


def _bse_matrices(q: CssCode, ctx, basis: str):
    """The detector matrices of the gadget in their product form."""
    sigma_c, n_c = ctx["sigma_c"], ctx["n_c"]
    hm, hcomp, hc, hc1 = ctx["hm"], ctx["hcomp"], ctx["hc"], ctx["hc1"]
    eye_sc = BinaryMatrix.identity(sigma_c)
    d_main = kron(eye_sc, hm).hstack(kron(hc, BinaryMatrix.identity(hm.rows)))
    d_comp = kron(eye_sc, hcomp).hstack(kron(hc1.T, BinaryMatrix.identity(hcomp.rows)))
    return d_main, d_comp


def build_bse(q: CssCode, c: ClassicalCode, basis: str = "X"):
    """Batched extraction of one check basis of ``k_C`` data blocks.

    Builds the full circuit over ``k_C`` data blocks, ``sigma_C`` bit-ancilla
    blocks and ``sigma_C`` check-ancilla blocks, with the detector model in
    its two-block product form.  The trivial batching (``sigma_C = 0``)
    degenerates to one bare extraction round with an empty detector model.
    """
    basis = basis.upper()
    if basis not in ("X", "Z"):
        raise ValueError("basis must be 'X' or 'Z'")
    circuit = StabilizerCircuit()
    if c.num_checks == 0 or c.h.rank() == 0:
        # trivial batching: bare extraction round on each data block
        for b in range(c.n):
            circuit.add_block(f"B0_{b}", q.n)
            _se_round(circuit, f"B0_{b}", q.hx if basis == "X" else q.hz,
                      basis, f"s{basis}_B0_{b}", False, None)
        zero = BinaryMatrix.zeros(0, 0)
        return circuit, DetectorModel(dx=zero, ox=zero, dz=zero, oz=zero)
    hc, _, p_mat = split_canonical(c)
    ctx = _bse_body(circuit, q, hc, p_mat, basis)
    d_main, d_comp = _bse_matrices(q, ctx, basis)
    o_main = BinaryMatrix.zeros(0, d_main.cols)
    o_comp = BinaryMatrix.zeros(0, d_comp.cols)
    markers_main = [m for m in range(len(circuit.markers))
                    if circuit.markers[m].family in (("data_z", "synd_x") if basis == "X" else ("data_x", "synd_z"))]
    markers_comp = [m for m in range(len(circuit.markers))
                    if circuit.markers[m].family in (("data_x", "synd_z") if basis == "X" else ("data_z", "synd_x"))]
    markers_main = _order_markers(circuit, markers_main, basis, ctx)
    markers_comp = _order_markers(circuit, markers_comp, "Z" if basis == "X" else "X", ctx)
    if basis == "X":
        dm = DetectorModel(
            dx=d_main, ox=o_main, dz=d_comp, oz=o_comp,
            x_fault_markers=markers_main, z_fault_markers=markers_comp,
            x_detector_ids=ctx["main_det"], z_detector_ids=ctx["comp_det"],
            feedback=ctx["feedback"],
        )
    else:
        dm = DetectorModel(
            dx=d_comp, ox=o_comp, dz=d_main, oz=o_main,
            x_fault_markers=markers_comp, z_fault_markers=markers_main,
            x_detector_ids=ctx["comp_det"], z_detector_ids=ctx["main_det"],
            feedback=ctx["feedback"],
        )
    return circuit, dm


def _order_markers(circuit, marker_ids, side: str, ctx):
    """Columns are (data faults block-major) then (record flips readout-major)."""
    data_family = "data_z" if side == "X" else "data_x"
    data = [m for m in marker_ids if circuit.markers[m].family == data_family]
    flips = [m for m in marker_ids if circuit.markers[m].kind == "F"]
    data.sort(key=lambda m: circuit.markers[m].index)
    flips.sort(key=lambda m: circuit.markers[m].index)
    return data + flips


def build_batched_prep(q: CssCode, c: ClassicalCode, basis: str = "X"):
    """Single-shot batched logical state preparation with full observables.

    For basis X this prepares logical |0> states: data blocks reset in |0>,
    one batched X-check extraction, and a final transversal Z readout.  The
    observables are the space-like logicals of each data block plus the
    time-like metachecks spanning the kernel of the measured checks'
    transpose.
    """
    basis = basis.upper()
    circuit = StabilizerCircuit()
    hc, _, p_mat = split_canonical(c)
    sigma_c, n_c = hc.shape
    k_c = n_c - sigma_c
    reset_basis = "Z" if basis == "X" else "X"
    # data blocks are registered first by the body; reset them before use
    ctx = _bse_body(circuit, q, hc, p_mat, basis)
    # prepend data resets (before all other ops)
    reset_ops = []
    for b in range(k_c):
        reset_ops.append(("R", reset_basis, tuple(circuit.block_qubits(f"B0_{b}"))))
    circuit.ops = reset_ops + circuit.ops

    hm = ctx["hm"]
    lread = q.lz if basis == "X" else q.lx
    meta = hm.T.kernel()  # metacheck combinations of the measured checks
    recm_b0 = [circuit.measure(reset_basis, list(circuit.block_qubits(f"B0_{b}")), f"mD_{b}")
               for b in range(k_c)]
    space_obs = []
    for b in range(k_c):
        for lam in range(q.k):
            recs = [recm_b0[b][int(t)] for t in np.nonzero(lread.A[lam])[0]]
            space_obs.append(circuit.add_observable(f"logical[{b},{lam}]", "space", recs))
    time_obs = []
    for b in range(k_c):
        for mu in range(meta.rows):
            recs = [ctx["rec_init"][b][int(s)] for s in np.nonzero(meta.A[mu])[0]]
            time_obs.append(circuit.add_observable(f"metacheck[{b},{mu}]", "time", recs))

    d_main, d_comp = _bse_matrices(q, ctx, basis)
    # time-like observables: flips of the initial data-block syndrome records
    sel = np.zeros((k_c, n_c), dtype=np.uint8)
    sel[:, :k_c] = np.eye(k_c, dtype=np.uint8)
    o_main = BinaryMatrix.zeros(k_c * meta.rows, sigma_c * q.n).hstack(
        kron(BinaryMatrix(sel, cols=n_c), meta)
    )
    # space-like observables: feedback-propagated data faults on the readout
    o_comp = kron(p_mat, lread).hstack(
        BinaryMatrix.zeros(k_c * q.k, d_comp.cols - sigma_c * q.n)
    )
    markers_main = _order_markers(
        circuit,
        [m for m in range(len(circuit.markers))
         if circuit.markers[m].family in (("data_z", "synd_x") if basis == "X" else ("data_x", "synd_z"))],
        basis, ctx)
    markers_comp = _order_markers(
        circuit,
        [m for m in range(len(circuit.markers))
         if circuit.markers[m].family in (("data_x", "synd_z") if basis == "X" else ("data_z", "synd_x"))],
        "Z" if basis == "X" else "X", ctx)
    if basis == "X":
        dm = DetectorModel(
            dx=d_main, ox=o_main, dz=d_comp, oz=o_comp,
            x_fault_markers=markers_main, z_fault_markers=markers_comp,
            x_detector_ids=ctx["main_det"], z_detector_ids=ctx["comp_det"],
            x_observable_ids=time_obs, z_observable_ids=space_obs,
            feedback=ctx["feedback"], num_logical=k_c * q.k,
        )
    else:
        dm = DetectorModel(
            dx=d_comp, ox=o_comp, dz=d_main, oz=o_main,
            x_fault_markers=markers_comp, z_fault_markers=markers_main,
            x_detector_ids=ctx["comp_det"], z_detector_ids=ctx["main_det"],
            x_observable_ids=space_obs, z_observable_ids=time_obs,
            feedback=ctx["feedback"], num_logical=k_c * q.k,
        )
    return circuit, dm


def bse_fault_distance(dm: DetectorModel, basis: str, weight_cap: int) -> int | None:
    """Exhaustive minimum weight of an undetected observable-flipping fault set.

    ``basis='X'`` searches the X-detector side (Z-type faults), ``'Z'`` the
    mirror, ``'both'`` the minimum of the two.  Returns None if every fault
    set up to the cap is detected or silent (distance > cap).
    """
    sides = []
    if basis.upper() in ("X", "BOTH"):
        sides.append((dm.dx, dm.ox))
    if basis.upper() in ("Z", "BOTH"):
        sides.append((dm.dz, dm.oz))
    best = None
    for d, o in sides:
        d_cols = [int("".join(str(b) for b in d.A[:, j][::-1]), 2) if d.rows else 0 for j in range(d.cols)]
        o_cols = [int("".join(str(b) for b in o.A[:, j][::-1]), 2) if o.rows else 0 for j in range(o.cols)]
        w = min_logical_fault_weight(d_cols, o_cols, weight_cap)
        if w is not None and (best is None or w < best):
            best = w
    return best


# ---------------------------------------------------------------------------
# measurement-based encoding / decoding
# ---------------------------------------------------------------------------

def encode_decode_schedule(q: CssCode, direction: str) -> StabilizerCircuit:
    """Encoding/decoding between the L-zone qubits and the full code block.

    Encoding resets the Z zone in |0> and the X zone in |+>, then measures
    all stabilizers (frame-fixed).  Decoding measures the Z zone in Z and
    the X zone in X and applies the zone-matrix feedback Paulis to the L
    zone.  The trivial one-qubit code yields an empty circuit.
    """
    circuit = StabilizerCircuit()
    if q.n == q.k:
        circuit.add_block("data", q.n)
        return circuit
    circuit.add_block("data", q.n)
    qs = list(circuit.block_qubits("data"))
    l_zone = [qs[int(i)] for i in q.l_zone]
    z_zone = [qs[int(i)] for i in q.z_zone]
    x_zone = [qs[int(i)] for i in q.x_zone]
    if direction == "encode":
        if z_zone:
            circuit.reset("Z", z_zone)
        if x_zone:
            circuit.reset("X", x_zone)
        for s, row in enumerate(q.hx.A):
            circuit.measure_pauli_product("X", [qs[int(t)] for t in np.nonzero(row)[0]], f"sx[{s}]")
            circuit.ops[-1] = circuit.ops[-1] + (True,)
        for s, row in enumerate(q.hz.A):
            circuit.measure_pauli_product("Z", [qs[int(t)] for t in np.nonzero(row)[0]], f"sz[{s}]")
            circuit.ops[-1] = circuit.ops[-1] + (True,)
        return circuit
    if direction != "decode":
        raise ValueError("direction must be 'encode' or 'decode'")
    a_mat, b_mat = q.zone_matrices()
    rec_z = circuit.measure("Z", z_zone, "mz") if z_zone else []
    rec_x = circuit.measure("X", x_zone, "mx") if x_zone else []
    for i in range(q.k):
        ctrl = [rec_z[j] for j in np.nonzero(a_mat.A[i])[0]]
        if ctrl:
            circuit.classical_pauli("X", l_zone[i], ctrl)
        ctrl = [rec_x[j] for j in np.nonzero(b_mat.A[i])[0]]
        if ctrl:
            circuit.classical_pauli("Z", l_zone[i], ctrl)
    return circuit


# ---------------------------------------------------------------------------
# batched code switching
# ---------------------------------------------------------------------------

@dataclass
class BcsLayout:
    """Grid bookkeeping for a code-switching gadget.

    Columns are blocks of the first code indexed by the second code's qubits
    (its L zone carries the data columns); rows are blocks of the second code
    indexed by the first code's qubits.  ``routing`` maps input logical
    (i, j) -> output (block row, logical j).
    """

    q1: CssCode
    q2: CssCode
    col_blocks: list[str]
    data_cols: list[int]
    out_rows: list[int]
    routing: dict[tuple[int, int], tuple[int, int]]
    steps: list[tuple[str, int, int]]  # (label, op_start, op_end)

    def grid_qubit(self, circuit: StabilizerCircuit, row: int, col: int) -> int:
        start, _ = circuit.blocks[self.col_blocks[col]]
        return start + row


def build_bcs(q1: CssCode, q2: CssCode) -> tuple[StabilizerCircuit, BcsLayout]:
    """Code switching from k2 blocks of q1 to k1 blocks of q2 on the n1 x n2 grid.

    Step 1 prepares the ancilla q1 columns (logical |0>/|+> on the second
    code's Z/X zones); step 2 measures the stabilizers of q2 on every row;
    step 3 transversally measures the rows in q1's Z/X zones; step 4 applies
    the zone-matrix feedback (classically-controlled transversal CNOT/CZ
    patterns).  Stabilizer rounds are frame-fixed; readouts are real records.
    """
    n1, n2 = q1.n, q2.n
    circuit = StabilizerCircuit()
    col_blocks = [f"C_{j}" for j in range(n2)]
    for name in col_blocks:
        circuit.add_block(name, n1)

    def gq(i, j):
        return circuit.blocks[col_blocks[j]][0] + i

    steps: list[tuple[str, int, int]] = []
    data_cols = [int(j) for j in q2.l_zone]
    z2_cols = [int(j) for j in q2.z_zone]
    x2_cols = [int(j) for j in q2.x_zone]

    # step 1: ancilla column preparation
    mark = len(circuit.ops)
    for j in z2_cols + x2_cols:
        basis = "Z" if j in z2_cols else "X"
        circuit.reset(basis, [gq(i, j) for i in range(n1)])
        for s, row in enumerate(q1.hx.A):
            circuit.measure_pauli_product("X", [gq(int(t), j) for t in np.nonzero(row)[0]], f"prep_x[{j},{s}]")
            circuit.ops[-1] = circuit.ops[-1] + (True,)
        for s, row in enumerate(q1.hz.A):
            circuit.measure_pauli_product("Z", [gq(int(t), j) for t in np.nonzero(row)[0]], f"prep_z[{j},{s}]")
            circuit.ops[-1] = circuit.ops[-1] + (True,)
    steps.append(("prep", mark, len(circuit.ops)))

    # step 2: measure the second code's stabilizers on every row
    mark = len(circuit.ops)
    for i in range(n1):
        for s, row in enumerate(q2.hx.A):
            circuit.measure_pauli_product("X", [gq(i, int(t)) for t in np.nonzero(row)[0]], f"q2x[{i},{s}]")
            circuit.ops[-1] = circuit.ops[-1] + (True,)
        for s, row in enumerate(q2.hz.A):
            circuit.measure_pauli_product("Z", [gq(i, int(t)) for t in np.nonzero(row)[0]], f"q2z[{i},{s}]")
            circuit.ops[-1] = circuit.ops[-1] + (True,)
    steps.append(("switch", mark, len(circuit.ops)))

    # step 3: transversal readout of the complementary rows
    mark = len(circuit.ops)
    z1_rows = [int(i) for i in q1.z_zone]
    x1_rows = [int(i) for i in q1.x_zone]
    rec_rows_z: dict[int, list[int]] = {}
    rec_rows_x: dict[int, list[int]] = {}
    for i in z1_rows:
        rec_rows_z[i] = circuit.measure("Z", [gq(i, j) for j in range(n2)], f"rowz[{i}]")
    for i in x1_rows:
        rec_rows_x[i] = circuit.measure("X", [gq(i, j) for j in range(n2)], f"rowx[{i}]")
    steps.append(("readout", mark, len(circuit.ops)))

    # step 4: feedback per the zone matrices of q1
    mark = len(circuit.ops)
    a1, b1 = q1.zone_matrices()
    l1_rows = [int(i) for i in q1.l_zone]
    for li, i_row in enumerate(l1_rows):
        for j, zr in enumerate(z1_rows):
            if a1.A[li, j]:
                for col in range(n2):
                    circuit.classical_pauli("X", gq(i_row, col), [rec_rows_z[zr][col]])
        for j, xr in enumerate(x1_rows):
            if b1.A[li, j]:
                for col in range(n2):
                    circuit.classical_pauli("Z", gq(i_row, col), [rec_rows_x[xr][col]])
    steps.append(("feedback", mark, len(circuit.ops)))

    routing = {}
    for i in range(q1.k):
        for j in range(q2.k):
            routing[(i, j)] = (i, j)  # logical i of q1 block j -> logical j of q2 block i
    layout = BcsLayout(q1, q2, col_blocks, data_cols, l1_rows, routing, steps)
    return circuit, layout


def bcs_gauge_group(q1: CssCode, q2: CssCode) -> "GaugeDeformation":
    """Gauge group of the switching deformation on the n1 x n2 grid.

    Grid order is column-major: qubit (row i, column j) has index j*n1 + i.
    The old stabilizers are the column code's checks plus the ancilla-column
    logicals; the new ones the row code's checks plus the readout-row
    logicals; bare logicals are the tensor products of the logical bases.
    """
    n1, n2 = q1.n, q2.n
    eye2, eye1 = BinaryMatrix.identity(n2), BinaryMatrix.identity(n1)
    lx1, lz1 = q1.canonical_lx_lz()
    lx2, lz2 = q2.canonical_lx_lz()

    def col_selector(cols):
        sel = np.zeros((len(cols), n2), dtype=np.uint8)
        for r, j in enumerate(cols):
            sel[r, int(j)] = 1
        return BinaryMatrix(sel, cols=n2)

    def row_selector(rows):
        sel = np.zeros((len(rows), n1), dtype=np.uint8)
        for r, i in enumerate(rows):
            sel[r, int(i)] = 1
        return BinaryMatrix(sel, cols=n1)

    s_old_z = kron(eye2, q1.hz).vstack(kron(col_selector(q2.z_zone), lz1).A)
    s_old_x = kron(eye2, q1.hx).vstack(kron(col_selector(q2.x_zone), lx1).A)
    s_new_z = kron(q2.hz, eye1).vstack(kron(lz2, row_selector(q1.z_zone)).A)
    s_new_x = kron(q2.hx, eye1).vstack(kron(lx2, row_selector(q1.x_zone)).A)
    bare_z = kron(lz2, lz1)
    bare_x = kron(lx2, lx1)
    return GaugeDeformation(
        s_old=(s_old_x, s_old_z), s_new=(s_new_x, s_new_z),
        gauge_x=s_old_x.vstack(s_new_x.A), gauge_z=s_old_z.vstack(s_new_z.A),
        center_x=kron(q2.hx, q1.hx), center_z=kron(q2.hz, q1.hz),
        bare_x=bare_x, bare_z=bare_z,
    )


@dataclass
class GaugeDeformation:
    """Old/new stabilizer groups of a deformation, its center and bare logicals.

    The center (tensor products of the two codes' checks) is what stays
    reliably measurable throughout the deformation; dressed logicals commute
    with the center but not necessarily with every gauge element.
    """

    s_old: tuple[BinaryMatrix, BinaryMatrix]
    s_new: tuple[BinaryMatrix, BinaryMatrix]
    gauge_x: BinaryMatrix
    gauge_z: BinaryMatrix
    center_x: BinaryMatrix
    center_z: BinaryMatrix
    bare_x: BinaryMatrix
    bare_z: BinaryMatrix

    def validate(self):
        for gx in (self.s_old[0], self.s_new[0]):
            if not (gx @ self.bare_z.T).is_zero():
                raise ValueError("X gauge elements fail to commute with bare Z logicals")
        for gz in (self.s_old[1], self.s_new[1]):
            if not (gz @ self.bare_x.T).is_zero():
                raise ValueError("Z gauge elements fail to commute with bare X logicals")
        # the center must commute with the whole gauge group
        if not (self.center_x @ self.gauge_z.T).is_zero():
            raise ValueError("center X part fails to commute with the Z gauge")
        if not (self.center_z @ self.gauge_x.T).is_zero():
            raise ValueError("center Z part fails to commute with the X gauge")


@dataclass
class DeformationDistanceReport:
    z_report: object
    x_report: object

    @property
    def upper(self) -> int:
        return min(self.z_report.best_weight, self.x_report.best_weight)

    @property
    def floor(self) -> int:
        return min(self.z_report.exhaustive_floor, self.x_report.exhaustive_floor)


def deformation_distance(q1: CssCode, q2: CssCode, weight_cap: int = 0,
                         *, trials: int = 120, seed: int = 0) -> DeformationDistanceReport:
    """Minimum dressed-logical weight of the switching deformation's parent code.

    Z side: vectors commuting with the center's X part, outside the Z gauge
    span; X side mirrored.  Randomized search plus exhaustive exclusion up to
    the weight cap.
    """
    g = bcs_gauge_group(q1, q2)
    g.validate()
    z_rep = min_weight_outside(g.center_x.kernel(), g.gauge_z,
                               trials=trials, seed=seed, exhaustive_cap=weight_cap)
    x_rep = min_weight_outside(g.center_z.kernel(), g.gauge_x,
                               trials=trials, seed=seed, exhaustive_cap=weight_cap)
    return DeformationDistanceReport(z_rep, x_rep)


# ---------------------------------------------------------------------------
# batched addressable Cliffords
# ---------------------------------------------------------------------------

def fold_permutation(q2: CssCode) -> np.ndarray:
    """A qubit permutation mapping the X-check row space onto the Z-check's.

    Identity for self-dual codes; the grid transposition for symmetric
    hypergraph products (both sectors transposed).  Raises if neither
    structure applies.
    """
    if q2.hx.same_row_space(q2.hz):
        return np.arange(q2.n)
    dims = getattr(q2, "hgp_dims", None)
    if dims is not None:
        (n1, n2, r1, r2) = dims
        if n1 == n2 and r1 == r2:
            perm = np.empty(q2.n, dtype=np.intp)
            for i in range(n1):
                for j in range(n2):
                    perm[i * n2 + j] = j * n1 + i
            off = n1 * n2
            for a in range(r1):
                for b in range(r2):
                    perm[off + a * r2 + b] = off + b * r1 + a
            hx_p = q2.hx.take_cols(perm)
            if hx_p.same_row_space(q2.hz):
                return perm
    raise ValueError("fold gates need a self-dual or symmetric-product code")


def build_bac(circuit, q1: CssCode, q2: CssCode):
    """Compile a shared in-block Clifford circuit into a batched schedule.

    The schedule switches the batch into the second code's encoding, applies
    each layer natively there (transversal CNOT steps; fold H-SWAP with its
    compensating block-swap pass; S teleportation consuming a resource
    block), and switches back.  H/S layers require a self-dual or symmetric
    hypergraph-product second code; the mirrored-pair swap left over by the
    fold gates is cancelled by a batched swap pass through the first code.
    """
    from .compiler import GadgetSchedule, ScheduleStep

    if circuit.K != q1.k:
        raise ValueError(f"circuit acts on {circuit.K} qubits but blocks hold {q1.k}")
    if q2.k < 1:
        raise ValueError("second code must encode at least one logical qubit")
    needs_fold = any(kind in ("H", "S") for kind, _ in circuit.layers)
    fold = None
    if needs_fold:
        fold = fold_permutation(q2)
    sched = GadgetSchedule(block_count=q1.k, block_size=q2.k)
    sched.annotations["q1"] = q1.name
    sched.annotations["q2"] = q2.name
    if q2.dx_est is not None and q1.dx_est is not None:
        if q2.dx_est.best_weight < q1.dx_est.best_weight:
            sched.annotations["distance_warning"] = "second code distance below the first's"
    all_blocks = tuple(range(q1.k))
    sched.steps.append(ScheduleStep("BCS", all_blocks, ("SWITCH_IN",)))
    y_blocks = 0
    for kind, payload in circuit.layers:
        if kind == "CNOT":
            sched.steps.append(ScheduleStep("TCNOT", tuple(payload), ("CNOT_BLOCKS",)))
        elif kind == "H":
            active = tuple(i for i, m in enumerate(payload) if m)
            if not active:
                continue
            sched.steps.append(ScheduleStep("FOLD_H_SWAP", active, ("FOLD", tuple(int(p) for p in fold))))
            # compensating batched swap pass through the first encoding
            sched.steps.append(ScheduleStep("BCS", all_blocks, ("SWITCH_OUT",)))
            mirror = _mirrored_logical_pairs(q2)
            sched.steps.append(ScheduleStep("BLOCK_SWAP", active, ("SWAP_PRIME", mirror)))
            sched.steps.append(ScheduleStep("BCS", all_blocks, ("SWITCH_IN",)))
        elif kind == "S":
            active = tuple(i for i, m in enumerate(payload) if m)
            if not active:
                continue
            y_blocks += 1
            sched.steps.append(ScheduleStep("S_TELEPORT", active, ("S_VIA_Y_BLOCK",)))
        elif kind == "T":
            raise ValueError("T layers are not Clifford; compile them separately")
    sched.steps.append(ScheduleStep("BCS", all_blocks, ("SWITCH_OUT",)))
    sched.annotations["y_state_blocks_consumed"] = y_blocks
    sched.validate_batching()
    return sched


def _mirrored_logical_pairs(q2: CssCode) -> tuple:
    """Mirrored (i, j) <-> (j, i) pairs of the second code's logical grid."""
    dims = getattr(q2, "logical_grid", None)
    if dims is None:
        side = int(np.sqrt(q2.k))
        if side * side != q2.k:
            return ()
        dims = (side, side)
    a, b = dims
    if a != b:
        return ()
    return tuple(
        (i * b + j, j * b + i) for i in range(a) for j in range(b) if i < j
    )


# ---------------------------------------------------------------------------
# addressable non-Clifford and S-gate templates
# ---------------------------------------------------------------------------

def addressable_t_template(mask) -> StabilizerCircuit:
    """Addressable T gates from one global-T layer plus addressable Cliffords.

    The ancilla register is prepared in |0>, the complement of the mask is
    rotated to |+> so those positions decouple, a transversal CNOT couples
    the masked positions, the global T marker acts on the ancilla, and the X
    readout drives addressable Pauli-Z feedback on the data register.
    """
    mask = np.asarray(mask, dtype=np.uint8)
    k = len(mask)
    circuit = StabilizerCircuit()
    circuit.add_block("data", k)
    circuit.add_block("anc", k)
    data = list(circuit.block_qubits("data"))
    anc = list(circuit.block_qubits("anc"))
    circuit.reset("Z", anc)
    off = [anc[i] for i in range(k) if not mask[i]]
    if off:
        circuit.gate("H", off)
    circuit.gate("CX", list(zip(data, anc)))
    circuit.t_marker(anc)
    recs = circuit.measure("X", anc, "mt")
    for i in range(k):
        if mask[i]:
            circuit.classical_pauli("Z", data[i], [recs[i]])
    return circuit


def s_teleport_template(k: int) -> StabilizerCircuit:
    """Global S on a k-qubit register consuming a block of |i> = S|+> states.

    Transversal CZ onto the resource block, X readout of the resource, and a
    Z correction applied when the readout lands on the +1 branch.
    """
    circuit = StabilizerCircuit()
    if k == 0:
        return circuit
    circuit.add_block("data", k)
    circuit.add_block("y", k)
    data = list(circuit.block_qubits("data"))
    y = list(circuit.block_qubits("y"))
    circuit.reset("X", y)
    circuit.gate("S", y)  # |i> resource states
    circuit.gate("CZ", list(zip(data, y)))
    recs = circuit.measure("X", y, "my")
    for i in range(k):
        # correction on the +1 branch: unconditional Z cancelled by the record
        circuit.pauli("Z", [data[i]])
        circuit.classical_pauli("Z", data[i], [recs[i]])
    return circuit


def y_catalysis_template(k: int) -> StabilizerCircuit:
    """Produce a fresh block of |i> states from |+> inputs and a catalyst block.

    Joint Y.Y measurements between the new block and the catalyst project the
    new qubits onto +-|i>; the Z feedback fixes the sign, and the catalyst's
    own Y stabilizer is untouched throughout.
    """
    circuit = StabilizerCircuit()
    if k == 0:
        return circuit
    circuit.add_block("new", k)
    circuit.add_block("cat", k)
    new = list(circuit.block_qubits("new"))
    cat = list(circuit.block_qubits("cat"))
    circuit.reset("X", new)
    for i in range(k):
        rec = circuit.measure_pauli_product("YY", [new[i], cat[i]], f"yy[{i}]")
        circuit.classical_pauli("Z", new[i], [rec])
    return circuit


# ---------------------------------------------------------------------------
# single-shot surgery
# ---------------------------------------------------------------------------

@dataclass
class SurgeryOutcomeRule:
    """How to read joint-logical outcomes off a single extraction round.

    ``logical_checks[i]`` lists the merged X-check record positions whose
    parity gives the i-th joint X.X outcome; corrections decoded from the
    patch-restricted syndrome adjust the parity through the merged check
    matrix.
    """

    merged_hx: BinaryMatrix
    patch_rows: list[int]
    logical_checks: list[list[int]]
    n_patch_faults: int

    def raw_outcomes(self, check_records: list[int]) -> list[int]:
        return [sum(check_records[c] for c in combo) % 2 for combo in self.logical_checks]

    def corrected_outcome_flips(self, data_flips: np.ndarray, synd_flips: np.ndarray,
                                weight_cap: int = 2) -> list[int]:
        """Outcome flips after the patch-syndrome correction, for fault flips."""
        from .sim import decode_exhaustive

        syn = np.array([
            (int(self.merged_hx.A[r] @ data_flips.astype(np.int32)) + int(synd_flips[r])) & 1
            for r in self.patch_rows
        ], dtype=np.uint8)
        patch_h = self.merged_hx.take_rows(self.patch_rows)
        correction = decode_exhaustive(patch_h, syn, weight_cap)
        flips = []
        for combo in self.logical_checks:
            raw = sum(
                (int(self.merged_hx.A[c] @ data_flips.astype(np.int32)) + int(synd_flips[c])) & 1
                for c in combo
            ) % 2
            corr = sum(int(self.merged_hx.A[c] @ correction.astype(np.int32)) & 1 for c in combo) % 2
            flips.append((raw + corr) % 2)
        return flips


def build_single_shot_surgery(qa: CssCode, qb: CssCode, adapter):
    """One-round joint X.X logical measurement through an adapter.

    Ancilla (adapter) qubits are reset in |0>, all merged X checks are
    measured once, and the adapter qubits are read out in Z with transversal
    X feedback left to the Pauli frame.  Returns (circuit, detector model,
    outcome rule): the detectors are the patch-supported checks (deterministic
    for encoded inputs), and the outcome rule gives each joint logical as the
    parity of the adapter-check records selected by the kernel basis.
    """
    from .surgery import merge

    if adapter.num_checks == 0:
        raise ValueError("zero-length interface")
    merged = merge(qa, qb, adapter)
    mc = merged.code
    circuit = StabilizerCircuit()
    circuit.add_block("Qa", qa.n)
    circuit.add_block("A", adapter.num_qubits)
    circuit.add_block("Qb", qb.n)
    anc = list(circuit.block_qubits("A"))
    circuit.reset("Z", anc)
    # input-noise markers on every merged qubit
    for qq in range(mc.n):
        circuit.mark_pauli("data_z", "Z", qq)
    recs = []
    for s, row in enumerate(mc.hx.A):
        rec = circuit.measure_pauli_product("X", [int(t) for t in np.nonzero(row)[0]], f"sx[{s}]")
        circuit.mark_record_flip("synd_x", rec)
        recs.append(rec)
    circuit.measure("Z", anc, "mA")

    patch_rows = [r for r in range(mc.hx.rows)
                  if not mc.hx.A[r, qa.n : qa.n + adapter.num_qubits].any()]
    for r in patch_rows:
        circuit.add_detector(f"patch_x[{r}]", "X", [recs[r]])
    kernel = adapter.kernel_basis()
    logical_checks = []
    for i in range(kernel.rows):
        combo = [qa.hx.rows + int(c) for c in np.nonzero(kernel.A[i])[0]]
        logical_checks.append(combo)
        circuit.add_observable(f"joint_xx[{i}]", "space", [recs[c] for c in combo])
    dx = BinaryMatrix(
        np.hstack([
            mc.hx.take_rows(patch_rows).A,
            np.eye(mc.hx.rows, dtype=np.uint8)[patch_rows],
        ]),
    )
    ox_rows = np.zeros((kernel.rows, mc.n + mc.hx.rows), dtype=np.uint8)
    for i, combo in enumerate(logical_checks):
        for c in combo:
            ox_rows[i, : mc.n] ^= mc.hx.A[c]
            ox_rows[i, mc.n + c] ^= 1
    dm = DetectorModel(
        dx=dx, ox=BinaryMatrix(ox_rows, cols=mc.n + mc.hx.rows),
        dz=BinaryMatrix.zeros(0, 0), oz=BinaryMatrix.zeros(0, 0),
        x_fault_markers=list(range(len(circuit.markers))),
        x_detector_ids=list(range(len(patch_rows))),
        x_observable_ids=list(range(kernel.rows)),
        num_logical=kernel.rows,
    )
    rule = SurgeryOutcomeRule(mc.hx, patch_rows, logical_checks, mc.n)
    return circuit, dm, rule
