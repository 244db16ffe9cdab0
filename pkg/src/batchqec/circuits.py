"""Stabilizer circuits over named qubit blocks, with records, detectors and markers.

A :class:`StabilizerCircuit` is an ordered op list over indexed qubit blocks:
resets, Clifford gates, single-qubit and Pauli-product measurements,
classically-controlled Paulis keyed to measurement records, and noise markers.
Markers carry zero strength until a noise model binds them, so circuits stay
noise-model-agnostic.  Detectors and observables are stored as record-parity
lists alongside the ops.

Text format (one op per line, ``block:index`` qubit addressing)::

    BLOCK B0_0 18
    RX A_0:0 A_0:1
    CNOT A_0:3 B0_1:3
    MPP X B0_0:0 B0_0:3 -> rec[12]
    M Z B1_0:5 -> rec[40]
    CPAULI X B0_0:7 if rec[40]^rec[41]
    MARK synd_x 3 FLIP rec[7]
    MARK data_z 12 Z A_0:4
    DETECTOR X bse_x[0] rec[1]^rec[5]
    OBSERVABLE space logical[0] rec[2]^rec[9]

The grammar round-trips exactly through :meth:`StabilizerCircuit.to_text` /
:meth:`StabilizerCircuit.from_text`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["StabilizerCircuit", "Marker", "Detector", "Observable"]


@dataclass
class Marker:
    """A potential fault location: a Pauli at a qubit, or a record flip."""

    family: str
    index: int              # position within its family
    kind: str               # "P" (Pauli) or "F" (record flip)
    pauli: str = ""         # "X"/"Z"/"Y" for kind "P"
    qubit: int = -1         # for kind "P"
    record: int = -1        # for kind "F"


@dataclass
class Detector:
    name: str
    side: str               # "X" or "Z": which detector matrix it belongs to
    records: tuple[int, ...]


@dataclass
class Observable:
    name: str
    kind: str               # "space" or "time"
    records: tuple[int, ...]


@dataclass
class StabilizerCircuit:
    """Ordered stabilizer operations over named, contiguous qubit blocks."""

    n_qubits: int = 0
    blocks: dict[str, tuple[int, int]] = field(default_factory=dict)  # name -> (start, size)
    ops: list[tuple] = field(default_factory=list)
    record_labels: list[str] = field(default_factory=list)
    markers: list[Marker] = field(default_factory=list)
    detectors: list[Detector] = field(default_factory=list)
    observables: list[Observable] = field(default_factory=list)

    # -- construction --------------------------------------------------------
    def add_block(self, name: str, size: int) -> int:
        """Register a qubit block; returns its starting global index."""
        if name in self.blocks:
            raise ValueError(f"duplicate block {name!r}")
        start = self.n_qubits
        self.blocks[name] = (start, size)
        self.n_qubits += size
        return start

    def block_qubits(self, name: str) -> range:
        start, size = self.blocks[name]
        return range(start, start + size)

    def reset(self, basis: str, qubits):
        self._check_targets(qubits)
        self.ops.append(("R", basis.upper(), tuple(qubits)))

    def gate(self, kind: str, targets):
        kind = kind.upper()
        if kind in ("H", "S"):
            self._check_targets(targets)
            self.ops.append((kind, tuple(targets)))
        elif kind in ("CX", "CNOT", "CZ"):
            pairs = tuple((int(a), int(b)) for a, b in targets)
            self._check_targets([q for p in pairs for q in p])
            self.ops.append(("CX" if kind in ("CX", "CNOT") else "CZ", pairs))
        else:
            raise ValueError(f"unknown gate {kind!r}")

    def transversal_cx(self, control_block: str, target_block: str):
        c = self.block_qubits(control_block)
        t = self.block_qubits(target_block)
        if len(c) != len(t):
            raise ValueError("transversal CNOT requires equal block sizes")
        self.gate("CX", list(zip(c, t)))

    def measure(self, basis: str, qubits, label: str = "m") -> list[int]:
        """Single-qubit measurements; returns one record index per qubit."""
        self._check_targets(qubits)
        recs = []
        for q in qubits:
            recs.append(len(self.record_labels))
            self.record_labels.append(f"{label}[{q}]")
        self.ops.append(("M", basis.upper(), tuple(qubits), tuple(recs)))
        return recs

    def measure_pauli_product(self, paulis: str, support, label: str = "s") -> int:
        """Measure a Pauli product; returns its record.

        ``paulis`` is a single letter (uniform basis) or a per-qubit string
        of X/Y/Z letters matching the support length.
        """
        self._check_targets(support)
        paulis = paulis.upper()
        if len(paulis) == 1:
            paulis = paulis * len(tuple(support))
        if len(paulis) != len(tuple(support)) or any(p not in "XYZ" for p in paulis):
            raise ValueError(f"bad Pauli string {paulis!r}")
        rec = len(self.record_labels)
        self.record_labels.append(label)
        self.ops.append(("MPP", paulis, tuple(support), rec))
        return rec

    def pauli(self, pauli: str, qubits):
        """Unconditional Pauli gates (useful paired with record-controlled ones)."""
        self._check_targets(qubits)
        self.ops.append(("P", pauli.upper(), tuple(qubits)))

    def t_marker(self, qubits):
        """A non-Clifford T layer; rejected by the Clifford tableau oracle."""
        self._check_targets(qubits)
        self.ops.append(("T", tuple(qubits)))

    def classical_pauli(self, pauli: str, qubit: int, records):
        """Apply the Pauli to the qubit iff the parity of the records is 1."""
        recs = tuple(int(r) for r in records)
        for r in recs:
            if r >= len(self.record_labels):
                raise ValueError(f"control references unknown record {r}")
        self.ops.append(("CP", pauli.upper(), int(qubit), recs))

    def mark_pauli(self, family: str, pauli: str, qubit: int) -> int:
        idx = sum(1 for m in self.markers if m.family == family)
        mid = len(self.markers)
        self.markers.append(Marker(family, idx, "P", pauli=pauli.upper(), qubit=int(qubit)))
        self.ops.append(("MARK", mid))
        return mid

    def mark_record_flip(self, family: str, record: int) -> int:
        idx = sum(1 for m in self.markers if m.family == family)
        mid = len(self.markers)
        self.markers.append(Marker(family, idx, "F", record=int(record)))
        self.ops.append(("MARK", mid))
        return mid

    def add_detector(self, name: str, side: str, records) -> int:
        self.detectors.append(Detector(name, side.upper(), tuple(records)))
        return len(self.detectors) - 1

    def add_observable(self, name: str, kind: str, records) -> int:
        self.observables.append(Observable(name, kind, tuple(records)))
        return len(self.observables) - 1

    def _check_targets(self, qubits):
        for q in qubits:
            if not 0 <= int(q) < self.n_qubits:
                raise ValueError(f"qubit index {q} out of range 0..{self.n_qubits - 1}")

    # -- bookkeeping ----------------------------------------------------------
    @property
    def num_records(self) -> int:
        return len(self.record_labels)

    def depth_summary(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for op in self.ops:
            counts[op[0]] = counts.get(op[0], 0) + 1
        return counts

    def qubit_name(self, q: int) -> str:
        for name, (start, size) in self.blocks.items():
            if start <= q < start + size:
                return f"{name}:{q - start}"
        return f"?:{q}"

    def _qubit_index(self, token: str) -> int:
        name, _, idx = token.rpartition(":")
        start, size = self.blocks[name]
        i = int(idx)
        if not 0 <= i < size:
            raise ValueError(f"{token}: index out of block range")
        return start + i

    # -- text serialization ----------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for name, (_, size) in self.blocks.items():
            lines.append(f"BLOCK {name} {size}")
        for op in self.ops:
            kind = op[0]
            if kind == "R":
                lines.append(f"R{op[1]} " + " ".join(self.qubit_name(q) for q in op[2]))
            elif kind in ("H", "S"):
                lines.append(f"{kind} " + " ".join(self.qubit_name(q) for q in op[1]))
            elif kind in ("CX", "CZ"):
                word = "CNOT" if kind == "CX" else "CZ"
                body = " ".join(f"{self.qubit_name(a)} {self.qubit_name(b)}" for a, b in op[1])
                lines.append(f"{word} {body}")
            elif kind == "M":
                frame = " frame" if len(op) > 4 and op[4] else ""
                for q, r in zip(op[2], op[3]):
                    lines.append(f"M {op[1]} {self.qubit_name(q)} -> rec[{r}]{frame}")
            elif kind == "MPP":
                frame = " frame" if len(op) > 4 and op[4] else ""
                body = " ".join(self.qubit_name(q) for q in op[2])
                lines.append(f"MPP {op[1]} {body} -> rec[{op[3]}]{frame}")
            elif kind == "P":
                lines.append(f"P {op[1]} " + " ".join(self.qubit_name(q) for q in op[2]))
            elif kind == "T":
                lines.append("T " + " ".join(self.qubit_name(q) for q in op[1]))
            elif kind == "CP":
                ctrl = "^".join(f"rec[{r}]" for r in op[3])
                lines.append(f"CPAULI {op[1]} {self.qubit_name(op[2])} if {ctrl}")
            elif kind == "MARK":
                m = self.markers[op[1]]
                if m.kind == "P":
                    lines.append(f"MARK {m.family} {m.index} {m.pauli} {self.qubit_name(m.qubit)}")
                else:
                    lines.append(f"MARK {m.family} {m.index} FLIP rec[{m.record}]")
        for d in self.detectors:
            body = "^".join(f"rec[{r}]" for r in d.records)
            lines.append(f"DETECTOR {d.side} {d.name} {body}")
        for o in self.observables:
            body = "^".join(f"rec[{r}]" for r in o.records)
            lines.append(f"OBSERVABLE {o.kind} {o.name} {body}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "StabilizerCircuit":
        self = cls()
        max_rec = -1

        def recs_of(expr: str) -> tuple[int, ...]:
            return tuple(int(tok[4:-1]) for tok in expr.split("^"))

        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            head = parts[0]
            if head == "BLOCK":
                self.add_block(parts[1], int(parts[2]))
            elif head in ("RX", "RZ"):
                self.reset(head[1], [self._qubit_index(t) for t in parts[1:]])
            elif head in ("H", "S"):
                self.gate(head, [self._qubit_index(t) for t in parts[1:]])
            elif head in ("CNOT", "CZ"):
                toks = parts[1:]
                pairs = [(self._qubit_index(toks[i]), self._qubit_index(toks[i + 1]))
                         for i in range(0, len(toks), 2)]
                self.gate(head, pairs)
            elif head == "M":
                q = self._qubit_index(parts[2])
                rec = int(parts[4][4:-1])
                while len(self.record_labels) <= rec:
                    self.record_labels.append(f"rec[{len(self.record_labels)}]")
                op = ("M", parts[1], (q,), (rec,))
                if parts[-1] == "frame":
                    op = op + (True,)
                self.ops.append(op)
                max_rec = max(max_rec, rec)
            elif head == "MPP":
                arrow = parts.index("->")
                qubits = tuple(self._qubit_index(t) for t in parts[2:arrow])
                rec = int(parts[arrow + 1][4:-1])
                while len(self.record_labels) <= rec:
                    self.record_labels.append(f"rec[{len(self.record_labels)}]")
                op = ("MPP", parts[1], qubits, rec)
                if parts[-1] == "frame":
                    op = op + (True,)
                self.ops.append(op)
                max_rec = max(max_rec, rec)
            elif head == "P":
                self.ops.append(("P", parts[1], tuple(self._qubit_index(t) for t in parts[2:])))
            elif head == "T":
                self.ops.append(("T", tuple(self._qubit_index(t) for t in parts[1:])))
            elif head == "CPAULI":
                cond = parts[parts.index("if") + 1]
                self.ops.append(("CP", parts[1], self._qubit_index(parts[2]), recs_of(cond)))
            elif head == "MARK":
                family, idx = parts[1], int(parts[2])
                mid = len(self.markers)
                if parts[3] == "FLIP":
                    self.markers.append(Marker(family, idx, "F", record=int(parts[4][4:-1])))
                else:
                    self.markers.append(
                        Marker(family, idx, "P", pauli=parts[3], qubit=self._qubit_index(parts[4]))
                    )
                self.ops.append(("MARK", mid))
            elif head == "DETECTOR":
                self.detectors.append(Detector(parts[2], parts[1], recs_of(parts[3])))
            elif head == "OBSERVABLE":
                self.observables.append(Observable(parts[2], parts[1], recs_of(parts[3])))
            else:
                raise ValueError(f"cannot parse line: {line!r}")
        return self
