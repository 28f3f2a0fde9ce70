"""Shared test helpers: random circuit generation and small datasets."""

import numpy as np
import pytest

from qteach.circuits import ArchitectureId, Family
from qteach.qsim import ANGLE_COUNTS, GateKind, GateOp
from qteach.teacher_student import LabeledGrid
from qteach.training import binarize

SINGLE_QUBIT_KINDS = [GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.ROT, GateKind.H, GateKind.X]

ALL_ARCHITECTURES = [
    ArchitectureId(Family.DISSIPATIVE_QP),
    ArchitectureId(Family.REUPLOADING, layers=2),
    ArchitectureId(Family.DEEP_TEACHER4),
    ArchitectureId(Family.EIGHT_GATE_QP),
    ArchitectureId(Family.DEEP_DISSIPATIVE_QP),
    ArchitectureId(Family.QNN_TWO_QP),
    ArchitectureId(Family.RANDOM_DEEP_QP),
]


def random_gate(rng: np.random.Generator, n_qubits: int) -> GateOp:
    pool = SINGLE_QUBIT_KINDS if n_qubits == 1 else list(GateKind)
    kind = pool[rng.integers(len(pool))]
    qubits = rng.permutation(n_qubits)
    target = int(qubits[0])
    if kind in (GateKind.CZ, GateKind.CNOT):
        return GateOp(kind, (target,), controls=(int(qubits[1]),))
    if kind is GateKind.MCX:
        n_controls = int(rng.integers(1, min(n_qubits, 4))) if n_qubits > 2 else 1
        controls = tuple(int(q) for q in qubits[1:1 + n_controls])
        return GateOp(kind, (target,), controls=controls)
    angles = tuple(rng.uniform(-np.pi, np.pi, ANGLE_COUNTS[kind]))
    return GateOp(kind, (target,), params=angles)


def random_circuit(rng: np.random.Generator, n_qubits: int, n_gates: int) -> list[GateOp]:
    return [random_gate(rng, n_qubits) for _ in range(n_gates)]


def tiny_dataset(rng: np.random.Generator, n_points: int = 5) -> LabeledGrid:
    points = rng.uniform(-np.pi, np.pi, (n_points, 2))
    y = rng.uniform(-1.0, 1.0, n_points)
    return LabeledGrid(points=points, y_continuous=y, y_binary=binarize(y))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
