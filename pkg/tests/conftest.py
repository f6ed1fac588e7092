import numpy as np
import pytest

from qseed.hitgraph import SubGraph
from qseed.statevector import GateOp


def random_circuit(rng, n_qubits, n_gates):
    """Random Ry/CNOT gate sequence for oracle-equivalence checks."""
    gates = []
    for _ in range(n_gates):
        if n_qubits == 1 or rng.random() < 0.5:
            gates.append(
                GateOp(
                    "RY",
                    target=int(rng.integers(n_qubits)),
                    angle=float(rng.uniform(0.0, 2.0 * np.pi)),
                )
            )
        else:
            control, target = rng.choice(n_qubits, size=2, replace=False)
            gates.append(GateOp("CNOT", target=int(target), control=int(control)))
    return gates


def make_separable_subgraphs(n_subgraphs=60, edges_per=9, seed=5):
    """Toy edge sets separable on one raw feature (outer-hit radius).

    True edges place the outer hit near the middle of the radius band, fake
    edges at either extreme, so after [0, 2pi] scaling the readout-adjacent
    qubit encodes close to |1> for true and |0> for fake edges.
    """
    rng = np.random.default_rng(seed)
    subgraphs = []
    for i in range(n_subgraphs):
        nodes = []
        edges = []
        for e in range(edges_per):
            label = int(rng.random() < 0.5)
            if label:
                signal = 0.5 + rng.uniform(-0.05, 0.05)
            else:
                signal = float(rng.choice([0.0, 1.0])) + rng.uniform(-0.02, 0.02)
            nodes.append((1.0, 0.0, 0.0))
            nodes.append((2.0 + signal, 0.0, 0.0))
            edges.append((2 * e, 2 * e + 1, label))
        subgraphs.append(SubGraph(i, (0, 0), nodes, edges))
    return subgraphs


def random_subgraph(rng):
    n_nodes = int(rng.integers(0, 12))
    nodes = [
        (float(rng.uniform(0, 1100)), float(rng.uniform(-np.pi, np.pi)), float(rng.uniform(-1100, 1100)))
        for _ in range(n_nodes)
    ]
    edges = []
    if n_nodes >= 2:
        for _ in range(int(rng.integers(0, 20))):
            src, dst = rng.choice(n_nodes, size=2, replace=False)
            edges.append((int(src), int(dst), int(rng.integers(0, 2))))
    return SubGraph(
        int(rng.integers(0, 10**6)),
        (int(rng.integers(0, 8)), int(rng.integers(0, 2))),
        nodes,
        edges,
    )
