"""Dense statevector value of the fig1 demo, written independently of the Rust code.

Basis index uses string order: qubit 0 is the most significant bit, which is
also the order of the "table" post-processing values.
"""
import json
import sys
from pathlib import Path

import numpy as np

here = Path(__file__).parent
circuit = json.loads((here / "fig1.circuit.json").read_text())
post = json.loads((here / "fig1.post.json").read_text())
n = circuit["n"]

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
P = {"I": I2, "X": X, "Y": Y, "Z": Z}


def on(op, qubits):
    """Embed an operator on adjacent-or-not qubits; op uses qubits[0] as MSB."""
    k = len(qubits)
    dim = 2**n
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        local = 0
        for q in qubits:
            local = (local << 1) | bits[q]
        for out_local in range(2**k):
            amp = op[out_local, local]
            if amp == 0:
                continue
            nb = list(bits)
            for i, q in enumerate(qubits):
                nb[q] = (out_local >> (k - 1 - i)) & 1
            row = sum(b << (n - 1 - q) for q, b in enumerate(nb))
            full[row, col] += amp
    return full


def gate(g):
    a = g.get("angle")
    kind = g["kind"]
    if kind == "ry":
        return np.array([[np.cos(a / 2), -np.sin(a / 2)], [np.sin(a / 2), np.cos(a / 2)]], dtype=complex)
    if kind == "cnot":
        m = np.eye(4, dtype=complex)
        m[2:, 2:] = X
        return m
    if kind == "rpp":
        pp = np.kron(P[g["pauli"][0]], P[g["pauli"][1]])
        return np.cos(a / 2) * np.eye(4) - 1j * np.sin(a / 2) * pp
    raise ValueError(kind)


psi = np.zeros(2**n, dtype=complex)
psi[0] = 1
for g in circuit["gates"]:
    psi = on(gate(g), g["targets"]) @ psi
probs = np.abs(psi) ** 2
value = float(probs @ np.array(post["values"]))
json.dump({"value": value}, sys.stdout)
print()
