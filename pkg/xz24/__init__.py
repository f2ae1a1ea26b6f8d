"""XZ24 eigensolver: simulate the cosine signal of a Pauli Hamiltonian and read its spectrum."""

__version__ = "0.1.0"
