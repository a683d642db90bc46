"""Quantum Krylov subspaces from a unitary decomposition (QKUD) and real-time evolution (QRTE)."""
