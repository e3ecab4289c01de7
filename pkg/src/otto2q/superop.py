"""Liouville-space plumbing.

Density matrices are vectorised by column stacking, ``vec(A X B) =
kron(B.T, A) vec(X)``. Every superoperator in the package follows this
convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.shape[0])))
    return v.reshape((dim, dim) + v.shape[1:], order="F")


def left(a: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> A X``."""
    return np.kron(np.eye(a.shape[0]), a)


def right(b: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> X B``."""
    return np.kron(b.T, np.eye(b.shape[0]))


def commutator_superop(h: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> -i [H, X]``."""
    return -1j * (left(h) - right(h))


def dissipator(c: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> C X C^dag - 1/2 {C^dag C, X}``."""
    c = np.asarray(c, dtype=complex)
    cdc = c.conj().T @ c
    return np.kron(c.conj(), c) - 0.5 * left(cdc) - 0.5 * right(cdc)


@dataclass(frozen=True)
class AffineGenerator:
    """Linear generator ``d vec(rho)/dt = matrix @ vec(rho) + affine``.

    ``parts`` keeps named pieces (``"hamiltonian"``, ``"hot"``, ``"cold"``)
    whose sum is ``matrix``; the heat-current code reads the bath parts.
    """

    matrix: np.ndarray
    affine: np.ndarray = field(default=None)
    parts: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.affine is None:
            object.__setattr__(self, "affine", np.zeros(self.matrix.shape[0], dtype=complex))

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho) + self.affine, self.dim)

    def part(self, name: str) -> np.ndarray:
        return self.parts[name]

    def apply_part(self, name: str, rho: np.ndarray) -> np.ndarray:
        return unvec(self.parts[name] @ vec(rho), self.dim)

    @classmethod
    def from_parts(cls, **parts: np.ndarray) -> "AffineGenerator":
        kept = {k: np.asarray(v, dtype=complex) for k, v in parts.items() if v is not None}
        matrix = sum(kept.values())
        return cls(np.asarray(matrix, dtype=complex), parts=kept)


def trace_row(dim: int) -> np.ndarray:
    """Row vector ``r`` with ``r @ vec(X) == trace(X)``."""
    return vec(np.eye(dim)).conj()
