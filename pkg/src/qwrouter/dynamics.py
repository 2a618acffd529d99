"""Unitary time evolution via Hermitian eigendecomposition.

All propagators are computed as ``U = Q exp(-i L t) Q^dag`` from
``H = Q L Q^dag`` (real eigenvalues), which is exact to roundoff for the
small dense Hermitian matrices used here and lets one decomposition serve
many evolution times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .hamiltonian import HermitianMatrix

__all__ = ["PureState", "Propagator", "propagator", "evolve", "evolve_piecewise"]

_HERMITICITY_TOL = 1e-10
_UNITARITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized complex amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amplitudes must be a nonempty 1-d vector")
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > _HERMITICITY_TOL:
            raise ValueError(f"state norm^2 = {norm_sq!r} is not 1 within 1e-10")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def overlap(self, other: "PureState") -> complex:
        """Inner product ``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class Propagator:
    """Unitary evolution operator together with its effective time."""

    matrix: np.ndarray
    time: float

    def __post_init__(self) -> None:
        u = np.asarray(self.matrix, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError("matrix must be square")
        defect = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))
        if defect > _UNITARITY_TOL:
            raise ValueError(f"matrix is not unitary (defect {defect:.3e})")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)
        object.__setattr__(self, "time", float(self.time))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, psi: PureState) -> PureState:
        if psi.dim != self.dim:
            raise ValueError("state dimension does not match propagator")
        return PureState(self.matrix @ psi.amplitudes)


def _hermitian_entries(h: HermitianMatrix | np.ndarray) -> np.ndarray:
    """Validate and return the underlying matrix of a (possibly raw) Hermitian input."""
    if isinstance(h, HermitianMatrix):
        return h.entries
    arr = np.asarray(h, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("Hamiltonian must be a square matrix")
    defect = float(np.max(np.abs(arr - arr.conj().T)))
    if defect > _HERMITICITY_TOL:
        raise ValueError(f"Hamiltonian is not Hermitian (max asymmetry {defect:.3e})")
    return arr


def spectrum(h: HermitianMatrix | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors ``(w, q)`` of a Hermitian matrix, ``h = q diag(w) q^dag``."""
    w, q = np.linalg.eigh(_hermitian_entries(h))
    return w, q


def propagator(h: HermitianMatrix | np.ndarray, t: float) -> Propagator:
    """Evolution operator ``exp(-i h t)``.

    Rejects non-finite ``t`` and inputs whose conjugate asymmetry exceeds
    1e-10.
    """
    t = float(t)
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    w, q = spectrum(h)
    u = (q * np.exp(-1j * w * t)) @ q.conj().T
    return Propagator(u, t)


def evolve(h: HermitianMatrix | np.ndarray, t: float, psi0: PureState) -> PureState:
    """Evolve ``psi0`` for time ``t`` under the constant Hamiltonian ``h``."""
    entries = _hermitian_entries(h)
    if psi0.dim != entries.shape[0]:
        raise ValueError("state dimension does not match Hamiltonian")
    t = float(t)
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    w, q = np.linalg.eigh(entries)
    amps = q @ (np.exp(-1j * w * t) * (q.conj().T @ psi0.amplitudes))
    return PureState(amps)


def evolve_piecewise(
    h_sequence: Sequence[HermitianMatrix | np.ndarray] | Iterable,
    dt: float,
    psi0: PureState,
) -> PureState:
    """Piecewise-constant evolution: apply ``exp(-i H_m dt)`` in sequence order.

    The first element of the sequence acts first (earliest time), i.e. the
    result is ``U_M ... U_2 U_1 psi0``.
    """
    dt = float(dt)
    if not (dt > 0.0 and math.isfinite(dt)):
        raise ValueError("dt must be positive and finite")
    hs = list(h_sequence)
    if not hs:
        raise ValueError("h_sequence must not be empty")
    amps = psi0.amplitudes
    for h in hs:
        entries = _hermitian_entries(h)
        if entries.shape[0] != amps.shape[0]:
            raise ValueError("dimension mismatch in h_sequence")
        w, q = np.linalg.eigh(entries)
        amps = q @ (np.exp(-1j * w * dt) * (q.conj().T @ amps))
    return PureState(amps)
