"""Operators of the driven Jaynes-Cummings model on a truncated Fock space.

Basis ordering: |n, s> with the photon index n outer and the atom index s
inner (s = 0 ground, 1 excited), i.e. flat index 2*n + s. System dimension
D = 2*(m+1) for photon cutoff m.

Superoperators act on the column-stacked density matrix: vec(A rho B) =
(B^T kron A) vec(rho).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

# D^2 unknowns beyond this need more memory than a direct sparse LU can
# comfortably use here; callers see a CapacityError instead of an OOM kill.
DEFAULT_MEM_CAP = 120_000


class BasisError(ValueError):
    """Invalid truncation for the requested operation."""


class CapacityError(RuntimeError):
    """The truncated problem exceeds the configured size cap."""

    def __init__(self, message: str, *, required: int, cap: int, suggestion: int | None = None):
        super().__init__(message)
        self.required = required
        self.cap = cap
        self.suggestion = suggestion


@dataclass(frozen=True)
class FockBasis:
    """Photon cutoff m; kept states are |0..m> x {g, e}."""

    m: int

    def __post_init__(self) -> None:
        if self.m < 1:
            raise BasisError(f"photon cutoff must be >= 1, got {self.m}")

    @property
    def dim(self) -> int:
        return 2 * (self.m + 1)


def annihilation(basis: FockBasis) -> sp.csr_matrix:
    """Photon annihilation operator a (identity on the atom)."""
    m = basis.m
    a_fock = sp.diags(np.sqrt(np.arange(1, m + 1, dtype=float)), offsets=1)
    return sp.kron(a_fock, sp.identity(2), format="csr").astype(complex)

def sigma_minus(basis: FockBasis) -> sp.csr_matrix:
    """Atomic lowering operator |g><e| (identity on the field)."""
    lower = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))
    return sp.kron(sp.identity(basis.m + 1), lower, format="csr")


def number_op(basis: FockBasis) -> sp.csr_matrix:
    a = annihilation(basis)
    return (a.conj().T @ a).tocsr()


def build_hamiltonian(delta: float, theta: float, g: float, eps: float, basis: FockBasis) -> sp.csr_matrix:
    """Rotating-frame Hamiltonian (units of hbar, i.e. rad/s):

        H = delta a'a + theta s+s- + g (a s+ + a' s-) + eps (a + a')

    where delta = omega_c - omega_0 and theta = omega_a - omega_0 are the
    cavity-probe and atom-probe detunings.
    """
    for name, value in (("delta", delta), ("theta", theta), ("g", g), ("eps", eps)):
        if not np.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")
    a = annihilation(basis)
    ad = a.conj().T
    sm = sigma_minus(basis)
    sp_ = sm.conj().T
    h = delta * (ad @ a) + theta * (sp_ @ sm) + g * (a @ sp_ + ad @ sm) + eps * (a + ad)
    return h.tocsr()


@dataclass(frozen=True)
class Liouvillian:
    """Sparse generator of the master equation, with its defining parameters."""

    matrix: sp.csr_matrix  # D^2 x D^2, column-stacking convention
    delta: float
    theta: float
    g: float
    eps: float
    kappa: float
    gamma: float
    m: int

    @property
    def dim(self) -> int:
        return 2 * (self.m + 1)


def _dissipator(c: sp.spmatrix, rate: float, ident: sp.spmatrix) -> sp.spmatrix:
    """rate * (2 c rho c' - c'c rho - rho c'c), vectorized."""
    cd = c.conj().T
    n_op = (cd @ c).tocsr()
    return rate * (2.0 * sp.kron(c.conj(), c) - sp.kron(ident, n_op) - sp.kron(n_op.T, ident))


def build_liouvillian(
    delta: float,
    theta: float,
    g: float,
    eps: float,
    kappa: float,
    gamma: float,
    basis: FockBasis,
    mem_cap: int = DEFAULT_MEM_CAP,
) -> Liouvillian:
    """Lindblad generator for the driven Jaynes-Cummings system.

    d(rho)/dt = -i[H, rho] + kappa D[a] + (gamma/2) D[sigma-]
    with D[c] rho = 2 c rho c' - c'c rho - rho c'c. kappa here is the *total*
    field decay (in + out + loss); which mirror the light exits through only
    matters for detection, not for the dynamics.
    """
    if kappa < 0.0 or gamma < 0.0:
        raise ValueError(f"decay rates must be nonnegative, got kappa={kappa!r}, gamma={gamma!r}")
    d = basis.dim
    if d * d > mem_cap:
        # largest cutoff that still fits: 2(m+1) <= sqrt(cap)
        m_fit = int(np.sqrt(mem_cap)) // 2 - 1
        raise CapacityError(
            f"Liouvillian needs {d * d} unknowns, above the cap {mem_cap}; "
            f"largest cutoff that fits is m={m_fit}",
            required=d * d,
            cap=mem_cap,
            suggestion=m_fit,
        )
    h = build_hamiltonian(delta, theta, g, eps, basis)
    ident = sp.identity(d, format="csr", dtype=complex)
    gen = -1j * (sp.kron(ident, h) - sp.kron(h.T, ident))
    gen = gen + _dissipator(annihilation(basis), kappa, ident)
    gen = gen + _dissipator(sigma_minus(basis), gamma / 2.0, ident)
    return Liouvillian(
        matrix=gen.tocsr(),
        delta=delta, theta=theta, g=g, eps=eps, kappa=kappa, gamma=gamma, m=basis.m,
    )
