"""Steady state of the driven dissipative system, with adaptive truncation.

The steady state solves L rho = 0 with tr(rho) = 1. The singular linear
system is made square by replacing its last row with the trace constraint
and solved by sparse LU. The Fock cutoff is chosen adaptively: start from a
Poisson-tail estimate based on the empty-cavity photon number, grow until
the top of the ladder is unpopulated, optionally verify against a solve at
twice the cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu, lsmr, norm as spnorm

from .hilbert import (
    CapacityError,
    FockBasis,
    Liouvillian,
    annihilation,
    build_liouvillian,
    sigma_minus,
)

DEFAULT_TOL = 1e-8          # truncation-tail tolerance for acceptance-grade runs
SWEEP_TOL = 1e-6            # relaxed tolerance for exploratory sweeps
DEFAULT_M_CAP = 160         # hard cutoff cap; D^2 ~ 1e5 unknowns
RESIDUAL_TOL = 1e-9         # scaled residual ||L rho|| / (||L|| ||rho||)


class SolverError(RuntimeError):
    """The steady-state solve did not reach the required residual."""

    def __init__(self, message: str, *, residual: float, condition_estimate: float | None = None):
        super().__init__(message)
        self.residual = residual
        self.condition_estimate = condition_estimate


@dataclass(frozen=True)
class SteadyState:
    """Solved density matrix with solver diagnostics."""

    rho: np.ndarray        # D x D complex, Hermitian, unit trace
    m: int                 # Fock cutoff used
    residual: float        # scaled ||L rho||
    tail: float            # population of the top two Fock levels
    herm_defect: float     # norm of the anti-Hermitian part removed


@dataclass(frozen=True)
class Observables:
    """Expectation values extracted from one steady state."""

    n: float               # <a'a>
    amp: complex           # <a>
    atom_amp: complex      # <sigma->
    p_excited: float
    purity: float
    fano: float            # (<n^2> - <n>^2) / <n>; 1 for Poisson statistics
    fock_pops: np.ndarray  # photon-number distribution, length m+1


def _constrained_system(L: Liouvillian) -> tuple[sp.csc_matrix, np.ndarray]:
    """Replace the last row of L with the trace functional; rhs selects trace 1."""
    d = L.dim
    n2 = d * d
    coo = L.matrix.tocoo()
    keep = coo.row != n2 - 1
    rows = np.concatenate([coo.row[keep], np.full(d, n2 - 1)])
    cols = np.concatenate([coo.col[keep], np.arange(d) * (d + 1)])
    data = np.concatenate([coo.data[keep], np.ones(d, dtype=complex)])
    a = sp.csc_matrix((data, (rows, cols)), shape=(n2, n2))
    b = np.zeros(n2, dtype=complex)
    b[-1] = 1.0
    return a, b


def solve_steady(L: Liouvillian) -> SteadyState:
    """Direct sparse solve of the trace-constrained steady-state system.

    Falls back to iterative refinement if the direct residual misses
    tolerance, and raises SolverError (with a condition estimate) if that
    fails too. The returned rho is symmetrized and trace-normalized, with
    the size of the Hermiticity correction recorded.
    """
    d = L.dim
    a, b = _constrained_system(L)
    try:
        x = splu(a).solve(b)
    except RuntimeError as exc:  # singular factorization
        raise SolverError(f"sparse LU failed: {exc}", residual=np.inf) from exc

    l_norm = spnorm(L.matrix, ord=np.inf)
    scale = max(l_norm * np.linalg.norm(x), np.finfo(float).tiny)
    residual = np.linalg.norm(L.matrix @ x) / scale
    if residual > RESIDUAL_TOL:
        # one round of least-squares refinement on the constrained system
        try:
            corr = lsmr(a, b - a @ x, atol=1e-14, btol=1e-14)[0]
        except Exception:
            corr = np.zeros_like(x)
        x = x + corr
        scale = max(l_norm * np.linalg.norm(x), np.finfo(float).tiny)
        residual = np.linalg.norm(L.matrix @ x) / scale
        if residual > RESIDUAL_TOL:
            cond = _condition_estimate(a)
            raise SolverError(
                f"steady-state residual {residual:.2e} exceeds {RESIDUAL_TOL:.0e} "
                f"(condition estimate {cond:.2e})",
                residual=residual,
                condition_estimate=cond,
            )

    rho = x.reshape((d, d), order="F")  # column stacking
    anti = 0.5 * (rho - rho.conj().T)
    herm_defect = float(np.linalg.norm(anti))
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if tr <= 0.0:
        raise SolverError(f"non-positive trace {tr!r} in steady-state solve", residual=residual)
    rho = rho / tr
    pops = _photon_populations(rho)
    return SteadyState(
        rho=rho,
        m=L.m,
        residual=float(residual),
        tail=float(pops[-2:].sum()) if pops.size >= 2 else float(pops.sum()),
        herm_defect=herm_defect,
    )


def _condition_estimate(a: sp.csc_matrix) -> float:
    from scipy.sparse.linalg import onenormest
    try:
        lu = splu(a)
        inv_norm = onenormest(sp.linalg.LinearOperator(a.shape, matvec=lu.solve, dtype=complex))
        return float(onenormest(a) * inv_norm)
    except Exception:
        return float("nan")


def _photon_populations(rho: np.ndarray) -> np.ndarray:
    """Photon-number distribution: trace out the atom (index 2n+s)."""
    diag = np.diag(rho).real
    return diag[0::2] + diag[1::2]


def expectations(state: SteadyState) -> Observables:
    """Field and atom expectation values of a solved steady state."""
    basis = FockBasis(state.m)
    a = annihilation(basis)
    sm = sigma_minus(basis)
    rho = state.rho
    n_op = (a.conj().T @ a).tocsr()
    n = float(np.trace(n_op @ rho).real)
    n2 = float(np.trace(n_op @ (n_op @ rho)).real)
    amp = complex(np.trace(a @ rho))
    atom_amp = complex(np.trace(sm @ rho))
    p_e = float(np.trace((sm.conj().T @ sm) @ rho).real)
    purity = float(np.sum(np.abs(rho) ** 2))
    var = n2 - n * n
    fano = var / n if n > 0.0 else 1.0
    return Observables(
        n=n, amp=amp, atom_amp=atom_amp, p_excited=p_e,
        purity=purity, fano=fano, fock_pops=_photon_populations(rho),
    )


def initial_cutoff(n_empty: float) -> int:
    """Starting cutoff: empty-cavity mean plus a generous Poisson tail margin."""
    return int(np.ceil(n_empty + 8.0 * np.sqrt(n_empty + 1.0) + 10.0))


@dataclass(frozen=True)
class TruncatedSolution:
    """auto_truncate output: converged state plus convergence evidence."""

    state: SteadyState
    observables: Observables
    doubling_rel_n: float | None       # |n(m) - n(2m)| / n(2m), when verified
    doubling_rel_amp: float | None
    truncation_ok: bool


def auto_truncate(
    delta: float,
    theta: float,
    g: float,
    eps: float,
    kappa: float,
    gamma: float,
    *,
    tol: float = DEFAULT_TOL,
    m_cap: int = DEFAULT_M_CAP,
    verify_doubling: bool = False,
    flux_hint: float | None = None,
) -> TruncatedSolution:
    """Solve with an adaptively chosen Fock cutoff.

    Accepts a cutoff once the top two Fock populations fall below tol;
    with verify_doubling the solution is re-solved at twice the cutoff and
    the relative change of n and |<a>| recorded (must stay below 10*tol).
    Raises CapacityError when the needed cutoff exceeds m_cap, tagging the
    input flux when known.
    """
    if not 0.0 < tol <= 1e-2:
        raise ValueError(f"tol must be in (0, 1e-2], got {tol!r}")
    if eps == 0.0:
        # undriven: the vacuum is exact at the smallest basis
        state = solve_steady(build_liouvillian(delta, theta, g, 0.0, kappa, gamma, FockBasis(1)))
        obs = expectations(state)
        return TruncatedSolution(state, obs, 0.0, 0.0, True)

    n_empty = eps**2 / (kappa**2 + delta**2)
    m = initial_cutoff(n_empty)
    while True:
        if m > m_cap:
            where = f" (input flux {flux_hint:g}/s)" if flux_hint is not None else ""
            raise CapacityError(
                f"needed Fock cutoff m={m} exceeds cap {m_cap}{where}",
                required=m, cap=m_cap,
            )
        state = solve_steady(build_liouvillian(delta, theta, g, eps, kappa, gamma, FockBasis(m)))
        if state.tail < tol:
            break
        m *= 2

    obs = expectations(state)
    if not verify_doubling:
        return TruncatedSolution(state, obs, None, None, True)

    state2 = solve_steady(build_liouvillian(delta, theta, g, eps, kappa, gamma, FockBasis(2 * m)))
    obs2 = expectations(state2)
    rel_n = abs(obs.n - obs2.n) / max(abs(obs2.n), np.finfo(float).tiny)
    rel_amp = abs(abs(obs.amp) - abs(obs2.amp)) / max(abs(obs2.amp), np.finfo(float).tiny)
    ok = rel_n < 10.0 * tol and rel_amp < 10.0 * tol
    return TruncatedSolution(state, obs, float(rel_n), float(rel_amp), ok)
