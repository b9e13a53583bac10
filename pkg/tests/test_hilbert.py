import numpy as np
import pytest
import scipy.sparse as sp

from cavisnr.hilbert import (
    BasisError,
    CapacityError,
    FockBasis,
    annihilation,
    build_hamiltonian,
    build_liouvillian,
    number_op,
    sigma_minus,
)


@pytest.fixture
def basis():
    return FockBasis(6)


class TestBasis:
    def test_dimension(self, basis):
        assert basis.dim == 2 * (basis.m + 1)

    def test_rejects_small_cutoff(self):
        with pytest.raises(BasisError):
            FockBasis(0)


class TestOperators:
    def test_commutator_on_kept_states(self, basis):
        # [a, a'] = 1 holds below the truncation edge, fails by design at the top
        a = annihilation(basis).toarray()
        comm = a @ a.conj().T - a.conj().T @ a
        d = basis.dim
        inner = comm[: d - 2, : d - 2]
        assert np.allclose(inner, np.eye(d - 2))
        # top photon level picks up the truncation artifact -m-1... just check it's not 1
        assert not np.allclose(comm, np.eye(d))

    def test_number_operator_diagonal(self, basis):
        n = number_op(basis).toarray()
        expected = np.repeat(np.arange(basis.m + 1), 2).astype(float)
        assert np.allclose(np.diag(n), expected)
        assert np.allclose(n, np.diag(np.diag(n)))

    def test_sigma_algebra(self, basis):
        sm = sigma_minus(basis).toarray()
        proj_e = sm.conj().T @ sm
        assert np.allclose(sm @ sm, 0.0)
        assert np.allclose(proj_e @ proj_e, proj_e)  # projector onto excited
        assert np.trace(proj_e).real == pytest.approx(basis.m + 1)

    def test_field_and_atom_commute(self, basis):
        a = annihilation(basis).toarray()
        sm = sigma_minus(basis).toarray()
        assert np.allclose(a @ sm, sm @ a)

    def test_basis_index_convention(self, basis):
        # |n, s> at flat index 2n+s: sigma- maps |0,e> (index 1) to |0,g> (index 0)
        sm = sigma_minus(basis).toarray()
        assert sm[0, 1] == pytest.approx(1.0)
        # a maps |1,g> (index 2) to |0,g> (index 0)
        a = annihilation(basis).toarray()
        assert a[0, 2] == pytest.approx(1.0)


class TestHamiltonian:
    def test_hermitian(self, basis):
        h = build_hamiltonian(1.3, -0.7, 2.1, 0.4, basis).toarray()
        assert np.allclose(h, h.conj().T)

    def test_undriven_uncoupled_is_diagonal(self, basis):
        h = build_hamiltonian(2.0, 3.0, 0.0, 0.0, basis).toarray()
        off = h - np.diag(np.diag(h))
        assert np.allclose(off, 0.0)
        # |1, g> has energy delta; |0, e> has energy theta
        assert h[2, 2] == pytest.approx(2.0)
        assert h[1, 1] == pytest.approx(3.0)

    def test_coupling_conserves_excitation(self, basis):
        # g-term connects |n+1, g> <-> |n, e| only
        h = build_hamiltonian(0.0, 0.0, 1.0, 0.0, basis).toarray()
        assert h[1, 2] == pytest.approx(1.0)   # <0,e|H|1,g> = g*sqrt(1)
        assert h[3, 4] == pytest.approx(np.sqrt(2.0))
        assert h[0, 3] == pytest.approx(0.0)

    def test_rejects_nonfinite(self, basis):
        with pytest.raises(ValueError):
            build_hamiltonian(np.nan, 0.0, 0.0, 0.0, basis)


class TestLiouvillian:
    def test_trace_preservation(self, basis):
        # tr(d rho/dt) = 0 for every rho: vec(I)^T L = 0 in column stacking
        L = build_liouvillian(1.0, -0.5, 2.0, 0.3, 0.8, 0.2, basis)
        d = basis.dim
        vec_ident = np.eye(d, dtype=complex).reshape(-1, order="F")
        assert np.abs(vec_ident @ L.matrix).max() < 1e-12

    def test_hermiticity_preservation(self, basis):
        # L applied to a random Hermitian rho keeps d(rho)/dt Hermitian
        rng = np.random.default_rng(7)
        x = rng.normal(size=(basis.dim, basis.dim)) + 1j * rng.normal(size=(basis.dim, basis.dim))
        rho = x + x.conj().T
        L = build_liouvillian(1.0, -0.5, 2.0, 0.3, 0.8, 0.2, basis)
        drho = (L.matrix @ rho.reshape(-1, order="F")).reshape(basis.dim, basis.dim, order="F")
        assert np.allclose(drho, drho.conj().T)

    def test_superoperator_matches_dense_lindblad(self):
        # vectorized generator == explicit -i[H,rho] + dissipators on a random rho
        basis = FockBasis(3)
        delta, theta, g, eps, kappa, gamma = 0.9, -0.4, 1.7, 0.6, 1.1, 0.5
        L = build_liouvillian(delta, theta, g, eps, kappa, gamma, basis)
        h = build_hamiltonian(delta, theta, g, eps, basis).toarray()
        a = annihilation(basis).toarray()
        sm = sigma_minus(basis).toarray()
        rng = np.random.default_rng(11)
        x = rng.normal(size=(basis.dim, basis.dim)) + 1j * rng.normal(size=(basis.dim, basis.dim))
        rho = x @ x.conj().T
        rho /= np.trace(rho)

        def diss(c, rate):
            return rate * (2 * c @ rho @ c.conj().T
                           - c.conj().T @ c @ rho - rho @ c.conj().T @ c)

        expected = -1j * (h @ rho - rho @ h) + diss(a, kappa) + diss(sm, gamma / 2)
        got = (L.matrix @ rho.reshape(-1, order="F")).reshape(basis.dim, basis.dim, order="F")
        assert np.allclose(got, expected)

    def test_capacity_error_carries_suggestion(self):
        with pytest.raises(CapacityError) as err:
            build_liouvillian(0, 0, 0, 0.1, 1.0, 1.0, FockBasis(200), mem_cap=120_000)
        assert err.value.required == (2 * 201) ** 2
        assert err.value.cap == 120_000
        assert err.value.suggestion is not None
        # the suggested cutoff actually fits
        d_fit = 2 * (err.value.suggestion + 1)
        assert d_fit * d_fit <= 120_000

    def test_sparse_structure(self, basis):
        L = build_liouvillian(1.0, 0.5, 2.0, 0.3, 0.8, 0.2, basis)
        assert sp.issparse(L.matrix)
        assert L.matrix.shape == (basis.dim**2, basis.dim**2)
        density = L.matrix.nnz / basis.dim**4
        assert density < 0.1
