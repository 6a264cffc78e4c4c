"""Regenerate the shipped molecular qubit Hamiltonians.

Needs pyscf (not a runtime dependency). Pipeline: RHF/STO-3G integrals,
frozen core, optional removal of the degenerate pi orbitals, parity mapping
with the two-qubit Z2 reduction, Pauli decomposition by trace projection.
The constant term carries the frozen-core energy; nuclear repulsion is left
out, so the files hold electronic energies.

    python tools/make_hamiltonians.py src/pulseforge/data
"""

import itertools
import sys
from pathlib import Path

import numpy as np
from pyscf import ao2mo, gto, scf

_P = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def active_integrals(atom, frozen, active):
    mol = gto.M(atom=atom, basis="sto-3g", unit="Angstrom", verbose=0)
    mf = scf.RHF(mol).run()
    C = mf.mo_coeff
    h_ao = mf.get_hcore()
    h_mo = C.T @ h_ao @ C
    eri = ao2mo.restore(1, ao2mo.kernel(mol, C), C.shape[1])  # chemist (pq|rs)
    core = 0.0
    for c in frozen:
        core += 2 * h_mo[c, c]
    for c, d in itertools.product(frozen, frozen):
        core += 2 * eri[c, c, d, d] - eri[c, d, d, c]
    h_eff = h_mo.copy()
    for c in frozen:
        h_eff += 2 * eri[:, :, c, c] - eri[:, c, c, :]
    a = np.array(active)
    return core, h_eff[np.ix_(a, a)], eri[np.ix_(a, a, a, a)], mf.mo_energy


def fock_hamiltonian(core, h, eri):
    """Dense second-quantized H on 2M spin orbitals (alpha block, then beta)."""
    m = h.shape[0]
    n = 2 * m
    # Jordan-Wigner annihilators, mode k on bit k of the basis index
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    ops = []
    for k in range(n):
        mats = [_P["Z"]] * k + [lower] + [_P["I"]] * (n - k - 1)
        full = np.array([[1.0 + 0j]])
        for mat in mats:  # mode 0 is the least significant factor
            full = np.kron(mat, full)
        ops.append(full)
    dim = 2**n
    H = core * np.eye(dim, dtype=complex)

    def spin(p):
        return p % m, p // m

    for p, q in itertools.product(range(n), repeat=2):
        (i, si), (j, sj) = spin(p), spin(q)
        if si == sj and abs(h[i, j]) > 0:
            H += h[i, j] * ops[p].conj().T @ ops[q]
    for p, q, r, s in itertools.product(range(n), repeat=4):
        (i, si), (j, sj), (k, sk), (l, sl) = spin(p), spin(q), spin(r), spin(s)
        if si == sj and sk == sl:
            v = eri[i, j, k, l]
            if abs(v) > 1e-14:
                H += 0.5 * v * ops[p].conj().T @ ops[r].conj().T @ ops[s] @ ops[q]
    return H


def parity_reduce(H, m, n_alpha, n_beta):
    """Project onto the Z2 sectors and rewrite in the reduced parity basis."""
    n = 2 * m
    keep = [j for j in range(n) if j not in (m - 1, n - 1)]
    dim_red = 2 ** len(keep)
    basis = np.zeros((2**n, dim_red), dtype=complex)
    for idx in range(2**n):
        occ = [(idx >> k) & 1 for k in range(n)]
        if sum(occ[:m]) % 2 != n_alpha % 2 or sum(occ) % 2 != (n_alpha + n_beta) % 2:
            continue
        parity = np.cumsum(occ) % 2
        red = sum(int(parity[j]) << b for b, j in enumerate(keep))
        basis[idx, red] = 1.0
    return basis.conj().T @ H @ basis, basis


def pauli_decompose(M, tol=1e-10):
    n = int(np.log2(M.shape[0]))
    terms = []
    for chars in itertools.product("IXYZ", repeat=n):
        label = "".join(chars)
        op = np.array([[1.0 + 0j]])
        for ch in label:  # label position k acts on qubit k (least significant first)
            op = np.kron(_P[ch], op)
        c = np.trace(op @ M) / M.shape[0]
        if abs(c) > tol:
            assert abs(c.imag) < 1e-10
            terms.append((c.real, label))
    return terms


def write(path, terms, header):
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for c, label in terms:
            fh.write(f"{c: .12f} {label}\n")


def main(outdir):
    out = Path(outdir)
    # H2, 0.735 A: both spatial orbitals active -> 4 spin orbitals -> 2 qubits
    core, h, eri, _ = active_integrals("H 0 0 0; H 0 0 0.735", [], [0, 1])
    H = fock_hamiltonian(core, h, eri)
    Hr, basis = parity_reduce(H, 2, 1, 1)
    terms = pauli_decompose(Hr)
    e0 = np.linalg.eigvalsh(Hr)[0]
    write(out / "h2_sto3g_2q.txt", terms, [
        "H2, STO-3G, bond length 0.735 A, parity mapping, two-qubit reduction",
        "electronic energy (nuclear repulsion excluded)",
        f"exact ground energy {e0:.10f} Ha, {len(terms)} terms",
    ])
    print("H2", len(terms), e0)

    # LiH, 1.5 A: freeze Li 1s, drop the degenerate pi pair -> 3 spatial orbitals
    core, h, eri, mo_e = active_integrals("Li 0 0 0; H 0 0 1.5", [0], [1, 2, 5])
    assert abs(mo_e[3] - mo_e[4]) < 1e-8, mo_e
    H = fock_hamiltonian(core, h, eri)
    Hr, basis = parity_reduce(H, 3, 1, 1)
    terms = pauli_decompose(Hr)
    evals = np.linalg.eigvalsh(Hr)
    write(out / "lih_4q.txt", terms, [
        "LiH, STO-3G, bond length 1.5 A, frozen Li 1s, pi orbitals removed",
        "parity mapping with two-qubit reduction; frozen-core energy in the II term",
        "electronic energy (nuclear repulsion excluded)",
        f"exact ground energy {evals[0]:.10f} Ha, {len(terms)} terms",
    ])
    print("LiH", len(terms), evals[:4], mo_e)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/pulseforge/data")
