"""Independent oracles: fine-step RK4 integration and brute-force collective
operators on the full tensor-product space.

These deliberately share no code with the package internals: states are
base-3 integer configurations, collective operators are sums of sparse
single-atom flips, and symmetric states are explicit permutation sums.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import scipy.sparse as sparse

LEVELS = {"g": 0, "e": 1, "s": 2}


def rk4_evolve(h, v0, t_final, steps):
    """Classic fixed-step RK4 for dv/dt = -i H v."""
    h = np.asarray(h, dtype=complex)
    v = np.asarray(v0, dtype=complex).copy()
    dt = t_final / steps
    for _ in range(steps):
        k1 = -1j * (h @ v)
        k2 = -1j * (h @ (v + 0.5 * dt * k1))
        k3 = -1j * (h @ (v + 0.5 * dt * k2))
        k4 = -1j * (h @ (v + dt * k3))
        v = v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def single_atom_flip(n_atoms, atom, alpha, beta):
    """Sparse |alpha><beta| on one atom of a 3^n_atoms register."""
    dim = 3**n_atoms
    a, b = LEVELS[alpha], LEVELS[beta]
    stride = 3**atom
    rows, cols = [], []
    for idx in range(dim):
        if (idx // stride) % 3 == b:
            rows.append(idx + (a - b) * stride)
            cols.append(idx)
    data = np.ones(len(rows))
    return sparse.csr_matrix((data, (rows, cols)), shape=(dim, dim))


def collective_flip(n_atoms, alpha, beta):
    """Sum of |alpha><beta| over every atom of the register."""
    op = sparse.csr_matrix((3**n_atoms, 3**n_atoms))
    for atom in range(n_atoms):
        op = op + single_atom_flip(n_atoms, atom, alpha, beta)
    return op


def symmetric_state(n_atoms, k, l):
    """Normalized symmetric state with k atoms in s, l in e, rest in g."""
    if k + l > n_atoms or k < 0 or l < 0:
        raise ValueError("bad occupation numbers")
    config = ["s"] * k + ["e"] * l + ["g"] * (n_atoms - k - l)
    seen = set()
    vec = np.zeros(3**n_atoms, dtype=complex)
    for perm in itertools.permutations(config):
        if perm in seen:
            continue
        seen.add(perm)
        idx = sum(LEVELS[level] * 3**pos for pos, level in enumerate(perm))
        vec[idx] = 1.0
    return vec / np.linalg.norm(vec)


def mirror_operator_element(n_atoms, which, bra_kl, ket_kl):
    """<k', l'| S_which |k, l> on the symmetric sector by direct application."""
    alpha, beta = which
    ket = symmetric_state(n_atoms, *ket_kl)
    bra = symmetric_state(n_atoms, *bra_kl)
    return complex(bra.conj() @ (collective_flip(n_atoms, alpha, beta) @ ket))


def mirror_operator_column_norm(n_atoms, which, ket_kl):
    """|| S_which |k, l> ||^2, including components outside any cutoff."""
    alpha, beta = which
    ket = symmetric_state(n_atoms, *ket_kl)
    out = collective_flip(n_atoms, alpha, beta) @ ket
    return float(np.vdot(out, out).real)


class FullModelOracle:
    """Brute-force double-mirrors model on source x mirror1 x mirror2 x flag.

    Both target mirrors are full 3^N registers; the detector pair is reduced
    to its two reachable collective states, whose matrix elements are
    themselves verified brute-force elsewhere (detector_coupling_element).
    """

    def __init__(self, N):
        self.N = N
        self.dim_mirror = 3**N
        self.ids = sparse.identity(3, format="csr")
        self.idm = sparse.identity(self.dim_mirror, format="csr")
        self.idd = sparse.identity(2, format="csr")

    def _lift(self, src=None, m1=None, m2=None, det=None):
        def pick(op, ident):
            return ident if op is None else op

        return sparse.kron(
            sparse.kron(pick(src, self.ids), pick(m1, self.idm), format="csr"),
            sparse.kron(pick(m2, self.idm), pick(det, self.idd), format="csr"),
            format="csr",
        )

    def source_op(self, alpha, beta):
        mat = sparse.csr_matrix(
            (np.ones(1), ([LEVELS[alpha]], [LEVELS[beta]])), shape=(3, 3)
        )
        return self._lift(src=mat)

    def target_op(self, which, sign):
        flip = collective_flip(self.N, *which)
        return self._lift(m1=flip) + sign * self._lift(m2=flip)

    def detector_excite(self):
        # collective flip between the two reachable detector states
        amp = math.sqrt(2 * self.N)
        mat = sparse.csr_matrix((np.array([amp]), ([1], [0])), shape=(2, 2))
        return self._lift(det=mat)

    def embed_label(self, source_level, k1, l1, k2, l2, detector_excited):
        src = np.zeros(3, dtype=complex)
        src[LEVELS[source_level]] = 1.0
        det = np.zeros(2, dtype=complex)
        det[1 if detector_excited else 0] = 1.0
        vec = np.kron(
            np.kron(src, symmetric_state(self.N, k1, l1)),
            np.kron(symmetric_state(self.N, k2, l2), det),
        )
        return vec

    def _h_nh_terms(self, gamma_g, gamma_s, gamma_star):
        """(coefficient, [factors applied right-to-left]) for every term."""
        s_ge = self.source_op("g", "e")
        s_eg = self.source_op("e", "g")
        t_eg_plus = self.target_op(("e", "g"), +1.0)
        t_ge_plus = self.target_op(("g", "e"), +1.0)
        t_ge_minus = self.target_op(("g", "e"), -1.0)
        t_eg_minus = self.target_op(("e", "g"), -1.0)
        t_se_minus = self.target_op(("s", "e"), -1.0)
        t_es_minus = self.target_op(("e", "s"), -1.0)
        d_exc = self.detector_excite()
        d_dex = d_exc.conj().T
        n_e = self._lift(src=sparse.diags([0.0, 1.0, 0.0])) \
            + self._lift(m1=collective_flip(self.N, "e", "e")) \
            + self._lift(m2=collective_flip(self.N, "e", "e")) \
            + self._lift(det=sparse.diags([0.0, 1.0]))
        return [
            (gamma_g / 2, [s_ge, t_eg_plus]),
            (gamma_g / 2, [s_eg, t_ge_plus]),
            (gamma_s / 2, [d_exc, t_se_minus]),
            (gamma_s / 2, [d_dex, t_es_minus]),
            (-0.5j * gamma_g, [s_eg, s_ge]),
            (-0.5j * gamma_g, [t_eg_minus, t_ge_minus]),
            (-0.5j * gamma_s, [t_es_minus, t_se_minus]),
            (-0.5j * gamma_star, [n_e]),
        ]

    def h_nh_projected(self, labels, gamma_g, gamma_s, gamma_star):
        """Matrix elements of the no-jump generator on embedded basis labels.

        Columns are built by applying each term's sparse factors to the
        embedded kets (no full-space matrix products)."""
        kets = [
            self.embed_label(l.source_level, l.k1, l.l1, l.k2, l.l2,
                             l.detector_excited)
            for l in labels
        ]
        terms = self._h_nh_terms(gamma_g, gamma_s, gamma_star)
        out = np.zeros((len(labels), len(labels)), dtype=complex)
        for j, ket in enumerate(kets):
            acc = np.zeros_like(ket)
            for coeff, factors in terms:
                vec = ket
                for op in reversed(factors):
                    vec = op @ vec
                acc = acc + coeff * vec
            for i, bra in enumerate(kets):
                out[i, j] = bra.conj() @ acc
        return out


def detector_coupling_element(n_atoms_total):
    """Brute-force check of the detector reduction on 3^(2N) atoms.

    Returns (excitation element, de-excitation-to-readout element): the
    collective e<-s flip with alternating mirror signs applied to the parked
    register, and the uniform g<-e flip applied to the excited state.
    """
    n = n_atoms_total
    half = n // 2
    parked_idx = sum(LEVELS["s"] * 3**pos for pos in range(n))
    parked = np.zeros(3**n, dtype=complex)
    parked[parked_idx] = 1.0

    flip_es = sparse.csr_matrix((3**n, 3**n))
    for atom in range(n):
        sign = 1.0 if atom < half else -1.0
        flip_es = flip_es + sign * single_atom_flip(n, atom, "e", "s")
    excited = flip_es @ parked
    exc_norm = np.linalg.norm(excited)
    excited = excited / exc_norm

    flip_ge = collective_flip(n, "g", "e")
    readout = flip_ge @ excited
    return float(exc_norm), float(np.linalg.norm(readout))
