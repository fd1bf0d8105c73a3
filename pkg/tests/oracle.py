"""Brute-force 2^N state-vector reference used to validate the Dicke-basis
and closed-form Ising code.  Everything here is deliberately independent of
the package implementation: states are full product-space vectors, operators
act qubit by qubit, and diagonal evolutions are computed from bit patterns.

Bit convention: basis index b has bit i = 0 for atom i in |up> (sz = +1/2)
and bit i = 1 for |down>.
"""

import numpy as np

SX = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
SY = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)


def product_state(n, theta, phi=0.0):
    """|theta, phi>^{tensor N} as a 2^N vector."""
    single = np.array([np.cos(theta / 2.0),
                       np.exp(1j * phi) * np.sin(theta / 2.0)], dtype=complex)
    psi = single
    for _ in range(n - 1):
        psi = np.kron(psi, single)
    return psi


def _apply_single(psi, n, i, op):
    """Apply a 2x2 operator on qubit i (qubit 0 = slowest axis, matching kron)."""
    shaped = psi.reshape((2,) * n)
    shaped = np.moveaxis(shaped, i, 0).reshape(2, -1)
    shaped = op @ shaped
    shaped = np.moveaxis(shaped.reshape((2,) * n), 0, i)
    return shaped.reshape(-1)


def collective_apply(psi, n, op):
    """Sum_i op_i |psi> for a single-spin 2x2 operator."""
    out = np.zeros_like(psi)
    for i in range(n):
        out += _apply_single(psi, n, i, op)
    return out


def rotate(psi, n, axis, angle):
    """exp(-i angle axis.S) = product of identical single-qubit rotations."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    gen = axis[0] * SX + axis[1] * SY + axis[2] * SZ
    vals, vecs = np.linalg.eigh(gen)
    u = vecs @ np.diag(np.exp(-1j * angle * vals)) @ vecs.conj().T
    for i in range(n):
        psi = _apply_single(psi, n, i, u)
    return psi


def _z_half(n):
    """Matrix of sz eigenvalues: shape (2^N, N), entries +-1/2."""
    idx = np.arange(2**n)
    bits = (idx[:, None] >> np.arange(n)[None, :]) & 1
    return 0.5 - bits.astype(float)  # bit 0 -> +1/2


def sz_values(n):
    return _z_half(n).sum(axis=1)


def oat_phases(psi, n, q, linear_phase=0.0):
    """Multiply each basis amplitude by exp(+i (q/n) m^2 - i linear_phase m)."""
    m = sz_values(n)
    return psi * np.exp(1j * ((q / n) * m**2 - linear_phase * m))


def ising_evolve(psi, n, j_matrix, t, sign=-1.0):
    """Evolve under H = sign * sum_{i<j} J_ij sigma_z^i sigma_z^j / 4.

    sign = -1 matches the package contract (positive J twists like
    positive Q).  Diagonal in the z basis, so exact.
    """
    z = _z_half(n)
    energy = 0.5 * np.einsum("bi,ij,bj->b", z, j_matrix, z)
    return psi * np.exp(-1j * sign * energy * t)


def density_evolve(psi, n, v_matrix, t):
    """Evolve under the full density-density form sum_{i<j} V_ij n_i n_j
    with n_i = |up><up| at site i (including its linear part)."""
    z = _z_half(n)
    occ = z + 0.5  # 1 for up, 0 for down
    energy = 0.5 * np.einsum("bi,ij,bj->b", occ, v_matrix, occ)
    return psi * np.exp(-1j * energy * t)


def moments(psi, n):
    """Exact mean spin and symmetrized 3x3 covariance."""
    vecs = [collective_apply(psi, n, op) for op in (SX, SY, SZ)]
    mean = np.array([np.real(np.vdot(psi, v)) for v in vecs])
    cov = np.empty((3, 3))
    for a in range(3):
        for b in range(3):
            sym = 0.5 * (np.vdot(vecs[a], vecs[b]) + np.vdot(vecs[b], vecs[a]))
            cov[a, b] = np.real(sym) - mean[a] * mean[b]
    return mean, cov


def dephase_moments_mc(n, theta, contrast, n_draws, seed):
    """Monte Carlo average of moments after independent Gaussian z rotations.

    Each draw keeps the state a product state, so single-spin expectations
    are evaluated in closed form per draw and summed into collective moments.
    """
    rng = np.random.default_rng(seed)
    sigma = np.sqrt(-2.0 * np.log(contrast))
    a, b = np.cos(theta / 2.0), np.sin(theta / 2.0)
    mean_acc = np.zeros(3)
    sec_acc = np.zeros((3, 3))
    for _ in range(n_draws):
        phis = rng.normal(0.0, sigma, size=n)
        # single-spin Bloch vectors after z rotation by phi_i
        sx = a * b * np.cos(phis)
        sy = a * b * np.sin(phis)
        sz = np.full(n, (a**2 - b**2) / 2.0)
        s = np.stack([sx, sy, sz])          # (3, n)
        tot = s.sum(axis=1)
        mean_acc += tot
        # <Sa Sb> = sum_{i != j} s_a^i s_b^j + sum_i <s_a s_b>_single
        outer = np.outer(tot, tot) - s @ s.T
        single = np.zeros((3, 3))
        # symmetrized one-spin products: {sa, sb}/2 = delta_ab / 4
        np.fill_diagonal(single, n * 0.25)
        sec_acc += outer + single
    mean = mean_acc / n_draws
    sec = sec_acc / n_draws
    cov = sec - np.outer(mean, mean)
    return mean, cov
