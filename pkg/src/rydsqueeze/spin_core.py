"""Exact collective-spin states and one-axis-twisting dynamics.

All states live in the symmetric (Dicke) manifold |S = N/2, m> of N
spin-1/2 atoms, stored as N+1 complex amplitudes ordered from m = +N/2
(all atoms up, index 0) down to m = -N/2.  Rotations, twisting evolution
and moment evaluation are exact; nothing in this module samples.

Conventions
-----------
* A coherent spin state |theta, phi> is the product state
  cos(theta/2)|up> + e^{i phi} sin(theta/2)|down> on every atom, so its
  Bloch vector is (sin t cos p, sin t sin p, cos t) * N/2.
* Twisting by strength Q multiplies amplitude c_m by
  exp(+i (Q/N) m^2 - i phi_lin m), i.e. the evolution generated by the
  Hamiltonian U0*Sz - (chi/N)*Sz^2 with Q = integral of chi dt and
  phi_lin = integral of U0 dt.
* Quadratures follow S_alpha = Sz cos(alpha) + Sy sin(alpha).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

NORM_TOL = 1e-12


class MeanSpinAlignmentError(ValueError):
    """Raised when an operation requires the mean spin along +x and it is not."""


class DegenerateStateError(ValueError):
    """Raised when the mean spin length vanishes and a quadrature frame is undefined."""


@dataclass
class CollectiveSpinState:
    """Pure symmetric state of ``n_atoms`` spin-1/2 particles.

    amplitudes[k] is the coefficient of |S, m> with m = N/2 - k.
    """

    n_atoms: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("ensemble needs at least one atom")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.n_atoms + 1,):
            raise ValueError(
                f"amplitude vector must have length N+1 = {self.n_atoms + 1}, "
                f"got {self.amplitudes.shape}"
            )
        norm = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state not normalized: sum |c|^2 = {norm}")
        # keep norm pinned to machine precision after every construction
        self.amplitudes = self.amplitudes / np.sqrt(norm)

    @property
    def spin(self) -> float:
        return self.n_atoms / 2.0

    @property
    def m_values(self) -> np.ndarray:
        """Sz eigenvalues, ordered to match ``amplitudes``."""
        return self.spin - np.arange(self.n_atoms + 1)

    def norm_error(self) -> float:
        return abs(float(np.sum(np.abs(self.amplitudes) ** 2)) - 1.0)


@dataclass
class MomentSet:
    """First and (symmetrized) second moments of the collective spin."""

    mean_spin: np.ndarray      # <Sx>, <Sy>, <Sz>
    covariance: np.ndarray     # Cov(Sa, Sb), symmetric 3x3

    def __post_init__(self):
        self.mean_spin = np.asarray(self.mean_spin, dtype=float)
        self.covariance = np.asarray(self.covariance, dtype=float)

    @property
    def spin_length(self) -> float:
        return float(np.linalg.norm(self.mean_spin))

    def var(self, axis: int) -> float:
        return float(self.covariance[axis, axis])


@dataclass
class SqueezingResult:
    """Wineland-parameter scan xi^2(alpha) with its closed-form optimum."""

    alphas: np.ndarray
    xi2_of_alpha: np.ndarray
    xi2_min: float
    xi2_max: float
    alpha_opt: float
    contrast: float
    min_variance: float = field(default=float("nan"))


def _ladder_plus(c: np.ndarray, m: np.ndarray, spin: float) -> np.ndarray:
    """Return amplitudes of S+ |c> in the same index ordering."""
    out = np.zeros_like(c)
    # S+|S,m> = sqrt((S-m)(S+m+1)) |S,m+1>; index k -> k-1
    coeff = np.sqrt(np.maximum((spin - m) * (spin + m + 1.0), 0.0))
    out[:-1] = coeff[1:] * c[1:]
    return out


def _ladder_minus(c: np.ndarray, m: np.ndarray, spin: float) -> np.ndarray:
    """Return amplitudes of S- |c>."""
    out = np.zeros_like(c)
    coeff = np.sqrt(np.maximum((spin + m) * (spin - m + 1.0), 0.0))
    out[1:] = coeff[:-1] * c[:-1]
    return out


def css_prepare(n_atoms: int, theta: float, phi: float = 0.0) -> CollectiveSpinState:
    """Coherent spin state |theta, phi> of ``n_atoms`` spins.

    Binomial Dicke amplitudes, evaluated in log space so that large N
    does not underflow.  theta must lie in [0, pi].
    """
    if n_atoms < 1:
        raise ValueError("ensemble needs at least one atom")
    if not 0.0 <= theta <= np.pi:
        raise ValueError(f"theta must be in [0, pi], got {theta}")
    n = n_atoms
    k = np.arange(n + 1)  # number of down spins
    # c_k = sqrt(C(n,k)) cos^{n-k} sin^{k} e^{i k phi}
    with np.errstate(divide="ignore"):
        log_cos = np.log(np.cos(theta / 2.0)) if theta < np.pi else -np.inf
        log_sin = np.log(np.sin(theta / 2.0)) if theta > 0.0 else -np.inf
    log_comb = 0.5 * (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))
    # 0 * (-inf) at the poles theta = 0, pi means "factor absent", i.e. 0
    cos_term = np.where(k == n, 0.0, (n - k) * log_cos)
    sin_term = np.where(k == 0, 0.0, k * log_sin)
    log_mag = log_comb + cos_term + sin_term
    amps = np.exp(log_mag) * np.exp(1j * k * phi)
    amps /= np.linalg.norm(amps)
    return CollectiveSpinState(n, amps)


def _spin_matrices(n_atoms: int):
    """Dense (N+1)x(N+1) Sx, Sy, Sz in the module's index ordering."""
    spin = n_atoms / 2.0
    m = spin - np.arange(n_atoms + 1)
    ap = np.sqrt((spin - m[1:]) * (spin + m[1:] + 1.0))  # <m+1|S+|m>, m from row 1
    sz = np.diag(m)
    sp = np.zeros((n_atoms + 1, n_atoms + 1))
    sp[np.arange(n_atoms), np.arange(1, n_atoms + 1)] = ap
    sx = (sp + sp.T) / 2.0
    sy = (sp - sp.T) / 2.0j
    return sx, sy, sz


def rotate(state: CollectiveSpinState, axis, angle: float) -> CollectiveSpinState:
    """Collective SU(2) rotation exp(-i * angle * axis . S).

    The axis must be a unit 3-vector (within 1e-9).  Implemented by exact
    eigendecomposition of the (N+1)-dimensional generator, so the result
    is accurate to machine precision for any angle.
    """
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm < 1e-12:
        raise ValueError("rotation axis must be a nonzero vector")
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"rotation axis must be normalized (|axis| = {norm})")
    c = state.amplitudes
    m = state.m_values
    if abs(axis[0]) < 1e-15 and abs(axis[1]) < 1e-15:
        # z rotation is diagonal
        sign = np.sign(axis[2])
        out = c * np.exp(-1j * angle * sign * m)
        return CollectiveSpinState(state.n_atoms, out)
    sx, sy, sz = _spin_matrices(state.n_atoms)
    gen = axis[0] * sx + axis[1] * sy + axis[2] * sz
    vals, vecs = np.linalg.eigh(gen)
    out = vecs @ (np.exp(-1j * angle * vals) * (vecs.conj().T @ c))
    return CollectiveSpinState(state.n_atoms, out)


def oat_evolve(state: CollectiveSpinState, twist_q: float,
               linear_phase: float = 0.0) -> CollectiveSpinState:
    """One-axis twisting: c_m -> exp(+i (Q/N) m^2 - i phi m) c_m.

    This is the fixed sign contract of the package; the calibration
    routines in `sequence` rely on it.
    """
    m = state.m_values
    phase = (twist_q / state.n_atoms) * m**2 - linear_phase * m
    out = state.amplitudes * np.exp(1j * phase)
    return CollectiveSpinState(state.n_atoms, out)


def moments(state: CollectiveSpinState) -> MomentSet:
    """Exact first moments and 3x3 covariance via ladder-operator action."""
    c = state.amplitudes
    m = state.m_values
    spin = state.spin
    cp = _ladder_plus(c, m, spin)     # S+ c
    cm = _ladder_minus(c, m, spin)    # S- c
    cz = m * c                        # Sz c

    e_p = np.vdot(c, cp)              # <S+>
    e_z = float(np.real(np.vdot(c, cz)))
    e_zz = float(np.real(np.vdot(cz, cz)))
    e_pp = np.vdot(c, _ladder_plus(cp, m, spin))   # <S+ S+>
    e_pm = float(np.real(np.vdot(cm, cm)))         # <S+ S-> = |S- c|^2
    e_mp = float(np.real(np.vdot(cp, cp)))         # <S- S+>
    e_zp = np.vdot(c, m * cp)                      # <Sz S+>
    e_pz = np.vdot(c, _ladder_plus(cz, m, spin))   # <S+ Sz>

    mean = np.array([np.real(e_p), np.imag(e_p), e_z])

    exx = (2.0 * np.real(e_pp) + e_pm + e_mp) / 4.0
    eyy = (-2.0 * np.real(e_pp) + e_pm + e_mp) / 4.0
    exy = np.imag(e_pp) / 2.0
    w = e_zp + e_pz                                # <Sz S+ + S+ Sz>
    exz = np.real(w) / 2.0
    eyz = np.imag(w) / 2.0

    cov = np.empty((3, 3))
    cov[0, 0] = exx - mean[0] ** 2
    cov[1, 1] = eyy - mean[1] ** 2
    cov[2, 2] = e_zz - mean[2] ** 2
    cov[0, 1] = cov[1, 0] = exy - mean[0] * mean[1]
    cov[0, 2] = cov[2, 0] = exz - mean[0] * mean[2]
    cov[1, 2] = cov[2, 1] = eyz - mean[1] * mean[2]
    return MomentSet(mean, cov)


def quadrature_variance(moment_set: MomentSet, alpha: float) -> float:
    """Var(S_alpha) for S_alpha = Sz cos(alpha) + Sy sin(alpha).

    Requires the mean spin to point along +x within 1e-6 rad; a violation
    signals a sequencing bug upstream (the caller is supposed to rotate
    the state into the standard readout frame first).
    """
    _require_x_aligned(moment_set)
    ca, sa = np.cos(alpha), np.sin(alpha)
    cov = moment_set.covariance
    return float(ca**2 * cov[2, 2] + sa**2 * cov[1, 1] + 2.0 * sa * ca * cov[1, 2])


def _require_x_aligned(moment_set: MomentSet, tol: float = 1e-6):
    length = moment_set.spin_length
    if length <= 0.0:
        raise DegenerateStateError("mean spin has zero length")
    transverse = np.hypot(moment_set.mean_spin[1], moment_set.mean_spin[2])
    angle = np.arctan2(transverse, moment_set.mean_spin[0])
    if angle > tol:
        raise MeanSpinAlignmentError(
            f"mean spin is {angle:.2e} rad away from +x (tolerance {tol:.0e})"
        )


def squeezing_scan(state_or_moments, grid_points: int = 64,
                   n_atoms: int | None = None) -> SqueezingResult:
    """Wineland parameter xi^2(alpha) = N Var(S_alpha) / |<S>|^2 over [0, pi).

    The curve is sampled on a uniform alpha grid; the reported optimum
    comes from the closed-form eigendecomposition of the 2x2 (z, y)
    covariance block, not from the grid argmin.  xi2_max is the value a
    quarter turn away from the optimum.
    """
    if grid_points < 8:
        raise ValueError("grid must have at least 8 points")
    if isinstance(state_or_moments, CollectiveSpinState):
        mom = moments(state_or_moments)
        n = state_or_moments.n_atoms
    else:
        mom = state_or_moments
        if n_atoms is None:
            raise ValueError("n_atoms is required when passing a MomentSet")
        n = n_atoms
    _require_x_aligned(mom)
    length2 = mom.spin_length ** 2
    if length2 <= 0.0:
        raise DegenerateStateError("mean spin has zero length")

    cov = mom.covariance
    # quadratic form in u(alpha) = (cos a, sin a) over the (z, y) block
    block = np.array([[cov[2, 2], cov[1, 2]],
                      [cov[1, 2], cov[1, 1]]])
    alphas = np.linspace(0.0, np.pi, grid_points, endpoint=False)
    ca, sa = np.cos(alphas), np.sin(alphas)
    var_curve = (block[0, 0] * ca**2 + block[1, 1] * sa**2
                 + 2.0 * block[0, 1] * sa * ca)
    xi2 = n * var_curve / length2

    vals, vecs = np.linalg.eigh(block)
    v_min = vecs[:, 0]
    alpha_opt = float(np.arctan2(v_min[1], v_min[0])) % np.pi
    xi2_min = float(n * vals[0] / length2)
    xi2_max = float(n * vals[1] / length2)
    contrast = float(2.0 * mom.spin_length / n)
    return SqueezingResult(
        alphas=alphas,
        xi2_of_alpha=xi2,
        xi2_min=xi2_min,
        xi2_max=xi2_max,
        alpha_opt=alpha_opt,
        contrast=contrast,
        min_variance=float(vals[0]),
    )


def apply_contrast_dephasing(state_or_moments, target_contrast: float,
                             n_atoms: int | None = None) -> MomentSet:
    """Moment-level Gaussian single-spin z-dephasing to contrast C0.

    Each atom picks up an independent z rotation with Gaussian-distributed
    angle of width sigma, chosen so exp(-sigma^2/2) = C0.  Averaging the
    channel analytically gives, with D = C0:

        <S+->        D <S+->            (means shrink)
        <Sa Sz>_sym  D <Sa Sz>_sym      (a = x, y)
        <S+ S+>      D^2 <S+ S+>
        <S+ S- + S- S+>  D^2 (<..> - N) + N
        Sz moments unchanged.

    Works on a state (moments are taken first) or directly on a MomentSet.
    """
    if not 0.0 < target_contrast <= 1.0:
        raise ValueError("target contrast must be in (0, 1]")
    if isinstance(state_or_moments, CollectiveSpinState):
        mom = moments(state_or_moments)
        n = state_or_moments.n_atoms
    else:
        mom = state_or_moments
        if n_atoms is None:
            raise ValueError("n_atoms is required when passing a MomentSet")
        n = n_atoms
    d = float(target_contrast)

    mean = mom.mean_spin
    cov = mom.covariance
    # reconstruct raw symmetrized second moments
    sxx = cov[0, 0] + mean[0] ** 2
    syy = cov[1, 1] + mean[1] ** 2
    szz = cov[2, 2] + mean[2] ** 2
    sxy = cov[0, 1] + mean[0] * mean[1]
    sxz = cov[0, 2] + mean[0] * mean[2]
    syz = cov[1, 2] + mean[1] * mean[2]

    new_mean = np.array([d * mean[0], d * mean[1], mean[2]])
    # transverse sum picks up the single-atom (diagonal) floor N/2 -> /4 per axis
    trans_sum = d**2 * (sxx + syy - n / 2.0) + n / 2.0
    trans_diff = d**2 * (sxx - syy)
    new_sxx = (trans_sum + trans_diff) / 2.0
    new_syy = (trans_sum - trans_diff) / 2.0
    new_sxy = d**2 * sxy
    new_sxz = d * sxz
    new_syz = d * syz

    new_cov = np.empty((3, 3))
    new_cov[0, 0] = new_sxx - new_mean[0] ** 2
    new_cov[1, 1] = new_syy - new_mean[1] ** 2
    new_cov[2, 2] = szz - new_mean[2] ** 2
    new_cov[0, 1] = new_cov[1, 0] = new_sxy - new_mean[0] * new_mean[1]
    new_cov[0, 2] = new_cov[2, 0] = new_sxz - new_mean[0] * new_mean[2]
    new_cov[1, 2] = new_cov[2, 1] = new_syz - new_mean[1] * new_mean[2]
    return MomentSet(new_mean, new_cov)


def optimal_twisting(n_atoms: int, q_hint: float | None = None,
                     contrast: float = 1.0) -> tuple[float, float]:
    """Best pure-OAT working point for N atoms: returns (Q_opt, xi2_min).

    Golden-section search over Q on a bracket around the N^{-2/3}
    asymptotic optimum.  With contrast < 1 the scan includes the
    dephasing channel before evaluating xi^2.
    """
    def xi2_at(q: float) -> float:
        st = oat_evolve(css_prepare(n_atoms, np.pi / 2.0, 0.0), q)
        if contrast < 1.0:
            mom = apply_contrast_dephasing(st, contrast, n_atoms=n_atoms)
            return squeezing_scan(mom, n_atoms=n_atoms).xi2_min
        return squeezing_scan(st).xi2_min

    center = q_hint if q_hint is not None else 1.35 * n_atoms ** (1.0 / 3.0)
    lo, hi = 0.2 * center, 3.0 * center
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c_pt = b - invphi * (b - a)
    d_pt = a + invphi * (b - a)
    fc, fd = xi2_at(c_pt), xi2_at(d_pt)
    for _ in range(80):
        if fc < fd:
            b, d_pt, fd = d_pt, c_pt, fc
            c_pt = b - invphi * (b - a)
            fc = xi2_at(c_pt)
        else:
            a, c_pt, fc = c_pt, d_pt, fd
            d_pt = a + invphi * (b - a)
            fd = xi2_at(d_pt)
        if abs(b - a) < 1e-10 * max(1.0, abs(center)):
            break
    q_opt = (a + b) / 2.0
    return float(q_opt), float(xi2_at(q_opt))
