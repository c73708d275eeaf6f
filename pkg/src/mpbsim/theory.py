"""Closed-form performance prediction for the matrix pair beamformer.

Predicts the normalized output SINR curve G(SNR) — operating branch,
failure branch, and the threshold region between them — from the mismatch
spectrum of the covariance pair, without running any Monte Carlo. Also
bounds the largest generalized eigenvalue (prediction +- radius), analyzes
the noise-free pair to decide whether the dominant mismatch eigenvalue
grows without bound in INR, and checks the exact projected-covariance
inverse identities used throughout the derivations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from . import mpb
from . import sigmodel as sm

INF = float("inf")


# -----------------------
# gamma0 and the mismatch spectrum
# -----------------------

def gamma0(snr: float, l_antennas: int, n_gain: int, beta: float) -> float:
    """Closed-form signal-branch eigenvalue gamma_0 = (N-b)*L*snr / (L*b*snr + N)."""
    if snr < 0:
        raise ValueError("snr must be >= 0")
    if not 0 <= beta < n_gain:
        raise ValueError(f"beta must lie in [0, N), got {beta}")
    return (n_gain - beta) * l_antennas * snr / (l_antennas * beta * snr + n_gain)


def gamma_spectrum(q_s: np.ndarray, q_i: np.ndarray, d: int) -> np.ndarray:
    """Mismatch eigenvalues gamma_1 >= ... >= gamma_D of (Q_S - Q_I, Q_I).

    Keeps the nonzero generalized eigenvalues (cutoff 1e-8 * max(1, max|.|))
    and zero-pads to length d. All returned values satisfy gamma + 1 > 0.
    """
    q_s = np.asarray(q_s, dtype=np.complex128)
    q_i = np.asarray(q_i, dtype=np.complex128)
    diff = q_s - q_i
    res = la.gen_eig_hpd(0.5 * (diff + diff.conj().T), q_i)
    lam = res.eigenvalues
    cut = 1e-8 * max(1.0, float(np.abs(lam).max()) if lam.size else 0.0)
    keep = lam[np.abs(lam) > cut]
    out = np.zeros(d)
    if keep.size:
        out[:min(d, keep.size)] = np.sort(keep)[::-1][:d]
    return np.sort(out)[::-1]


def exact_gamma0(model: mpb.AnalyticModel) -> float:
    """gamma_0 evaluated from matrices: (sigma_S0^2 - sigma_I0^2) a0^H R_I^-1 a0."""
    q = np.vdot(model.a0, la.solve_hpd(model.r_i, model.a0)).real
    return float((model.sigma_s0_sq - model.sigma_i0_sq) * q)


@dataclass(frozen=True)
class MismatchSpectrum:
    """Exact eigen-ingredients of the (R_S, R_I) pencil at one SNR.

    gamma0/gammas/psi_t are evaluated from the analytic matrices (no
    large-SNR or small-leakage approximations), so lambda_max_pred +-
    bound_radius is a true enclosure whenever feasible is set. The
    dimensionless closed forms live in gamma0() and gamma_spectrum().
    """
    gamma0: float
    gammas: np.ndarray        # descending, length D
    beta: float
    delta: float
    psi_t: np.ndarray         # aligned with gammas
    kappa0: float
    rho0: float
    lambda_max_pred: float
    bound_radius: float
    feasible: bool
    snr: float
    noise_var: float
    l_antennas: int
    processing_gain: int


def lambda_max_bound(gamma0_val: float, gamma1_val: float, delta: float):
    """Enclosure for the top pencil eigenvalue: (prediction, radius, feasible).

    prediction = max(gamma0, gamma1) + 1; the radius comes from the two-disk
    separation function f. When the two eigenvalues compete (ratio inside
    f's forbidden band) no enclosure exists and feasible is False.
    """
    if gamma0_val < 0 or gamma1_val < 0:
        raise ValueError("gamma0 and gamma1 must be >= 0")
    lam_a = max(gamma0_val, gamma1_val)
    lam_b = min(gamma0_val, gamma1_val)
    if lam_a == 0.0:
        raise ValueError("gamma0 and gamma1 cannot both be zero")
    try:
        radius = lam_a * la.f_bound(lam_b / lam_a, delta)
    except la.InfeasibleBoundError:
        return lam_a + 1.0, float("nan"), False
    return lam_a + 1.0, radius, True


def mismatch_spectrum(model: mpb.AnalyticModel) -> MismatchSpectrum:
    """Exact spectrum ingredients from an analytic covariance model.

    Diagonalizes (Phi_S - Phi_I, (A_I^H R_I^-1 A_I)^-1) simultaneously to
    get the mismatch eigenvalues and the coupling vector psi_T, then forms
    delta and the lambda_max enclosure. Requires the interference steering
    matrix to have full column rank (separated DOAs, D <= L).
    """
    big_l = model.a0.shape[0]
    n = model.processing_gain
    s2 = model.noise_var
    snr = model.sigma_s0_sq / s2
    g0 = exact_gamma0(model)
    d = model.a_i_mat.shape[1]

    if d == 0:
        pred, radius, feas = (g0 + 1.0, 0.0, True) if g0 > 0 else (1.0, 0.0, True)
        return MismatchSpectrum(g0, np.zeros(0), model.beta, 0.0,
                                np.zeros(0, dtype=np.complex128), 0.0, 0.0,
                                pred, radius, feas, snr, s2, big_l, n)

    a_mat = model.a_i_mat
    r_i = model.r_i
    ri_inv_a0 = la.solve_hpd(r_i, model.a0)
    ri_inv_amat = la.solve_hpd(r_i, a_mat)
    gram = a_mat.conj().T @ ri_inv_amat
    w_mat = la.solve_hpd(0.5 * (gram + gram.conj().T), np.eye(d, dtype=np.complex128))
    w_mat = 0.5 * (w_mat + w_mat.conj().T)
    phi_delta = (model.phi_s0 - model.phi_i0) * (s2 * model.inr)
    t_mat, gammas = la.simultaneous_diag(0.5 * (phi_delta + phi_delta.conj().T), w_mat)

    # T^H W T = I gives T^-H = W T: no explicit inversion needed
    a_eps = a_mat @ (w_mat @ t_mat)
    coef = (big_l * model.beta / n) * snr + 1.0
    coupling = a_eps.conj().T @ ri_inv_a0
    psi_t = coef * coupling
    # delta scales the top coupling against a0^H R_I^-1 a0 exactly; the
    # (L beta / N) snr + 1 normalization is only its wide-separation limit
    # and under-covers the enclosure by 1/(1 - xi).
    quad = float(np.vdot(model.a0, ri_inv_a0).real)
    delta = abs(coupling[0]) ** 2 / quad

    psi = a_mat.conj().T @ model.a0 / big_l
    psi_mat = a_mat.conj().T @ a_mat / big_l
    psi_inv_psi = la.solve_hpd(psi_mat, psi)
    rho0 = float(np.vdot(psi, psi_inv_psi).real)
    phi_i = model.phi_i0 * (s2 * model.inr)
    psi_mat_inv = la.solve_hpd(psi_mat, np.eye(d, dtype=np.complex128))
    xi_core = (big_l / s2) * phi_i + psi_mat_inv
    xi_mat = la.solve_hpd(0.5 * (xi_core + xi_core.conj().T),
                          np.eye(d, dtype=np.complex128))
    kappa0 = float(np.vdot(psi_inv_psi, xi_mat @ psi_inv_psi).real)

    g1 = float(gammas[0])
    if max(g0, g1) <= 0.0:
        pred, radius, feas = 1.0, 0.0, True
    else:
        lam_a = max(g0, g1)
        lam_b = min(g0, g1)
        try:
            radius = lam_a * la.f_bound(lam_b / lam_a, delta)
            pred, feas = lam_a + 1.0, True
        except la.InfeasibleBoundError:
            pred, radius, feas = lam_a + 1.0, float("nan"), False

    return MismatchSpectrum(g0, gammas, model.beta, float(delta), psi_t,
                            kappa0, rho0, pred, radius, feas, snr, s2, big_l, n)


# -----------------------
# G bounds, thresholds, operating curve
# -----------------------

def g_upper(q_s: np.ndarray, q_i: np.ndarray, a0: np.ndarray) -> float:
    """Operating-region ceiling G_U = [a0^H Q_I^-1 a0]^2 / ([a0^H Q_S^-1 a0][a0^H Q_I^-1 Q_S Q_I^-1 a0])."""
    a0 = np.asarray(a0, dtype=np.complex128)
    qi_inv_a0 = la.solve_hpd(q_i, a0)
    num = np.vdot(a0, qi_inv_a0).real ** 2
    den1 = np.vdot(a0, la.solve_hpd(q_s, a0)).real
    den2 = np.vdot(qi_inv_a0, np.asarray(q_s, dtype=np.complex128) @ qi_inv_a0).real
    return float(num / (den1 * den2))


@dataclass(frozen=True)
class Thresholds:
    snr_t0: float
    snr_t1: float
    snr_t2: float
    k0: float
    p_i: float
    g_u: float
    g_l: float  # NaN until the low-SNR oracle fills it in


def thresholds(gamma1: float, beta: float, n_gain: int, l_antennas: int,
               g_u: float, g_l: float = float("nan")) -> Thresholds:
    """Threshold SNRs of the operating curve; infinities propagate.

    SNR_T0 solves gamma_0(SNR) = gamma_1. gamma_1 = 0 collapses everything
    to zero (horizontal curve); (N-beta)/gamma_1 < beta makes SNR_T0
    infinite (the curve only has a failure area).
    """
    if not 0 <= beta < n_gain:
        raise ValueError(f"beta must lie in [0, N), got {beta}")
    if not 0.0 < g_u <= 1.0 + 1e-12:
        raise ValueError(f"g_u must be in (0, 1], got {g_u}")
    g1p = max(gamma1, 0.0)
    if g1p == 0.0:
        t0 = 0.0
    else:
        denom = max((n_gain - beta) / g1p - beta, 0.0)
        t0 = INF if denom == 0.0 else (n_gain / l_antennas) / denom

    p_i = max(1.0 / g_u - 1.0, 0.0)
    t1 = (1.0 - math.sqrt(0.5)) * t0
    t2 = t0 / (1.0 - math.sqrt(p_i / (2.0 * p_i + 1.0))) if p_i > 0.0 else t0

    # the (.)^+ factor decides first: it is 0 whenever beta = 0 or the
    # mismatch is weak, and that zero must win over any infinite prefactor
    if beta == 0.0:
        k0 = 0.0
    else:
        plus = max(g1p - (n_gain - beta) / beta, 0.0)
        if plus == 0.0:
            k0 = 0.0
        else:
            inv_t0 = 0.0 if t0 == INF else (n_gain / l_antennas) / t0
            k0 = (beta + inv_t0) / (n_gain - beta) * plus
    return Thresholds(t0, t1, t2, k0, p_i, g_u, g_l)


@dataclass(frozen=True)
class OperatingCurve:
    points: list  # (snr linear, g, region in {"Failure", "Threshold", "Operating"})


def _g_operating(snr: float, th: Thresholds) -> float:
    frac = 0.0 if th.snr_t0 == 0.0 else th.snr_t0 / snr
    return (th.p_i + 1.0) / (th.p_i / (1.0 - frac) ** 2 + 1.0) * th.g_u


def _g_failure(snr: float, th: Thresholds, beta: float, l_antennas: int, n_gain: int) -> float:
    lead = 0.0 if th.snr_t0 == INF else snr / th.snr_t0
    den = 1.0 - lead + th.k0 * (l_antennas * beta * snr / n_gain + 1.0)
    return ((1.0 + th.k0) / den) ** 2 * th.g_l


def operating_curve(spectrum: MismatchSpectrum, th: Thresholds, snr_grid) -> OperatingCurve:
    """Predicted G over a linear-SNR grid with region tags.

    Above SNR_T2 the operating branch applies, below SNR_T1 the failure
    branch; the band between is bridged by a straight line in
    (log SNR, dB G) coordinates, which is a declared drawing rule rather
    than a formula.
    """
    grid = [float(s) for s in snr_grid]
    if not grid:
        raise ValueError("empty SNR grid")
    beta, big_l, n = spectrum.beta, spectrum.l_antennas, spectrum.processing_gain
    needs_gl = any(s <= th.snr_t2 for s in grid) and th.snr_t0 > 0.0
    if needs_gl and not th.g_l > 0.0:
        raise ValueError("failure/threshold region requested but g_l is not set")

    points = []
    for snr in grid:
        if snr <= 0:
            raise ValueError("snr grid must be positive")
        if snr > th.snr_t2:
            points.append((snr, _g_operating(snr, th), "Operating"))
        elif snr < th.snr_t1:
            points.append((snr, _g_failure(snr, th, beta, big_l, n), "Failure"))
        else:
            g1 = _g_failure(th.snr_t1, th, beta, big_l, n)
            g2 = _g_operating(th.snr_t2, th)
            frac = (math.log10(snr) - math.log10(th.snr_t1)) / \
                   (math.log10(th.snr_t2) - math.log10(th.snr_t1))
            g_db = (1.0 - frac) * 10.0 * math.log10(g1) + frac * 10.0 * math.log10(g2)
            points.append((snr, 10.0 ** (g_db / 10.0), "Threshold"))
    return OperatingCurve(points)


def g_lower_oracle(scenario: sm.Scenario, bases: mpb.ProjectionBases,
                   snr_probe: float = 1e-6) -> float:
    """Failure-region floor G_L: the normalized output SINR as SNR -> 0.

    There is no cheaper exact route than the definition itself, so this
    builds the analytic pair at a vanishing probe SNR, solves the weights
    exactly and evaluates analytic G. Refuses when there is no mismatch
    (the floor is then just G_U and the failure branch never exists).
    """
    model_probe = _rescaled_model(scenario, bases, snr_probe)
    g1 = gamma_spectrum(model_probe.q_s, model_probe.q_i, max(1, model_probe.a_i_mat.shape[1]))[0]
    if g1 <= 0.0:
        raise ValueError("no covariance mismatch: G_L is undefined (gamma_1 = 0)")
    bw = mpb.solve_weights(model_probe.cov_pair(), model_probe.a0)
    opt = mpb.sinr_opt(model_probe.q_s, model_probe.a0, model_probe.sigma_s0_sq)
    return mpb.output_sinr(bw.w, model_probe.q_s, model_probe.a0,
                           model_probe.sigma_s0_sq) / opt


def _rescaled_model(scenario: sm.Scenario, bases: mpb.ProjectionBases,
                    snr: float) -> mpb.AnalyticModel:
    """Analytic model with the SOI power set from a linear SNR."""
    p0 = snr * scenario.noise_var / scenario.soi.processing_gain
    soi = sm.SoiSpec(scenario.soi.processing_gain, scenario.soi.code,
                     scenario.soi.doa_deg, scenario.soi.delay, p0, scenario.soi.bits)
    scn = sm.Scenario(scenario.geometry, soi, scenario.interferers,
                      scenario.noise_var, scenario.symbols, scenario.seed,
                      scenario.mc_stream)
    return mpb.analytic_cov(scn, bases)


def g_of_lambda(lambda_max: float, spectrum: MismatchSpectrum, snr: float,
                l_antennas: int, n_gain: int) -> float:
    """Exact-ingredient evaluation of G as a function of the top eigenvalue.

    psi_S and psi_I are partial-fraction sums over the mismatch eigenvalues;
    lambda_max sitting on a pole (gamma_i + 1) is rejected.
    """
    s2 = spectrum.noise_var
    gam = np.asarray(spectrum.gammas, dtype=np.float64)
    psi_t2 = np.abs(np.asarray(spectrum.psi_t)) ** 2
    poles = gam + 1.0
    if np.any(np.abs(lambda_max - poles) < 1e-12 * np.abs(poles)):
        raise ValueError("lambda_max coincides with a mismatch pole")
    ratio = (lambda_max - 1.0) / (lambda_max - poles)
    psi_s = (s2 / l_antennas) * float(np.sum(ratio * psi_t2))
    psi_i = (s2 / l_antennas) * float(np.sum(poles * ratio ** 2 * psi_t2))
    mix = l_antennas * spectrum.beta * snr
    a = 1.0 + (n_gain / (mix + n_gain)) * psi_s
    b = psi_i - (mix / (mix + n_gain)) * psi_s ** 2
    return a * a / (b + a * a)


# -----------------------
# Noise-free pair analysis
# -----------------------

@dataclass(frozen=True)
class NoiseFreeAnalysis:
    """INR-normalized noise-free covariance pair and what it implies.

    y_s / y_i are built at INR = 1; scaling to any INR is exact by
    homogeneity, so c_y0 is computed once and gamma1_lower scales it.
    has_infinite comes from the semidefinite pencil (null-space route);
    geometric_bounded is the independent waveform-subspace route, available
    only when every interferer is periodic (None otherwise).
    """
    y_s: np.ndarray
    y_i: np.ndarray
    c_y0: float
    has_infinite: bool
    infinite_count: int
    geometric_bounded: bool | None


def one_period_waveforms(scenario: sm.Scenario) -> np.ndarray:
    """N x M matrix whose columns span the interference waveform space.

    Periodic paths contribute their one-period waveform; multipath rays
    contribute both chip-overlap segments. White interference has no
    one-period description and is rejected.
    """
    cols = []
    for p in sm.realize_paths(scenario):
        if p.family == "periodic":
            cols.append(p.waveform)
        elif p.family == "mai":
            cols.append(p.head.astype(np.complex128))
            cols.append(p.tail.astype(np.complex128))
        else:
            raise ValueError("white interference has no one-period waveform")
    if not cols:
        raise ValueError("scenario has no interferers")
    return np.stack(cols, axis=1)


def boundedness_criterion(h_s: np.ndarray, h_i: np.ndarray, s_i: np.ndarray) -> bool:
    """True iff the mismatch eigenvalue stays bounded as INR grows.

    Geometric route: project both bases onto the interference waveform
    space V_I = range(S_I); bounded iff the projected monitor space covers
    the projected signal vector.
    """
    s_i = np.asarray(s_i, dtype=np.complex128)
    if s_i.size == 0:
        raise ValueError("empty waveform matrix")
    v_i = la.orthonormal_range(s_i)
    proj = la.projector(v_i)
    h_s = np.asarray(h_s, dtype=np.complex128).reshape(-1, 1)
    lhs = la.orthonormal_range(proj @ np.asarray(h_i, dtype=np.complex128))
    rhs = la.orthonormal_range(proj @ h_s)
    return la.subspace_contains(lhs, rhs, 1e-8)


def noise_free_pair(scenario: sm.Scenario, bases: mpb.ProjectionBases) -> NoiseFreeAnalysis:
    """Analyze the covariance pair with the noise stripped and INR factored out."""
    if not scenario.interferers:
        raise ValueError("scenario has no interferers")
    model = mpb.analytic_cov(scenario, bases)
    y_s = model.a_i_mat @ model.phi_s0 @ model.a_i_mat.conj().T
    y_i = model.a_i_mat @ model.phi_i0 @ model.a_i_mat.conj().T
    y_s = 0.5 * (y_s + y_s.conj().T)
    y_i = 0.5 * (y_i + y_i.conj().T)

    hom = la.gen_eig_homogeneous(y_s, y_i)
    e0 = la.orthonormal_range(np.hstack([y_s, y_i]), tol=1e-10)
    c_y0 = la.crawford(y_s, y_i, e0=e0)

    geometric = None
    if all(sp.kind in ("tone", "periodical_noise") for sp in scenario.interferers):
        geometric = boundedness_criterion(bases.h_s, bases.h_i,
                                          one_period_waveforms(scenario))
    return NoiseFreeAnalysis(y_s, y_i, float(c_y0), hom.infinite_count > 0,
                             hom.infinite_count, geometric)


def gamma1_lower_bound(c_y0: float, inr: float):
    """Lower bound C_Y0 * INR / sqrt(2) - 1 on gamma_1, or None when the
    perturbation condition sqrt(2) < C_Y0 * INR fails (bound not applicable)."""
    if c_y0 < 0 or inr < 0:
        raise ValueError("c_y0 and inr must be >= 0")
    if math.sqrt(2.0) >= c_y0 * inr:
        return None
    return c_y0 * inr / math.sqrt(2.0) - 1.0


# -----------------------
# Projected-inverse identities
# -----------------------

def verify_supplementary_identities(scenario: sm.Scenario, bases: mpb.ProjectionBases,
                                    snr: float) -> dict:
    """Check the closed form of a0^H R_I^-1 a0 against direct inversion.

    The exact form is (L/s2)(1-xi) / ((L b / N)(1-xi) SNR + 1) with
    xi = rho0 - kappa0 built from the interference Gram structure; the
    simplified form used in the derivations drops xi entirely. Returns both
    deviations plus the (rho0, kappa0, xi) triple.
    """
    model = _rescaled_model(scenario, bases, snr)
    big_l = model.a0.shape[0]
    n = model.processing_gain
    s2 = model.noise_var
    exact = float(np.vdot(model.a0, la.solve_hpd(model.r_i, model.a0)).real)

    d = model.a_i_mat.shape[1]
    if d == 0:
        rho0 = kappa0 = 0.0
    else:
        a_mat = model.a_i_mat
        psi = a_mat.conj().T @ model.a0 / big_l
        psi_mat = a_mat.conj().T @ a_mat / big_l
        psi_inv_psi = la.solve_hpd(psi_mat, psi)
        rho0 = float(np.vdot(psi, psi_inv_psi).real)
        phi_i = model.phi_i0 * (s2 * model.inr)
        psi_mat_inv = la.solve_hpd(psi_mat, np.eye(d, dtype=np.complex128))
        core = (big_l / s2) * phi_i + psi_mat_inv
        xi_mat = la.solve_hpd(0.5 * (core + core.conj().T), np.eye(d, dtype=np.complex128))
        kappa0 = float(np.vdot(psi_inv_psi, xi_mat @ psi_inv_psi).real)
    xi = rho0 - kappa0

    mix = (big_l * model.beta / n) * snr
    closed = (big_l / s2) * (1.0 - xi) / (mix * (1.0 - xi) + 1.0)
    simplified = (big_l / s2) / (mix + 1.0)
    return {
        "exact": exact,
        "closed_form": closed,
        "rel_deviation": abs(closed - exact) / abs(exact),
        "simplified": simplified,
        "simplified_rel_error": abs(simplified - exact) / abs(exact),
        "rho0": rho0,
        "kappa0": kappa0,
        "xi": xi,
    }
