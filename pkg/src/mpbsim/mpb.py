"""The matrix pair beamformer.

Projects each data block onto a signal space (the SOI's temporal signature)
and an interference-monitoring space, forms the two projected covariance
matrices, and takes the dominant generalized eigenvector of the pair as the
weight vector. Includes both the sample path (Monte Carlo snapshots) and
the analytic path (closed-form covariance structure), the normalized output
SINR measure G, and array patterns.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from . import sigmodel as sm

DEFAULT_MAXIMIN_FREQ = 16.0 / 31.0  # monitor frequency k/N: orthogonal to the code space


# -----------------------
# Projection bases
# -----------------------

@dataclass(frozen=True)
class ProjectionBases:
    """Signal-space vector h_s (= c0/sqrt(N)) and interference basis h_i (N x r_I).

    h_i columns must be orthonormal and must not capture the whole signal
    vector: a beamformer whose monitor space contains h_s cannot separate
    the SOI from the interference estimate.
    """
    h_s: np.ndarray
    h_i: np.ndarray
    scheme: str = "Custom"

    def __post_init__(self):
        h_s = np.asarray(self.h_s, dtype=np.complex128)
        h_i = np.asarray(self.h_i, dtype=np.complex128)
        if h_i.ndim != 2 or h_i.shape[0] != h_s.shape[0]:
            raise ValueError("h_i must be N x r_I")
        if abs(np.vdot(h_s, h_s).real - 1.0) > 1e-12:
            raise ValueError("h_s must be unit norm")
        gram = h_i.conj().T @ h_i
        if np.abs(gram - np.eye(h_i.shape[1])).max() > 1e-12:
            raise ValueError("h_i columns must be orthonormal")
        leak = float(np.sum(np.abs(h_i.conj().T @ h_s) ** 2))
        if leak > 1.0 - 1e-9:
            raise ValueError("h_i contains the signal vector (degenerate bases)")
        object.__setattr__(self, "h_s", h_s)
        object.__setattr__(self, "h_i", h_i)

    @property
    def r_i(self) -> int:
        return self.h_i.shape[1]


def papc_bases(code: np.ndarray, position: int = 0) -> ProjectionBases:
    """Single-component monitor: h_i = e_position, h_s = code/sqrt(N).

    Any position gives power leakage ratio beta = 1 for a +-1 code; the
    default 0 is fixed purely for reproducibility.
    """
    code = np.asarray(code, dtype=np.float64)
    n = code.shape[0]
    if not np.all(np.abs(code) == 1.0):
        raise ValueError("code chips must be +-1")
    if not 0 <= position < n:
        raise ValueError(f"position must be in [0, {n})")
    h_i = np.zeros((n, 1), dtype=np.complex128)
    h_i[position, 0] = 1.0
    return ProjectionBases(code / math.sqrt(n), h_i, "PAPC")


def maximin_bases(code: np.ndarray, monitor_freq: float = DEFAULT_MAXIMIN_FREQ) -> ProjectionBases:
    """Frequency-shifted matched filter monitor.

    h_i = (1/sqrt(N)) * code (*) [1, e^{j2 pi f}, ..., e^{j2 pi f (N-1)}].
    For f = k/N with integer k != 0 the monitor is exactly orthogonal to the
    signal vector, so beta = 0; f = 1 collapses onto h_s and is rejected.
    """
    code = np.asarray(code, dtype=np.float64)
    n = code.shape[0]
    if not np.all(np.abs(code) == 1.0):
        raise ValueError("code chips must be +-1")
    if not 0.0 < monitor_freq <= 1.0:
        raise ValueError(f"monitor_freq must be in (0, 1], got {monitor_freq}")
    ramp = np.exp(1j * 2.0 * math.pi * monitor_freq * np.arange(n))
    h_i = (code * ramp)[:, None] / math.sqrt(n)
    return ProjectionBases(code / math.sqrt(n), h_i, "Maximin")


def leakage_ratio(bases: ProjectionBases, code: np.ndarray) -> float:
    """Power leakage ratio beta = ||h_i^H c0||^2 / r_I."""
    code = np.asarray(code, dtype=np.complex128)
    return float(np.sum(np.abs(bases.h_i.conj().T @ code) ** 2)) / bases.r_i


# -----------------------
# Snapshots and sample covariances
# -----------------------

def snapshots(blocks: sm.BlockData, bases: ProjectionBases):
    """Project blocks: x_s(k) = X(k) h_s*, x_i(k) = X(k) h_i*."""
    x = blocks.blocks
    if x.shape[2] != bases.h_s.shape[0]:
        raise ValueError("block width does not match basis length")
    return x @ bases.h_s.conj(), x @ bases.h_i.conj()


@dataclass(frozen=True)
class CovariancePair:
    r_s: np.ndarray
    r_i: np.ndarray
    kind: str  # "sample" | "analytic"

    def __post_init__(self):
        for name, m in (("r_s", self.r_s), ("r_i", self.r_i)):
            scale = max(np.abs(m).max(), 1e-300)
            if np.abs(m - m.conj().T).max() > 1e-10 * scale:
                raise ValueError(f"{name} is not Hermitian")


def estimate_cov_pair(x_s: np.ndarray, x_i: np.ndarray) -> CovariancePair:
    """Sample covariances R_S = avg x_s x_s^H, R_I = avg X_I X_I^H / r_I."""
    x_s = np.asarray(x_s, dtype=np.complex128)
    x_i = np.asarray(x_i, dtype=np.complex128)
    k, big_l = x_s.shape
    if k == 0:
        raise ValueError("no snapshots")
    if k < big_l:
        raise ValueError(f"need at least L={big_l} snapshots, got {k}")
    if k < 10 * big_l:
        warnings.warn(f"only {k} snapshots for L={big_l}: covariance estimates are noisy")
    r_i_dim = x_i.shape[2] if x_i.ndim == 3 else 1
    if x_i.ndim == 2:
        x_i = x_i[:, :, None]
    r_s = np.einsum("kl,kp->lp", x_s, x_s.conj()) / k
    r_i = np.einsum("klm,kpm->lp", x_i, x_i.conj()) / (k * r_i_dim)
    return CovariancePair(0.5 * (r_s + r_s.conj().T), 0.5 * (r_i + r_i.conj().T), "Sample")


def accumulate_cov_pair(scenario: sm.Scenario, bases: ProjectionBases,
                        include=("soi", "interference", "noise")) -> CovariancePair:
    """Streaming estimate_cov_pair over all scenario symbols (fixed batching)."""
    big_l = scenario.geometry.element_count
    acc_s = np.zeros((big_l, big_l), dtype=np.complex128)
    acc_i = np.zeros((big_l, big_l), dtype=np.complex128)
    total = 0
    for _, x in sm.iter_blocks(scenario, include=include):
        x_s = x @ bases.h_s.conj()
        x_i = x @ bases.h_i.conj()
        acc_s += np.einsum("kl,kp->lp", x_s, x_s.conj())
        acc_i += np.einsum("klm,kpm->lp", x_i, x_i.conj())
        total += x.shape[0]
    if total < 10 * big_l:
        warnings.warn(f"only {total} snapshots for L={big_l}: covariance estimates are noisy")
    r_s = acc_s / total
    r_i = acc_i / (total * bases.r_i)
    return CovariancePair(0.5 * (r_s + r_s.conj().T), 0.5 * (r_i + r_i.conj().T), "Sample")


# -----------------------
# Analytic covariance structure
# -----------------------

@dataclass(frozen=True)
class AnalyticModel:
    """Closed-form second-order model of the projected snapshots.

    R_S = sigma_s0_sq * a0 a0^H + q_s and R_I = sigma_i0_sq * a0 a0^H + q_i,
    with q_s = a_i_mat Phi_S a_i_mat^H + sigma^2 I (Phi_S = noise_var * inr *
    phi_s0) and likewise for q_i. omega_i = interferer powers / (sigma^2 *
    inr) is INR-invariant, as are phi_s0 / phi_i0.
    """
    q_s: np.ndarray
    q_i: np.ndarray
    phi_s0: np.ndarray
    phi_i0: np.ndarray
    omega_i: np.ndarray
    sigma_s0_sq: float
    sigma_i0_sq: float
    beta: float
    a0: np.ndarray
    a_i_mat: np.ndarray
    noise_var: float
    inr: float
    r_i_dim: int
    processing_gain: int

    @property
    def r_s(self) -> np.ndarray:
        return self.sigma_s0_sq * np.outer(self.a0, self.a0.conj()) + self.q_s

    @property
    def r_i(self) -> np.ndarray:
        return self.sigma_i0_sq * np.outer(self.a0, self.a0.conj()) + self.q_i

    def cov_pair(self) -> CovariancePair:
        return CovariancePair(self.r_s, self.r_i, "Analytic")


def _coherent(rho_a: complex, rho_b: complex) -> bool:
    # per-symbol phase increments must coincide for a cross term to survive
    # the average over symbols
    return abs(rho_a - rho_b) <= 1e-8


def _phi_entries(paths, h_s: np.ndarray, h_i: np.ndarray, r_i_dim: int):
    """Unit-power projection covariances (Phi without the power weighting)."""
    d = len(paths)
    phi_s = np.zeros((d, d), dtype=np.complex128)
    phi_i = np.zeros((d, d), dtype=np.complex128)
    qs = [None] * d   # scalar projection onto h_s per path
    qi = [None] * d   # r_I-row projection onto h_i per path
    for i, p in enumerate(paths):
        if p.family == "periodic":
            qs[i] = complex(p.waveform @ h_s.conj())
            qi[i] = p.waveform @ h_i.conj()
        elif p.family == "mai":
            qs[i] = (complex(p.head @ h_s.conj()), complex(p.tail @ h_s.conj()))
            qi[i] = (p.head @ h_i.conj(), p.tail @ h_i.conj())
    for i, pi_ in enumerate(paths):
        for j, pj in enumerate(paths):
            if pi_.family == "white" or pj.family == "white":
                if i == j:
                    phi_s[i, j] = 1.0
                    phi_i[i, j] = 1.0
                continue
            if pi_.family != pj.family:
                continue  # random data vs deterministic phase: mean zero
            if pi_.family == "periodic":
                if _coherent(pi_.block_phase, pj.block_phase):
                    phi_s[i, j] = qs[i] * np.conj(qs[j])
                    phi_i[i, j] = np.vdot(qi[j], qi[i]) / r_i_dim
            else:  # mai x mai
                if pi_.stream_index != pj.stream_index:
                    continue  # independent users
                hu_i, hv_i = qs[i]
                hu_j, hv_j = qs[j]
                phi_s[i, j] = hu_i * np.conj(hu_j) + hv_i * np.conj(hv_j)
                ru_i, rv_i = qi[i]
                ru_j, rv_j = qi[j]
                phi_i[i, j] = (np.vdot(ru_j, ru_i) + np.vdot(rv_j, rv_i)) / r_i_dim
    return phi_s, phi_i


def analytic_cov(scenario: sm.Scenario, bases: ProjectionBases) -> AnalyticModel:
    """Exact second-order model for the configured interference families.

    White interferers contribute identity projection covariance on both
    channels; periodic ones (tones, repeated noise segments) contribute
    deterministic one-period projections with cross terms kept only between
    phase-coherent pairs; multipath rays of one user contribute the
    head/tail chip-overlap products of their shared data stream. All three
    are exact large-sample limits, not fits.
    """
    code = scenario.soi.code
    n = scenario.soi.processing_gain
    if np.abs(bases.h_s - code / math.sqrt(n)).max() > 1e-12:
        raise ValueError("bases were built for a different code than the scenario's")
    geo = scenario.geometry
    paths = sm.realize_paths(scenario)
    a_mat = sm.steering_matrix(paths, geo)
    powers = np.array([p.power for p in paths], dtype=np.float64)
    sigma2 = scenario.noise_var
    inr = float(powers.max() / sigma2) if len(paths) else 1.0

    phi_s0_raw, phi_i0_raw = _phi_entries(paths, bases.h_s, bases.h_i, bases.r_i)
    w = np.sqrt(powers)
    phi_s = w[:, None] * phi_s0_raw * w[None, :]
    phi_i = w[:, None] * phi_i0_raw * w[None, :]
    eye = np.eye(geo.element_count, dtype=np.complex128)
    q_s = a_mat @ phi_s @ a_mat.conj().T + sigma2 * eye
    q_i = a_mat @ phi_i @ a_mat.conj().T + sigma2 * eye

    p0 = scenario.soi.power
    beta = leakage_ratio(bases, code)
    return AnalyticModel(
        q_s=0.5 * (q_s + q_s.conj().T),
        q_i=0.5 * (q_i + q_i.conj().T),
        phi_s0=phi_s / (sigma2 * inr),
        phi_i0=phi_i / (sigma2 * inr),
        omega_i=np.diag(powers / (sigma2 * inr)),
        sigma_s0_sq=n * p0,
        sigma_i0_sq=p0 * beta,
        beta=beta,
        a0=sm.steering(scenario.soi.doa_deg, geo),
        a_i_mat=a_mat,
        noise_var=sigma2,
        inr=inr,
        r_i_dim=bases.r_i,
        processing_gain=n,
    )


# -----------------------
# Weights, SINR, G
# -----------------------

@dataclass(frozen=True)
class BeamWeights:
    w: np.ndarray
    lambda_max: float


def solve_weights(pair: CovariancePair, a0: np.ndarray | None = None) -> BeamWeights:
    """Dominant generalized eigenvector of (R_S, R_I), unit-normalized.

    When the top eigenvalue is a cluster (within 1e-8 relative) the member
    with the largest |w^H a0| wins, which keeps the weight deterministic at
    competition boundaries; without a0 the first member is returned.
    """
    res = la.gen_eig_hpd(pair.r_s, pair.r_i)
    lam = res.eigenvalues
    lam_max = float(lam[0])
    cluster = np.nonzero(lam >= lam_max - 1e-8 * max(1.0, abs(lam_max)))[0]
    pick = int(cluster[0])
    if a0 is not None and len(cluster) > 1:
        a0 = np.asarray(a0, dtype=np.complex128)
        scores = [abs(np.vdot(res.eigenvectors[:, int(i)], a0)) for i in cluster]
        pick = int(cluster[int(np.argmax(scores))])
    w = res.eigenvectors[:, pick]
    return BeamWeights(w / math.sqrt(np.vdot(w, w).real), lam_max)


def sinr_opt(q_s: np.ndarray, a0: np.ndarray, sigma_s0_sq: float) -> float:
    """Optimal output SINR sigma_S0^2 * a0^H Q_S^-1 a0."""
    a0 = np.asarray(a0, dtype=np.complex128)
    val = np.vdot(a0, la.solve_hpd(q_s, a0)).real
    return float(sigma_s0_sq * val)


def output_sinr(w: np.ndarray, q_s: np.ndarray, a0: np.ndarray, sigma_s0_sq: float) -> float:
    """Analytic output SINR of a fixed weight: sigma_S0^2 |w^H a0|^2 / (w^H Q_S w)."""
    w = np.asarray(w, dtype=np.complex128)
    num = sigma_s0_sq * abs(np.vdot(w, a0)) ** 2
    den = np.vdot(w, q_s @ w).real
    if den <= 0.0:
        raise ValueError("non-positive interference-plus-noise power")
    return float(num / den)


def measure_g(weights: BeamWeights, scenario: sm.Scenario, bases: ProjectionBases,
              mode: str = "analytic", symbols: int | None = None) -> float:
    """Normalized output SINR G = SINR(w) / SINR_opt in [0, 1]-ish.

    analytic: closed-form SINR ratio under the scenario's covariance model.
    monte_carlo: E|y_S|^2 / E|y_I|^2 with the signal-only and the
    interference-plus-noise-only snapshots synthesized separately (removes
    the cross-term estimation noise), normalized by the analytic optimum.
    """
    model = analytic_cov(scenario, bases)
    opt = sinr_opt(model.q_s, model.a0, model.sigma_s0_sq)
    if mode == "analytic":
        return output_sinr(weights.w, model.q_s, model.a0, model.sigma_s0_sq) / opt
    if mode != "monte_carlo":
        raise ValueError(f"unknown mode {mode!r}")

    if symbols is not None:
        scenario = sm.Scenario(scenario.geometry, scenario.soi, scenario.interferers,
                               scenario.noise_var, symbols, scenario.seed, scenario.mc_stream)
    w = weights.w
    num = 0.0
    cnt = 0
    for _, x in sm.iter_blocks(scenario, include=("soi",)):
        y = (x @ bases.h_s.conj()) @ w.conj()
        num += float(np.sum(np.abs(y) ** 2))
        cnt += x.shape[0]
    den = 0.0
    for _, x in sm.iter_blocks(scenario, include=("interference", "noise")):
        y = (x @ bases.h_s.conj()) @ w.conj()
        den += float(np.sum(np.abs(y) ** 2))
    if den <= 0.0:
        raise ValueError("interference-plus-noise output power is zero")
    return (num / den) / opt


# -----------------------
# Array pattern
# -----------------------

def array_pattern(w: np.ndarray, geometry: sm.ArrayGeometry, theta_grid_deg) -> list:
    """Peak-normalized power pattern: (theta_deg, 20 log10 |w^H a(theta)| - peak)."""
    w = np.asarray(w, dtype=np.complex128)
    thetas = list(theta_grid_deg)
    if not thetas:
        raise ValueError("empty theta grid")
    # response evaluation, not source placement: endfire +-90 is allowed here
    idx = np.arange(geometry.element_count)
    resp = np.exp(2j * np.pi * geometry.spacing
                  * np.outer(np.sin(np.radians(thetas)), idx))
    mags = np.abs(resp @ w.conj())
    peak = mags.max()
    if peak == 0.0:
        raise ValueError("all-zero pattern")
    gains = 20.0 * np.log10(np.maximum(mags, peak * 1e-300) / peak)
    return [(float(t), float(g)) for t, g in zip(thetas, gains)]
