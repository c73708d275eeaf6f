"""Self-contained dense complex linear algebra.

Hermitian eigendecomposition (cyclic Jacobi), Cholesky, definite and
semi-definite generalized eigenproblems (including infinite eigenvalues of
PSD pairs), one-sided Jacobi SVD for subspace geometry, and the
perturbation-bound toolbox (Gerschgorin disks, Crawford number, the f(x)
radius function).

numpy is used as the array carrier only; every factorization here is
implemented directly so the solver stack has no external numerical
dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class LinAlgError(Exception):
    """Base class for numerical failures in this module."""


class NotPositiveDefiniteError(LinAlgError):
    pass


class ConvergenceError(LinAlgError):
    pass


class InfeasibleBoundError(LinAlgError):
    """x fell inside the forbidden band of the f(x) radius function."""


# -----------------------
# Validation helpers
# -----------------------

def _as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise LinAlgError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.size and not np.all(np.isfinite(m.view(np.float64))):
        raise LinAlgError(f"{name} contains non-finite entries")
    return m


def _as_hermitian(a, name: str = "matrix") -> np.ndarray:
    m = _as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise LinAlgError(f"{name} must be square, got {m.shape}")
    scale = np.abs(m).max() if m.size else 0.0
    dev = np.abs(m - m.conj().T).max() if m.size else 0.0
    if dev > 1e-8 * max(scale, 1e-300):
        raise LinAlgError(f"{name} is not Hermitian (deviation {dev:.3e})")
    return 0.5 * (m + m.conj().T)


def _herm_rotation(app: float, aqq: float, apq: complex):
    """2x2 unitary [[c, s*phi], [-s*conj(phi), c*conj(phi)]] zeroing apq.

    phi carries the phase of apq; (c, s) is the classic symmetric Jacobi
    rotation for the phase-reduced real 2x2 block. Returns (c, s, phi, t).
    """
    h = abs(apq)
    phi = apq / h
    tau = (aqq - app) / (2.0 * h)
    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    return c, t * c, phi, t


# -----------------------
# Hermitian eigendecomposition
# -----------------------

@dataclass(frozen=True)
class HermEigResult:
    eigenvalues: np.ndarray   # real, descending
    eigenvectors: np.ndarray  # orthonormal columns aligned to eigenvalues


def herm_eig(a, max_sweeps: int = 50) -> HermEigResult:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Converged when the off-diagonal Frobenius mass drops below
    1e-12 * ||A||_F; raises ConvergenceError after max_sweeps otherwise.
    """
    a = _as_hermitian(a, "A")
    n = a.shape[0]
    if n == 1:
        return HermEigResult(np.array([a[0, 0].real]), np.ones((1, 1), dtype=np.complex128))

    work = a.copy()
    vecs = np.eye(n, dtype=np.complex128)
    norm_f = math.sqrt(max(np.sum(np.abs(a) ** 2).real, 0.0))
    if norm_f == 0.0:
        return HermEigResult(np.zeros(n), vecs)
    target = 1e-12 * norm_f
    skip = 1e-16 * norm_f  # far below target even summed over all n^2 slots

    for _ in range(max_sweeps):
        # off-diagonal mass summed directly: subtracting diagonal mass from
        # the total cancels catastrophically once nearly converged
        od = np.abs(work) ** 2
        np.fill_diagonal(od, 0.0)
        if math.sqrt(od.sum()) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if abs(apq) <= skip:
                    continue
                app = work[p, p].real
                aqq = work[q, q].real
                c, s, phi, t = _herm_rotation(app, aqq, apq)
                # A <- U^H A U with U acting on columns (p, q)
                col_p = work[:, p].copy()
                col_q = work[:, q].copy()
                work[:, p] = c * col_p - (s * np.conj(phi)) * col_q
                work[:, q] = s * col_p + (c * np.conj(phi)) * col_q
                row_p = work[p, :].copy()
                row_q = work[q, :].copy()
                work[p, :] = c * row_p - (s * phi) * row_q
                work[q, :] = s * row_p + (c * phi) * row_q
                work[p, p] = app - t * abs(apq)
                work[q, q] = aqq + t * abs(apq)
                work[p, q] = 0.0
                work[q, p] = 0.0
                vp = vecs[:, p].copy()
                vq = vecs[:, q].copy()
                vecs[:, p] = c * vp - (s * np.conj(phi)) * vq
                vecs[:, q] = s * vp + (c * np.conj(phi)) * vq
    else:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    vals = np.diagonal(work).real.copy()
    order = np.argsort(-vals, kind="stable")
    return HermEigResult(vals[order], vecs[:, order])


# -----------------------
# Cholesky and triangular solves
# -----------------------

def cholesky(b) -> np.ndarray:
    """Lower-triangular L with B = L L^H for Hermitian positive-definite B."""
    b = _as_hermitian(b, "B")
    n = b.shape[0]
    low = np.zeros((n, n), dtype=np.complex128)
    pivot_floor = 1e-12 * max(np.abs(b).max(), 0.0)
    for j in range(n):
        d = (b[j, j] - low[j, :j] @ low[j, :j].conj()).real
        piv = math.sqrt(d) if d > 0.0 else 0.0
        if piv <= pivot_floor:
            raise NotPositiveDefiniteError(f"pivot {piv:.3e} at column {j}")
        low[j, j] = piv
        if j + 1 < n:
            low[j + 1:, j] = (b[j + 1:, j] - low[j + 1:, :j] @ low[j, :j].conj()) / piv
    return low


def _forward_solve(low: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve L X = RHS for lower-triangular L."""
    n = low.shape[0]
    x = np.empty_like(np.asarray(rhs, dtype=np.complex128))
    rhs = np.asarray(rhs, dtype=np.complex128)
    for i in range(n):
        x[i] = (rhs[i] - low[i, :i] @ x[:i]) / low[i, i]
    return x


def _backward_solve_conj(low: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve L^H X = RHS for lower-triangular L."""
    n = low.shape[0]
    x = np.empty_like(np.asarray(rhs, dtype=np.complex128))
    rhs = np.asarray(rhs, dtype=np.complex128)
    for i in range(n - 1, -1, -1):
        x[i] = (rhs[i] - low[i + 1:, i].conj() @ x[i + 1:]) / low[i, i].conj()
    return x


def solve_hpd(b, rhs) -> np.ndarray:
    """Solve B X = RHS with B Hermitian positive definite (Cholesky)."""
    low = cholesky(b)
    rhs = np.asarray(rhs, dtype=np.complex128)
    squeeze = rhs.ndim == 1
    if squeeze:
        rhs = rhs[:, None]
    x = _backward_solve_conj(low, _forward_solve(low, rhs))
    return x[:, 0] if squeeze else x


def gen_eig_hpd(a, b) -> HermEigResult:
    """Generalized eigendecomposition A v = lambda B v for Hermitian A, HPD B.

    Cholesky reduction to the standard problem L^-1 A L^-H; eigenvectors are
    returned B-orthonormal (V^H B V = I), eigenvalues descending.
    """
    a = _as_hermitian(a, "A")
    b = _as_hermitian(b, "B")
    if a.shape != b.shape:
        raise LinAlgError(f"dimension mismatch {a.shape} vs {b.shape}")
    low = cholesky(b)
    c = _forward_solve(low, a)
    c = _forward_solve(low, c.conj().T).conj().T
    res = herm_eig(0.5 * (c + c.conj().T))
    vecs = _backward_solve_conj(low, res.eigenvectors)
    return HermEigResult(res.eigenvalues, vecs)


# -----------------------
# One-sided Jacobi SVD and subspace geometry
# -----------------------

def _svd(m: np.ndarray, max_sweeps: int = 60):
    """One-sided Jacobi SVD: M = U diag(s) V^H with V full n x n.

    Rotations orthogonalize the columns of M; this is the implicit Jacobi
    eigendecomposition of the Gram matrix M^H M but keeps small singular
    values at high relative accuracy. U holds one column per nonzero s.
    """
    m = _as_matrix(m, "M")
    rows, cols = m.shape
    work = m.copy()
    v = np.eye(cols, dtype=np.complex128)
    col2 = np.sum(np.abs(work) ** 2, axis=0).real
    # columns driven this far below the dominant one are numerically zero;
    # without the floor their rotation angles overflow and sweeps never end
    floor2 = (col2.max() if col2.size else 0.0) * 1e-80
    if cols > 1 and floor2 > 0.0:
        for _ in range(max_sweeps):
            rotated = False
            for p in range(cols - 1):
                for q in range(p + 1, cols):
                    cp = work[:, p]
                    cq = work[:, q]
                    a = (cp.conj() @ cp).real
                    b = (cq.conj() @ cq).real
                    if a <= floor2:
                        work[:, p] = 0.0
                        continue
                    if b <= floor2:
                        work[:, q] = 0.0
                        continue
                    g = cp.conj() @ cq
                    if abs(g) <= 1e-14 * math.sqrt(a * b):
                        continue
                    rotated = True
                    c, s, phi, _ = _herm_rotation(a, b, g)
                    new_p = c * cp - (s * np.conj(phi)) * cq
                    new_q = s * cp + (c * np.conj(phi)) * cq
                    work[:, p] = new_p
                    work[:, q] = new_q
                    vp = v[:, p].copy()
                    vq = v[:, q].copy()
                    v[:, p] = c * vp - (s * np.conj(phi)) * vq
                    v[:, q] = s * vp + (c * np.conj(phi)) * vq
            if not rotated:
                break
        else:
            raise ConvergenceError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")
    sig = np.sqrt(np.sum(np.abs(work) ** 2, axis=0).real)
    order = np.argsort(-sig, kind="stable")
    sig = sig[order]
    work = work[:, order]
    v = v[:, order]
    u = np.zeros((rows, cols), dtype=np.complex128)
    nz = sig > 0.0
    u[:, nz] = work[:, nz] / sig[nz]
    return u, sig, v


def _rank_tol(m: np.ndarray, tol) -> float:
    if tol is not None:
        if tol <= 0:
            raise LinAlgError("tol must be positive")
        return float(tol)
    return max(m.shape) * 2.0 ** -52


def orthonormal_range(m, tol: float | None = None) -> np.ndarray:
    """Orthonormal columns spanning range(M); rank cut at tol * sigma_max."""
    m = _as_matrix(m, "M")
    u, sig, _ = _svd(m)
    if sig.size == 0 or sig[0] == 0.0:
        return np.zeros((m.shape[0], 0), dtype=np.complex128)
    r = int(np.sum(sig >= _rank_tol(m, tol) * sig[0]))
    return u[:, :r]


def null_space(m, tol: float | None = None) -> np.ndarray:
    """Orthonormal columns spanning the (right) null space of M."""
    m = _as_matrix(m, "M")
    _, sig, v = _svd(m)
    if sig.size == 0:
        return np.zeros((m.shape[1], 0), dtype=np.complex128)
    if sig[0] == 0.0:
        return np.eye(m.shape[1], dtype=np.complex128)
    r = int(np.sum(sig >= _rank_tol(m, tol) * sig[0]))
    return v[:, r:]


def projector(q) -> np.ndarray:
    """Orthogonal projector Q Q^H onto the span of orthonormal columns Q."""
    q = _as_matrix(q, "Q")
    return q @ q.conj().T


def pinv(m, tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse via the one-sided Jacobi SVD."""
    m = _as_matrix(m, "M")
    u, sig, v = _svd(m)
    out = np.zeros((m.shape[1], m.shape[0]), dtype=np.complex128)
    if sig.size == 0 or sig[0] == 0.0:
        return out
    keep = sig >= _rank_tol(m, tol) * sig[0]
    return (v[:, keep] / sig[keep]) @ u[:, keep].conj().T


def spectral_norm(m) -> float:
    m = _as_matrix(m, "M")
    _, sig, _ = _svd(m)
    return float(sig[0]) if sig.size else 0.0


def subspace_contains(u, v, tol: float) -> bool:
    """True iff range(V) is contained in range(U): ||(I - UU^H)V||_S <= tol.

    Both arguments must have orthonormal columns (possibly zero columns).
    """
    u = _as_matrix(u, "U")
    v = _as_matrix(v, "V")
    if u.shape[0] != v.shape[0]:
        raise LinAlgError("row dimension mismatch")
    if v.shape[1] == 0:
        return True
    resid = v - u @ (u.conj().T @ v)
    return spectral_norm(resid) <= tol


# -----------------------
# Homogeneous (PSD, PSD) generalized eigenproblem
# -----------------------

@dataclass(frozen=True)
class GenEigHomogeneous:
    pairs: list          # (nu, mu) with nu^2 + mu^2 = 1; mu = 0 marks infinite
    eigenvectors: np.ndarray   # columns aligned to pairs, infinite first
    finite_count: int

    @property
    def infinite_count(self) -> int:
        return len(self.pairs) - self.finite_count


_DEFLATE_TOL = 1e-10  # PSD clipping scale: |lambda| <= 1e-10 * ||Y|| counts as zero


def gen_eig_homogeneous(a, b) -> GenEigHomogeneous:
    """Eigenpairs <nu, mu> of mu*A x = nu*B x for a PSD pair (A, B).

    The common null space N(A) & N(B) is deflated first (those directions
    carry no eigenvalue information); directions annihilated by B but not A
    come out as infinite eigenvalues (mu = 0, listed first), the rest reduce
    to a definite problem through the Schur complement of A on N(B).
    """
    a = _as_hermitian(a, "A")
    b = _as_hermitian(b, "B")
    if a.shape != b.shape:
        raise LinAlgError(f"dimension mismatch {a.shape} vs {b.shape}")
    n = a.shape[0]

    e0 = orthonormal_range(np.hstack([a, b]), tol=_DEFLATE_TOL)
    d = e0.shape[1]
    if d == 0:
        return GenEigHomogeneous([], np.zeros((n, 0), dtype=np.complex128), 0)

    ad = e0.conj().T @ a @ e0
    bd = e0.conj().T @ b @ e0
    ad = 0.5 * (ad + ad.conj().T)
    bd = 0.5 * (bd + bd.conj().T)

    bres = herm_eig(bd)
    bvals = np.maximum(bres.eigenvalues, 0.0)  # PSD clip
    bcut = _DEFLATE_TOL * max(bvals[0], np.abs(ad).max(), 1e-300)
    keep = bvals > bcut
    u1 = bres.eigenvectors[:, keep]
    u0 = bres.eigenvectors[:, ~keep]

    inf_vecs = e0 @ u0
    pairs = [(1.0, 0.0)] * u0.shape[1]

    fin_vals = np.zeros(0)
    fin_vecs = np.zeros((n, 0), dtype=np.complex128)
    if u1.shape[1]:
        a11 = u1.conj().T @ ad @ u1
        b11 = np.diag(bvals[keep]).astype(np.complex128)
        if u0.shape[1]:
            a10 = u1.conj().T @ ad @ u0
            a00 = u0.conj().T @ ad @ u0
            # A is positive definite on N(B) once the common null is gone
            corr = solve_hpd(0.5 * (a00 + a00.conj().T), a10.conj().T)
            a11 = a11 - a10 @ corr
        res = gen_eig_hpd(0.5 * (a11 + a11.conj().T), b11)
        y = res.eigenvectors
        x = u1 @ y
        if u0.shape[1]:
            x = x - u0 @ (corr @ y)
        x = e0 @ x
        x = x / np.sqrt(np.sum(np.abs(x) ** 2, axis=0).real)
        fin_vals = np.maximum(res.eigenvalues, 0.0)
        fin_vecs = x

    vecs = np.hstack([inf_vecs, fin_vecs])
    for lam in fin_vals:
        nu = float(lam) / math.hypot(lam, 1.0)
        mu = 1.0 / math.hypot(lam, 1.0)
        if mu <= 1e-8:  # chordal scale-free infinity threshold
            pairs.append((1.0, 0.0))
        else:
            pairs.append((nu, mu))
    finite_count = sum(1 for (_, mu) in pairs if mu > 0.0)
    return GenEigHomogeneous(pairs, vecs, finite_count)


# -----------------------
# Simultaneous diagonalization
# -----------------------

def simultaneous_diag(phi_delta, w):
    """Nonsingular T with T^H Phi_Delta T = diag(Gamma), T^H W T = I.

    Gamma holds the generalized eigenvalues of (Phi_Delta, W), descending.
    """
    res = gen_eig_hpd(phi_delta, w)
    return res.eigenvectors, res.eigenvalues


# -----------------------
# Gerschgorin disks
# -----------------------

@dataclass(frozen=True)
class GerschgorinDisk:
    center: complex
    radius: float
    row_index: int


def gerschgorin(m) -> list:
    """Row disks (center M[i,i], radius = deleted absolute row sum)."""
    m = _as_matrix(m, "M")
    if m.shape[0] != m.shape[1]:
        raise LinAlgError("M must be square")
    disks = []
    for i in range(m.shape[0]):
        r = float(np.sum(np.abs(m[i, :]))) - abs(m[i, i])
        disks.append(GerschgorinDisk(complex(m[i, i]), max(r, 0.0), i))
    return disks


def in_disk_union(z: complex, disks) -> bool:
    return any(abs(z - d.center) <= d.radius + 1e-12 * (1.0 + abs(d.center) + d.radius)
               for d in disks)


# -----------------------
# f(x) radius function and Crawford number
# -----------------------

def f_bound(x: float, delta: float) -> float:
    """Eigenvalue-displacement radius factor f(x) for coupling strength delta.

    Feasible x lie outside the open band (1-2*gamma_minus, 1+2*gamma_plus)
    with gamma_pm = sqrt(delta^2+delta) +- delta; inside the band the two
    competing disks cannot be separated and InfeasibleBoundError is raised.
    """
    if not 0.0 <= delta < 1.0:
        raise LinAlgError(f"delta must be in [0,1), got {delta}")
    root = math.sqrt(delta * delta + delta)
    g_minus = root - delta
    g_plus = root + delta
    slack = 1e-12 * max(1.0, abs(x))
    if (1.0 - 2.0 * g_minus + slack) < x < (1.0 + 2.0 * g_plus - slack):
        raise InfeasibleBoundError(
            f"x={x} inside forbidden band ({1 - 2 * g_minus}, {1 + 2 * g_plus})")
    disc = (1.0 - x) ** 2 - 4.0 * delta * abs(x)
    f = 0.5 * (1.0 - x - math.sqrt(max(disc, 0.0)))
    return abs(f)


def _lambda_min(m: np.ndarray) -> float:
    return float(herm_eig(m).eigenvalues[-1])


def crawford(a, b, e0=None) -> float:
    """Crawford number: min over unit x of hypot(x^H A x, x^H B x).

    If e0 (orthonormal columns) is given the minimization runs over unit
    vectors in its range. Computed through the support-function
    characterization max(0, max_theta lambda_min(A cos t + B sin t)) on a
    720-point grid with golden-section refinement; a nonpositive scan means
    the origin lies in the (convex) joint numerical range, i.e. C = 0.
    """
    a = _as_hermitian(a, "A")
    b = _as_hermitian(b, "B")
    if a.shape != b.shape:
        raise LinAlgError(f"dimension mismatch {a.shape} vs {b.shape}")
    if e0 is not None:
        e0 = _as_matrix(e0, "E0")
        a = e0.conj().T @ a @ e0
        b = e0.conj().T @ b @ e0
        a = 0.5 * (a + a.conj().T)
        b = 0.5 * (b + b.conj().T)
    n = a.shape[0]
    if n == 0:
        return 0.0
    if n == 1:
        return math.hypot(a[0, 0].real, b[0, 0].real)

    def h(theta: float) -> float:
        return _lambda_min(math.cos(theta) * a + math.sin(theta) * b)

    grid = np.linspace(0.0, 2.0 * math.pi, 720, endpoint=False)
    vals = np.array([h(t) for t in grid])
    i = int(np.argmax(vals))
    if vals[i] <= 0.0:
        return 0.0

    # golden-section refinement of the scan maximum
    step = grid[1] - grid[0]
    lo, hi = grid[i] - step, grid[i] + step
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = h(x1), h(x2)
    for _ in range(40):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = h(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = h(x1)
    return max(0.0, max(f1, f2, float(vals[i])))
