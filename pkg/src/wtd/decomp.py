"""Unitary single- and joint-matrix triangularizations.

Covers QR/QL, SVD, the generalized triangular decomposition (GTD) with a
prescribed diagonal, the geometric mean decomposition (GMD), generalized
singular values, the GSVD in diagonal and triangular form, and joint
triangularization of a matrix pair under an arbitrary right unitary factor.

Conventions used throughout:

* only full-column-rank matrices with at least as many rows as columns are
  accepted;
* triangular factors carry strictly positive real diagonals, with phases
  absorbed into the unitary factors;
* triangular shape is exact: entries below the diagonal are stored as
  zeros, not left as rounding noise.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, MajorizationError, NumericalFailure, RankDeficient

#: Relative tolerance for reconstruction residuals guaranteed by this module.
RECONSTRUCTION_RTOL = 1e-9
#: Relative slack used when testing multiplicative majorization.
MAJORIZATION_RTOL = 1e-9
#: Diagonal entries below ``RANK_RTOL * ||A||_2`` flag rank deficiency.
RANK_RTOL = 1e-12

_UNITARY_ATOL = 1e-8


@dataclass(frozen=True)
class GtdFactors:
    """Factors ``a = u @ t @ v.conj().T`` with generalized upper-triangular t."""

    u: np.ndarray
    t: np.ndarray
    v: np.ndarray

    @property
    def diagonal(self):
        """Real positive diagonal of the triangular factor."""
        return np.real(np.diag(self.t))

    def reconstruct(self):
        return self.u @ self.t @ self.v.conj().T


@dataclass(frozen=True)
class QlFactors:
    """Factors ``a = u @ l`` with lower-triangular l and positive diagonal."""

    u: np.ndarray
    l: np.ndarray

    @property
    def diagonal(self):
        return np.real(np.diag(self.l))

    def reconstruct(self):
        return self.u @ self.l


@dataclass(frozen=True)
class GsvdDiagonalFactors:
    """Diagonal-form GSVD ``a_k = u_k @ l_k @ x.conj().T``.

    ``l1`` and ``l2`` are generalized diagonal with positive diagonals
    normalized so that ``l1'l1 + l2'l2 = I``; the diagonal ratios are the
    generalized singular values in non-increasing order.
    """

    u1: np.ndarray
    u2: np.ndarray
    x: np.ndarray
    l1: np.ndarray
    l2: np.ndarray

    @property
    def gsv(self):
        return np.real(np.diag(self.l1)) / np.real(np.diag(self.l2))


@dataclass(frozen=True)
class JointTriangularization:
    """Shared-right-unitary triangularization of a matrix pair.

    ``a_k = u_k @ t_k @ va.conj().T`` with both ``t_k`` generalized upper
    triangular; ``diag1`` and ``diag2`` are their positive diagonals.
    """

    u1: np.ndarray
    u2: np.ndarray
    va: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    diag1: np.ndarray
    diag2: np.ndarray

    @property
    def diag_ratios(self):
        return self.diag1 / self.diag2


def _as_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DomainError(f"{name} must be a 2-D array with positive dimensions")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} entries must be finite")
    return a


def _require_tall(a, name="matrix"):
    if a.shape[0] < a.shape[1]:
        raise DomainError(f"{name} must have at least as many rows as columns")


def require_unitary(q, name="matrix", atol=_UNITARY_ATOL):
    """Validate that ``q`` is square and unitary within ``atol``."""
    q = _as_matrix(q, name)
    if q.shape[0] != q.shape[1]:
        raise DomainError(f"{name} must be square to be unitary")
    gram = q.conj().T @ q
    if np.max(np.abs(gram - np.eye(q.shape[0]))) > atol:
        raise DomainError(f"{name} is not unitary within {atol:g}")
    return q


def _positive_diagonal(u, t):
    """Rescale so diag(t) is real positive, absorbing phases into u columns."""
    u = u.copy()
    t = t.copy()
    k = min(t.shape)
    d = np.diag(t)[:k]
    phases = np.ones(k, dtype=complex)
    nz = np.abs(d) > 0.0
    phases[nz] = d[nz] / np.abs(d[nz])
    t[:k, :] *= phases.conj()[:, None]
    u[:, :k] *= phases[None, :]
    t[np.arange(k), np.arange(k)] = np.abs(d)
    return u, t


def _check_full_rank(diag, scale, name="matrix"):
    if scale == 0.0 or np.min(diag) <= RANK_RTOL * scale:
        raise RankDeficient(f"{name} is rank deficient (diagonal {np.min(diag):.3e} "
                            f"vs threshold {RANK_RTOL * scale:.3e})")


def qr(a):
    """QR decomposition, returned as :class:`GtdFactors` with ``v = I``.

    The triangular factor has a strictly positive real diagonal; a diagonal
    entry below ``1e-12 * ||a||_2`` raises :class:`RankDeficient`.
    """
    a = _as_matrix(a)
    _require_tall(a)
    u, t = np.linalg.qr(a, mode="complete")
    u, t = _positive_diagonal(u, t)
    t = np.triu(t)
    _check_full_rank(np.real(np.diag(t)), np.linalg.norm(a, 2))
    return GtdFactors(u=u, t=t, v=np.eye(a.shape[1], dtype=complex))


def ql(a):
    """QL decomposition ``a = u @ l`` with lower-triangular ``l``.

    Equivalent to Gram-Schmidt over the columns from last to first.  For a
    tall input the nonzero block of ``l`` sits in the top ``n`` rows.
    """
    a = _as_matrix(a)
    _require_tall(a)
    m, n = a.shape
    q, r = np.linalg.qr(a[:, ::-1], mode="complete")
    l = np.zeros((m, n), dtype=complex)
    l[:n, :] = np.tril(r[:n, ::-1][::-1, :])
    u = np.concatenate([q[:, :n][:, ::-1], q[:, n:]], axis=1)
    u, l = _positive_diagonal(u, l)
    _check_full_rank(np.real(np.diag(l)), np.linalg.norm(a, 2))
    return QlFactors(u=u, l=l)


def svd(a):
    """Singular value decomposition as :class:`GtdFactors` with diagonal t."""
    a = _as_matrix(a)
    _require_tall(a)
    try:
        u, s, vh = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    t = np.zeros(a.shape, dtype=complex)
    t[np.arange(len(s)), np.arange(len(s))] = s
    return GtdFactors(u=u, t=t, v=vh.conj().T)


def _sorted_log_prefix_gaps(x, y):
    """Prefix-sum gaps of sorted log(x) over sorted log(y), both descending."""
    lx = np.sort(np.log(x))[::-1]
    ly = np.sort(np.log(y))[::-1]
    return np.cumsum(lx) - np.cumsum(ly)


def _first_majorization_violation(x, y, rel_tol):
    """Return the 1-based first violating prefix length, or None if x >= y."""
    gaps = _sorted_log_prefix_gaps(x, y)
    for ell in range(len(gaps) - 1):
        if gaps[ell] < -rel_tol:
            return ell + 1
    if abs(gaps[-1]) > rel_tol:
        return len(gaps)
    return None


def majorizes(x, y, rel_tol=MAJORIZATION_RTOL):
    """Multiplicative majorization test ``x >= y``.

    True iff the sorted prefix products of ``x`` dominate those of ``y`` and
    the total products agree to relative ``rel_tol``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape or x.size == 0:
        raise DomainError("majorization needs two equal-length 1-D vectors")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise DomainError("majorization is defined for positive entries only")
    return _first_majorization_violation(x, y, rel_tol) is None


def _swap_streams(u, v, t, i, j):
    # Simultaneous row+column permutation of t, mirrored in u and v.  Safe
    # while the trailing block of t is still diagonal.
    if i == j:
        return
    t[:, [i, j]] = t[:, [j, i]]
    v[:, [i, j]] = v[:, [j, i]]
    t[[i, j], :] = t[[j, i], :]
    u[:, [i, j]] = u[:, [j, i]]


def gtd(a, t):
    """Generalized triangular decomposition with prescribed diagonal ``t``.

    Exists iff the singular values of ``a`` multiplicatively majorize ``t``;
    otherwise :class:`MajorizationError` reports the first violating prefix.
    The construction permutes the SVD and applies a chain of paired 2x2
    rotations, one per diagonal entry.
    """
    a = _as_matrix(a)
    _require_tall(a)
    target = np.asarray(t, dtype=float)
    n = a.shape[1]
    if target.shape != (n,):
        raise DomainError(f"target diagonal must have length {n}")
    if np.any(target <= 0.0):
        raise DomainError("target diagonal entries must be positive")

    f = svd(a)
    sigma = f.diagonal
    _check_full_rank(sigma, sigma[0] if sigma.size else 0.0)
    violation = _first_majorization_violation(sigma, target, MAJORIZATION_RTOL)
    if violation is not None:
        raise MajorizationError(
            f"singular values do not majorize the target diagonal "
            f"(first violating prefix length {violation})",
            prefix_index=violation)

    u = f.u.copy()
    tmat = f.t.copy()
    v = f.v.copy()
    for k in range(n - 1):
        tk = target[k]
        d = np.real(np.diag(tmat))
        # Bracket tk between the closest remaining diagonal values: the
        # smallest one >= tk and the largest one < tk.  The fallbacks only
        # trigger at the tolerance boundary of the majorization test.
        rest = np.arange(k, n)
        above = rest[d[rest] >= tk]
        below = rest[d[rest] < tk]
        p = above[np.argmin(d[above])] if above.size else rest[np.argmax(d[rest])]
        below = below[below != p]
        others = rest[rest != p]
        q = below[np.argmax(d[below])] if below.size else others[np.argmin(np.abs(d[others] - tk))]
        _swap_streams(u, v, tmat, k, p)
        _swap_streams(u, v, tmat, k + 1, p if q == k else q)
        if np.real(tmat[k, k]) < np.real(tmat[k + 1, k + 1]):
            _swap_streams(u, v, tmat, k, k + 1)

        d1 = float(np.real(tmat[k, k]))
        d2 = float(np.real(tmat[k + 1, k + 1]))
        if d1 - d2 <= 1e-13 * d1:
            c, s = 1.0, 0.0
        else:
            c2 = (tk * tk - d2 * d2) / (d1 * d1 - d2 * d2)
            c = np.sqrt(min(max(c2, 0.0), 1.0))
            s = np.sqrt(max(1.0 - c * c, 0.0))
        teff = np.hypot(d1 * c, d2 * s)
        g2 = np.array([[c, -s], [s, c]])
        g1 = np.array([[d1 * c, -d2 * s], [d2 * s, d1 * c]]) / teff
        cols = [k, k + 1]
        tmat[:, cols] = tmat[:, cols] @ g2
        v[:, cols] = v[:, cols] @ g2
        tmat[cols, :] = g1.T @ tmat[cols, :]
        u[:, cols] = u[:, cols] @ g1
        tmat[k + 1, k] = 0.0
        tmat[k, k] = np.real(tmat[k, k])
    tmat[n - 1, n - 1] = np.real(tmat[n - 1, n - 1])
    return GtdFactors(u=u, t=tmat, v=v)


def gmd(a):
    """Geometric mean decomposition: GTD with a constant diagonal."""
    a = _as_matrix(a)
    _require_tall(a)
    s = np.linalg.svd(a, compute_uv=False)
    _check_full_rank(s, s[0] if s.size else 0.0)
    mean = float(np.exp(np.mean(np.log(s))))
    return gtd(a, np.full(a.shape[1], mean))


def _whitened_pair_matrix(a1, a2):
    """Return (chol, m) with ``m = L^-1 (a1'a1) L^-dagger`` for ``a2'a2 = L L'``."""
    k1 = a1.conj().T @ a1
    k2 = a2.conj().T @ a2
    # Rank is checked on a2 itself: forming the Gram matrix squares the
    # conditioning, which would hide exact rank loss from the Cholesky.
    r2 = np.linalg.qr(a2, mode="r")
    _check_full_rank(np.abs(np.diag(r2)), np.linalg.norm(a2, 2),
                     "second matrix of the pair")
    try:
        chol = np.linalg.cholesky(k2)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient("second matrix of the pair is rank deficient") from exc
    half = scipy.linalg.solve_triangular(chol, k1, lower=True)
    m = scipy.linalg.solve_triangular(chol, half.conj().T, lower=True)
    return chol, (m + m.conj().T) / 2.0


def _check_pair(a1, a2):
    a1 = _as_matrix(a1, "first matrix")
    a2 = _as_matrix(a2, "second matrix")
    if a1.shape[1] != a2.shape[1]:
        raise DomainError("matrix pair must share the column count")
    _require_tall(a1, "first matrix")
    _require_tall(a2, "second matrix")
    return a1, a2


def gsv_values(a1, a2):
    """Generalized singular values of the pair, non-increasing.

    Computed through the equivalent Hermitian generalized eigenvalue
    problem ``a1'a1 y = mu^2 a2'a2 y`` after a Cholesky whitening by
    ``a2'a2``.
    """
    a1, a2 = _check_pair(a1, a2)
    _, m = _whitened_pair_matrix(a1, a2)
    vals = np.clip(np.linalg.eigvalsh(m), 0.0, None)
    return np.sqrt(vals)[::-1]


def gsvd_diagonal(a1, a2):
    """Diagonal-form GSVD of a full-column-rank pair."""
    a1, a2 = _check_pair(a1, a2)
    # The construction divides by the GSVs, so a rank-deficient first matrix
    # must be rejected as well.
    r1 = np.linalg.qr(a1, mode="r")
    _check_full_rank(np.abs(np.diag(r1)), np.linalg.norm(a1, 2),
                     "first matrix of the pair")
    chol, m = _whitened_pair_matrix(a1, a2)
    lam, z = np.linalg.eigh(m)
    lam = np.clip(lam[::-1], 0.0, None)
    z = z[:, ::-1]
    mu = np.sqrt(lam)
    y = scipy.linalg.solve_triangular(chol.conj().T, z, lower=False)
    scale = np.sqrt(1.0 + lam)
    x = (chol @ z) * scale[None, :]

    n = a1.shape[1]
    u1 = _complete_unitary((a1 @ y) / mu[None, :])
    u2 = _complete_unitary(a2 @ y)
    l1 = np.zeros((a1.shape[0], n), dtype=complex)
    l2 = np.zeros((a2.shape[0], n), dtype=complex)
    l1[np.arange(n), np.arange(n)] = mu / scale
    l2[np.arange(n), np.arange(n)] = 1.0 / scale
    return GsvdDiagonalFactors(u1=u1, u2=u2, x=x, l1=l1, l2=l2)


def _complete_unitary(q):
    """Extend orthonormal columns to a full unitary basis."""
    m, n = q.shape
    if m == n:
        return q
    full, _ = np.linalg.qr(q, mode="complete")
    return np.concatenate([q, full[:, n:]], axis=1)


def gsvd_triangular(a1, a2):
    """Triangular-form GSVD: shared right unitary, diagonal ratios = GSVs.

    Obtained from the diagonal form by a QL decomposition of its invertible
    right factor.
    """
    diag_form = gsvd_diagonal(a1, a2)
    qlf = ql(diag_form.x)
    t_core = qlf.l.conj().T
    t1 = diag_form.l1 @ t_core
    t2 = diag_form.l2 @ t_core
    core_diag = np.real(np.diag(t_core))
    return JointTriangularization(
        u1=diag_form.u1,
        u2=diag_form.u2,
        va=qlf.u,
        t1=t1,
        t2=t2,
        diag1=np.real(np.diag(diag_form.l1)) * core_diag,
        diag2=np.real(np.diag(diag_form.l2)) * core_diag,
    )


def joint_triangularize(a1, a2, va):
    """Joint triangularization of a pair under a caller-chosen right unitary.

    Both triangular factors are the QR factors of ``a_k @ va``; the product
    of each squared diagonal equals ``det(a_k' a_k)``.
    """
    a1, a2 = _check_pair(a1, a2)
    va = require_unitary(va, "right factor")
    if va.shape[0] != a1.shape[1]:
        raise DomainError("right factor dimension must match the column count")
    f1 = qr(a1 @ va)
    f2 = qr(a2 @ va)
    return JointTriangularization(
        u1=f1.u, u2=f2.u, va=va, t1=f1.t, t2=f2.t,
        diag1=f1.diagonal, diag2=f2.diagonal)


def haar_unitary(n, rng):
    """Draw an n x n unitary from the Haar distribution."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))[None, :]
