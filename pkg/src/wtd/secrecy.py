"""Secrecy-capacity quantities for the MIMO wiretap and confidential
broadcast channels.

Everything is phrased through the effective MMSE channel matrices
``G(H, K) = [H K^{1/2}; I]`` of the legitimate and eavesdropper links:
their generalized singular values give the secrecy capacity under a
covariance constraint, the optimal input covariance truncates those values
at 1, and the broadcast region follows by swapping roles.  Rates are in
bits per channel use (base-2 logarithms).
"""

from dataclasses import dataclass

import numpy as np

from .decomp import gsv_values, gsvd_triangular, haar_unitary
from .errors import DomainError, NotPSD

LN2 = np.log(2.0)

#: Absolute clamp window for slightly negative eigenvalues of a PSD input.
PSD_EIG_TOL = 1e-10
#: A squared GSV must exceed ``1 + LB_GSV_TOL`` to count as an active stream.
LB_GSV_TOL = 1e-9


def _as_square(k, name):
    k = np.asarray(k, dtype=complex)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise DomainError(f"{name} must be a square matrix")
    if not np.all(np.isfinite(k)):
        raise DomainError(f"{name} entries must be finite")
    return k


def _hermitize(k):
    return (k + k.conj().T) / 2.0


@dataclass(frozen=True)
class CovarianceSpec:
    """Input covariance ``k`` with an optional constraining matrix ``kbar``.

    Both must be Hermitian PSD; when ``kbar`` is present, ``k`` must sit
    below it in the semidefinite order (within a small slack).
    """

    k: np.ndarray
    kbar: np.ndarray | None = None

    def validate(self):
        matrix_sqrt(self.k)
        if self.kbar is not None:
            matrix_sqrt(self.kbar)
            gap = np.linalg.eigvalsh(_hermitize(np.asarray(self.kbar) - np.asarray(self.k)))
            if gap.min() < -1e-8:
                raise DomainError("covariance exceeds its constraint "
                                  f"(eigenvalue gap {gap.min():.3e})")
        return self


@dataclass(frozen=True)
class SecrecyResult:
    """Secrecy capacity under a covariance constraint.

    ``gsv`` holds the channel-pair GSVs of the constraint, ``lb`` counts the
    ones above 1, ``capacity_bits`` is the clipped log-sum, and ``k_star``
    is the optimal input covariance.
    """

    gsv: np.ndarray
    lb: int
    capacity_bits: float
    k_star: np.ndarray


@dataclass(frozen=True)
class BroadcastRegion:
    """Rectangular confidential-broadcast region ``[0, rb_max] x [0, rc_max]``."""

    rb_max: float
    rc_max: float


@dataclass(frozen=True)
class TruncationReport:
    """Check of GSV truncation by the optimal covariance."""

    ok: bool
    max_deviation: float
    lb: int
    gsv_constraint: np.ndarray
    gsv_truncated: np.ndarray


@dataclass(frozen=True)
class MonotonicityReport:
    """Result of sampling the order interval below the constraint."""

    ok: bool
    samples: int
    violations: int
    max_violation: float
    witness: np.ndarray | None


@dataclass(frozen=True)
class PowerSearchResult:
    """Certified lower bound on the total-power secrecy capacity."""

    capacity_lower_bound: float
    kbar: np.ndarray
    evaluations: int


def matrix_sqrt(k):
    """Hermitian PSD square root ``b`` with ``b @ b.conj().T == k``.

    Uses the eigendecomposition route so singular inputs are fine;
    eigenvalues in ``[-1e-10, 0)`` are clamped to zero, anything lower
    raises :class:`NotPSD`.
    """
    k = _as_square(k, "covariance")
    if np.max(np.abs(k - k.conj().T)) > 1e-10 * max(1.0, np.linalg.norm(k, np.inf)):
        raise DomainError("covariance must be Hermitian")
    w, q = np.linalg.eigh(_hermitize(k))
    if w.min() < -PSD_EIG_TOL:
        raise NotPSD(f"covariance has eigenvalue {w.min():.3e} < -{PSD_EIG_TOL:g}")
    w = np.clip(w, 0.0, None)
    return (q * np.sqrt(w)[None, :]) @ q.conj().T


def effective_mmse_matrix(h, b):
    """Stack ``[h @ b; I]``; always full column rank.

    ``b`` is a square root factor of the input covariance, ``h`` the channel
    matrix; the identity block keeps every column alive even for a dead
    channel.
    """
    h = np.asarray(h, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if h.ndim != 2 or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise DomainError("channel must be 2-D and the sqrt factor square")
    if h.shape[1] != b.shape[0]:
        raise DomainError("channel columns must match the sqrt factor dimension")
    return np.concatenate([h @ b, np.eye(b.shape[0], dtype=complex)], axis=0)


def gaussian_mi(h, k):
    """Gaussian vector mutual information ``log2 det(I + h k h')`` in bits."""
    h = np.asarray(h, dtype=complex)
    k = _as_square(k, "covariance")
    m = np.eye(h.shape[0], dtype=complex) + h @ k @ h.conj().T
    _, logdet = np.linalg.slogdet(_hermitize(m))
    return float(logdet / LN2)


def secrecy_mi_difference(h_b, h_e, k):
    """Difference of the Gaussian MIs to the legitimate user and eavesdropper."""
    return gaussian_mi(h_b, k) - gaussian_mi(h_e, k)


def channel_gsv(h_b, h_e, k):
    """Channel-pair GSVs: the GSVs of the two effective MMSE matrices."""
    b = matrix_sqrt(k)
    return gsv_values(effective_mmse_matrix(h_b, b), effective_mmse_matrix(h_e, b))


def secrecy_capacity_cov(h_b, h_e, kbar):
    """Secrecy capacity under the covariance constraint ``kbar``.

    The capacity is the positive part of the log of the squared channel-pair
    GSVs of the constraint itself; the optimal covariance keeps the first
    ``lb`` coordinates (GSVs above 1) of the GSVD right factor and nullifies
    the rest.
    """
    kbar = _as_square(kbar, "constraint")
    b = matrix_sqrt(kbar)
    g_b = effective_mmse_matrix(h_b, b)
    g_e = effective_mmse_matrix(h_e, b)
    jt = gsvd_triangular(g_b, g_e)
    mu = jt.diag1 / jt.diag2
    log_sq = 2.0 * np.log2(mu)
    capacity = float(np.sum(np.maximum(log_sq, 0.0)))
    lb = int(np.sum(mu * mu > 1.0 + LB_GSV_TOL))
    selector = np.zeros(mu.size)
    selector[:lb] = 1.0
    k_star = _hermitize((b @ jt.va) * selector[None, :] @ (b @ jt.va).conj().T)
    return SecrecyResult(gsv=mu, lb=lb, capacity_bits=capacity, k_star=k_star)


def verify_truncation(h_b, h_e, kbar, tol=1e-7):
    """Check that the optimal covariance clips the GSVs at 1.

    The GSVs under ``k_star`` must match those under the constraint for the
    active streams and equal 1 for the rest; deviations are reported, not
    raised.
    """
    res = secrecy_capacity_cov(h_b, h_e, kbar)
    truncated = channel_gsv(h_b, h_e, res.k_star)
    expected = np.where(np.arange(truncated.size) < res.lb, res.gsv, 1.0)
    deviation = float(np.max(np.abs(truncated - expected)))
    return TruncationReport(
        ok=deviation <= tol,
        max_deviation=deviation,
        lb=res.lb,
        gsv_constraint=res.gsv,
        gsv_truncated=truncated,
    )


def _sample_below(b, rng):
    # Random Hermitian contraction (Haar eigenbasis, eigenvalues uniform on
    # [0, 1]) sandwiched between square-root factors of the constraint.
    n = b.shape[0]
    q = haar_unitary(n, rng)
    w = (q * rng.uniform(0.0, 1.0, n)[None, :]) @ q.conj().T
    return _hermitize(b @ w @ b.conj().T)


def sample_constrained_covariance(kbar, rng):
    """Draw a covariance in the order interval between 0 and ``kbar``."""
    kbar = _as_square(kbar, "constraint")
    return _sample_below(matrix_sqrt(kbar), rng)


def gsv_monotonicity_check(h_b, h_e, kbar, samples, seed):
    """Sample covariances below the constraint; log-GSVs must shrink.

    For every sampled ``k`` in the order interval the i-th sorted
    ``|log gsv|`` under the constraint must dominate the one under ``k``
    (slack 1e-8); violations are reported with a witness.
    """
    if samples < 1:
        raise DomainError("at least one sample is required")
    reference = np.abs(np.log2(channel_gsv(h_b, h_e, kbar)))
    b = matrix_sqrt(_as_square(kbar, "constraint"))
    rng = np.random.default_rng(seed)
    violations = 0
    worst = 0.0
    witness = None
    for _ in range(samples):
        k = _sample_below(b, rng)
        current = np.abs(np.log2(channel_gsv(h_b, h_e, k)))
        slack = float(np.min(reference - current))
        if slack < -1e-8:
            violations += 1
            if -slack > worst:
                worst = -slack
                witness = k
    return MonotonicityReport(
        ok=violations == 0,
        samples=samples,
        violations=violations,
        max_violation=worst,
        witness=witness,
    )


def broadcast_region(h_b, h_c, kbar):
    """Rectangular capacity region of the two-user confidential broadcast.

    The first corner sums the positive log-squared GSVs, the second the
    negative ones; swapping the channel roles inverts the GSVs and swaps
    the corners.
    """
    mu = channel_gsv(h_b, h_c, kbar)
    log_sq = 2.0 * np.log2(mu)
    return BroadcastRegion(
        rb_max=float(np.sum(np.maximum(log_sq, 0.0))),
        rc_max=float(np.sum(np.maximum(-log_sq, 0.0))),
    )


def scalar_secrecy_capacity(h_b, h_e):
    """Single-antenna unit-power secrecy capacity in bits."""
    gain = (1.0 + abs(h_b) ** 2) / (1.0 + abs(h_e) ** 2)
    return max(0.0, float(np.log2(gain)))


def power_constrained_capacity(h_b, h_e, power, budget=400, seed=0):
    """Best-effort secrecy capacity under a total power constraint.

    Maximizes the covariance-constrained capacity over trace-``power``
    constraints by random restarts plus a local (1+1) evolution search on a
    factor parameterization.  Every candidate is evaluated exactly, so the
    returned value is a certified lower bound, non-decreasing in ``budget``
    for a fixed seed.
    """
    h_b = np.asarray(h_b, dtype=complex)
    h_e = np.asarray(h_e, dtype=complex)
    if power <= 0:
        raise DomainError("total power must be positive")
    if budget < 1:
        raise DomainError("budget must be at least 1")
    n = h_b.shape[1]
    rng = np.random.default_rng(seed)

    def normalized(f):
        k = f @ f.conj().T
        trace = np.real(np.trace(k))
        if trace <= 0.0:
            return np.eye(n) * (power / n)
        return _hermitize(k * (power / trace))

    def evaluate(k):
        return secrecy_capacity_cov(h_b, h_e, k).capacity_bits

    best_k = np.eye(n, dtype=complex) * (power / n)
    best_c = evaluate(best_k)
    best_f = matrix_sqrt(best_k)
    evaluations = 1

    def consider(k):
        nonlocal best_c, best_k, best_f, evaluations
        c = evaluate(k)
        evaluations += 1
        if c > best_c:
            best_c, best_k, best_f = c, k, matrix_sqrt(k)
            return True
        return False

    # Beamforming along the strongest generalized eigendirection of the two
    # links is the natural single-stream candidate.
    try:
        pencil = np.linalg.solve(np.eye(n) + h_e.conj().T @ h_e,
                                 np.eye(n) + h_b.conj().T @ h_b)
        w, vecs = np.linalg.eig(pencil)
        v = vecs[:, np.argmax(np.real(w))]
        if evaluations < budget:
            consider(normalized(np.sqrt(power) * np.outer(v / np.linalg.norm(v),
                                                          np.eye(1, n)[0])))
    except np.linalg.LinAlgError:
        pass

    # Exploration: fresh random factors.
    explore = max(0, min(budget - evaluations, budget // 4))
    for _ in range(explore):
        f = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        consider(normalized(f))

    # Refinement: (1+1) evolution search around the incumbent with a
    # multiplicatively adapted step, never restarted.
    step = 0.5
    while evaluations < budget:
        noise = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        f = best_f + step * np.sqrt(power / (2.0 * n)) * noise
        if consider(normalized(f)):
            step *= 1.8
        else:
            step *= 0.87
        step = min(max(step, 1e-9), 2.0)
    return PowerSearchResult(capacity_lower_bound=best_c, kbar=best_k,
                             evaluations=evaluations)
