"""Layered transceiver planning and symbol-level verification.

Builds successive-interference-cancellation (SIC), dirty-paper (DPC), and
confidential-broadcast stream plans from joint triangularizations of the
effective MMSE channel matrices, and verifies their analytic SINRs, rates,
and leakage with a seeded Monte Carlo simulator using Gaussian signaling.

Random codebooks are modeled by fresh i.i.d. CN(0, 1) symbols per channel
use (real and imaginary parts N(0, 1/2) each); correctness is checked at
the SINR/mutual-information level.  All randomness is drawn from
counter-based Philox substreams keyed by (seed, kind, stream, chunk), so
runs are bit-reproducible and chunks may be evaluated concurrently.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .decomp import gmd, gsvd_triangular, qr, require_unitary, svd
from .errors import DomainError, InsufficientSamples
from .secrecy import (
    LB_GSV_TOL,
    effective_mmse_matrix,
    matrix_sqrt,
    secrecy_capacity_cov,
)

LN2 = np.log(2.0)

PRECODER_MODES = ("gsvd", "svd_eve", "svd_bob", "gmd_bob")

_CHUNK = 1 << 14
_KIND_SYMBOL = 0
_KIND_NOISE = 1


@dataclass(frozen=True)
class SicPlan:
    """Layered-SIC plan for a point-to-point MIMO link.

    ``va`` precodes the unit-power stream symbols, ``b_sqrt`` colors them,
    ``u_tilde`` combines at the receiver, and ``t_tilde`` is the effective
    feedback matrix whose strictly upper part drives the cancellation.
    """

    va: np.ndarray
    b_sqrt: np.ndarray
    u_tilde: np.ndarray
    t_tilde: np.ndarray
    diag_b: np.ndarray
    sinr: np.ndarray
    rates_bits: np.ndarray

    @property
    def num_streams(self):
        return self.diag_b.size


@dataclass(frozen=True)
class WiretapPlan:
    """Wiretap stream plan on top of a SIC plan for the legitimate user."""

    base: SicPlan
    diag_e: np.ndarray
    secret_rates_bits: np.ndarray
    fictitious_rates_bits: np.ndarray
    mode: str

    @property
    def snr_pairs(self):
        """Per-stream (legitimate, eavesdropper) SNR pairs."""
        return np.stack([self.base.diag_b ** 2 - 1.0, self.diag_e ** 2 - 1.0], axis=1)


@dataclass(frozen=True)
class DpcPlan:
    """Layered-DPC plan: successive encoding with ideal presubtraction.

    ``rates_bits``, ``fictitious_rates_bits`` and ``rates_u_bits`` are the
    per-stream secret, fictitious, and auxiliary-codebook rates, computed
    from the Gaussian mutual informations of the auxiliary variables
    ``u_k = t_kk x_k + alpha_k * (known interference)``.
    """

    base: WiretapPlan
    alpha: np.ndarray
    rates_bits: np.ndarray
    fictitious_rates_bits: np.ndarray
    rates_u_bits: np.ndarray

    @property
    def presubtraction_rows(self):
        """Strictly upper-triangular known-interference coefficients."""
        return np.triu(self.base.base.t_tilde, 1)


@dataclass(frozen=True)
class BroadcastPlan:
    """Confidential broadcast split: first ``lb`` streams to the first user."""

    lb: int
    lc: int
    va: np.ndarray
    b_sqrt: np.ndarray
    diag_b: np.ndarray
    diag_c: np.ndarray
    bob_combiner: np.ndarray
    charlie_combiner: np.ndarray
    bob_feedback: np.ndarray
    charlie_feedback: np.ndarray
    bob_rates_bits: np.ndarray
    charlie_rates_bits: np.ndarray


@dataclass(frozen=True)
class SimulationReport:
    """Empirical-versus-analytic summary of one simulation run."""

    scheme: str
    samples: int
    seed: int
    genie: bool
    sinr_empirical: np.ndarray
    sinr_analytic: np.ndarray
    sinr_rel_error: np.ndarray
    sinr_stderr: np.ndarray
    mi_bits: float
    leakage_bits: np.ndarray | None = None
    leakage_expected: np.ndarray | None = None
    leakage_stderr: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    def within_bands(self):
        """True when every empirical value sits inside 3 standard errors."""
        ok = np.all(np.abs(self.sinr_empirical - self.sinr_analytic)
                    <= 3.0 * self.sinr_stderr + 1e-12)
        if self.leakage_bits is not None:
            ok = ok and np.all(np.abs(self.leakage_bits - self.leakage_expected)
                               <= 3.0 * self.leakage_stderr + 1e-12)
        return bool(ok)


def select_precoder(h_b, h_e, k, mode):
    """Choose the right unitary precoder for a joint triangularization.

    ``gsvd`` maximizes the diagonal ratios, ``svd_eve`` diagonalizes the
    eavesdropper's factor, ``svd_bob`` the legitimate one (no SIC needed),
    and ``gmd_bob`` equalizes the legitimate diagonal (no bit loading).
    """
    if mode not in PRECODER_MODES:
        raise DomainError(f"unknown precoder mode {mode!r}; expected one of {PRECODER_MODES}")
    b = matrix_sqrt(k)
    g_b = effective_mmse_matrix(h_b, b)
    g_e = effective_mmse_matrix(h_e, b)
    if mode == "gsvd":
        return gsvd_triangular(g_b, g_e).va
    if mode == "svd_eve":
        return svd(g_e).v
    if mode == "svd_bob":
        return svd(g_b).v
    return gmd(g_b).v


def build_sic_plan(h_b, k, va):
    """Layered-SIC plan for channel ``h_b`` under input covariance ``k``.

    Triangularizes the effective MMSE matrix with right factor ``va``; the
    per-stream SINRs satisfy ``1 + sinr_i = diag_b_i**2`` and the rates sum
    to the Gaussian mutual information of the link.
    """
    h_b = np.asarray(h_b, dtype=complex)
    va = require_unitary(va, "precoder")
    b = matrix_sqrt(k)
    g = effective_mmse_matrix(h_b, b)
    if va.shape[0] != g.shape[1]:
        raise DomainError("precoder dimension must match the transmit dimension")
    fac = qr(g @ va)
    n = g.shape[1]
    n_b = h_b.shape[0]
    diag_b = fac.diagonal
    u_tilde = fac.u[:n_b, :n]
    t_tilde = u_tilde.conj().T @ h_b @ b @ va
    noise_cov = u_tilde.conj().T @ u_tilde
    diag_tt = np.abs(np.diag(t_tilde))
    lower_power = np.array([np.sum(np.abs(t_tilde[i, :i]) ** 2) for i in range(n)])
    denom = np.real(np.diag(noise_cov)) + lower_power
    sinr = np.where(denom > 0.0, diag_tt ** 2 / np.where(denom > 0.0, denom, 1.0), 0.0)
    rates = 2.0 * np.log2(diag_b)
    return SicPlan(va=va, b_sqrt=b, u_tilde=u_tilde, t_tilde=t_tilde,
                   diag_b=diag_b, sinr=sinr, rates_bits=rates)


def build_wiretap_plan(h_b, h_e, kbar, mode, epsilon=0.0):
    """Wiretap plan under constraint ``kbar`` with the chosen precoder mode.

    Uses the optimal covariance for the constraint, so the per-stream
    diagonal ratios never fall below 1 and the secret rates sum to the
    secrecy capacity for every mode.  ``epsilon`` is the rate back-off per
    stream (doubled in ``svd_eve`` mode, where the fictitious rate runs
    above the eavesdropper MI instead of below).
    """
    result = secrecy_capacity_cov(h_b, h_e, kbar)
    k = result.k_star
    va = select_precoder(h_b, h_e, k, mode)
    base = build_sic_plan(h_b, k, va)
    g_e = effective_mmse_matrix(np.asarray(h_e, dtype=complex), base.b_sqrt)
    diag_e = qr(g_e @ va).diagonal
    log_ratio = 2.0 * (np.log2(base.diag_b) - np.log2(diag_e))
    if mode == "svd_eve":
        secret = np.maximum(log_ratio - 2.0 * epsilon, 0.0)
        fictitious = 2.0 * np.log2(diag_e) + epsilon
    else:
        secret = np.maximum(log_ratio - epsilon, 0.0)
        fictitious = 2.0 * np.log2(diag_e) - epsilon
    return WiretapPlan(base=base, diag_e=diag_e, secret_rates_bits=secret,
                       fictitious_rates_bits=fictitious, mode=mode)


def _conditional_mi_bits(cov, idx_a, idx_b, idx_c):
    """I(a; b | c) in bits for circularly-symmetric Gaussians.

    Zero-variance coordinates are dropped (they carry no information but
    would make the log-determinants singular).
    """
    variances = np.real(np.diag(cov))
    scale = max(variances.max(), 1.0)
    alive = variances > 1e-15 * scale

    def logdet(indices):
        indices = [i for i in indices if alive[i]]
        if not indices:
            return 0.0
        sub = cov[np.ix_(indices, indices)]
        _, value = np.linalg.slogdet((sub + sub.conj().T) / 2.0)
        return value

    return (logdet(idx_a + idx_c) + logdet(idx_b + idx_c)
            - logdet(idx_a + idx_b + idx_c) - logdet(idx_c)) / LN2


def build_dpc_plan(h_b, h_e, kbar, mode="gsvd", epsilon=0.0):
    """Layered-DPC plan; rates computed from Gaussian mutual informations.

    The auxiliary variable of stream k mixes the desired symbol with the
    known interference scaled by ``alpha_k = (b_k^2 - 1) / b_k^2``.  The
    secret rate subtracts both the auxiliary-codebook overhead and the
    genie-aided leakage, and lands on the SIC-path value stream by stream.
    """
    wt = build_wiretap_plan(h_b, h_e, kbar, mode)
    base = wt.base
    n = base.num_streams
    tt = base.t_tilde
    diag_b = base.diag_b
    # b_k >= 1 always; rounding on truncated streams can push b slightly
    # below 1, so the MMSE coefficient is clamped at 0.
    alpha = np.maximum((diag_b ** 2 - 1.0) / diag_b ** 2, 0.0)

    # Mixing matrix of the auxiliary variables: u = m @ x.
    m = np.triu(tt, 1) * alpha[:, None]
    m[np.arange(n), np.arange(n)] = np.diag(tt)

    f_e = np.asarray(h_e, dtype=complex) @ base.b_sqrt @ base.va
    n_e = f_e.shape[0]
    # Joint covariance of (u, y_e) driven by unit-power symbols x.
    cov_uu = m @ m.conj().T
    cov_ue = m @ f_e.conj().T
    cov_ee = f_e @ f_e.conj().T + np.eye(n_e)
    cov = np.block([[cov_uu, cov_ue], [cov_ue.conj().T, cov_ee]])

    # Per-stream receive scalar at the legitimate user: y_k = row k of
    # (t_tilde x + noise with covariance u_tilde' u_tilde).
    noise_cov = base.u_tilde.conj().T @ base.u_tilde
    cov_yy = tt @ tt.conj().T + noise_cov
    cov_uy = m @ tt.conj().T

    eav = list(range(n, n + n_e))
    rates_u = np.empty(n)
    fictitious = np.empty(n)
    rates = np.empty(n)
    for k in range(n):
        var_u = np.real(cov_uu[k, k])
        var_y = np.real(cov_yy[k, k])
        cross = abs(cov_uy[k, k]) ** 2
        if var_u <= 1e-15 or var_y <= 1e-15:
            rates_u[k] = 0.0
        else:
            rates_u[k] = float(np.log2(var_u * var_y / (var_u * var_y - cross)))
        tail = list(range(k + 1, n))
        fictitious[k] = _conditional_mi_bits(cov, [k], eav, tail)
        rates[k] = rates_u[k] - _conditional_mi_bits(cov, [k], eav + tail, [])
    rates_u = np.maximum(rates_u - epsilon, 0.0)
    fictitious = fictitious - epsilon
    rates = np.maximum(rates - epsilon, 0.0)
    return DpcPlan(base=wt, alpha=alpha, rates_bits=rates,
                   fictitious_rates_bits=fictitious, rates_u_bits=rates_u)


def build_broadcast_plan(h_b, h_c, kbar):
    """Confidential broadcast plan splitting the GSVD streams by ratio.

    Streams with diagonal ratio above 1 carry the first user's messages
    (combined through the upper-left block of its unitary), the rest carry
    the second user's (upper-right block); the per-user rate totals hit
    both corners of the rectangular region simultaneously.
    """
    h_b = np.asarray(h_b, dtype=complex)
    h_c = np.asarray(h_c, dtype=complex)
    b = matrix_sqrt(kbar)
    g_b = effective_mmse_matrix(h_b, b)
    g_c = effective_mmse_matrix(h_c, b)
    jt = gsvd_triangular(g_b, g_c)
    mu = jt.diag1 / jt.diag2
    n = mu.size
    lb = int(np.sum(mu * mu > 1.0 + LB_GSV_TOL))
    lc = n - lb
    n_b = h_b.shape[0]
    n_c = h_c.shape[0]
    bob_combiner = jt.u1[:n_b, :lb]
    charlie_combiner = jt.u2[:n_c, lb:n]
    bob_feedback = bob_combiner.conj().T @ h_b @ b @ jt.va
    charlie_feedback = charlie_combiner.conj().T @ h_c @ b @ jt.va
    return BroadcastPlan(
        lb=lb, lc=lc, va=jt.va, b_sqrt=b,
        diag_b=jt.diag1, diag_c=jt.diag2,
        bob_combiner=bob_combiner, charlie_combiner=charlie_combiner,
        bob_feedback=bob_feedback, charlie_feedback=charlie_feedback,
        bob_rates_bits=np.maximum(2.0 * np.log2(mu[:lb]), 0.0),
        charlie_rates_bits=np.maximum(-2.0 * np.log2(mu[lb:]), 0.0),
    )


def _thread_count():
    raw = os.environ.get("WTD_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _chunks(samples):
    sizes = []
    left = samples
    while left > 0:
        sizes.append(min(_CHUNK, left))
        left -= sizes[-1]
    return sizes


def _gaussian_rows(seed, kind, streams, chunk_index, size):
    """CN(0, 1) rows, one Philox substream per (seed, kind, stream, chunk)."""
    out = np.empty((streams, size), dtype=complex)
    for s in range(streams):
        gen = np.random.Generator(
            np.random.Philox(np.random.SeedSequence((seed, kind, s, chunk_index))))
        out[s] = (gen.standard_normal(size) + 1j * gen.standard_normal(size)) * np.sqrt(0.5)
    return out


def _map_chunks(worker, samples):
    sizes = _chunks(samples)
    threads = _thread_count()
    jobs = list(enumerate(sizes))
    if threads == 1:
        return [worker(c, size) for c, size in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: worker(*job), jobs))


def _check_samples(samples):
    if samples < 1:
        raise DomainError("at least one sample is required")
    return int(samples)


def simulate_sic(plan, h_b, samples, seed, genie=True):
    """Symbol-level check of a SIC plan against its analytic SINRs.

    Streams are decoded last to first; with ``genie=True`` the feedback uses
    the true symbols (correct past decisions), otherwise each symbol is
    reconstructed by its scaled MMSE estimate before being fed back.
    """
    samples = _check_samples(samples)
    h_b = np.asarray(h_b, dtype=complex)
    n = plan.num_streams
    n_b = h_b.shape[0]
    f = h_b @ plan.b_sqrt @ plan.va
    ut_h = plan.u_tilde.conj().T
    tt = plan.t_tilde
    diag_tt = np.diag(tt)
    # MMSE reconstruction gain per stream; zero-rate streams estimate 0.
    recon = np.where(plan.sinr > 1e-12, diag_tt.conj() / np.maximum(plan.sinr, 1e-12), 0.0)

    def worker(chunk_index, size):
        x = _gaussian_rows(seed, _KIND_SYMBOL, n, chunk_index, size)
        z = _gaussian_rows(seed, _KIND_NOISE, n_b, chunk_index, size)
        yt = ut_h @ (f @ x + z)
        feedback = x if genie else np.zeros_like(x)
        power_x = np.empty(n)
        power_r = np.empty(n)
        for i in range(n - 1, -1, -1):
            y_prime = yt[i] - tt[i, i + 1:] @ feedback[i + 1:]
            if not genie:
                feedback[i] = recon[i] * y_prime
            resid = y_prime - diag_tt[i] * x[i]
            power_x[i] = np.sum(np.abs(x[i]) ** 2)
            power_r[i] = np.sum(np.abs(resid) ** 2)
        return power_x, power_r, size

    results = _map_chunks(worker, samples)
    sum_x = np.sum([r[0] for r in results], axis=0)
    sum_r = np.sum([r[1] for r in results], axis=0)
    total = sum(r[2] for r in results)
    gain = np.abs(diag_tt) ** 2
    sinr_emp = np.where(sum_r > 0.0, gain * sum_x / np.where(sum_r > 0.0, sum_r, 1.0), 0.0)
    analytic = plan.sinr
    rel = np.abs(sinr_emp - analytic) / np.maximum(analytic, 1e-12)
    stderr = sinr_emp * np.sqrt(2.0 / total)
    mi = float(np.sum(np.log2(1.0 + sinr_emp)))
    return SimulationReport(
        scheme="sic", samples=total, seed=seed, genie=genie,
        sinr_empirical=sinr_emp, sinr_analytic=analytic,
        sinr_rel_error=rel, sinr_stderr=stderr, mi_bits=mi)


def _blocked_conditional_mi(cov_blocks, idx_a, idx_b, idx_c):
    values = [_conditional_mi_bits(cov, idx_a, idx_b, idx_c) for cov in cov_blocks]
    values = np.asarray(values)
    stderr = values.std(ddof=1) / np.sqrt(len(values)) if len(values) > 1 else 0.0
    return float(values.mean()), float(stderr)


def simulate_leakage(plan, h_e, samples, seed, blocks=10):
    """Estimate the per-stream leakage of a wiretap plan at the eavesdropper.

    Computes the Gaussian conditional mutual information between each
    stream symbol and the eavesdropper output given the later symbols, from
    the empirical joint covariance; its analytic value is the fictitious
    rate ``log2 e_k^2``.  Standard errors come from block-wise estimates.
    """
    samples = _check_samples(samples)
    h_e = np.asarray(h_e, dtype=complex)
    base = plan.base
    n = base.num_streams
    n_e = h_e.shape[0]
    dim = n + n_e
    if samples < 10 * dim * dim:
        raise InsufficientSamples(
            f"need at least {10 * dim * dim} samples for a {dim}-dimensional covariance")
    f = h_e @ base.b_sqrt @ base.va
    # Each chunk is split into the block grid, so the batch-means standard
    # error exists even when everything fits in a single chunk.
    blocks = max(2, min(blocks, samples // (10 * dim)))

    def worker(chunk_index, size):
        x = _gaussian_rows(seed, _KIND_SYMBOL, n, chunk_index, size)
        z = _gaussian_rows(seed, _KIND_NOISE, n_e, chunk_index, size)
        v = np.concatenate([x, f @ x + z], axis=0)
        pieces = np.array_split(v, blocks, axis=1)
        return [(p @ p.conj().T, p.sum(axis=1), p.shape[1]) for p in pieces]

    results = _map_chunks(worker, samples)
    acc = [[np.zeros((dim, dim), dtype=complex), np.zeros(dim, dtype=complex), 0]
           for _ in range(blocks)]
    for chunk_pieces in results:
        for j, (second, first, size) in enumerate(chunk_pieces):
            acc[j][0] += second
            acc[j][1] += first
            acc[j][2] += size
    used = [slot for slot in acc if slot[2] > 0]

    def to_cov(second, first, count):
        mean = first / count
        return second / count - np.outer(mean, mean.conj())

    total_cov = to_cov(sum(s[0] for s in used), sum(s[1] for s in used), samples)
    block_covs = [to_cov(*slot) for slot in used] if len(used) > 1 else [total_cov]

    eav = list(range(n, dim))
    leak = np.empty(n)
    stderr = np.empty(n)
    for k in range(n):
        tail = list(range(k + 1, n))
        leak[k] = _conditional_mi_bits(total_cov, [k], eav, tail)
        _, stderr[k] = _blocked_conditional_mi(block_covs, [k], eav, tail)
    expected = 2.0 * np.log2(plan.diag_e)
    rel = np.abs(leak - expected) / np.maximum(np.abs(expected), 1e-12)
    return SimulationReport(
        scheme="leakage", samples=samples, seed=seed, genie=True,
        sinr_empirical=base.sinr, sinr_analytic=base.sinr,
        sinr_rel_error=np.zeros(n), sinr_stderr=np.zeros(n),
        mi_bits=float(np.sum(leak)),
        leakage_bits=leak, leakage_expected=expected, leakage_stderr=stderr,
        extras={"leakage_rel_error": rel})


def simulate_dpc(plan, h_b, samples, seed, alpha_perturbation=0.1):
    """Check a DPC plan: presubtraction SINRs and the MMSE property of alpha.

    Interference known at the transmitter is ideally presubtracted, which
    must reproduce the genie-SIC SINRs ``b_k^2 - 1``; additionally the
    residual power of the auxiliary-variable estimate must be minimized at
    ``alpha_k`` (bracket test against ``(1 +/- perturbation) alpha_k``).
    """
    samples = _check_samples(samples)
    h_b = np.asarray(h_b, dtype=complex)
    sic = plan.base.base
    n = sic.num_streams
    n_b = h_b.shape[0]
    f = h_b @ sic.b_sqrt @ sic.va
    ut_h = sic.u_tilde.conj().T
    tt = sic.t_tilde
    diag_tt = np.diag(tt)

    def worker(chunk_index, size):
        x = _gaussian_rows(seed, _KIND_SYMBOL, n, chunk_index, size)
        z = _gaussian_rows(seed, _KIND_NOISE, n_b, chunk_index, size)
        yt = ut_h @ (f @ x + z)
        power_x = np.empty(n)
        power_w = np.empty(n)
        cross_xw = np.empty(n, dtype=complex)
        for k in range(n):
            interference = tt[k, k + 1:] @ x[k + 1:]
            w = yt[k] - interference - diag_tt[k] * x[k]
            power_x[k] = np.sum(np.abs(x[k]) ** 2)
            power_w[k] = np.sum(np.abs(w) ** 2)
            cross_xw[k] = np.sum(x[k] * np.conj(w))
        return power_x, power_w, cross_xw, size

    results = _map_chunks(worker, samples)
    sum_x = np.sum([r[0] for r in results], axis=0)
    sum_w = np.sum([r[1] for r in results], axis=0)
    sum_xw = np.sum([r[2] for r in results], axis=0)
    total = sum(r[3] for r in results)

    gain = np.abs(diag_tt) ** 2
    sinr_emp = np.where(sum_w > 0.0, gain * sum_x / np.where(sum_w > 0.0, sum_w, 1.0), 0.0)
    analytic = sic.diag_b ** 2 - 1.0
    rel = np.abs(sinr_emp - analytic) / np.maximum(analytic, 1e-12)
    stderr = sinr_emp * np.sqrt(2.0 / total)

    # Residual of the scaled estimate: (1 - a) t_kk x_k - a w_k; its power
    # is a quadratic in a minimized at the MMSE coefficient.
    def residual_power(a):
        return ((1.0 - a) ** 2 * gain * sum_x / total
                + a * a * sum_w / total
                - 2.0 * a * (1.0 - a) * np.real(diag_tt * sum_xw) / total)

    at_alpha = residual_power(plan.alpha)
    below = residual_power(plan.alpha * (1.0 - alpha_perturbation))
    above = residual_power(plan.alpha * (1.0 + alpha_perturbation))
    active = plan.alpha > 1e-9
    bracket_ok = bool(np.all(at_alpha[active] < below[active])
                      and np.all(at_alpha[active] < above[active]))
    return SimulationReport(
        scheme="dpc", samples=total, seed=seed, genie=True,
        sinr_empirical=sinr_emp, sinr_analytic=analytic,
        sinr_rel_error=rel, sinr_stderr=stderr,
        mi_bits=float(np.sum(np.log2(1.0 + sinr_emp))),
        extras={
            "alpha": plan.alpha,
            "alpha_residual": at_alpha,
            "alpha_residual_below": below,
            "alpha_residual_above": above,
            "alpha_bracket_ok": bracket_ok,
        })


def simulate_broadcast(plan, h_b, h_c, samples, seed):
    """Check a broadcast plan: per-user presubtraction SINRs.

    Each user's streams are verified like the DPC check, with interference
    from later streams presubtracted using that user's feedback rows; the
    analytic values are ``diag**2 - 1`` of the owning user's factor.
    """
    samples = _check_samples(samples)
    h_b = np.asarray(h_b, dtype=complex)
    h_c = np.asarray(h_c, dtype=complex)
    n = plan.diag_b.size
    fb = h_b @ plan.b_sqrt @ plan.va
    fc = h_c @ plan.b_sqrt @ plan.va
    users = (
        (plan.bob_combiner, plan.bob_feedback, fb, h_b.shape[0], 0, plan.lb),
        (plan.charlie_combiner, plan.charlie_feedback, fc, h_c.shape[0], plan.lb, n),
    )

    def worker(chunk_index, size):
        x = _gaussian_rows(seed, _KIND_SYMBOL, n, chunk_index, size)
        power_x = np.empty(n)
        power_w = np.empty(n)
        for combiner, feedback, front, rows, start, stop in users:
            if stop == start:
                continue
            z = _gaussian_rows(seed, _KIND_NOISE + (0 if start == 0 else 1),
                               rows, chunk_index, size)
            yt = combiner.conj().T @ (front @ x + z)
            for i in range(start, stop):
                row = feedback[i - start]
                w = yt[i - start] - row[i + 1:] @ x[i + 1:] - row[i] * x[i]
                power_x[i] = np.sum(np.abs(x[i]) ** 2)
                power_w[i] = np.sum(np.abs(w) ** 2)
        return power_x, power_w, size

    results = _map_chunks(worker, samples)
    sum_x = np.sum([r[0] for r in results], axis=0)
    sum_w = np.sum([r[1] for r in results], axis=0)
    total = sum(r[2] for r in results)

    diag_fb = np.concatenate([
        np.abs(np.diag(plan.bob_feedback[:, :plan.lb])) if plan.lb else np.zeros(0),
        np.abs(np.diag(plan.charlie_feedback[:, plan.lb:])) if plan.lc else np.zeros(0),
    ])
    gain = diag_fb ** 2
    sinr_emp = np.where(sum_w > 0.0, gain * sum_x / np.where(sum_w > 0.0, sum_w, 1.0), 0.0)
    analytic = np.concatenate([plan.diag_b[:plan.lb] ** 2 - 1.0,
                               plan.diag_c[plan.lb:] ** 2 - 1.0])
    rel = np.abs(sinr_emp - analytic) / np.maximum(analytic, 1e-12)
    stderr = sinr_emp * np.sqrt(2.0 / total)
    return SimulationReport(
        scheme="broadcast", samples=total, seed=seed, genie=True,
        sinr_empirical=sinr_emp, sinr_analytic=analytic,
        sinr_rel_error=rel, sinr_stderr=stderr,
        mi_bits=float(np.sum(np.log2(1.0 + sinr_emp))),
        extras={"lb": plan.lb, "lc": plan.lc})
