"""Prony-type spectral estimation from cleaned Hankel channels.

Each cleaned channel sequence is a mixture of exponentials whose bases
are the distinct operator-spectrum values folded onto that channel by
aliasing.  We estimate the model order by a numerical rank test, fit the
annihilating (linear-prediction) polynomial in the least-squares sense,
take companion-matrix roots, and assemble the per-channel root sets into
the full length-d spectrum.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cyclic import idft
from .dynamics import Spectrum
from .hankel import HankelChannel, lift, numerical_rank

IMAG_TOL = 1e-6


@dataclass
class ChannelRoots:
    """Annihilating-polynomial fit for one Fourier channel."""

    j: int
    order: int
    coefficients: np.ndarray  # c with p(x) = x^r + sum_l c[l] x^l
    roots: np.ndarray
    residual: float = 0.0
    has_complex_roots: bool = False


@dataclass
class SpectrumEstimate:
    """Assembled length-d spectrum estimate."""

    d: int
    values: np.ndarray
    per_channel: dict[int, ChannelRoots]
    assignment_mode: str
    warnings: list[str] = field(default_factory=list)


def estimate_order(H: np.ndarray, tau_rel: float = 1e-8, m: int | None = None) -> int:
    """Model order from a numerical rank test, clamped to [1, m]."""
    r = numerical_rank(H, tau_rel)
    if r == 0:
        raise ValueError("zero matrix has no model order")
    if m is not None and r > m:
        warnings.warn(f"estimated order {r} exceeds m={m}; clamping")
        r = m
    return max(r, 1)


def annihilating_coeffs(H: np.ndarray, r: int):
    """Least-squares linear-prediction coefficients.

    Solves H[:, :r] c = -H[:, r] so that the recurrence
    s_{k+r} + sum_l c_l s_{k+l} = 0 holds for all available rows.
    Returns (c, residual) with the relative recurrence residual.
    """
    K = H.shape[0]
    if K <= r:
        raise ValueError("need K > r")
    A = H[:, :r]
    b = -H[:, r]
    rank_needed = r
    c, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < rank_needed:
        warnings.warn("rank-deficient linear-prediction system; "
                      "minimum-norm solution returned")
    res = np.linalg.norm(A @ c - b)
    scale = max(np.linalg.norm(b), 1e-300)
    return c, float(res / scale)


def companion_matrix(c: np.ndarray) -> np.ndarray:
    """Companion matrix of the monic polynomial x^r + sum_l c_l x^l."""
    c = np.asarray(c)
    r = c.size
    C = np.zeros((r, r), dtype=np.complex128)
    if r > 1:
        C[1:, :-1] = np.eye(r - 1)
    C[:, -1] = -c
    return C


def polynomial_roots(c: np.ndarray) -> np.ndarray:
    """Roots of the monic polynomial via companion-matrix eigenvalues."""
    c = np.asarray(c, dtype=np.complex128)
    if c.size == 0:
        return np.empty(0, dtype=np.complex128)
    return np.linalg.eigvals(companion_matrix(c))


def realify_roots(roots: np.ndarray, imag_tol: float = IMAG_TOL):
    """Replace near-real roots by their real parts.

    The true spectrum is real; roots whose imaginary part exceeds
    imag_tol * (1 + |Re|) are kept complex and flagged, since they
    indicate recovery failure.
    """
    roots = np.asarray(roots, dtype=np.complex128)
    near_real = np.abs(roots.imag) <= imag_tol * (1.0 + np.abs(roots.real))
    out = np.where(near_real, roots.real + 0.0j, roots)
    return out, bool(np.any(~near_real))


def channel_roots(ch: HankelChannel, tau_rel: float = 1e-8,
                  m: int | None = None, order: int | None = None) -> ChannelRoots:
    """Full per-channel Prony step: order, coefficients, realified roots."""
    H = lift(ch.sequence, ch.K)
    r = order if order is not None else estimate_order(H, tau_rel, m=m)
    c, res = annihilating_coeffs(H, r)
    roots, flagged = realify_roots(polynomial_roots(c))
    if flagged:
        warnings.warn(f"channel {ch.j}: persistent complex roots "
                      "(recovery likely failed)")
    return ChannelRoots(j=ch.j, order=r, coefficients=c, roots=roots,
                        residual=res, has_complex_roots=flagged)


def refine_roots(seq: np.ndarray, roots: np.ndarray,
                 mask: np.ndarray | None = None, iters: int = 200,
                 lam0: float = 1e-3) -> np.ndarray:
    """Levenberg-Marquardt refinement of real exponential bases.

    Treats the sequence as sum_k amp_k * root_k^ell with the (complex)
    amplitudes eliminated by least squares at every step (variable
    projection with the Kaufman-projected Jacobian), and takes damped
    Gauss-Newton steps in the real roots.  ``mask`` restricts the fit to
    the entries where it is True (e.g. the uncorrupted measurements, so
    the residual is white and the fit is a proper maximum-likelihood
    polish).  Damping keeps unidentifiable roots (modes below the noise
    floor) near their initial values instead of letting them drift along
    flat directions of the cost.  Returns the refined roots; the input
    is the fallback whenever a step fails or produces non-finite values.
    """
    roots = np.real(np.asarray(roots, dtype=np.complex128)).astype(float)
    if roots.size == 0:
        return roots
    seq = np.asarray(seq, dtype=np.complex128)
    n = seq.size
    ell = np.arange(n)
    if mask is None:
        mask = np.ones(n, dtype=bool)
    y = seq[mask]
    if y.size <= roots.size:
        return roots

    def resid_amps(r):
        with np.errstate(over="ignore", invalid="ignore"):
            B = r[None, :] ** ell[:, None]
        B[0, :] = 1.0
        Bm = B[mask]
        if not np.all(np.isfinite(Bm)):
            return None, None, None
        Q, _ = np.linalg.qr(Bm)
        amps, *_ = np.linalg.lstsq(Bm, y, rcond=None)
        return y - Bm @ amps, amps, Q

    res, amps, Q = resid_amps(roots)
    if res is None:
        return roots
    cost = np.linalg.norm(res)
    lam = lam0
    for _ in range(iters):
        with np.errstate(over="ignore", invalid="ignore"):
            P = roots[None, :] ** np.maximum(ell[:, None] - 1, 0)
        Jc = (amps[None, :] * ell[:, None] * P)[mask]
        Jc = Jc - Q @ (Q.conj().T @ Jc)
        if not np.all(np.isfinite(Jc)):
            break
        J = np.vstack([Jc.real, Jc.imag])
        rr = np.concatenate([res.real, res.imag])
        JtJ = J.T @ J
        Jtr = J.T @ rr
        diag = np.diag(JtJ).copy()
        diag[diag <= 0] = 1.0
        stepped = False
        for _ in range(25):
            try:
                delta = np.linalg.solve(JtJ + lam * np.diag(diag), Jtr)
            except np.linalg.LinAlgError:
                return roots
            cand = roots + delta
            res2, amps2, Q2 = resid_amps(cand)
            if res2 is not None and np.linalg.norm(res2) < cost:
                stepped = True
                break
            lam *= 10.0
            if lam > 1e12:
                break
        if not stepped:
            break
        roots, res, amps, Q = cand, res2, amps2, Q2
        prev_cost, cost = cost, np.linalg.norm(res2)
        lam = max(lam * 0.3, 1e-12)
        if np.linalg.norm(delta) < 1e-14 * (1.0 + np.linalg.norm(roots)):
            break
        if prev_cost - cost < 1e-15 * prev_cost:
            break
    return roots


def _folded(k: int, d: int) -> int:
    return min(k % d, (-k) % d)


def _channel_slots(j: int, d: int, m: int) -> list[int]:
    J = d // m
    return [(j + n * J) % d for n in range(m)]


def _match_average(r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """Average two root multisets under the optimal (min squared error)
    matching; used to couple mirror channels j and J-j."""
    if r1.size != r2.size:
        return r1
    best, best_cost = None, np.inf
    for perm in itertools.permutations(range(r2.size)):
        cost = np.sum(np.abs(r1 - r2[list(perm)]) ** 2)
        if cost < best_cost:
            best_cost, best = cost, r2[list(perm)]
    return (r1 + best) / 2.0


def _pad_roots(vals: np.ndarray, want: int) -> np.ndarray:
    """Pad a short root list by duplicating the nearest (last sorted) root."""
    if vals.size >= want:
        return vals[:want]
    warnings.warn(f"root count {vals.size} below expected {want}; padding")
    pad = np.full(want - vals.size, vals[-1] if vals.size else 0.0)
    return np.concatenate([vals, pad])


def _assign_sorted(vals: np.ndarray, slots: list[int], d: int) -> dict[int, float]:
    """Monotone-spectrum assignment: roots descending onto slots ordered
    by folded frequency ascending.  Ties broken by index order."""
    vals = np.sort(vals)[::-1]
    order = sorted(slots, key=lambda k: (_folded(k, d), k))
    return dict(zip(order, vals))


def _assign_oracle(vals: np.ndarray, slots: list[int],
                   truth: np.ndarray) -> dict[int, float]:
    """Pick the assignment of roots to slots minimizing squared error
    against the true spectrum.  Falls back to assignment with repetition
    when the root count does not match the slot count."""
    target = truth[slots]
    n = len(slots)
    if vals.size == n:
        candidates = itertools.permutations(vals)
    else:
        candidates = itertools.product(vals, repeat=n)
    best, best_cost = None, np.inf
    for cand in candidates:
        cand = np.asarray(cand)
        cost = np.sum((cand - target) ** 2)
        if cost < best_cost:
            best_cost, best = cost, cand
    return dict(zip(slots, best))


def assemble_spectrum(per_channel: dict[int, ChannelRoots], d: int, m: int,
                      mode: str = "sorted",
                      truth: Spectrum | None = None) -> SpectrumEstimate:
    """Map per-channel roots to absolute frequency indices {j + nJ}.

    ``sorted`` inverts aliasing for monotone spectra; ``oracle`` picks the
    per-channel assignment closest to the provided truth (evaluation on
    random spectra, where the within-channel assignment is not
    identifiable from data alone).  Mirror channels j and J-j are
    averaged and assigned jointly so the output is symmetric.
    """
    if mode not in ("sorted", "oracle"):
        raise ValueError(f"unknown assignment mode {mode!r}")
    if mode == "oracle" and truth is None:
        raise ValueError("oracle mode requires the true spectrum")
    J = d // m
    missing = [j for j in range(J) if j not in per_channel]
    if missing:
        raise ValueError(f"missing channels {missing}")
    notes: list[str] = []
    values = np.zeros(d)

    def real_roots(j: int) -> np.ndarray:
        return np.real(per_channel[j].roots)

    # Reference channel: index 0 plus the symmetric pairs {nJ, (m-n)J}.
    r0_expected = (m + 1) // 2 if m > 1 else 1
    roots0 = _pad_roots(np.sort(real_roots(0))[::-1], r0_expected)
    if mode == "sorted":
        values[0] = roots0[0]
        rest = roots0[1:]
    else:
        slots0 = [0] + [n * J for n in range(1, (m - 1) // 2 + 1)]
        target = truth.values[slots0]
        best, best_cost = None, np.inf
        cands = (itertools.permutations(roots0) if roots0.size == len(slots0)
                 else itertools.product(roots0, repeat=len(slots0)))
        for cand in cands:
            cand = np.asarray(cand)
            cost = np.sum((cand - target) ** 2)
            if cost < best_cost:
                best_cost, best = cost, cand
        values[0] = best[0]
        rest = best[1:]
    for n in range(1, (m - 1) // 2 + 1):
        values[n * J] = values[(m - n) * J] = rest[n - 1]

    # Paired channels j and J-j carry conjugate sequences; average their
    # root sets and assign channel j, mirroring to d-k.
    for j in range(1, (J - 1) // 2 + 1):
        rj = real_roots(j)
        rmir = real_roots(J - j)
        avg = _match_average(np.asarray(rj, dtype=np.float64),
                             np.asarray(rmir, dtype=np.float64))
        avg = _pad_roots(np.sort(avg)[::-1], m)
        slots = _channel_slots(j, d, m)
        if mode == "sorted":
            assign = _assign_sorted(avg, slots, d)
        else:
            assign = _assign_oracle(avg, slots, truth.values)
        for k, v in assign.items():
            values[k] = v
            values[(d - k) % d] = v

    flagged = [j for j, cr in per_channel.items() if cr.has_complex_roots]
    if flagged:
        notes.append(f"channels with persistent complex roots: {flagged}")
    return SpectrumEstimate(d=d, values=values, per_channel=per_channel,
                            assignment_mode=mode, warnings=notes)


def recover_filter(est: SpectrumEstimate) -> np.ndarray:
    """Filter taps a = idft(ahat); real when the estimate is symmetric."""
    a = idft(est.values.astype(np.complex128))
    return np.real(a)
