"""Gap-amplified OR measurement: alternate-projector amplification, exact
acceptance oracles and the two high-level wrappers (sequential-measurement
property test and witness-register de-Merlinization).

The amplification procedure, given a Naimark form (Pi, Delta) of an accept
operator L and a state rho:

1. prepare rho (x) |0><0|^m,
2. up to N times: measure {Pi, I - Pi} and accept on the first outcome, then
   measure {Delta, I - Delta} and accept on the second outcome,
3. otherwise reject.

Its acceptance probability has the closed form
sum_i |alpha_i|^2 [1 - (1 - lambda_i)^{2N}] over the spectrum of L, which the
exact oracles below evaluate by eigendecomposition; an independent second
oracle propagates the residual operator (Delta (I - Pi))^N directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .gates import qft_matrix
from .measurement import NaimarkForm, TwoOutcomeMeasurement, naimark_form
from .states import DensityOperator, HermitianOperator, PureState, RegisterShape, eigendecompose

POVM_RANGE_ATOL = 1e-10
WEIGHT_ATOL = 1e-14


@dataclass(frozen=True)
class MWInstance:
    """One amplification run: a Naimark form, an input state and a round count."""

    naimark: NaimarkForm
    initial: PureState | DensityOperator
    n_rounds: int

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ValueError("round count must be >= 1")
        if self.initial.shape != self.naimark.system_shape:
            raise ValueError("initial state must live on the pre-ancilla system space")


@dataclass(frozen=True)
class MWResult:
    accepted: bool
    rounds_used: int
    halting_step: str | None  # "pi", "delta", or None when rejected


def _sample_pure_vector(
    initial: PureState | DensityOperator, rng: np.random.Generator
) -> np.ndarray:
    """A pure amplitude vector; mixed inputs sample their eigen-ensemble."""
    if isinstance(initial, PureState):
        return initial.amplitudes
    dec = eigendecompose(initial.matrix)
    weights = np.clip(dec.eigenvalues, 0.0, None)
    weights = weights / weights.sum()
    idx = int(rng.choice(weights.size, p=weights))
    return dec.eigenvectors[:, idx]


def run_mw_sampled(inst: MWInstance, rng: np.random.Generator) -> MWResult:
    """Simulate one run of the amplification procedure on a Naimark form."""
    d_anc = inst.naimark.ancilla_dim
    psi = _sample_pure_vector(inst.initial, rng)
    vec = np.zeros(inst.naimark.extended_dim, dtype=np.complex128)
    vec[::d_anc] = psi  # ancilla registers start in |0...0>
    pi = inst.naimark.pi
    for r in range(1, inst.n_rounds + 1):
        hit = pi @ vec
        p_pi = float(min(1.0, max(0.0, np.vdot(vec, hit).real)))
        if rng.random() < p_pi:
            return MWResult(True, r, "pi")
        vec = vec - hit
        vec /= np.linalg.norm(vec)
        kept = vec.reshape(-1, d_anc)[:, 0]
        p_delta = float(min(1.0, max(0.0, np.vdot(kept, kept).real)))
        if rng.random() >= p_delta:
            return MWResult(True, r, "delta")
        vec = np.zeros_like(vec)
        vec[::d_anc] = kept / math.sqrt(p_delta)
    return MWResult(False, inst.n_rounds, None)


def run_mw_sampled_batch(inst: MWInstance, rng: np.random.Generator, trials: int) -> int:
    """Vectorised accept count over independent trials of :func:`run_mw_sampled`.

    Consumes the generator in a fixed order (initial-state choice, then per
    round one uniform per live trial for each of the two measurements), so a
    given (instance, seed, trials) triple is reproducible.
    """
    d_anc = inst.naimark.ancilla_dim
    d_ext = inst.naimark.extended_dim
    if isinstance(inst.initial, PureState):
        psis = np.tile(inst.initial.amplitudes, (trials, 1))
    else:
        dec = eigendecompose(inst.initial.matrix)
        weights = np.clip(dec.eigenvalues, 0.0, None)
        weights /= weights.sum()
        idx = rng.choice(weights.size, p=weights, size=trials)
        psis = dec.eigenvectors[:, idx].T
    states = np.zeros((trials, d_ext), dtype=np.complex128)
    states[:, ::d_anc] = psis
    alive = np.ones(trials, dtype=bool)
    accepted = 0
    pi_t = inst.naimark.pi.T
    for _ in range(inst.n_rounds):
        if not alive.any():
            break
        live = states[alive]
        hit = live @ pi_t
        p_pi = np.clip(np.einsum("ij,ij->i", live.conj(), hit).real, 0.0, 1.0)
        u = rng.random(p_pi.size)
        acc_pi = u < p_pi
        accepted += int(acc_pi.sum())
        survivors = live[~acc_pi] - hit[~acc_pi]
        norms = np.linalg.norm(survivors, axis=1)
        survivors /= norms[:, None]
        kept = survivors.reshape(survivors.shape[0], -1, d_anc)[:, :, 0]
        p_delta = np.clip(np.einsum("ij,ij->i", kept.conj(), kept).real, 0.0, 1.0)
        u2 = rng.random(p_delta.size)
        acc_delta = u2 >= p_delta
        accepted += int(acc_delta.sum())
        new_states = np.zeros((int((~acc_delta).sum()), d_ext), dtype=np.complex128)
        new_states[:, ::d_anc] = kept[~acc_delta] / np.sqrt(p_delta[~acc_delta])[:, None]
        idx_alive = np.flatnonzero(alive)
        still = idx_alive[~acc_pi][~acc_delta]
        alive = np.zeros_like(alive)
        alive[still] = True
        states[still] = new_states
    return accepted


# -- exact oracles ---------------------------------------------------------------


def mw_accept_from_spectrum(
    eigenvalues: Sequence[float], weights: Sequence[float], n_rounds: int
) -> float:
    """sum_i w_i [1 - (1 - lambda_i)^{2N}] for a spectral measure of L."""
    if n_rounds < 1:
        raise ValueError("round count must be >= 1")
    total = 0.0
    for lam, w in zip(eigenvalues, weights):
        if w < WEIGHT_ATOL:
            continue
        lam = min(1.0, max(0.0, float(lam)))
        total += float(w) * (1.0 - (1.0 - lam) ** (2 * n_rounds))
    return float(min(1.0, max(0.0, total)))


def _spectral_weights(
    accept_op: HermitianOperator | np.ndarray, rho: PureState | DensityOperator
) -> tuple[np.ndarray, np.ndarray]:
    mat = accept_op.matrix if isinstance(accept_op, HermitianOperator) else np.asarray(accept_op)
    dec = eigendecompose(mat)
    if dec.eigenvalues.min() < -POVM_RANGE_ATOL or dec.eigenvalues.max() > 1 + POVM_RANGE_ATOL:
        raise ValueError("accept operator eigenvalues outside [0, 1]")
    if isinstance(rho, PureState):
        weights = np.abs(dec.eigenvectors.conj().T @ rho.amplitudes) ** 2
    else:
        weights = np.einsum(
            "ij,jk,ki->i", dec.eigenvectors.conj().T, rho.matrix, dec.eigenvectors
        ).real
    return dec.eigenvalues, np.clip(weights, 0.0, None)


def mw_accept_exact(
    accept_op: HermitianOperator | np.ndarray,
    rho: PureState | DensityOperator,
    n_rounds: int,
) -> float:
    """Exact acceptance probability via the spectral decomposition of L.

    Mixed inputs are handled by eigendecomposing rho and averaging the
    pure-state formula over the resulting ensemble (the formula is linear in
    the input state, so this is the convexity argument made literal).
    """
    if isinstance(rho, DensityOperator):
        dec = eigendecompose(rho.matrix)
        total = 0.0
        for p, vec in zip(dec.eigenvalues, dec.eigenvectors.T):
            if p < WEIGHT_ATOL:
                continue
            evals, weights = _spectral_weights(accept_op, PureState(rho.shape, vec))
            total += float(p) * mw_accept_from_spectrum(evals, weights, n_rounds)
        return float(min(1.0, max(0.0, total)))
    evals, weights = _spectral_weights(accept_op, rho)
    return mw_accept_from_spectrum(evals, weights, n_rounds)


def mw_accept_survival(inst: MWInstance) -> float:
    """Second oracle: 1 - |(Delta (I - Pi))^N |psi, 0^m>|^2 on the extended space.

    Independent of :func:`mw_accept_exact` (no spectral decomposition of L);
    mixed inputs propagate the extended density operator instead.
    """
    pi = inst.naimark.pi
    delta = inst.naimark.delta
    kraus = delta @ (np.eye(pi.shape[0]) - pi)
    d_anc = inst.naimark.ancilla_dim
    if isinstance(inst.initial, PureState):
        vec = np.zeros(inst.naimark.extended_dim, dtype=np.complex128)
        vec[::d_anc] = inst.initial.amplitudes
        for _ in range(inst.n_rounds):
            vec = kraus @ vec
        survival = float(np.vdot(vec, vec).real)
    else:
        d_sys = inst.naimark.system_shape.total_dim
        zero = np.zeros((d_anc, d_anc))
        zero[0, 0] = 1.0
        tau = np.kron(inst.initial.matrix, zero)
        for _ in range(inst.n_rounds):
            tau = kraus @ tau @ kraus.conj().T
        survival = float(np.trace(tau).real)
    return float(min(1.0, max(0.0, 1.0 - survival)))


def mw_bounds(
    accept_op: HermitianOperator | np.ndarray,
    rho: PureState | DensityOperator,
    n_rounds: int,
) -> tuple[float, float]:
    """The sandwich (1 - 1/e) tr(P_{>=1/2N} rho) <= p_acc <= 2N tr(L rho)."""
    evals, weights = _spectral_weights(accept_op, rho)
    threshold = 1.0 / (2.0 * n_rounds)
    mass = float(weights[evals >= threshold].sum())
    lower = (1.0 - math.exp(-1.0)) * mass
    mean = float(np.dot(np.clip(evals, 0.0, 1.0), weights))
    upper = min(1.0, 2.0 * n_rounds * mean)
    return lower, upper


# -- sequential-measurement property test (the OR wrapper) -------------------------


def _exact_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(float(x))  # exact binary value of the float


def or_round_count(n: int, epsilon) -> int:
    """N = ceil(n / (1 - eps)), evaluated in exact rational arithmetic."""
    eps = _exact_fraction(epsilon)
    if not 0 <= eps <= Fraction(1, 2):
        raise ValueError("epsilon must lie in [0, 1/2]")
    return math.ceil(Fraction(n) / (1 - eps))


def _averaged_operator(measurements: Sequence[TwoOutcomeMeasurement]) -> HermitianOperator:
    shape = measurements[0].shape
    mean = sum(m.accept_op.matrix for m in measurements) / len(measurements)
    return HermitianOperator(shape, mean)


def run_averaged_or_sampled(
    appliers: Sequence[Callable[[np.ndarray], np.ndarray]],
    initial: PureState | DensityOperator,
    n_rounds: int,
    rng: np.random.Generator,
) -> MWResult:
    """Amplification run for an averaged projector family, matrix-free.

    Pi = sum_i L_{i+1} (x) Q|i><i|Q^{-1} is applied structurally: Fourier
    transform the ancilla column index, apply the i-th projector to column i,
    transform back.  Only per-projector matvecs are needed, so instances are
    limited by state-vector size rather than dense-operator size.  Draw order
    per round: one uniform for the Pi measurement, then one for Delta.
    """
    n = len(appliers)
    if n == 0:
        raise ValueError("need at least one measurement")
    psi = _sample_pure_vector(initial, rng)
    d_sys = psi.size
    q = qft_matrix(n)
    q_inv_t = q.conj()  # (Q^{-1}).T = conj(Q) for the symmetric QFT matrix
    q_t = q  # Q.T = Q
    cols = np.zeros((d_sys, n), dtype=np.complex128)
    cols[:, 0] = psi
    for r in range(1, n_rounds + 1):
        a = cols @ q_inv_t
        b = np.empty_like(a)
        for i in range(n):
            b[:, i] = appliers[i](np.ascontiguousarray(a[:, i]))
        hit = b @ q_t
        p_pi = float(min(1.0, max(0.0, np.vdot(cols, hit).real)))
        if rng.random() < p_pi:
            return MWResult(True, r, "pi")
        cols = cols - hit
        cols /= np.linalg.norm(cols)
        kept = cols[:, 0]
        p_delta = float(min(1.0, max(0.0, np.vdot(kept, kept).real)))
        if rng.random() >= p_delta:
            return MWResult(True, r, "delta")
        cols = np.zeros_like(cols)
        cols[:, 0] = kept / math.sqrt(p_delta)
    return MWResult(False, n_rounds, None)


def or_test(
    measurements: Sequence[TwoOutcomeMeasurement],
    rho: PureState | DensityOperator,
    epsilon,
    rng: np.random.Generator,
) -> bool:
    """One amplification run on the averaged projector family, N = ceil(n/(1-eps)).

    Guarantees (verified through the exact oracle, not per run): an input
    accepted by some measurement with probability >= 1 - eps accepts with
    probability >= (1-eps)^2/7; an input with mean acceptance <= delta accepts
    with probability <= 4 delta n.
    """
    for m in measurements:
        if not m.is_projector:
            raise ValueError("or_test requires projective measurements")
    n_rounds = or_round_count(len(measurements), epsilon)
    appliers = [
        (lambda v, mat=m.accept_op.matrix: mat @ v) for m in measurements
    ]
    result = run_averaged_or_sampled(appliers, rho, n_rounds, rng)
    return result.accepted


def or_test_accept_exact(
    measurements: Sequence[TwoOutcomeMeasurement],
    rho: PureState | DensityOperator,
    epsilon,
) -> float:
    """Exact acceptance probability of :func:`or_test` on this instance."""
    n_rounds = or_round_count(len(measurements), epsilon)
    return mw_accept_exact(_averaged_operator(measurements), rho, n_rounds)


# -- de-Merlinization --------------------------------------------------------------


def merlin_slice_operators(gamma: HermitianOperator) -> list[HermitianOperator]:
    """The operators on the message space induced by fixing each witness basis state.

    The last register of gamma's shape is the witness register; slice j is
    (I (x) <j|) Gamma (I (x) |j>).
    """
    dims = gamma.shape.dims
    if len(dims) < 2:
        raise ValueError("gamma must act on a message (x) witness system")
    d = dims[-1]
    sys_shape = RegisterShape(dims[:-1])
    return [HermitianOperator(sys_shape, gamma.matrix[j::d, j::d].copy()) for j in range(d)]


def merlin_best_witness_accept(gamma: HermitianOperator, psi: PureState) -> float:
    """max over witness states sigma of tr Gamma (psi (x) sigma).

    Equals the top eigenvalue of the witness-side operator obtained by
    contracting Gamma with |psi><psi| on the message side.
    """
    dims = gamma.shape.dims
    d = dims[-1]
    d_sys = gamma.shape.total_dim // d
    if psi.shape.total_dim != d_sys:
        raise ValueError("psi must live on the message space")
    g = gamma.matrix.reshape(d_sys, d, d_sys, d)
    t = np.einsum("a,abcd,c->bd", psi.amplitudes.conj(), g, psi.amplitudes)
    return float(np.linalg.eigvalsh(0.5 * (t + t.conj().T)).max())


def demerlinize_round_count(d: int, eta) -> int:
    """N = ceil(d / eta) in exact rational arithmetic."""
    eta_f = _exact_fraction(eta)
    if not 0 < eta_f <= 1:
        raise ValueError("eta must lie in (0, 1]")
    return math.ceil(Fraction(d) / eta_f)


def demerlinize_operator(gamma: HermitianOperator) -> HermitianOperator:
    """The averaged accept operator (1/d) sum_j Gamma_j on the message space."""
    slices = merlin_slice_operators(gamma)
    mean = sum(s.matrix for s in slices) / len(slices)
    return HermitianOperator(slices[0].shape, mean)


def demerlinize_test(
    gamma: HermitianOperator, psi: PureState, eta, rng: np.random.Generator
) -> bool:
    """Search the witness register by amplification instead of trusting it.

    Runs the amplification procedure once on the averaged slice operator with
    N = ceil(d/eta).  A gamma that accepts psi with some witness at
    probability >= eta leads to acceptance with probability >= eta^2/7; if no
    witness reaches zeta the acceptance probability is at most
    2 zeta ceil(d/eta).
    """
    evals = np.linalg.eigvalsh(gamma.matrix)
    if evals.min() < -POVM_RANGE_ATOL or evals.max() > 1 + POVM_RANGE_ATOL:
        raise ValueError("gamma is not in [0, I]")
    lam = demerlinize_operator(gamma)
    d = gamma.shape.dims[-1]
    n_rounds = demerlinize_round_count(d, eta)
    is_proj = bool(np.abs(lam.matrix @ lam.matrix - lam.matrix).max() <= 1e-8)
    measurement = TwoOutcomeMeasurement(lam, is_projector=is_proj)
    inst = MWInstance(naimark_form(measurement), psi, n_rounds)
    return run_mw_sampled(inst, rng).accepted


def demerlinize_accept_exact(gamma: HermitianOperator, psi: PureState, eta) -> float:
    """Exact acceptance probability of :func:`demerlinize_test`."""
    lam = demerlinize_operator(gamma)
    d = gamma.shape.dims[-1]
    return mw_accept_exact(lam, psi, demerlinize_round_count(d, eta))
