"""Entropic capacity functionals and their maximization.

Holevo quantity, coherent information and the single-shot private
information are evaluated exactly on given arguments; the maximizers run
an alternating gradient ascent with random restarts and report certified
lower-bound estimates (the returned value is always the functional
re-evaluated at the returned argument).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import qmath
from .channels import QuantumChannel, apply_channel, complementary_channel

PROB_SUM_TOL = 1e-10

# Central-difference step for all numerical gradients; eigendecompositions
# are never differentiated, only evaluated.
FD_STEP = 1e-5

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITERS = 2000
DEFAULT_RESTARTS = 8


@dataclass(frozen=True)
class Ensemble:
    """Finite list of (probability, density matrix) pairs on one space."""

    entries: tuple[tuple[float, np.ndarray], ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("ensemble must be nonempty")
        entries = tuple(
            (float(p), qmath.as_complex_matrix(rho)) for p, rho in self.entries
        )
        dim = entries[0][1].shape[0]
        total = 0.0
        for p, rho in entries:
            if p < -PROB_SUM_TOL:
                raise ValueError(f"negative ensemble probability {p}")
            if rho.shape != (dim, dim):
                raise ValueError("ensemble states must share one dimension")
            total += p
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"ensemble probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries[0][1].shape[0]


@dataclass(frozen=True)
class CqState:
    """Classical-quantum state: branch probabilities with quantum states
    whose subsystem structure is annotated by `dims`."""

    branches: tuple[tuple[float, np.ndarray], ...]
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.branches:
            raise ValueError("cq state must have at least one branch")
        dims = tuple(int(d) for d in self.dims)
        dim = int(np.prod(dims))
        branches = tuple(
            (float(p), qmath.as_complex_matrix(rho)) for p, rho in self.branches
        )
        total = 0.0
        for p, rho in branches:
            if p < -PROB_SUM_TOL:
                raise ValueError(f"negative branch probability {p}")
            if rho.shape != (dim, dim):
                raise ValueError(
                    f"branch state shape {rho.shape} does not match dims {dims}"
                )
            total += p
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"branch probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "branches", branches)
        object.__setattr__(self, "dims", dims)


@dataclass(frozen=True)
class OptimizationReport:
    """Best value found, the argument achieving it, and ascent bookkeeping.

    `value` is the functional re-evaluated at `argument`, so every report
    is a certified lower bound on the true maximum.
    """

    value: float
    argument: object
    restarts_used: int
    iterations: int
    converged: bool


# ---------------------------------------------------------------------------
# exact functionals


def holevo_quantity(n: QuantumChannel, e: Ensemble) -> float:
    """S(sum p N(rho)) - sum p S(N(rho)) in bits."""
    if e.dim != n.in_dim:
        raise ValueError(
            f"ensemble dimension {e.dim} does not match channel input {n.in_dim}"
        )
    avg = np.zeros((n.out_dim, n.out_dim), dtype=np.complex128)
    mixed = 0.0
    for p, rho in e.entries:
        out = apply_channel(n, rho)
        avg += p * out
        mixed += p * qmath.entropy_of_spectrum(np.linalg.eigvalsh(out))
    total = qmath.entropy_of_spectrum(np.linalg.eigvalsh(qmath.hermitize(avg)))
    return total - mixed


def coherent_information_state(
    rho_joint: np.ndarray, dims: Sequence[int], a_index: int
) -> float:
    """S(B) - S(AB) for subsystem `a_index` as the reference A."""
    rho_joint = qmath.as_complex_matrix(rho_joint)
    dims = tuple(int(d) for d in dims)
    if int(np.prod(dims)) != rho_joint.shape[0]:
        raise ValueError(f"dims {dims} do not factor dimension {rho_joint.shape[0]}")
    a_index = int(a_index)
    if not 0 <= a_index < len(dims):
        raise ValueError(f"a_index {a_index} out of range for {len(dims)} subsystems")
    keep = [i for i in range(len(dims)) if i != a_index]
    if not keep:
        raise ValueError("the reference subsystem cannot be the whole state")
    rho_b = qmath.partial_trace(rho_joint, dims, keep)
    s_b = qmath.entropy_of_spectrum(np.linalg.eigvalsh(qmath.hermitize(rho_b)))
    s_ab = qmath.entropy_of_spectrum(np.linalg.eigvalsh(qmath.hermitize(rho_joint)))
    return s_b - s_ab


def coherent_information_channel(n: QuantumChannel, rho: np.ndarray) -> float:
    """S(N(rho)) - S(N̂(rho)); a lower bound on quantum and private rates."""
    comp = complementary_channel(n)
    out = apply_channel(n, rho)
    env = apply_channel(comp, rho)
    s_out = qmath.entropy_of_spectrum(np.linalg.eigvalsh(out))
    s_env = qmath.entropy_of_spectrum(np.linalg.eigvalsh(env))
    return s_out - s_env


def private_information_quantity(n: QuantumChannel, e: Ensemble) -> float:
    """Holevo quantity to the receiver minus Holevo quantity to the environment."""
    return holevo_quantity(n, e) - holevo_quantity(complementary_channel(n), e)


def conditional_coherent_info(cq: CqState, a_index: int) -> float:
    """Branch-probability average of S(B) - S(AB) over a cq state."""
    total = 0.0
    for p, rho in cq.branches:
        if p == 0.0:
            continue
        total += p * coherent_information_state(rho, cq.dims, a_index)
    return total


# ---------------------------------------------------------------------------
# batched internals for the ascent


def _batched_entropy(mats: np.ndarray) -> np.ndarray:
    """Entropies in bits of a (..., n, n) stack of Hermitian PSD matrices."""
    n = mats.shape[-1]
    if n == 2:
        # Closed-form 2x2 spectrum avoids a LAPACK loop in the hot path.
        a = mats[..., 0, 0].real
        d = mats[..., 1, 1].real
        off = mats[..., 0, 1]
        disc = np.sqrt(np.maximum((a - d) ** 2 + 4.0 * (off.real**2 + off.imag**2), 0.0))
        lam = np.stack([(a + d - disc) / 2.0, (a + d + disc) / 2.0], axis=-1)
    else:
        lam = np.linalg.eigvalsh(mats)
    lam = np.where(lam > qmath.EIGENVALUE_CLIP, lam, 1.0)
    return -np.sum(lam * np.log2(lam), axis=-1)


class _ChannelStack:
    """Kraus operators stacked for batched pure-state and mixed-state maps."""

    def __init__(self, channel: QuantumChannel):
        self.kraus = np.stack(channel.kraus)  # (k, out, in)
        self.in_dim = channel.in_dim
        self.out_dim = channel.out_dim
        k, out, dim = self.kraus.shape
        self.flat = self.kraus.reshape(k * out, dim)

    def pure_outputs(self, psis: np.ndarray) -> np.ndarray:
        """(m, in) pure-state amplitudes -> (m, out, out) output states."""
        w = (self.flat @ psis.T).T.reshape(psis.shape[0], -1, self.out_dim)
        return np.einsum("mko,mkp->mop", w, w.conj())

    def mixed_outputs(self, rhos: np.ndarray) -> np.ndarray:
        """(m, in, in) states -> (m, out, out) output states."""
        return np.einsum("koa,mab,kpb->mop", self.kraus, rhos, self.kraus.conj())


def _as_pure_states(x: np.ndarray, dim: int) -> np.ndarray:
    """Rows of real parameters (…, 2 dim) -> normalized complex amplitudes."""
    psi = x[..., :dim] + 1j * x[..., dim:]
    norm = np.linalg.norm(psi, axis=-1, keepdims=True)
    return psi / norm


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    n = v.size
    a = -np.sort(-v)
    cum = (np.cumsum(a) - 1.0) / np.arange(1, n + 1)
    k = np.nonzero(a > cum)[0][-1]
    return np.maximum(v - cum[k], 0.0)


# Local-step ascent parameters: each iterate keeps a persistent step size,
# tries {s, s/2, s/4} along the projected gradient, accepts the best strictly
# improving candidate, and halves the persistent step when all fail.
_STEP_INIT = 0.25
_STEP_MAX = 0.5
_STEP_MIN = 1e-9
_STEP_GROW = 2.0
_STEP_LADDER = np.array([1.0, 0.5, 0.25])


class _Caches:
    """Per-channel running quantities for one ensemble iterate."""

    __slots__ = ("outs", "ent", "avg", "lin")

    def __init__(self, outs: np.ndarray, probs: np.ndarray):
        self.outs = outs
        self.ent = _batched_entropy(outs)
        self.refresh(probs)

    def refresh(self, probs: np.ndarray) -> None:
        self.avg = np.einsum("m,mop->op", probs, self.outs)
        self.lin = float(probs @ self.ent)

    def value(self) -> float:
        return float(_batched_entropy(self.avg[None])[0]) - self.lin

    def member_batch(self, i: int, pi: float, cand: np.ndarray) -> np.ndarray:
        """Objective contribution when member i's output becomes cand[b]."""
        vals = _batched_entropy(self.avg[None] + pi * (cand - self.outs[i][None]))
        return vals - (self.lin + pi * (_batched_entropy(cand) - self.ent[i]))

    def accept_member(self, i: int, pi: float, out: np.ndarray) -> None:
        self.avg += pi * (out - self.outs[i])
        ent = float(_batched_entropy(out[None])[0])
        self.lin += pi * (ent - self.ent[i])
        self.outs[i] = out
        self.ent[i] = ent

    def prob_gradient(self) -> np.ndarray:
        up = _batched_entropy(self.avg[None] + FD_STEP * self.outs) - FD_STEP * self.ent
        dn = _batched_entropy(self.avg[None] - FD_STEP * self.outs) + FD_STEP * self.ent
        return (up - dn) / (2.0 * FD_STEP)

    def value_at(self, probs: np.ndarray) -> float:
        avg = np.einsum("m,mop->op", probs, self.outs)
        return float(_batched_entropy(avg[None])[0]) - float(probs @ self.ent)


class _EnsembleAscent:
    """See-saw ascent over pure-state ensembles for chi or chi - chi_env."""

    def __init__(self, channel: QuantumChannel, private: bool):
        self.main = _ChannelStack(channel)
        self.comp = _ChannelStack(complementary_channel(channel)) if private else None
        self.dim = channel.in_dim

    def _outputs(self, psis: np.ndarray):
        cand = self.main.pure_outputs(psis)
        cand_c = self.comp.pure_outputs(psis) if self.comp is not None else None
        return cand, cand_c

    def _batch_values(self, i, pi, cm, cc, cand, cand_c) -> np.ndarray:
        vals = cm.member_batch(i, pi, cand)
        if cc is not None:
            vals = vals - cc.member_batch(i, pi, cand_c)
        return vals

    def _update_member(self, i, xs, probs, cm, cc, steps, value):
        """Local gradient step for member i on the unit sphere."""
        pi = probs[i]
        if pi < 1e-12:
            return value
        x = xs[i]
        npar = x.size
        eye = FD_STEP * np.eye(npar)
        pert = np.concatenate([x[None] + eye, x[None] - eye])
        cand, cand_c = self._outputs(_as_pure_states(pert, self.dim))
        vals = self._batch_values(i, pi, cm, cc, cand, cand_c)
        grad = (vals[:npar] - vals[npar:]) / (2.0 * FD_STEP)
        grad -= (grad @ x) * x  # tangent to the sphere
        gnorm = np.linalg.norm(grad)
        if gnorm < 1e-14:
            return value
        trial_x = x[None] + (steps[i] * _STEP_LADDER)[:, None] * (grad / gnorm)[None]
        trial_x /= np.linalg.norm(trial_x, axis=1, keepdims=True)
        psis = _as_pure_states(trial_x, self.dim)
        cand, cand_c = self._outputs(psis)
        vals = self._batch_values(i, pi, cm, cc, cand, cand_c)
        best = int(np.argmax(vals))
        if vals[best] <= value:
            steps[i] = max(steps[i] / 2.0, _STEP_MIN)
            return value
        steps[i] = min(steps[i] * _STEP_LADDER[best] * _STEP_GROW, _STEP_MAX)
        xs[i] = trial_x[best]
        cm.accept_member(i, pi, cand[best])
        if cc is not None:
            cc.accept_member(i, pi, cand_c[best])
        return float(vals[best])

    def _update_probs(self, probs, cm, cc, steps, value):
        grad = cm.prob_gradient()
        if cc is not None:
            grad = grad - cc.prob_gradient()
        grad -= grad.mean()  # tangent to the simplex
        gnorm = np.linalg.norm(grad)
        if gnorm < 1e-14:
            return probs, value
        best, best_v = -1, value
        trials = []
        for eta in steps[-1] * _STEP_LADDER:
            trial = _project_simplex(probs + eta * grad / gnorm)
            v = cm.value_at(trial)
            if cc is not None:
                v -= cc.value_at(trial)
            trials.append(trial)
            if v > best_v:
                best, best_v = len(trials) - 1, v
        if best < 0:
            steps[-1] = max(steps[-1] / 2.0, _STEP_MIN)
            return probs, value
        steps[-1] = min(steps[-1] * _STEP_LADDER[best] * _STEP_GROW, _STEP_MAX)
        probs = trials[best]
        cm.refresh(probs)
        if cc is not None:
            cc.refresh(probs)
        return probs, best_v

    def run_restart(self, m, rng, tol, max_iters):
        """One ascent from a random initialization.

        Returns (value, probs, psis, iterations, converged, history).
        """
        xs = rng.standard_normal((m, 2 * self.dim))
        xs /= np.linalg.norm(xs, axis=1, keepdims=True)
        probs = np.full(m, 1.0 / m)
        outs, outs_c = self._outputs(_as_pure_states(xs, self.dim))
        cm = _Caches(outs, probs)
        cc = _Caches(outs_c, probs) if outs_c is not None else None
        value = cm.value() - (cc.value() if cc is not None else 0.0)
        steps = np.full(m + 1, _STEP_INIT)  # last slot drives the simplex step
        history = [value]
        converged = False
        iters = 0
        for iters in range(1, max_iters + 1):
            prev = value
            cm.refresh(probs)  # cap incremental drift once per sweep
            if cc is not None:
                cc.refresh(probs)
            for i in range(m):
                value = self._update_member(i, xs, probs, cm, cc, steps, value)
            probs, value = self._update_probs(probs, cm, cc, steps, value)
            history.append(value)
            if value - prev < tol:
                converged = True
                break
        return value, probs, _as_pure_states(xs, self.dim), iters, converged, history


def _ensemble_from(probs: np.ndarray, psis: np.ndarray) -> Ensemble:
    probs = probs / probs.sum()
    entries = [
        (float(p), np.outer(psi, psi.conj())) for p, psi in zip(probs, psis)
    ]
    return Ensemble(tuple(entries))


def _maximize_ensemble_functional(
    n: QuantumChannel,
    m: int | None,
    restarts: int,
    tol: float,
    seed: int,
    max_iters: int,
    private: bool,
) -> OptimizationReport:
    if m is None:
        m = n.in_dim**2
    m = int(m)
    if m < n.in_dim**2:
        raise ValueError(
            f"ensemble size {m} is below the expressive minimum {n.in_dim ** 2}"
        )
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    ascent = _EnsembleAscent(n, private)
    best = None
    total_iters = 0
    for k in range(restarts):
        rng = np.random.default_rng(qmath.derive_seed(seed, k))
        value, probs, psis, iters, converged, _ = ascent.run_restart(
            m, rng, tol, max_iters
        )
        total_iters += iters
        if best is None or value > best[0]:
            best = (value, probs, psis, converged)
    ensemble = _ensemble_from(best[1], best[2])
    if private:
        value = private_information_quantity(n, ensemble)
    else:
        # chi is nonnegative for every ensemble; clip eigensolver noise.
        value = max(holevo_quantity(n, ensemble), 0.0)
    return OptimizationReport(
        value=value,
        argument=ensemble,
        restarts_used=restarts,
        iterations=total_iters,
        converged=best[3],
    )


def maximize_holevo(
    n: QuantumChannel,
    m: int | None = None,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> OptimizationReport:
    """Lower-bound estimate of the Holevo information by see-saw ascent
    over ensembles of m pure states (m defaults to in_dim^2)."""
    return _maximize_ensemble_functional(n, m, restarts, tol, seed, max_iters, False)


def maximize_private(
    n: QuantumChannel,
    m: int | None = None,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> OptimizationReport:
    """Lower-bound estimate of the single-shot private information."""
    return _maximize_ensemble_functional(n, m, restarts, tol, seed, max_iters, True)


class _CoherentAscent:
    """Gradient ascent of coherent information over full-rank input states
    parameterized as rho = L L† / Tr(L L†)."""

    def __init__(self, channel: QuantumChannel):
        self.main = _ChannelStack(channel)
        self.comp = _ChannelStack(complementary_channel(channel))
        self.dim = channel.in_dim

    def _states(self, xs: np.ndarray) -> np.ndarray:
        d = self.dim
        ls = (xs[:, : d * d] + 1j * xs[:, d * d :]).reshape(-1, d, d)
        rhos = np.einsum("mab,mcb->mac", ls, ls.conj())
        tr = np.trace(rhos, axis1=1, axis2=2).real
        return rhos / tr[:, None, None]

    def _values(self, xs: np.ndarray) -> np.ndarray:
        rhos = self._states(xs)
        return _batched_entropy(self.main.mixed_outputs(rhos)) - _batched_entropy(
            self.comp.mixed_outputs(rhos)
        )

    def run_restart(self, rng, tol, max_iters):
        d = self.dim
        npar = 2 * d * d
        x = rng.standard_normal(npar)
        x /= np.linalg.norm(x)
        value = float(self._values(x[None])[0])
        history = [value]
        converged = False
        iters = 0
        step = _STEP_INIT
        eye = FD_STEP * np.eye(npar)
        for iters in range(1, max_iters + 1):
            pert = np.concatenate([x[None] + eye, x[None] - eye])
            vals = self._values(pert)
            grad = (vals[:npar] - vals[npar:]) / (2.0 * FD_STEP)
            gnorm = np.linalg.norm(grad)
            if gnorm < 1e-14:
                converged = True
                break
            trial = x[None] + (step * _STEP_LADDER)[:, None] * (grad / gnorm)[None]
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            tvals = self._values(trial)
            best = int(np.argmax(tvals))
            if tvals[best] <= value:
                step /= 2.0
                if step < 1e-7:
                    converged = True
                    break
                continue
            gain = float(tvals[best]) - value
            step = min(step * _STEP_LADDER[best] * _STEP_GROW, _STEP_MAX)
            x, value = trial[best], float(tvals[best])
            history.append(value)
            if gain < tol:
                converged = True
                break
        return value, x, iters, converged, history


def maximize_coherent(
    n: QuantumChannel,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> OptimizationReport:
    """Lower-bound estimate of the maximal channel coherent information."""
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    ascent = _CoherentAscent(n)
    best = None
    total_iters = 0
    for k in range(restarts):
        rng = np.random.default_rng(qmath.derive_seed(seed, k))
        value, x, iters, converged, _ = ascent.run_restart(rng, tol, max_iters)
        total_iters += iters
        if best is None or value > best[0]:
            best = (value, x, converged)
    rho = qmath.hermitize(ascent._states(best[1][None])[0])
    return OptimizationReport(
        value=coherent_information_channel(n, rho),
        argument=rho,
        restarts_used=restarts,
        iterations=total_iters,
        converged=best[2],
    )
