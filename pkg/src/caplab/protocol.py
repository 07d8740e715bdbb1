"""Joint use of a fixed retro-correctable channel with an erasure channel.

Alice sends halves of two maximally entangled states through the data and
control inputs; the control purification travels through an erasure
channel. The erasure flag splits the joint coherent information exactly
into an unerased branch (worth log2 d per instance) and an erased branch,
which this module evaluates per sampled instance and averages.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import qmath
from .channels import RetroInstance, sample_retro_instance

BRANCH_TOL = 1e-9


@dataclass(frozen=True)
class BranchValues:
    """Coherent information of both erasure branches for one instance."""

    not_erased: float
    erased: float
    instance_seed: int
    d: int
    c: int

    def __post_init__(self) -> None:
        target = float(np.log2(self.d))
        if abs(self.not_erased - target) > BRANCH_TOL:
            raise ValueError(
                f"unerased branch {self.not_erased!r} deviates from log2 d = {target!r}"
            )
        if self.erased < target - np.log2(self.c) - BRANCH_TOL:
            raise ValueError(
                f"erased branch {self.erased!r} below the log2 d - log2 c floor"
            )

    def joint(self, p: float) -> float:
        """(1-p) * not_erased + p * erased."""
        return (1.0 - p) * self.not_erased + p * self.erased


@dataclass(frozen=True)
class ProtocolEstimate:
    """Monte-Carlo average of the joint coherent information over instances."""

    d: int
    c: int
    p: float
    trials: int
    mean_joint: float
    std_error: float
    mean_erased: float
    per_trial: tuple[BranchValues, ...]
    master_seed: int

    def __post_init__(self) -> None:
        expected = (1.0 - self.p) * float(np.log2(self.d)) + self.p * self.mean_erased
        if abs(self.mean_joint - expected) > BRANCH_TOL:
            raise ValueError(
                f"mean_joint {self.mean_joint!r} inconsistent with branch means"
            )


def _entangled_through(u: np.ndarray) -> np.ndarray:
    """Amplitudes of (I ⊗ U) applied to the maximally entangled pair."""
    d = u.shape[0]
    return (u.T / np.sqrt(d)).reshape(d * d)


def protocol_state(
    inst: RetroInstance, erased: bool
) -> tuple[np.ndarray, tuple[int, ...]]:
    """Joint state Alice and Bob share, conditioned on the erasure flag.

    Unerased: state on A ⊗ B1 ⊗ B3 with dims (d, d, c); the control
    purification collapses to the conjugate basis vector matching the
    hidden measurement outcome. Erased: state on A ⊗ B1 with dims (d, d),
    the uniform mixture of the unitarily rotated entangled pairs.
    """
    d, c = inst.d, inst.c
    if erased:
        state = np.zeros((d * d, d * d), dtype=np.complex128)
        for u in inst.unitaries:
            psi = _entangled_through(u)
            state += np.outer(psi, psi.conj())
        return qmath.hermitize(state / c), (d, d)
    dim = d * d * c
    state = np.zeros((dim, dim), dtype=np.complex128)
    for j, u in enumerate(inst.unitaries):
        psi = _entangled_through(u)
        collapsed = inst.basis[:, j].conj()
        block = np.kron(psi, collapsed)
        state += np.outer(block, block.conj())
    return qmath.hermitize(state / c), (d, d, c)


def branch_coherent_infos(inst: RetroInstance) -> BranchValues:
    """Coherent information of both branches, reference system A."""
    d, c = inst.d, inst.c
    unerased, dims = protocol_state(inst, erased=False)
    rho_b = qmath.partial_trace(unerased, dims, keep=[1, 2])
    s_b = qmath.entropy_of_spectrum(np.linalg.eigvalsh(rho_b))
    s_ab = qmath.entropy_of_spectrum(np.linalg.eigvalsh(unerased))
    not_erased = s_b - s_ab
    mixture, _ = protocol_state(inst, erased=True)
    erased = float(np.log2(d)) - qmath.entropy_of_spectrum(
        np.linalg.eigvalsh(mixture)
    )
    return BranchValues(
        not_erased=not_erased, erased=erased, instance_seed=inst.seed, d=d, c=c
    )


def _trial(d: int, c: int, seed: int) -> BranchValues:
    return branch_coherent_infos(sample_retro_instance(d, c, seed))


def joint_coherent_info(
    d: int,
    c: int,
    p: float,
    trials: int,
    master_seed: int,
    workers: int | None = None,
) -> ProtocolEstimate:
    """Sample `trials` instances and average the two-branch combination.

    Trial seeds derive deterministically from the master seed, so the
    estimate is reproducible for any `workers` count.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {p}")
    seeds = [qmath.derive_seed(master_seed, k) for k in range(trials)]
    if workers is not None and workers > 1 and trials > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(lambda s: _trial(d, c, s), seeds))
    else:
        per_trial = [_trial(d, c, s) for s in seeds]
    joints = np.array([bv.joint(p) for bv in per_trial])
    erased = np.array([bv.erased for bv in per_trial])
    std_error = (
        float(np.std(joints, ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    )
    return ProtocolEstimate(
        d=int(d),
        c=int(c),
        p=float(p),
        trials=int(trials),
        mean_joint=float(np.mean(joints)),
        std_error=std_error,
        mean_erased=float(np.mean(erased)),
        per_trial=tuple(per_trial),
        master_seed=int(master_seed),
    )


def joint_rate_lower_bound(
    d: int, p: float, epsilon: float, scale: float = 1.0
) -> float:
    """Closed-form floor on the joint rate at the prescribed control size:
    (1-p) log2 d - p (4 log2 log2 d + log2(scale/epsilon^2))."""
    d = int(d)
    if d < 3:
        raise ValueError(f"data dimension must be >= 3, got {d}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {p}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    log_d = np.log2(d)
    penalty = 4.0 * np.log2(np.log2(d)) + np.log2(scale / epsilon**2)
    return float((1.0 - p) * log_d - p * penalty)


def joint_rate_positive(d: int, p: float, epsilon: float, scale: float = 1.0) -> bool:
    """Whether (1-p)/p exceeds the penalty-to-rate ratio, i.e. the
    closed-form joint rate floor is positive."""
    if p <= 0.0:
        raise ValueError(f"erasure probability must be positive, got {p}")
    d = int(d)
    if d < 3:
        raise ValueError(f"data dimension must be >= 3, got {d}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    penalty = 4.0 * np.log2(np.log2(d)) + np.log2(scale / epsilon**2)
    return bool((1.0 - p) / p > penalty / np.log2(d))


def prescribed_control_dim(d: int, epsilon: float, scale: float = 1.0) -> int:
    """Control dimension for a target leakage epsilon:
    ceil((scale / epsilon^2) * d * (log2 d)^4)."""
    d = int(d)
    if d < 2:
        raise ValueError(f"data dimension must be >= 2, got {d}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    value = (scale / epsilon**2) * d * float(np.log2(d)) ** 4
    return int(np.ceil(value - 1e-9))
