"""Quantum channels in Kraus form, complementary channels, and the
erasure / retro-correctable channel constructions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmath

# Max deviation of sum K†K from the identity accepted at construction.
COMPLETENESS_TOL = 1e-9


@dataclass(frozen=True)
class QuantumChannel:
    """Completely positive trace-preserving map as a list of Kraus operators.

    Every operator is out_dim x in_dim and sum K†K must equal the identity
    on the input space within COMPLETENESS_TOL.
    """

    kraus: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if not self.kraus:
            raise ValueError("a channel needs at least one Kraus operator")
        ops = tuple(qmath.as_complex_matrix(k) for k in self.kraus)
        shape = ops[0].shape
        for k in ops:
            if k.shape != shape:
                raise ValueError(
                    f"Kraus operators disagree in shape: {k.shape} vs {shape}"
                )
        object.__setattr__(self, "kraus", ops)
        gram = sum(k.conj().T @ k for k in ops)
        dev = np.max(np.abs(gram - np.eye(shape[1])))
        if dev > COMPLETENESS_TOL:
            raise ValueError(
                f"Kraus operators are not trace preserving (deviation {dev:.3e})"
            )

    @property
    def in_dim(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def env_dim(self) -> int:
        """Dimension of the environment in the isometric dilation."""
        return len(self.kraus)


def make_channel(kraus) -> QuantumChannel:
    """Validate a list of Kraus operators and wrap it as a channel."""
    return QuantumChannel(tuple(kraus))


def identity_channel(n: int) -> QuantumChannel:
    return make_channel([np.eye(int(n), dtype=np.complex128)])


def apply_channel(n: QuantumChannel, rho: np.ndarray) -> np.ndarray:
    """sum K rho K†, symmetrized against rounding noise."""
    rho = qmath.as_complex_matrix(rho)
    if rho.shape != (n.in_dim, n.in_dim):
        raise ValueError(
            f"state dimension {rho.shape[0]} does not match channel input {n.in_dim}"
        )
    out = np.zeros((n.out_dim, n.out_dim), dtype=np.complex128)
    for k in n.kraus:
        w = k @ rho
        out += w @ k.conj().T
    return qmath.hermitize(out)


def isometric_dilation(n: QuantumChannel) -> np.ndarray:
    """Isometry V with V psi = sum_i (K_i psi) ⊗ |i>_E, output index (b, e).

    Satisfies V†V = I; tracing the environment from V rho V† recovers the
    channel, tracing the output recovers its complement.
    """
    k = n.env_dim
    v = np.zeros((n.out_dim * k, n.in_dim), dtype=np.complex128)
    for i, op in enumerate(n.kraus):
        v[i::k, :] = op
    return v


def complementary_channel(n: QuantumChannel) -> QuantumChannel:
    """Channel to the environment of the isometric dilation.

    The output has one Kraus operator per level of the original output
    space and satisfies N̂(rho)[i, j] = Tr(K_j† K_i rho).
    """
    stack = np.stack(n.kraus)  # (env, out, in)
    # L_b[e, a] = K_e[b, a]: project the dilation onto output level b.
    ops = [np.ascontiguousarray(stack[:, b, :]) for b in range(n.out_dim)]
    return make_channel(ops)


def erasure_channel(n: int, p: float) -> QuantumChannel:
    """Transmit a d=n input intact with probability 1-p, else emit an
    orthogonal flag state; output dimension n+1 with the flag last."""
    n = int(n)
    if n < 1:
        raise ValueError(f"input dimension must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {p}")
    embed = np.zeros((n + 1, n), dtype=np.complex128)
    embed[:n, :] = np.eye(n)
    kraus = [np.sqrt(1.0 - p) * embed]
    for i in range(n):
        flag = np.zeros((n + 1, n), dtype=np.complex128)
        flag[n, i] = np.sqrt(p)
        kraus.append(flag)
    return make_channel(kraus)


def depolarizing_channel(p: float) -> QuantumChannel:
    """Qubit depolarizing channel: rho -> (1-p) rho + p I/2."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability must lie in [0, 1], got {p}")
    i2 = np.eye(2, dtype=np.complex128)
    x = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    return make_channel(
        [
            np.sqrt(1.0 - 3.0 * p / 4.0) * i2,
            np.sqrt(p / 4.0) * x,
            np.sqrt(p / 4.0) * y,
            np.sqrt(p / 4.0) * z,
        ]
    )


def dephasing_channel(p: float) -> QuantumChannel:
    """Qubit phase-damping channel; diagonal states are fixed points."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"dephasing probability must lie in [0, 1], got {p}")
    i2 = np.eye(2, dtype=np.complex128)
    p0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
    p1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)
    return make_channel([np.sqrt(1.0 - p) * i2, np.sqrt(p) * p0, np.sqrt(p) * p1])


@dataclass(frozen=True)
class RetroInstance:
    """One sampled realization of the retro-correctable channel.

    Holds the hidden measurement basis for the control space (columns of
    `basis`) and the c data unitaries selected by the measurement outcome.
    """

    d: int
    c: int
    basis: np.ndarray
    unitaries: tuple[np.ndarray, ...]
    seed: int

    def __post_init__(self) -> None:
        if len(self.unitaries) != self.c:
            raise ValueError(
                f"expected {self.c} unitaries, got {len(self.unitaries)}"
            )
        qmath.validate_unitary(self.basis, "basis")
        if self.basis.shape != (self.c, self.c):
            raise ValueError(
                f"basis must be {self.c}x{self.c}, got {self.basis.shape}"
            )
        for j, u in enumerate(self.unitaries):
            qmath.validate_unitary(u, f"unitaries[{j}]")
            if u.shape != (self.d, self.d):
                raise ValueError(
                    f"unitaries[{j}] must be {self.d}x{self.d}, got {u.shape}"
                )


def sample_retro_instance(d: int, c: int, seed: int) -> RetroInstance:
    """Draw the basis and the c data unitaries; deterministic in the seed."""
    d, c = int(d), int(c)
    if d < 2:
        raise ValueError(f"data dimension must be >= 2, got {d}")
    if c < 1:
        raise ValueError(f"control dimension must be >= 1, got {c}")
    rng = np.random.default_rng(seed)
    basis = qmath.random_basis(c, rng)
    unitaries = tuple(qmath.haar_unitary(d, rng) for _ in range(c))
    return RetroInstance(d=d, c=c, basis=basis, unitaries=unitaries, seed=int(seed))


def retro_fixed_channel(inst: RetroInstance) -> QuantumChannel:
    """Channel of one fixed realization, measurement outcome traced out.

    Input ordering is data ⊗ control; Kraus operator j is U_j ⊗ <b_j|,
    so the control is measured in the instance basis and the matching
    data unitary applied.
    """
    kraus = []
    for j in range(inst.c):
        bra = inst.basis[:, j].conj().reshape(1, inst.c)
        kraus.append(np.kron(inst.unitaries[j], bra))
    return make_channel(kraus)
