"""Complex linear algebra and quantum-state primitives.

Everything operates on dense complex numpy arrays. States are density
matrices (Hermitian, PSD, unit trace); entropies are in bits.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

# Validation tolerances for state and operator invariants.
HERMITIAN_TOL = 1e-10
EIGENVALUE_TOL = 1e-10
TRACE_TOL = 1e-10
UNITARY_TOL = 1e-10
NORM_TOL = 1e-12

# Eigenvalues below this are treated as exactly zero in entropies
# (0 log 0 = 0; eigensolvers emit tiny negatives on rank-deficient states).
EIGENVALUE_CLIP = 1e-12


def as_complex_matrix(m: np.ndarray) -> np.ndarray:
    """Coerce to a 2-d complex128 array without copying when possible."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {arr.ndim}")
    return arr


def hermitize(m: np.ndarray) -> np.ndarray:
    """Symmetrize (M + M†)/2 to strip antisymmetric rounding noise."""
    return (m + m.conj().T) / 2.0


def validate_density_matrix(rho: np.ndarray, name: str = "rho") -> np.ndarray:
    """Check Hermiticity, positivity and unit trace; return the input.

    Raises ValueError describing the first violated invariant.
    """
    rho = as_complex_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be square, got shape {rho.shape}")
    dev = np.max(np.abs(rho - rho.conj().T))
    if dev > HERMITIAN_TOL:
        raise ValueError(f"{name} is not Hermitian (max deviation {dev:.3e})")
    tr = rho.trace().real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"{name} has trace {tr!r}, expected 1")
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -EIGENVALUE_TOL:
        raise ValueError(f"{name} has negative eigenvalue {lo:.3e}")
    return rho


def validate_pure_state(psi: np.ndarray, name: str = "psi") -> np.ndarray:
    """Check unit Euclidean norm; return the amplitudes."""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.ndim != 1:
        raise ValueError(f"{name} must be a vector, got ndim {psi.ndim}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"{name} has norm {norm!r}, expected 1")
    return psi


def validate_unitary(u: np.ndarray, name: str = "U") -> np.ndarray:
    """Check U†U = I; return the input."""
    u = as_complex_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise ValueError(f"{name} must be square, got shape {u.shape}")
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > UNITARY_TOL:
        raise ValueError(f"{name} is not unitary (max deviation {dev:.3e})")
    return u


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def _check_dims(dim: int, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"subsystem dimensions must all be >= 1, got {dims}")
    if int(np.prod(dims)) != dim:
        raise ValueError(f"subsystem dimensions {dims} do not factor dimension {dim}")
    return dims


def partial_trace(
    rho: np.ndarray, dims: Sequence[int], keep: Iterable[int]
) -> np.ndarray:
    """Reduced state on the `keep` subsystems, in their original order.

    `dims` lists the subsystem dimensions whose product is the full
    dimension; `keep` is a nonempty set of subsystem indices.
    """
    rho = as_complex_matrix(rho)
    dims = _check_dims(rho.shape[0], dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep indices {keep} out of range for {n} subsystems")
    lose = [i for i in range(n) if i not in keep]
    if not lose:
        return rho
    perm = keep + lose
    dk = int(np.prod([dims[i] for i in keep]))
    dl = int(np.prod([dims[i] for i in lose]))
    arr = rho.reshape(dims + dims)
    arr = arr.transpose(perm + [p + n for p in perm])
    arr = arr.reshape(dk, dl, dk, dl)
    return np.trace(arr, axis1=1, axis2=3)


def entropy_of_spectrum(eigenvalues: np.ndarray) -> float:
    """-sum(l log2 l) with eigenvalues below the clip threshold dropped."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    lam = lam[lam > EIGENVALUE_CLIP]
    if lam.size == 0:
        return 0.0
    return float(-np.sum(lam * np.log2(lam)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """von Neumann entropy in bits; input must be a valid density matrix."""
    rho = validate_density_matrix(rho)
    s = entropy_of_spectrum(np.linalg.eigvalsh(rho))
    return max(s, 0.0)


def max_entangled_state(d: int) -> np.ndarray:
    """Amplitudes of (1/sqrt(d)) sum_i |i>|i> on dimension d*d."""
    d = int(d)
    if d < 1:
        raise ValueError(f"local dimension must be >= 1, got {d}")
    psi = np.zeros(d * d, dtype=np.complex128)
    psi[:: d + 1] = 1.0 / np.sqrt(d)
    return psi


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed random unitary of dimension n.

    Complex Ginibre draw, QR factorization, then the Q columns are
    rescaled by the phases of R's diagonal so the result is uniform.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))
    return q


def random_basis(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random orthonormal basis; column j is the j-th basis vector."""
    return haar_unitary(n, rng)


def derive_seed(master_seed: int, *key: int) -> int:
    """Deterministic child seed from a master seed and an index key."""
    ss = np.random.SeedSequence((int(master_seed),) + tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])
