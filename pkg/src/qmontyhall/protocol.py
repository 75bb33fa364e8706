"""Quantum side of the Monty Hall discard protocol on a qutrit.

Basis order is (A, B, C) -> (0, 1, 2). States are handled as density
matrices throughout so that pure and noisy inputs share one code path.

The discard instrument is realized by two Kraus operators::

    K1 = sqrt(F1) = (|A><A| + |C><C|) / sqrt(2)
    K2 = H sqrt(F2)

where ``H`` is the Householder reflection taking the unit vector along
``sqrt(F2)|psi0>`` = (1/2, 1/sqrt(2), 1/2) to (0, 1, -1)/sqrt(2).  That
target is the only one that gives K2 an A-row of minimal weight
(<A|K2 K2^dagger|A> = 1/2), which is exactly what makes the white-noise
curve come out as Q(eps) = (1 + eps)/6 and what keeps K2 from feeding
amplitude into A from |B>.

No Kraus operator for F2 can have a vanishing A-row (F2 has full rank), so
"the F2 branch has no overlap with A" holds for the protocol input |psi0>
only, not for every input.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import qlinalg as ql

LABELS = ("A", "B", "C")
INDEX = {label: i for i, label in enumerate(LABELS)}
DIM = 3
ANCILLA_DIM = 2
UNDEFINED_BRANCH_TOL = 1e-15
DENSITY_TOL = 1e-12

# exact reference values
P_F1 = Fraction(1, 3)
Q_QUANTUM = Fraction(1, 6)
Q_DETERMINISTIC = Fraction(1, 3)
QUANTUM_MARGIN = Fraction(1, 12)


def basis_index(label: str | int) -> int:
    if isinstance(label, (int, np.integer)):
        if not 0 <= int(label) < DIM:
            raise IndexError(f"basis index {label} out of range")
        return int(label)
    try:
        return INDEX[label]
    except KeyError:
        raise IndexError(f"unknown basis label {label!r}") from None


def ket(label: str | int) -> np.ndarray:
    return ql.basis_ket(basis_index(label), DIM)


def prepare_psi0() -> np.ndarray:
    """The symmetric qutrit state (|A> + |B> + |C>)/sqrt(3)."""
    return np.full(DIM, 1.0 / np.sqrt(3.0), dtype=np.complex128)


def psi1() -> np.ndarray:
    """Expected F1-branch state (|A> + |C>)/sqrt(2)."""
    return np.array([1.0, 0.0, 1.0], dtype=np.complex128) / np.sqrt(2.0)


def density(state: np.ndarray) -> np.ndarray:
    """Promote a ket to |psi><psi|; matrices pass through as complex arrays."""
    arr = np.asarray(state, dtype=np.complex128)
    if arr.ndim == 1:
        return ql.outer(arr)
    return ql.as_operator(arr)


def is_density_matrix(rho: np.ndarray, tol: float = DENSITY_TOL) -> bool:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    return (
        ql.is_hermitian(rho, tol)
        and abs(np.trace(rho).real - 1.0) <= tol
        and ql.is_positive_semidefinite(rho, ql.CHECK_TOL)
    )


def check_density(rho: np.ndarray) -> np.ndarray:
    rho = density(rho)
    if not is_density_matrix(rho):
        raise ValueError("not a valid density matrix (Hermitian, unit trace, PSD)")
    return rho


def _householder(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Reflection mapping unit vector ``u`` onto unit vector ``w`` (real case)."""
    v = u - w
    vv = np.vdot(v, v).real
    if vv < 1e-30:
        return np.eye(len(u), dtype=np.complex128)
    return np.eye(len(u), dtype=np.complex128) - 2.0 * np.outer(v, v.conj()) / vv


def _psd_sqrt(op: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(op)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ ql.dagger(vecs)


@dataclass(frozen=True)
class BranchOutcome:
    effect_index: int
    probability: float
    post_state: np.ndarray | None  # None when the branch probability is < 1e-15

    @property
    def defined(self) -> bool:
        return self.post_state is not None


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """Two-outcome discard instrument: effects, Kraus pair and 6x6 dilation.

    ``dilation`` acts on qutrit (x) ancilla with index ``2*i + a``. Ancilla
    outcome ``ancilla_outcome_map[k]`` flags effect ``k + 1``.
    """

    effects: tuple[np.ndarray, np.ndarray]
    kraus: tuple[np.ndarray, np.ndarray]
    dilation: np.ndarray
    ancilla_outcome_map: tuple[int, int] = (1, 0)

    def __post_init__(self) -> None:
        for arr in (*self.effects, *self.kraus, self.dilation):
            arr.setflags(write=False)
        check_model(self)


def check_model(model: MeasurementModel, tol: float = ql.CHECK_TOL) -> None:
    """Raise ``ValueError`` if the instrument is inconsistent."""
    f1, f2 = model.effects
    k1, k2 = model.kraus
    if not (ql.is_positive_semidefinite(f1, tol) and ql.is_positive_semidefinite(f2, tol)):
        raise ValueError("POVM effects must be positive semidefinite")
    if np.max(np.abs(f1 + f2 - np.eye(DIM))) > DENSITY_TOL:
        raise ValueError("POVM effects must sum to the identity")
    for k, f in ((k1, f1), (k2, f2)):
        if np.max(np.abs(ql.dagger(k) @ k - f)) > tol:
            raise ValueError("Kraus operator does not reproduce its effect")
    if not ql.is_unitary(model.dilation, tol):
        raise ValueError("dilation is not unitary")
    isometry = dilation_isometry(model.kraus, model.ancilla_outcome_map)
    if np.max(np.abs(model.dilation[:, 0::ANCILLA_DIM] - isometry)) > tol:
        raise ValueError("dilation does not reproduce the Kraus branches")


def dilation_isometry(kraus: Sequence[np.ndarray], ancilla_outcome_map: Sequence[int] = (1, 0)) -> np.ndarray:
    """6x3 isometry |phi> -> sum_k (K_k|phi>) (x) |a_k>."""
    iso = np.zeros((DIM * ANCILLA_DIM, DIM), dtype=np.complex128)
    for k_op, a in zip(kraus, ancilla_outcome_map):
        iso += np.kron(k_op, ql.basis_ket(a, ANCILLA_DIM).reshape(-1, 1))
    return iso


def build_dilation(kraus: Sequence[np.ndarray], ancilla_outcome_map: Sequence[int] = (1, 0)) -> np.ndarray:
    """Unitary U on qutrit (x) ancilla with U(|phi>|0>) = sum_k K_k|phi> |a_k>."""
    iso = dilation_isometry(kraus, ancilla_outcome_map)
    completed = ql.complete_isometry(list(iso.T), DIM * ANCILLA_DIM)
    # place column j (input |j>|0>) at index 2j, completion columns at 2j+1
    u = np.empty_like(completed)
    u[:, 0::ANCILLA_DIM] = completed[:, :DIM]
    u[:, 1::ANCILLA_DIM] = completed[:, DIM:]
    return u


def discard_effects() -> tuple[np.ndarray, np.ndarray]:
    f1 = 0.5 * (ql.outer(ket("A")) + ql.outer(ket("C")))
    return f1, np.eye(DIM, dtype=np.complex128) - f1


def build_discard_povm() -> MeasurementModel:
    f1, f2 = discard_effects()
    k1 = _psd_sqrt(f1)
    sqrt_f2 = _psd_sqrt(f2)
    u = ql.normalize(sqrt_f2 @ prepare_psi0())
    target = np.array([0.0, 1.0, -1.0], dtype=np.complex128) / np.sqrt(2.0)
    k2 = _householder(u, target) @ sqrt_f2
    kraus = (k1, k2)
    return MeasurementModel(effects=(f1, f2), kraus=kraus, dilation=build_dilation(kraus))


_CANONICAL: MeasurementModel | None = None


def canonical_model() -> MeasurementModel:
    global _CANONICAL
    if _CANONICAL is None:
        _CANONICAL = build_discard_povm()
    return _CANONICAL


def apply_dilation(model: MeasurementModel, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run |phi>|0> through the dilation and project the ancilla.

    Returns the unnormalized qutrit vectors for ancilla outcomes
    flagging F1 and F2 respectively.
    """
    joint = model.dilation @ np.kron(ql.as_ket(phi), ql.basis_ket(0, ANCILLA_DIM))
    by_ancilla = joint.reshape(DIM, ANCILLA_DIM)
    a1, a2 = model.ancilla_outcome_map
    return by_ancilla[:, a1].copy(), by_ancilla[:, a2].copy()


def measure_discard(model: MeasurementModel, state: np.ndarray) -> tuple[BranchOutcome, BranchOutcome]:
    rho = check_density(state)
    if rho.shape[0] != DIM:
        raise ql.DimensionError(f"expected a qutrit state, got dim {rho.shape[0]}")
    branches = []
    for i, k in enumerate(model.kraus, start=1):
        unnorm = k @ rho @ ql.dagger(k)
        p = float(np.trace(unnorm).real)
        p = min(max(p, 0.0), 1.0)
        post = unnorm / p if p >= UNDEFINED_BRANCH_TOL else None
        branches.append(BranchOutcome(effect_index=i, probability=p, post_state=post))
    return branches[0], branches[1]


def projective_prob(state: np.ndarray, basis_index_: str | int) -> float:
    rho = density(state)
    i = basis_index(basis_index_)
    return float(min(max(rho[i, i].real, 0.0), 1.0))


def q_quantum(model: MeasurementModel, state: np.ndarray) -> float:
    """Probability of finding A in the projective measurement after the discard."""
    total = 0.0
    for branch in measure_discard(model, state):
        if branch.defined:
            total += branch.probability * projective_prob(branch.post_state, "A")
    return total


def apply_white_noise(state: np.ndarray, epsilon: float) -> np.ndarray:
    """(1 - eps) rho + eps I/d."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    rho = density(state)
    d = rho.shape[0]
    return (1.0 - epsilon) * rho + epsilon * np.eye(d, dtype=np.complex128) / d


def linear_noise_formula(epsilon: float) -> float:
    return (1.0 + epsilon) / 6.0


@dataclass(frozen=True)
class NoisePoint:
    epsilon: float
    q_computed: float
    q_formula: float

    @property
    def delta(self) -> float:
        return self.q_computed - self.q_formula


def q_noise_curve(model: MeasurementModel, epsilons: Sequence[float]) -> list[NoisePoint]:
    rho0 = density(prepare_psi0())
    return [
        NoisePoint(float(e), q_quantum(model, apply_white_noise(rho0, e)), linear_noise_formula(e))
        for e in epsilons
    ]


def default_noise_grid(points: int = 11) -> list[float]:
    return [i / (points - 1) for i in range(points)]
