"""Single-photon linear-optics model of the discard experiment.

One photon spread over ``n`` modes is just a vector of per-mode amplitudes,
and every passive element is an ``n x n`` unitary acting on it. Loss is never
a non-unitary matrix: it is a beamsplitter into an explicit vacuum ancilla
mode, and post-selection then asks for the photon to sit in allowed modes.

Modes ``0..n_signal-1`` are the signal modes (A, B, C for the protocol);
the ancilla modes follow.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import qlinalg as ql

UNDEFINED_TOL = 1e-15
ELEMENT_KINDS = ("tritter", "beamsplitter", "loss_port", "phase")


@dataclass(frozen=True)
class OpticalElement:
    kind: str
    modes: tuple[int, ...]
    value: float = 0.0  # reflectivity (beamsplitter), loss (loss_port) or phase in radians

    def __post_init__(self) -> None:
        if self.kind not in ELEMENT_KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")
        want = {"tritter": 3, "beamsplitter": 2, "loss_port": 2, "phase": 1}[self.kind]
        if len(self.modes) != want:
            raise ValueError(f"{self.kind} acts on {want} modes, got {self.modes}")
        if len(set(self.modes)) != len(self.modes):
            raise ValueError(f"{self.kind} modes must be distinct: {self.modes}")
        if self.kind in ("beamsplitter", "loss_port") and not 0.0 <= self.value <= 1.0:
            raise ValueError(f"{self.kind} parameter must lie in [0, 1], got {self.value}")

    def local_matrix(self) -> np.ndarray:
        if self.kind == "tritter":
            return dft3()
        if self.kind == "phase":
            return np.array([[np.exp(1j * self.value)]])
        # beamsplitter: amplitude sqrt(1-R) stays, sqrt(R) goes across.
        # loss_port is the same coupling with the second mode a vacuum dump.
        t, r = np.sqrt(1.0 - self.value), np.sqrt(self.value)
        return np.array([[t, -r], [r, t]], dtype=np.complex128)

    def matrix(self, n_modes: int) -> np.ndarray:
        if max(self.modes) >= n_modes:
            raise ValueError(f"{self.kind} on modes {self.modes} exceeds {n_modes} modes")
        full = np.eye(n_modes, dtype=np.complex128)
        idx = np.array(self.modes)
        full[np.ix_(idx, idx)] = self.local_matrix()
        return full


def dft3() -> np.ndarray:
    omega = np.exp(2j * np.pi / 3)
    j, k = np.meshgrid(range(3), range(3), indexing="ij")
    return omega ** (j * k) / np.sqrt(3.0)


def tritter(modes: tuple[int, int, int] = (0, 1, 2)) -> OpticalElement:
    """Balanced three-port: input mode 0 -> equal superposition over all three."""
    return OpticalElement("tritter", modes)


def beamsplitter(m: int, n: int, reflectivity: float) -> OpticalElement:
    return OpticalElement("beamsplitter", (m, n), reflectivity)


def loss_port(mode: int, ancilla: int, loss: float) -> OpticalElement:
    return OpticalElement("loss_port", (mode, ancilla), loss)


def phase(mode: int, phi: float) -> OpticalElement:
    return OpticalElement("phase", (mode,), phi)


@dataclass(frozen=True)
class OpticalCircuit:
    """Elements applied in order, then a post-selection test.

    Post-selection keeps the event if the photon is found in one of
    ``required_occupied`` (when given), otherwise in any mode outside
    ``required_empty``. ``required_empty`` defaults to all ancilla modes.
    """

    n_signal_modes: int
    n_ancilla_modes: int
    elements: tuple[OpticalElement, ...] = ()
    required_empty: frozenset[int] | None = None
    required_occupied: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.n_signal_modes < 1 or self.n_ancilla_modes < 0:
            raise ValueError("need at least one signal mode and a non-negative ancilla count")
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.required_empty is None:
            empty = frozenset(range(self.n_signal_modes, self.n_modes))
        else:
            empty = frozenset(self.required_empty)
        object.__setattr__(self, "required_empty", empty)
        object.__setattr__(self, "required_occupied", frozenset(self.required_occupied))
        for m in empty | self.required_occupied:
            if not 0 <= m < self.n_modes:
                raise ValueError(f"post-selection mode {m} out of range")
        for el in self.elements:
            el.matrix(self.n_modes)  # range check

    @property
    def n_modes(self) -> int:
        return self.n_signal_modes + self.n_ancilla_modes

    def unitary(self) -> np.ndarray:
        u = np.eye(self.n_modes, dtype=np.complex128)
        for el in self.elements:
            u = el.matrix(self.n_modes) @ u
        return u

    def accepted_modes(self) -> np.ndarray:
        if self.required_occupied:
            modes = sorted(self.required_occupied)
        else:
            modes = [m for m in range(self.n_modes) if m not in self.required_empty]
        return np.array(modes, dtype=int)

    def then(self, *elements: OpticalElement) -> OpticalCircuit:
        return OpticalCircuit(
            self.n_signal_modes,
            self.n_ancilla_modes,
            self.elements + tuple(elements),
            self.required_empty,
            self.required_occupied,
        )


@dataclass(frozen=True)
class CircuitRun:
    postselect_probability: float
    conditional_state: np.ndarray | None  # signal-mode amplitudes, None if undefined
    output: np.ndarray  # all-mode amplitudes after the circuit, unnormalized

    @property
    def discarded_weight(self) -> float:
        return float(np.vdot(self.output, self.output).real) - self.postselect_probability


def _embed(signal_amps: np.ndarray, n_modes: int) -> np.ndarray:
    signal_amps = ql.as_ket(signal_amps)
    if signal_amps.shape[0] > n_modes:
        raise ql.DimensionError("input has more modes than the circuit")
    full = np.zeros(n_modes, dtype=np.complex128)
    full[: signal_amps.shape[0]] = signal_amps
    return full


def run_circuit(circuit: OpticalCircuit, signal_input: np.ndarray) -> CircuitRun:
    """Propagate a single-photon signal state and post-select.

    ``signal_input`` holds the amplitudes on the signal modes (ancillas start
    in vacuum); its squared norm must not exceed 1.
    """
    amps = _embed(signal_input, circuit.n_modes)
    if np.vdot(amps, amps).real > 1.0 + ql.NORM_TOL:
        raise ValueError("single-photon input has norm above 1")
    out = circuit.unitary() @ amps
    keep = np.zeros(circuit.n_modes, dtype=bool)
    keep[circuit.accepted_modes()] = True
    kept = np.where(keep, out, 0.0)
    p = float(np.vdot(kept, kept).real)
    if p < UNDEFINED_TOL:
        return CircuitRun(p, None, out)
    return CircuitRun(p, kept[: circuit.n_signal_modes] / np.sqrt(p), out)


def effective_kraus(circuit: OpticalCircuit) -> np.ndarray:
    """Signal-space operator: column j is the post-selected output for input mode j."""
    u = circuit.unitary()
    keep = np.zeros(circuit.n_modes, dtype=bool)
    keep[circuit.accepted_modes()] = True
    ns = circuit.n_signal_modes
    cols = np.where(keep[:, None], u[:, :ns], 0.0)
    return cols[:ns, :]


def identity_circuit(n_signal_modes: int = 3) -> OpticalCircuit:
    return OpticalCircuit(n_signal_modes, 0)


def design_discard_circuit() -> OpticalCircuit:
    """Optical realization of K1 = (|A><A| + |C><C|)/sqrt(2).

    Mode B is switched fully into ancilla 3; A and C each lose half their
    intensity into ancillas 4 and 5. Success = photon still in a signal mode.
    """
    return OpticalCircuit(
        n_signal_modes=3,
        n_ancilla_modes=3,
        elements=(
            beamsplitter(1, 3, 1.0),
            loss_port(0, 4, 0.5),
            loss_port(2, 5, 0.5),
        ),
    )


def literal_discard_circuit() -> OpticalCircuit:
    """One 50/50 beamsplitter between A and C, keeping only the output port on C.

    This is the naive reading of the optical proposal. On the symmetric input
    it succeeds with probability 2/3 and leaves the photon in C, so it does
    not implement the discard effect; kept for comparison in reports.
    """
    return OpticalCircuit(
        n_signal_modes=3,
        n_ancilla_modes=0,
        elements=(beamsplitter(0, 2, 0.5),),
        required_empty=frozenset(),
        required_occupied=frozenset({2}),
    )


def prepare_symmetric_input() -> np.ndarray:
    """Photon in mode 0 sent through a tritter: amplitudes of modulus 1/sqrt(3)."""
    return dft3() @ ql.basis_ket(0, 3)


@dataclass(frozen=True)
class PipelineResult:
    prepared: np.ndarray
    discard: CircuitRun
    q: float  # joint probability: survive the discard and then pass the A filter

    @property
    def p_a_given_survival(self) -> float:
        if self.discard.conditional_state is None:
            return 0.0
        return float(abs(self.discard.conditional_state[0]) ** 2)


def full_pipeline(discard: OpticalCircuit | None = None) -> PipelineResult:
    """Tritter preparation, discard, then a projective filter on mode A.

    Events where the photon leaves the signal modes during the discard
    (the F2 branch) never reach the A detector.
    """
    discard = design_discard_circuit() if discard is None else discard
    prepared = prepare_symmetric_input()
    run = run_circuit(discard, prepared)
    q = 0.0 if run.conditional_state is None else run.postselect_probability * abs(run.conditional_state[0]) ** 2
    return PipelineResult(prepared, run, float(q))


_ELEMENT_RE = re.compile(r"^\s*(\w+)\s*\(([^)]*)\)\s*$")
_ALIASES = {"bs": "beamsplitter", "loss": "loss_port", "ph": "phase"}


def parse_circuit(text: str, n_signal_modes: int = 3, n_ancilla_modes: int = 0) -> OpticalCircuit:
    """Parse ``"bs(1,3,1.0); loss(0,4,0.5); phase(2,3.14159); tritter(0,1,2)"``.

    Arguments are mode indices followed by the element parameter, if any.
    Post-selection keeps the photon in the signal modes.
    """
    elements = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        m = _ELEMENT_RE.match(chunk)
        if not m:
            raise ValueError(f"cannot parse circuit element {chunk!r}")
        kind = _ALIASES.get(m.group(1).lower(), m.group(1).lower())
        args = [a.strip() for a in m.group(2).split(",") if a.strip()]
        try:
            if kind == "tritter":
                elements.append(OpticalElement(kind, tuple(int(a) for a in args)))
            elif kind == "phase":
                elements.append(OpticalElement(kind, (int(args[0]),), float(args[1])))
            elif kind in ("beamsplitter", "loss_port"):
                elements.append(OpticalElement(kind, (int(args[0]), int(args[1])), float(args[2])))
            else:
                raise ValueError(f"unknown element kind {kind!r}")
        except (IndexError, TypeError) as exc:
            raise ValueError(f"wrong arguments for circuit element {chunk!r}") from exc
    return OpticalCircuit(n_signal_modes, n_ancilla_modes, tuple(elements))


def protocol_circuit() -> OpticalCircuit:
    """Whole experiment as one circuit acting on a photon injected in mode 0.

    Tritter, discard, and an A filter expressed as post-selection on mode 0.
    """
    discard = design_discard_circuit()
    return OpticalCircuit(
        n_signal_modes=3,
        n_ancilla_modes=discard.n_ancilla_modes,
        elements=(tritter(),) + discard.elements,
        required_occupied=frozenset({0}),
    )
