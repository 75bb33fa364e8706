"""Finite-statistics simulation of the discard experiment.

Trials are stored column-wise in a :class:`TrialBatch`; iterating it yields
:class:`TrialRecord` objects.  Random numbers come from an :class:`RngStream`,
a (seed, stream_id) pair mapped onto numpy's counter-based Philox generator,
so shards can run in any order or in parallel and still reproduce exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Sequence

import numpy as np
from scipy import stats

from . import dhv, photonics, protocol

DETERMINISTIC_BOUND = 1 / 3
QUANTUM_VALUE = 1 / 6
QUANTUM_MARGIN = 1 / 12
HIGH_CONFIDENCE_CUT = 0.3

MODEL_TAGS = ("quantum", "dhv", "dhv_adversarial", "photonic")
VERDICTS = ("violates_deterministic_bound", "consistent_with_bound", "inconclusive")


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()  # child indices from spawn()

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream_id < 0:
            raise ValueError("stream_id must be non-negative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.Philox(seq))

    def spawn(self, count: int) -> list[RngStream]:
        """``count`` child streams, independent of this one and of each other."""
        return [RngStream(self.seed, self.stream_id, self.path + (i,)) for i in range(count)]


@dataclass(frozen=True)
class TrialRecord:
    model_tag: str
    branch: str  # "F1" or "F2"
    second_is_A: bool
    detected_stage1: bool
    detected_stage2: bool

    @property
    def detected(self) -> bool:
        return self.detected_stage1 and self.detected_stage2


@dataclass(frozen=True, eq=False)
class TrialBatch:
    """Column store of trials; ``branch`` holds 1 for F1 and 2 for F2."""

    model_tag: str
    branch: np.ndarray
    second_is_A: np.ndarray
    detected_stage1: np.ndarray
    detected_stage2: np.ndarray

    def __post_init__(self) -> None:
        if self.model_tag not in MODEL_TAGS:
            raise ValueError(f"unknown model tag {self.model_tag!r}")
        object.__setattr__(self, "branch", np.asarray(self.branch, dtype=np.int8))
        for name in ("second_is_A", "detected_stage1", "detected_stage2"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=bool))
        n = len(self.branch)
        if any(len(getattr(self, c)) != n for c in ("second_is_A", "detected_stage1", "detected_stage2")):
            raise ValueError("trial columns have different lengths")

    def __len__(self) -> int:
        return len(self.branch)

    def __iter__(self) -> Iterator[TrialRecord]:
        for b, a, d1, d2 in zip(self.branch, self.second_is_A, self.detected_stage1, self.detected_stage2):
            yield TrialRecord(self.model_tag, f"F{int(b)}", bool(a), bool(d1), bool(d2))

    def __getitem__(self, i: int) -> TrialRecord:
        return TrialRecord(
            self.model_tag,
            f"F{int(self.branch[i])}",
            bool(self.second_is_A[i]),
            bool(self.detected_stage1[i]),
            bool(self.detected_stage2[i]),
        )

    @property
    def detected(self) -> np.ndarray:
        return self.detected_stage1 & self.detected_stage2

    def to_bytes(self) -> bytes:
        return b"".join(
            np.ascontiguousarray(c).tobytes()
            for c in (self.branch, self.second_is_A, self.detected_stage1, self.detected_stage2)
        )

    @classmethod
    def concat(cls, batches: Sequence[TrialBatch]) -> TrialBatch:
        if not batches:
            raise ValueError("nothing to concatenate")
        tags = {b.model_tag for b in batches}
        if len(tags) != 1:
            raise ValueError(f"cannot mix model tags {sorted(tags)}")
        return cls(
            batches[0].model_tag,
            np.concatenate([b.branch for b in batches]),
            np.concatenate([b.second_is_A for b in batches]),
            np.concatenate([b.detected_stage1 for b in batches]),
            np.concatenate([b.detected_stage2 for b in batches]),
        )


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"need at least one trial, got n={n}")


def quantum_branch_probabilities(epsilon: float) -> tuple[float, float, float]:
    """(P(F1), P(A | F1), P(A | F2)) for the noisy protocol input."""
    model = protocol.canonical_model()
    rho = protocol.apply_white_noise(protocol.prepare_psi0(), epsilon)
    b1, b2 = protocol.measure_discard(model, rho)
    pa = [protocol.projective_prob(b.post_state, "A") if b.defined else 0.0 for b in (b1, b2)]
    return b1.probability, pa[0], pa[1]


def _sample_two_stage(
    rng: np.random.Generator, n: int, p_branch1: float, p_a1: float, p_a2: float, eta: float, tag: str
) -> TrialBatch:
    branch1 = rng.random(n) < p_branch1
    second_is_a = rng.random(n) < np.where(branch1, p_a1, p_a2)
    d1 = rng.random(n) < eta
    d2 = rng.random(n) < eta
    return TrialBatch(tag, np.where(branch1, 1, 2), second_is_a, d1, d2)


def simulate_quantum(n: int, epsilon: float, eta: float, rng: RngStream) -> TrialBatch:
    """Sample the discard branch and the A test from exact Born probabilities.

    Each detection stage fires independently with probability ``eta``.
    """
    _check_n(n)
    _check_unit("epsilon", epsilon)
    _check_unit("eta", eta)
    p1, pa1, pa2 = quantum_branch_probabilities(epsilon)
    return _sample_two_stage(rng.generator(), n, p1, pa1, pa2, eta, "quantum")


def simulate_photonic(n: int, eta: float, rng: RngStream, discard: photonics.OpticalCircuit | None = None) -> TrialBatch:
    """Trials drawn from the optical pipeline's probabilities.

    A photon that leaves the signal modes (F2) can never fire the A detector.
    """
    _check_n(n)
    _check_unit("eta", eta)
    result = photonics.full_pipeline(discard)
    return _sample_two_stage(
        rng.generator(), n, result.discard.postselect_probability, result.p_a_given_survival, 0.0, eta, "photonic"
    )


def simulate_dhv(n: int, model: dhv.HiddenVariableModel, rng: RngStream, tag: str | None = None) -> TrialBatch:
    """DHV trials; the F1 branch label marks trials where B was removed."""
    _check_n(n)
    if tag is None:
        tag = "dhv_adversarial" if model.detection_policy else "dhv"
    draw = dhv.sample_trials(model, rng.generator(), n)
    branch = np.where(draw["removed"] == 1, 1, 2)
    return TrialBatch(tag, branch, draw["second_is_A"], draw["detected_stage1"], draw["detected_stage2"])


def run_sharded(
    simulate: Callable[[int, RngStream], TrialBatch],
    n: int,
    rng: RngStream,
    n_streams: int,
    workers: int | None = None,
) -> TrialBatch:
    """Split ``n`` trials over ``n_streams`` child streams and concatenate.

    The result depends only on (n, rng, n_streams), never on ``workers``.
    """
    _check_n(n)
    if n_streams < 1:
        raise ValueError("need at least one stream")
    base, extra = divmod(n, n_streams)
    sizes = [base + (1 if i < extra else 0) for i in range(n_streams)]
    jobs = [(size, child) for size, child in zip(sizes, rng.spawn(n_streams)) if size > 0]
    if workers is None or workers <= 1:
        parts = [simulate(size, child) for size, child in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: simulate(*job), jobs))
    return TrialBatch.concat(parts)


def wilson_interval(successes: int, n: int, confidence: float) -> tuple[float, float]:
    if n < 1:
        raise ValueError("Wilson interval needs n >= 1")
    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    # clamp so the interval always brackets the point estimate despite rounding
    return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))


def decide(ci_low: float, ci_high: float) -> str:
    """CI-versus-bound rule: violation iff the whole interval is below 1/3."""
    if ci_high < DETERMINISTIC_BOUND:
        return "violates_deterministic_bound"
    if ci_low > QUANTUM_VALUE and ci_low <= DETERMINISTIC_BOUND <= ci_high:
        return "consistent_with_bound"
    return "inconclusive"


@dataclass
class ExperimentReport:
    n_trials: int
    n_detected: int
    n_success: int
    q_hat: float
    ci_low: float
    ci_high: float
    confidence: float
    verdict: str
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def within_quantum_margin(self) -> bool:
        """|q_hat - 1/6| < 1/12."""
        return bool(abs(self.q_hat - QUANTUM_VALUE) < QUANTUM_MARGIN)

    @property
    def below_high_confidence_cut(self) -> bool:
        """Upper confidence limit under 0.3."""
        return bool(self.ci_high < HIGH_CONFIDENCE_CUT)

    def as_dict(self) -> dict[str, Any]:
        return {
            "n_trials": self.n_trials,
            "n_detected": self.n_detected,
            "n_success": self.n_success,
            "q_hat": self.q_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "confidence": self.confidence,
            "verdict": self.verdict,
            "within_quantum_margin": self.within_quantum_margin,
            "below_high_confidence_cut": self.below_high_confidence_cut,
            "thresholds": {
                "deterministic_bound": DETERMINISTIC_BOUND,
                "quantum_value": QUANTUM_VALUE,
                "quantum_margin": QUANTUM_MARGIN,
                "high_confidence_cut": HIGH_CONFIDENCE_CUT,
            },
            "metadata": dict(self.metadata),
        }


def estimate_q(trials: TrialBatch, confidence: float = 0.95, metadata: dict[str, Any] | None = None) -> ExperimentReport:
    """Detected-conditional frequency of A with a Wilson score interval."""
    if not 0.5 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0.5, 1), got {confidence}")
    detected = trials.detected
    n_det = int(detected.sum())
    if n_det == 0:
        raise ValueError("no detected trials")
    k = int((trials.second_is_A & detected).sum())
    lo, hi = wilson_interval(k, n_det, confidence)
    meta = {"model": trials.model_tag}
    meta.update(metadata or {})
    return ExperimentReport(
        n_trials=len(trials),
        n_detected=n_det,
        n_success=k,
        q_hat=k / n_det,
        ci_low=lo,
        ci_high=hi,
        confidence=confidence,
        verdict=decide(lo, hi),
        metadata=meta,
    )


def required_trials(p_true: float, boundary: float, z: float) -> int:
    """Smallest n with z * sqrt(p(1-p)/n) <= boundary - p."""
    if not 0.0 < p_true < boundary < 1.0:
        raise ValueError("need 0 < p_true < boundary < 1")
    if not z > 0:
        raise ValueError("z must be positive")
    exact = z * z * p_true * (1.0 - p_true) / (boundary - p_true) ** 2
    # absorb rounding when the exact value is an integer, e.g. 125.00000000000001
    n = max(1, math.ceil(exact - 1e-9 * max(1.0, exact)))
    while z * math.sqrt(p_true * (1.0 - p_true) / n) > boundary - p_true + 1e-12:
        n += 1
    return n


def power_check(
    n_per_experiment: int,
    experiments: int,
    rng: RngStream,
    epsilon: float = 0.0,
    eta: float = 1.0,
    confidence: float = 0.95,
) -> float:
    """Fraction of simulated quantum experiments whose verdict is a violation."""
    hits = 0
    for child in rng.spawn(experiments):
        report = estimate_q(simulate_quantum(n_per_experiment, epsilon, eta, child), confidence)
        hits += report.verdict == "violates_deterministic_bound"
    return hits / experiments
