"""Deterministic hidden-variable (DHV) counter-models for the discard protocol.

The hidden variable is represented by the value it assigns to the
{A, B, C} measurement.  A discard rule says, for each value, which label the
"host" removes.  For rules that never remove the true value the second
measurement simply reveals it, so Q equals the prior weight of A.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping

import numpy as np

LABELS = ("A", "B", "C")
_IDX = {label: i for i, label in enumerate(LABELS)}
STAGES = (1, 2)
_PROB_TOL = 1e-12


class NonCompliantModelError(ValueError):
    """The model's discard rule can remove the true value; use :func:`q_simulated`."""


DiscardRule = Mapping[str, tuple[tuple[str, float], ...]]


@dataclass(frozen=True)
class HiddenVariableModel:
    prior: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    rule: DiscardRule = field(default_factory=dict)
    # (lambda, stage) -> detection probability; missing keys mean 1
    detection_policy: Mapping[tuple[str, int], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        prior = tuple(float(p) for p in self.prior)
        if len(prior) != 3 or any(p < 0 for p in prior) or abs(sum(prior) - 1.0) > _PROB_TOL:
            raise ValueError(f"prior must be three non-negative weights summing to 1, got {self.prior}")
        object.__setattr__(self, "prior", prior)

        rule = {}
        for lam in LABELS:
            entries = tuple((str(r), float(p)) for r, p in self.rule.get(lam, ()))
            if not entries:
                raise ValueError(f"discard rule has no entry for lambda={lam}")
            if any(r not in _IDX for r, _ in entries) or any(p < 0 for _, p in entries):
                raise ValueError(f"bad discard entries for lambda={lam}: {entries}")
            if abs(sum(p for _, p in entries) - 1.0) > _PROB_TOL:
                raise ValueError(f"discard probabilities for lambda={lam} must sum to 1")
            rule[lam] = entries
        object.__setattr__(self, "rule", rule)

        policy = {}
        for key, p in self.detection_policy.items():
            lam, stage = key
            if lam not in _IDX or stage not in STAGES or not 0.0 <= p <= 1.0:
                raise ValueError(f"bad detection policy entry {key}: {p}")
            policy[(lam, int(stage))] = float(p)
        object.__setattr__(self, "detection_policy", policy)

    def prior_of(self, label: str) -> float:
        return self.prior[_IDX[label]]

    def detection(self, lam: str, stage: int) -> float:
        return self.detection_policy.get((lam, stage), 1.0)

    def removal_table(self) -> np.ndarray:
        """3x3 matrix; row = lambda, column = removed label."""
        table = np.zeros((3, 3))
        for lam, entries in self.rule.items():
            for removed, p in entries:
                table[_IDX[lam], _IDX[removed]] += p
        return table

    def detection_table(self) -> np.ndarray:
        """3x2 matrix of detection probabilities; row = lambda, column = stage."""
        return np.array([[self.detection(lam, s) for s in STAGES] for lam in LABELS])


@dataclass(frozen=True)
class DhvTrialOutcome:
    lam: str
    removed: str
    second_measurement_is_A: bool
    detected_stage1: bool
    detected_stage2: bool

    @property
    def detected(self) -> bool:
        return self.detected_stage1 and self.detected_stage2


CANONICAL_RULE: DiscardRule = {
    "A": (("B", 0.5), ("C", 0.5)),
    "B": (("C", 1.0),),
    "C": (("B", 1.0),),
}


def canonical_model() -> HiddenVariableModel:
    """Uniform prior; A loses B or C at random, B loses C, C loses B."""
    return HiddenVariableModel(prior=(1 / 3, 1 / 3, 1 / 3), rule=CANONICAL_RULE)


def with_a_split(model: HiddenVariableModel, p_remove_b: float) -> HiddenVariableModel:
    """Same model with the lambda=A removal split reweighted to (B: p, C: 1-p)."""
    rule = dict(model.rule)
    rule["A"] = (("B", p_remove_b), ("C", 1.0 - p_remove_b))
    return replace(model, rule=rule)


def monty_hall_compliant(model: HiddenVariableModel) -> bool:
    return all(removed != lam for lam, entries in model.rule.items() for removed, p in entries if p > 0)


def q_deterministic(model: HiddenVariableModel) -> float:
    """Exact Q for a compliant model, i.e. the prior weight of A."""
    if not monty_hall_compliant(model):
        raise NonCompliantModelError(
            "discard rule can remove the true value; estimate Q with q_simulated() instead"
        )
    return model.prior_of("A")


def solve_a_suppression(target_q: float, prior_a: float = 1 / 3) -> tuple[float, float]:
    """Stage-2 detection probability d for lambda=A that fakes ``target_q``.

    Solves d*pA / (d*pA + (1 - pA)) = target_q and returns ``(d, efficiency)``
    where efficiency = d*pA + (1 - pA) is the overall detection rate.
    """
    if not 0.0 < prior_a < 1.0:
        raise ValueError("prior weight of A must lie strictly between 0 and 1")
    if not 0.0 < target_q <= prior_a + _PROB_TOL:
        raise ValueError(
            f"target {target_q} is not reachable by suppressing A (need 0 < target <= {prior_a})"
        )
    d = target_q * (1.0 - prior_a) / (prior_a * (1.0 - target_q))
    d = min(d, 1.0)
    return d, d * prior_a + (1.0 - prior_a)


def solve_a_suppression_exact(target_q: Fraction, prior_a: Fraction = Fraction(1, 3)) -> tuple[Fraction, Fraction]:
    d = target_q * (1 - prior_a) / (prior_a * (1 - target_q))
    return d, d * prior_a + (1 - prior_a)


def adversarial_detection_model(
    target_q: float, base: HiddenVariableModel | None = None
) -> tuple[HiddenVariableModel, float]:
    """Canonical model plus a detector that drops lambda=A events at stage 2.

    Post-selected on detection, the A frequency equals ``target_q``.
    Returns the model and the overall detection efficiency it exhibits.
    """
    base = canonical_model() if base is None else base
    if not monty_hall_compliant(base):
        raise NonCompliantModelError("adversarial construction needs a compliant base model")
    d, efficiency = solve_a_suppression(target_q, base.prior_of("A"))
    policy = dict(base.detection_policy)
    policy[("A", 2)] = d
    return replace(base, detection_policy=policy), efficiency


def sample_trials(model: HiddenVariableModel, rng: np.random.Generator, n: int) -> dict[str, np.ndarray]:
    """Vectorized trial sampler; returns integer label indices and flags.

    Keys: ``lam``, ``removed``, ``final`` (post-discard value), ``second_is_A``,
    ``detected_stage1``, ``detected_stage2``.

    If a (non-compliant) rule removes the true value, the post-discard value
    is one of the two surviving labels with equal probability.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    prior_cdf = np.cumsum(model.prior)
    lam = np.minimum(np.searchsorted(prior_cdf, rng.random(n), side="right"), 2)
    removal_cdf = np.cumsum(model.removal_table(), axis=1)
    removed = (rng.random(n)[:, None] >= removal_cdf[lam]).sum(axis=1)
    removed = np.minimum(removed, 2)

    u_survivor = rng.random(n)
    final = lam.copy()
    lost = removed == lam
    if lost.any():
        # survivors of {0,1,2} minus removed, in increasing order
        lo = np.where(removed[lost] == 0, 1, 0)
        hi = np.where(removed[lost] == 2, 1, 2)
        final[lost] = np.where(u_survivor[lost] < 0.5, lo, hi)

    det = model.detection_table()
    d1 = rng.random(n) < det[lam, 0]
    d2 = rng.random(n) < det[lam, 1]
    return {
        "lam": lam,
        "removed": removed,
        "final": final,
        "second_is_A": final == 0,
        "detected_stage1": d1,
        "detected_stage2": d2,
    }


def sample_trial(model: HiddenVariableModel, rng: np.random.Generator) -> DhvTrialOutcome:
    draw = sample_trials(model, rng, 1)
    return DhvTrialOutcome(
        lam=LABELS[int(draw["lam"][0])],
        removed=LABELS[int(draw["removed"][0])],
        second_measurement_is_A=bool(draw["second_is_A"][0]),
        detected_stage1=bool(draw["detected_stage1"][0]),
        detected_stage2=bool(draw["detected_stage2"][0]),
    )


def q_simulated(model: HiddenVariableModel, n: int, rng: np.random.Generator, postselect: bool = False) -> float:
    """Monte Carlo estimate of Q; works for non-compliant rules too."""
    draw = sample_trials(model, rng, n)
    hits = draw["second_is_A"]
    if postselect:
        keep = draw["detected_stage1"] & draw["detected_stage2"]
        if not keep.any():
            raise ValueError("no detected trials")
        hits = hits[keep]
    return float(np.mean(hits))
