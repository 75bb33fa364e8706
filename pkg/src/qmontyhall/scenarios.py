"""End-to-end scenarios behind the CLI. Each returns a report dict."""

from __future__ import annotations

from dataclasses import asdict
from typing import Any, Callable

import numpy as np

from . import dhv, montecarlo as mc, photonics, protocol, qlinalg as ql
from .config import ScenarioConfig
from .report import make_report


def _config_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    d = asdict(cfg)
    d.pop("output_path")
    return d


def _mc_row(cfg: ScenarioConfig, rep: mc.ExperimentReport, epsilon: float, eta: float) -> dict[str, Any]:
    return {
        "scenario": cfg.scenario,
        "model": rep.metadata["model"],
        "seed": cfg.seed,
        "stream": cfg.stream,
        "n_trials": rep.n_trials,
        "n_detected": rep.n_detected,
        "n_success": rep.n_success,
        "q_hat": rep.q_hat,
        "ci_low": rep.ci_low,
        "ci_high": rep.ci_high,
        "confidence": rep.confidence,
        "verdict": rep.verdict,
        "epsilon": epsilon,
        "eta": eta,
    }


def _mc_report(cfg: ScenarioConfig, batch: mc.TrialBatch, epsilon: float, eta: float, extra: dict[str, Any]) -> dict[str, Any]:
    meta = {"seed": cfg.seed, "stream": cfg.stream, "epsilon": epsilon, "eta": eta}
    rep = mc.estimate_q(batch, cfg.confidence, metadata=meta)
    results = {"experiment": rep.as_dict(), **extra}
    return make_report(cfg.scenario, _config_dict(cfg), results, [_mc_row(cfg, rep, epsilon, eta)])


def run_exact(cfg: ScenarioConfig) -> dict[str, Any]:
    model = protocol.canonical_model()
    psi0 = protocol.prepare_psi0()
    p_f1 = float(np.real(ql.inner(psi0, model.effects[0] @ psi0)))
    q_qm = protocol.q_quantum(model, psi0)
    q_det = dhv.q_deterministic(dhv.canonical_model())
    table = {
        "p_f1": p_f1,
        "q_quantum": q_qm,
        "q_det": q_det,
        "ratio_det_over_quantum": q_det / q_qm,
        "threshold": float(protocol.QUANTUM_MARGIN),
    }
    rows = [{"quantity": k, "value": v} for k, v in table.items()]
    return make_report("exact", _config_dict(cfg), table, rows)


def run_quantum_mc(cfg: ScenarioConfig) -> dict[str, Any]:
    batch = mc.simulate_quantum(cfg.n_trials, cfg.epsilon, cfg.eta, mc.RngStream(cfg.seed, cfg.stream))
    q_exact = protocol.q_quantum(
        protocol.canonical_model(), protocol.apply_white_noise(protocol.prepare_psi0(), cfg.epsilon)
    )
    return _mc_report(cfg, batch, cfg.epsilon, cfg.eta, {"q_exact": q_exact})


def run_dhv_mc(cfg: ScenarioConfig) -> dict[str, Any]:
    model = dhv.canonical_model()
    batch = mc.simulate_dhv(cfg.n_trials, model, mc.RngStream(cfg.seed, cfg.stream))
    return _mc_report(cfg, batch, 0.0, 1.0, {"q_exact": dhv.q_deterministic(model)})


def run_adversarial_mc(cfg: ScenarioConfig) -> dict[str, Any]:
    model, efficiency = dhv.adversarial_detection_model(cfg.target_q)
    batch = mc.simulate_dhv(cfg.n_trials, model, mc.RngStream(cfg.seed, cfg.stream))
    extra = {
        "target_q": cfg.target_q,
        "a_suppression": model.detection("A", 2),
        "required_efficiency": efficiency,
        "observed_detection_rate": float(batch.detected.mean()),
        "unconditional_q_hat": float(batch.second_is_A.mean()),
        "q_exact_unconditional": dhv.q_deterministic(model),
    }
    return _mc_report(cfg, batch, 0.0, efficiency, extra)


def run_photonic(cfg: ScenarioConfig) -> dict[str, Any]:
    if cfg.circuit:
        discard = photonics.parse_circuit(cfg.circuit, 3, cfg.ancilla_modes)
    else:
        discard = photonics.design_discard_circuit()
    pipeline = photonics.full_pipeline(discard)
    kraus = photonics.effective_kraus(discard)
    k1 = protocol.canonical_model().kraus[0]
    literal = photonics.run_circuit(photonics.literal_discard_circuit(), protocol.prepare_psi0())
    state = pipeline.discard.conditional_state
    extra = {
        "custom_circuit": bool(cfg.circuit),
        "circuit_unitary_ok": ql.is_unitary(discard.unitary()),
        "postselect_probability": pipeline.discard.postselect_probability,
        "conditional_state_abs": None if state is None else np.abs(state).tolist(),
        "q_optical": pipeline.q,
        "kraus_matches_k1": ql.equal_up_to_phase(kraus, k1),
        "kraus_max_deviation": float(np.max(np.abs(ql.fix_global_phase(kraus) - ql.fix_global_phase(k1)))),
        "literal_beamsplitter_success_probability": literal.postselect_probability,
        "literal_beamsplitter_conditional_state_abs": np.abs(literal.conditional_state).tolist(),
    }
    batch = mc.simulate_photonic(cfg.n_trials, cfg.eta, mc.RngStream(cfg.seed, cfg.stream), discard)
    return _mc_report(cfg, batch, 0.0, cfg.eta, extra)


def run_noise_sweep(cfg: ScenarioConfig) -> dict[str, Any]:
    curve = protocol.q_noise_curve(protocol.canonical_model(), protocol.default_noise_grid(cfg.sweep_points))
    rows = [
        {"epsilon": p.epsilon, "q_computed": p.q_computed, "q_linear_formula": p.q_formula, "delta": p.delta}
        for p in curve
    ]
    qs = [p.q_computed for p in curve]
    results = {
        "max_abs_delta": max(abs(p.delta) for p in curve),
        "monotone_nondecreasing": all(b >= a - 1e-15 for a, b in zip(qs, qs[1:])),
        "max_epsilon_below_bound": max((p.epsilon for p in curve if p.q_computed < mc.DETERMINISTIC_BOUND), default=None),
    }
    return make_report("noise_sweep", _config_dict(cfg), results, rows)


def run_power_plan(cfg: ScenarioConfig) -> dict[str, Any]:
    p_true, boundary = mc.QUANTUM_VALUE, mc.DETERMINISTIC_BOUND
    n_req = mc.required_trials(p_true, boundary, cfg.z)
    frac = mc.power_check(n_req, cfg.experiments, mc.RngStream(cfg.seed, cfg.stream), confidence=cfg.confidence)
    row = {
        "p_true": p_true,
        "boundary": boundary,
        "z": cfg.z,
        "n_required": n_req,
        "experiments": cfg.experiments,
        "confidence": cfg.confidence,
        "fraction_violating": frac,
    }
    return make_report("power_plan", _config_dict(cfg), dict(row), [row])


RUNNERS: dict[str, Callable[[ScenarioConfig], dict[str, Any]]] = {
    "exact": run_exact,
    "quantum_mc": run_quantum_mc,
    "dhv_mc": run_dhv_mc,
    "adversarial_mc": run_adversarial_mc,
    "photonic": run_photonic,
    "noise_sweep": run_noise_sweep,
    "power_plan": run_power_plan,
}


def run_scenario(cfg: ScenarioConfig) -> dict[str, Any]:
    return RUNNERS[cfg.scenario](cfg)
