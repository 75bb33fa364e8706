"""Exit criteria for the package, one test per criterion.

Run ``pytest tests/test_acceptance.py`` to get a PASS/FAIL line for each
criterion in the terminal summary.
"""

import json
import math
import time

import numpy as np
import pytest

from qmontyhall import cli, dhv, montecarlo as mc, photonics as ph, protocol, qlinalg as ql


def sigma(q, n):
    return math.sqrt(q * (1 - q) / n)


@pytest.fixture
def criterion(record_property):
    def label(text):
        record_property("criterion", text)

    return label


def test_ac01_exact_quantum_value(criterion):
    criterion("AC1 exact quantum value: Q_QM = 1/6 and <psi0|F1|psi0> = 1/3 within 1e-12")
    model = protocol.canonical_model()
    psi0 = protocol.prepare_psi0()
    assert abs(protocol.q_quantum(model, psi0) - 1 / 6) <= 1e-12
    assert abs(ql.inner(psi0, model.effects[0] @ psi0).real - 1 / 3) <= 1e-12


def test_ac02_exact_deterministic_value(criterion):
    criterion("AC2 exact deterministic value: Q_det = 1/3, invariant under the lambda=A split")
    canon = dhv.canonical_model()
    assert dhv.q_deterministic(canon) == 1 / 3
    for split in np.linspace(0, 1, 21):
        assert dhv.q_deterministic(dhv.with_a_split(canon, float(split))) == 1 / 3


def test_ac03_violation_factor(criterion):
    criterion("AC3 violation factor: Q_det / Q_QM = 2 within 1e-12")
    q_qm = protocol.q_quantum(protocol.canonical_model(), protocol.prepare_psi0())
    assert abs(dhv.q_deterministic(dhv.canonical_model()) / q_qm - 2) <= 1e-12


def test_ac04_monte_carlo_agreement(criterion):
    criterion("AC4 Monte Carlo: 1e6 trials each, q_hat within 4 sigma, verdicts correct, < 10 s")
    n = 10**6
    start = time.perf_counter()
    quantum = mc.estimate_q(mc.simulate_quantum(n, 0.0, 1.0, mc.RngStream(20260101)))
    det = mc.estimate_q(mc.simulate_dhv(n, dhv.canonical_model(), mc.RngStream(20260102)))
    elapsed = time.perf_counter() - start
    assert abs(quantum.q_hat - 1 / 6) <= 4 * sigma(1 / 6, n)
    assert abs(det.q_hat - 1 / 3) <= 4 * sigma(1 / 3, n)
    assert quantum.verdict == "violates_deterministic_bound"
    assert det.verdict == "consistent_with_bound"
    assert elapsed < 10


def test_ac05_dilation_correctness(criterion):
    criterion("AC5 dilation: 6x6 unitary within 1e-10, reproduces both Kraus branches on 100 inputs within 1e-10")
    model = protocol.canonical_model()
    assert model.dilation.shape == (6, 6)
    assert ql.is_unitary(model.dilation, 1e-10)
    rng = np.random.default_rng(5)
    for _ in range(100):
        phi = ql.normalize(rng.normal(size=3) + 1j * rng.normal(size=3))
        out1, out2 = protocol.apply_dilation(model, phi)
        assert np.max(np.abs(out1 - model.kraus[0] @ phi)) <= 1e-10
        assert np.max(np.abs(out2 - model.kraus[1] @ phi)) <= 1e-10


def test_ac06_f2_branch_orthogonality(criterion):
    criterion("AC6 F2 branch: |<A|K2|psi0>|^2 <= 1e-20")
    k2 = protocol.canonical_model().kraus[1]
    assert abs((k2 @ protocol.prepare_psi0())[0]) ** 2 <= 1e-20


def test_ac07_photonic_equivalence(criterion):
    criterion("AC7 photonics: effective Kraus = K1 up to phase within 1e-10; optical Q = 1/6 within 1e-10")
    kraus = ph.effective_kraus(ph.design_discard_circuit())
    k1 = protocol.canonical_model().kraus[0]
    assert ql.equal_up_to_phase(kraus, k1, 1e-10)
    assert abs(ph.full_pipeline().q - 1 / 6) <= 1e-10
    assert abs(ph.run_circuit(ph.protocol_circuit(), [1, 0, 0]).postselect_probability - 1 / 6) <= 1e-10


def test_ac08_noise_audit(criterion, tmp_path):
    criterion("AC8 noise audit: sweep reports Q(eps), (1+eps)/6 and delta; agree at eps=0 within 1e-12; Q < 1/3 - 1e-6 for eps <= 0.9")
    out = tmp_path / "sweep.json"
    assert cli.main(["--scenario", "noise_sweep", "--out", str(out)]) == 0
    rows = json.loads(out.read_text())["rows"]
    assert all({"epsilon", "q_computed", "q_linear_formula", "delta"} <= set(r) for r in rows)
    # full precision check straight from the density-matrix path
    curve = protocol.q_noise_curve(protocol.canonical_model(), protocol.default_noise_grid(101))
    assert curve[0].epsilon == 0 and abs(curve[0].delta) <= 1e-12
    for pt in curve:
        if pt.epsilon <= 0.9 + 1e-12:
            assert pt.q_computed < 1 / 3 - 1e-6


def test_ac09_detection_loophole(criterion):
    criterion("AC9 detection loophole: target 1/6 -> suppression 0.4, efficiency 0.8, confirmed by 1e6 trials within 4 sigma")
    model, eff = dhv.adversarial_detection_model(1 / 6)
    d = model.detection("A", 2)
    assert abs(d - 0.4) <= 1e-12 and abs(eff - 0.8) <= 1e-12
    n = 10**6
    start = time.perf_counter()
    batch = mc.simulate_dhv(n, model, mc.RngStream(20260109))
    rep = mc.estimate_q(batch)
    assert time.perf_counter() - start < 10
    assert abs(rep.q_hat - 1 / 6) <= 4 * sigma(1 / 6, rep.n_detected)
    assert abs(rep.n_detected / n - 0.8) <= 4 * sigma(0.8, n)


def test_ac10_power_plan(criterion):
    criterion("AC10 power plan: required_trials(1/6, 1/3, 5) = 125; >= 95% of 200 runs of 125 trials give ci_high < 1/3")
    n = mc.required_trials(1 / 6, 1 / 3, 5)
    assert n == 125
    start = time.perf_counter()
    below = 0
    for child in mc.RngStream(20260110).spawn(200):
        below += mc.estimate_q(mc.simulate_quantum(n, 0.0, 1.0, child)).ci_high < 1 / 3
    assert time.perf_counter() - start < 30
    assert below / 200 >= 0.95


@pytest.mark.parametrize("scenario", ["exact", "quantum_mc", "dhv_mc", "adversarial_mc", "photonic", "noise_sweep", "power_plan"])
def test_ac11_reproducibility(criterion, tmp_path, scenario):
    criterion(f"AC11 reproducibility: {scenario} run twice gives byte-identical reports")
    outs = []
    for i in range(2):
        out = tmp_path / f"{scenario}-{i}.json"
        args = ["--scenario", scenario, "--seed", "42", "--trials", "100000", "--experiments", "50", "--out", str(out)]
        assert cli.main(args) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
