import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmontyhall import protocol as p
from qmontyhall import qlinalg as ql

# K2 derived by hand: sqrt(F2) = diag(1/sqrt2, 1, 1/sqrt2); the Householder
# reflection taking (1/2, 1/sqrt2, 1/2) to (0, 1, -1)/sqrt2 has rows
# (1/sqrt2, 0, -1/sqrt2), (0, 1, 0), (-1/sqrt2, 0, -1/sqrt2).
K2_BY_HAND = np.array([[0.5, 0.0, -0.5], [0.0, 1.0, 0.0], [-0.5, 0.0, -0.5]])
KRAUS_BY_HAND = (np.diag([1, 0, 1]) / np.sqrt(2), K2_BY_HAND)


@pytest.fixture(scope="module")
def model():
    return p.canonical_model()


def random_ket(rng, d=3):
    return ql.normalize(rng.normal(size=d) + 1j * rng.normal(size=d))


def random_density(rng, d=3):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ ql.dagger(g)
    return rho / np.trace(rho).real


def q_oracle(rho, kraus):
    """Brute-force trace formula sum_k Tr(P_A K rho K^dag)."""
    pa = np.diag([1.0, 0, 0])
    return sum(np.trace(pa @ k @ rho @ k.conj().T).real for k in kraus)


def test_psi0():
    psi0 = p.prepare_psi0()
    np.testing.assert_allclose(psi0, [0.5773502692] * 3, atol=1e-10)
    assert np.all(psi0.imag == 0)
    assert ql.is_normalized(psi0)
    assert abs(ql.inner(p.ket("B"), psi0)) ** 2 == pytest.approx(1 / 3, abs=1e-15)


def test_effects_and_kraus(model):
    f1, f2 = model.effects
    np.testing.assert_allclose(f1 + f2, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(model.kraus[0], np.diag([1, 0, 1]) / np.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(model.kraus[1], K2_BY_HAND, atol=1e-14)
    psi0 = p.prepare_psi0()
    assert ql.inner(psi0, f1 @ psi0).real == pytest.approx(1 / 3, abs=1e-12)
    assert abs((model.kraus[1] @ psi0)[0]) ** 2 <= 1e-20


def test_kraus_completeness(model):
    k1, k2 = model.kraus
    np.testing.assert_allclose(ql.dagger(k1) @ k1 + ql.dagger(k2) @ k2, np.eye(3), atol=1e-10)


def test_dilation_unitary_and_ancilla_layout(model):
    assert model.dilation.shape == (6, 6)
    assert ql.is_unitary(model.dilation)
    assert model.ancilla_outcome_map == (1, 0)


def test_dilation_reproduces_kraus_on_random_inputs(model):
    rng = np.random.default_rng(7)
    for _ in range(100):
        phi = random_ket(rng)
        out1, out2 = p.apply_dilation(model, phi)
        np.testing.assert_allclose(out1, model.kraus[0] @ phi, atol=1e-10)
        np.testing.assert_allclose(out2, model.kraus[1] @ phi, atol=1e-10)


def test_dilation_on_psi0_matches_decomposition(model):
    out1, out2 = p.apply_dilation(model, p.prepare_psi0())
    np.testing.assert_allclose(out1, np.sqrt(1 / 3) * p.psi1(), atol=1e-12)
    # F2-flagged state is orthogonal to A with weight 2/3
    assert abs(out2[0]) < 1e-15
    assert np.vdot(out2, out2).real == pytest.approx(2 / 3, abs=1e-12)


def test_model_rejects_inconsistent_kraus(model):
    with pytest.raises(ValueError):
        p.MeasurementModel(model.effects, (model.kraus[0], np.eye(3, dtype=complex)), model.dilation.copy())


def test_measure_discard_examples(model):
    b1, b2 = p.measure_discard(model, p.prepare_psi0())
    assert b1.probability == pytest.approx(1 / 3, abs=1e-12)
    np.testing.assert_allclose(b1.post_state, ql.outer(p.psi1()), atol=1e-12)
    assert b1.probability + b2.probability == pytest.approx(1, abs=1e-12)

    b1, b2 = p.measure_discard(model, p.ket("B"))
    assert b1.probability == 0.0
    assert b1.post_state is None and not b1.defined
    assert b2.probability == pytest.approx(1.0)

    b1, _ = p.measure_discard(model, np.eye(3) / 3)
    assert b1.probability == pytest.approx(1 / 3, abs=1e-12)  # Tr(F1)/3 with Tr(F1) = 1


def test_measure_discard_rejects_bad_state(model):
    with pytest.raises(ValueError):
        p.measure_discard(model, 2 * np.eye(3))


def test_projective_prob():
    assert p.projective_prob(p.psi1(), "A") == pytest.approx(0.5)
    assert p.projective_prob(p.ket("B"), "A") == 0
    assert p.projective_prob(np.eye(3) / 3, 0) == pytest.approx(1 / 3)
    with pytest.raises(IndexError):
        p.projective_prob(np.eye(3) / 3, 3)
    with pytest.raises(IndexError):
        p.projective_prob(np.eye(3) / 3, "D")


def test_q_quantum_values(model):
    assert p.q_quantum(model, p.prepare_psi0()) == pytest.approx(1 / 6, abs=1e-12)
    # hand oracle: K1|B> = 0 and <A|K2|B> = 0
    assert p.q_quantum(model, p.ket("B")) == pytest.approx(0, abs=1e-15)
    # hand oracle: K1|A> = |A>/sqrt2 -> 1/2, <A|K2|A> = 1/2 -> 1/4
    assert p.q_quantum(model, p.ket("A")) == pytest.approx(3 / 4, abs=1e-12)
    assert p.q_quantum(model, p.ket("C")) == pytest.approx(1 / 4, abs=1e-12)


def test_q_quantum_pure_states_via_dilation(model):
    rng = np.random.default_rng(11)
    for _ in range(50):
        phi = random_ket(rng)
        out1, out2 = p.apply_dilation(model, phi)
        assert p.q_quantum(model, phi) == pytest.approx(abs(out1[0]) ** 2 + abs(out2[0]) ** 2, abs=1e-12)


def test_white_noise():
    psi0 = p.prepare_psi0()
    np.testing.assert_allclose(p.apply_white_noise(psi0, 0), ql.outer(psi0))
    np.testing.assert_allclose(p.apply_white_noise(psi0, 1), np.eye(3) / 3)
    half = p.apply_white_noise(psi0, 0.5)
    np.testing.assert_allclose(np.diag(half), [1 / 3] * 3, atol=1e-15)
    off = half[~np.eye(3, dtype=bool)]
    np.testing.assert_allclose(off, 1 / 6, atol=1e-15)
    assert p.is_density_matrix(half)
    for bad in (-0.1, 1.1):
        with pytest.raises(ValueError):
            p.apply_white_noise(psi0, bad)


def test_noise_curve(model):
    grid = p.default_noise_grid()
    curve = p.q_noise_curve(model, grid)
    assert [pt.epsilon for pt in curve] == pytest.approx([i / 10 for i in range(11)])
    assert curve[0].q_computed == pytest.approx(1 / 6, abs=1e-12)
    assert abs(curve[0].delta) <= 1e-12
    rho0 = ql.outer(p.prepare_psi0())
    for pt in curve:
        rho = (1 - pt.epsilon) * rho0 + pt.epsilon * np.eye(3) / 3
        assert pt.q_computed == pytest.approx(q_oracle(rho, KRAUS_BY_HAND), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_born_consistency(seed):
    model = p.canonical_model()
    rho = random_density(np.random.default_rng(seed))
    b1, b2 = p.measure_discard(model, rho)
    assert 0 <= b1.probability <= 1 and 0 <= b2.probability <= 1
    assert b1.probability + b2.probability == pytest.approx(1, abs=1e-12)
    assert p.q_quantum(model, rho) == pytest.approx(q_oracle(rho, KRAUS_BY_HAND), abs=1e-12)
    for b in (b1, b2):
        if b.defined:
            assert p.is_density_matrix(b.post_state, tol=1e-10)


def test_no_kraus_for_f2_kills_a_row_for_all_inputs(model):
    # K2 has full rank, so some input always reaches A in the F2 branch
    k2 = model.kraus[1]
    assert np.linalg.matrix_rank(k2) == 3
    assert np.linalg.norm(k2[0]) > 0.5
