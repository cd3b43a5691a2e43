import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shelfguide.errors import EmptyDataset, MalformedRow, UnknownCommand
from shelfguide.hand_model import (
    INCH,
    SIGMA_FLOOR,
    CommandModel,
    default_vocabulary,
    fit,
    load_model,
    model_from_dict,
    model_to_dict,
    read_demos_csv,
    sample_movement,
    save_model,
    synthetic_default_model,
    vocabulary_hash,
)


def test_vocabulary_size_and_ids():
    vocab = default_vocabulary()
    assert len(vocab) == 36
    assert [c.id for c in vocab] == list(range(36))


def test_vocabulary_utterances():
    vocab = default_vocabulary()
    by_utterance = {c.utterance: c for c in vocab}
    right6 = by_utterance["Move 6 inches to the right"]
    assert right6.direction == "right"
    assert right6.nominal_magnitude == pytest.approx(6 * INCH)
    up1 = by_utterance["Move 1 inch up"]
    assert up1.direction == "up"
    assert up1.nominal_magnitude == pytest.approx(1 * INCH)


def test_synthetic_default_model():
    m = synthetic_default_model()
    assert m.provenance == "synthetic_default"
    for c in m.commands:
        g = m.gaussian(c.id)
        assert g.mu == pytest.approx(c.nominal_magnitude)
        assert g.sigma == pytest.approx(max(0.01, 0.2 * c.nominal_magnitude))
        assert g.sample_count == 0


def test_unknown_command():
    m = synthetic_default_model()
    with pytest.raises(UnknownCommand):
        m.spec(36)
    with pytest.raises(UnknownCommand):
        m.gaussian(-1)


def test_fit_projects_onto_signed_axis(rng):
    # command 0 is "1 inch left": displacement along -x counts as positive
    rows = [(0, (-0.03 + 0.001 * k, 0.5, -0.5)) for k in range(5)]
    m = fit(rows)
    g = m.gaussian(0)
    assert g.mu == pytest.approx(0.028)
    assert g.sample_count == 5


def test_fit_fallback_and_errors():
    rows = [(5, (0.0, 0.0, 0.0)), (5, (-0.1, 0.0, 0.0))]
    m = fit(rows)
    assert m.gaussian(5).sample_count == 2
    # untouched commands fall back to the synthetic defaults
    assert m.gaussian(0).sample_count == 0
    with pytest.raises(EmptyDataset):
        fit([])
    with pytest.raises(MalformedRow):
        fit([(0, (0.1, 0.0, 0.0))])  # single sample: no variance estimate
    with pytest.raises(MalformedRow):
        fit([(99, (0.1, 0.0, 0.0))])


def test_fit_sigma_floor():
    rows = [(9, (0.15, 0.0, 0.0))] * 4  # identical samples, zero variance
    m = fit(rows)
    assert m.gaussian(9).sigma == SIGMA_FLOOR


def test_fit_recovers_known_gaussians(rng):
    truth = synthetic_default_model()
    rows = []
    for c in truth.commands:
        for _ in range(200):
            s = sample_movement(truth, c.id, rng)
            vec = [0.0, 0.0, 0.0]
            from shelfguide.hand_model import AXIS_OF_DIRECTION, SIGN_OF_DIRECTION
            vec[AXIS_OF_DIRECTION[c.direction]] = SIGN_OF_DIRECTION[c.direction] * s
            rows.append((c.id, tuple(vec)))
    fitted = fit(rows)
    for c in truth.commands:
        gt = truth.gaussian(c.id)
        gf = fitted.gaussian(c.id)
        assert abs(gf.mu - gt.mu) < 4 * gt.sigma / math.sqrt(200)
        assert abs(gf.sigma - gt.sigma) / gt.sigma < 0.3


def test_model_roundtrip(tmp_path):
    m = synthetic_default_model()
    path = tmp_path / "model.json"
    save_model(m, path)
    m2 = load_model(path)
    assert m2 == m
    assert model_from_dict(model_to_dict(m)) == m


def test_vocabulary_hash_changes_with_vocab():
    m = synthetic_default_model()
    h1 = vocabulary_hash(m)
    assert h1 == vocabulary_hash(synthetic_default_model())
    small = default_vocabulary()[:6]  # ids 0..5 stay dense
    m2 = synthetic_default_model(small)
    assert vocabulary_hash(m2) != h1


def test_read_demos_csv(tmp_path):
    p = tmp_path / "demos.csv"
    p.write_text("command_id,dx,dy,dz\n3,0.1,0.0,0.0\n")
    assert read_demos_csv(p) == [(3, (0.1, 0.0, 0.0))]
    p.write_text("cmd,dx,dy\n")
    with pytest.raises(MalformedRow):
        read_demos_csv(p)
    p.write_text("command_id,dx,dy,dz\n3,abc,0,0\n")
    with pytest.raises(MalformedRow):
        read_demos_csv(p)


@given(st.lists(st.floats(-0.5, 0.5), min_size=2, max_size=20))
def test_fitted_sigma_never_below_floor(samples):
    rows = [(0, (-s, 0.0, 0.0)) for s in samples]
    m = fit(rows)
    assert m.gaussian(0).sigma >= SIGMA_FLOOR


def test_sample_movement_seeded(rng):
    m = synthetic_default_model()
    a = sample_movement(m, 10, np.random.default_rng(3))
    b = sample_movement(m, 10, np.random.default_rng(3))
    assert a == b
