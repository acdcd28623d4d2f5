import numpy as np
import pytest

from fakebell.detectors import DetectorParams, respond_faked
from fakebell.eve import default_eve_analyzer, intercept_batch, intercept_resend
from fakebell.optics import faked_power_map
from fakebell.sources import FakedState


def test_aligned_perfect_correlation():
    rng = np.random.default_rng(1)
    n_checked = 0
    while n_checked < 200:
        a, rec = intercept_resend(1.0, 22.5, rng)
        if rec.eve_basis != 0:
            continue
        port = 0 if a > 0 else 1
        assert rec.eve_outcome == default_eve_analyzer().outcome(0, port)
        n_checked += 1


def test_resent_polarizations_are_tilde_family(rng):
    angles = set()
    for _ in range(500):
        _, rec = intercept_resend(0.84, 0.0, rng)
        angles.add(round(rec.resent.trigger_polarization.angle, 9))
    assert angles == {22.5, 112.5, 67.5, 157.5}


def test_record_polarization_matches_basis_and_outcome(rng):
    ana = default_eve_analyzer()
    for _ in range(300):
        _, rec = intercept_resend(0.84, 45.0, rng)
        port = int(ana.port(rec.eve_basis, rec.eve_outcome))
        expected = (ana.analysis_angle(rec.eve_basis) + 90 * port) % 180
        assert rec.resent.trigger_polarization.angle == pytest.approx(expected)


def test_bob_copies_eve_event_by_event(rng):
    bob = default_eve_analyzer()
    params = DetectorParams()
    for _ in range(300):
        _, rec = intercept_resend(0.84, 0.0, rng)
        trig, blind = faked_power_map(rec.resent, bob)
        (channel,) = respond_faked(trig, blind, params, rng)
        basis, port = channel // 2, channel % 2
        assert (basis, int(bob.outcome(basis, port))) == (rec.eve_basis, rec.eve_outcome)


def test_eve_losses(rng):
    b = intercept_batch(0.84, np.zeros(20_000), rng, params=DetectorParams(eta=0.5))
    assert 0.48 < b.detected.mean() < 0.52
    _, rec = intercept_resend(0.84, 0.0, np.random.default_rng(0), params=DetectorParams(eta=0.0))
    assert rec is None


def test_bad_visibility(rng):
    with pytest.raises(ValueError):
        intercept_resend(1.2, 0.0, rng)


def test_resent_state_uses_default_powers(rng):
    _, rec = intercept_resend(0.84, 0.0, rng)
    assert isinstance(rec.resent, FakedState)
    assert rec.resent.trigger_power == 1.0
    assert rec.resent.blinding_power_per_channel == 0.15
