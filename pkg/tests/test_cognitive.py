from fractions import Fraction as Q

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimox.cognitive import (
    INTERFERENCE_CASES,
    SharingPattern,
    cognitive_interference_plan,
    cognitive_rx_plan,
    cognitive_tx_plan,
    dof_value,
    effective_transmit,
    modified_noise_covariance,
    received_images,
    rotation_block,
)
from mimox.errors import DegenerateChannelError, PreconditionError
from mimox.numerics import AntennaConfig, ChannelSet, complex_gaussian, extend, random_channel_set
from mimox.region import cognitive_polytope


def _channels(m, seed):
    return random_channel_set(AntennaConfig.equal(m), seed)


def test_rotation_block():
    assert np.array_equal(rotation_block(3), np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]]))


@pytest.mark.parametrize("bad", [("11", "tx1"), ("11", "rx1"), ("22", "tx2"), ("12", "rx1"), ("33", "tx1")])
def test_pattern_rejects_own_nodes(bad):
    with pytest.raises(ValueError):
        SharingPattern.of(bad)


def test_pattern_interference_channel_messages():
    with pytest.raises(ValueError):
        SharingPattern.of(("12", "rx2"), channel="interference")
    assert SharingPattern.of(("11", "tx2"), channel="interference").knows("tx2", "11")


@pytest.mark.parametrize("m", [2, 3, 4])
def test_tx_plan_certificates(m):
    cog = cognitive_tx_plan(_channels(m, 13), seed=1)
    assert cog.extension_factor == 2
    assert cog.counts.total == 3 * m
    assert cog.streams_per_use() == Q(3 * m, 2)
    c = cog.certificates
    assert c["rank_condition_rx1"] == 2 * m and c["rank_condition_rx2"] == 2 * m
    assert c["min_sv_ratio_rx1"] > 1e-6 and c["min_sv_ratio_rx2"] > 1e-6
    assert c["rx2_w11_residual"] <= 1e-8
    link, = cog.linked_payloads
    assert (link.source, link.mirror, link.transmitter) == ("11", "12", 2)
    assert link.directions.shape[1] == cog.counts[0]


@pytest.mark.parametrize("seed", range(25))
def test_tx_plan_cancels_w11_at_rx2(seed):
    ch = _channels(2 + seed % 3, seed)
    cog = cognitive_tx_plan(ch, seed=seed)
    img = received_images(cog.channels, cog, 2)["11"]
    assert np.linalg.norm(img, axis=0).max() <= 1e-8


def test_tx_plan_errors():
    with pytest.raises(PreconditionError):
        cognitive_tx_plan(_channels(1, 0))
    eye = np.eye(2, dtype=complex)
    ident = ChannelSet(AntennaConfig.equal(2), eye, eye, eye, eye)
    with pytest.raises(PreconditionError, match="eigenvalues"):
        cognitive_tx_plan(ident)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_rx_plan_certificates(m):
    cog = cognitive_rx_plan(_channels(m, 29), seed=4)
    c = cog.certificates
    assert cog.streams_per_use() == Q(3 * m, 2)
    assert c["rx1_combined_interference"] <= 1e-8
    assert c["rx1_desired_rank"] == m
    assert c["rx2_rank"] == 2 * m
    assert cog.subtraction_rules == ((2, "11"),)
    u = cog.combiner
    ext = cog.channels
    assert np.linalg.norm(u @ ext.h11 @ cog.plan.v21) <= 1e-8 * np.linalg.norm(u, 2) * np.linalg.norm(ext.h11, 2)
    assert np.linalg.norm(u @ ext.h12 @ cog.plan.v22) <= 1e-8 * np.linalg.norm(u, 2) * np.linalg.norm(ext.h12, 2)


def test_rx_plan_errors():
    with pytest.raises(PreconditionError):
        cognitive_rx_plan(_channels(1, 0))
    ch = _channels(2, 0)
    zero = ChannelSet(ch.config, np.zeros((2, 2)), ch.h12, ch.h21, ch.h22)
    with pytest.raises(DegenerateChannelError):
        cognitive_rx_plan(zero)


def test_plans_are_reproducible():
    ch = _channels(3, 2)
    assert np.array_equal(cognitive_tx_plan(ch, 5).plan.v11, cognitive_tx_plan(ch, 5).plan.v11)
    assert np.array_equal(cognitive_rx_plan(ch, 5).combiner, cognitive_rx_plan(ch, 5).combiner)


@pytest.mark.parametrize("case", INTERFERENCE_CASES)
@pytest.mark.parametrize("m", [1, 2, 3])
def test_interference_cases(case, m):
    cog = cognitive_interference_plan(_channels(m, 17), case)
    c = cog.certificates
    assert c["total"] == 2 * m
    assert c["rx1_residual"] <= 1e-8 and c["rx2_residual"] <= 1e-8
    assert c["rx1_desired_rank"] == m and c["rx2_desired_rank"] == m


def test_both_rx_uses_no_shaping():
    cog = cognitive_interference_plan(_channels(2, 1), "both_rx")
    assert cog.linked_payloads == ()
    assert set(cog.subtraction_rules) == {(1, "22"), (2, "11")}


def test_tx_and_rx_zero_forces_w11():
    cog = cognitive_interference_plan(_channels(2, 3), "tx_and_rx")
    a1, a2 = effective_transmit(cog, "11")
    ch = cog.channels
    assert np.linalg.norm(ch.h21 @ a1 + ch.h22 @ a2) <= 1e-8
    assert cog.subtraction_rules == ((1, "22"),)


def test_unknown_case():
    with pytest.raises(ValueError):
        cognitive_interference_plan(_channels(2, 0), "neither")


def test_modified_noise_examples():
    h22 = np.diag([2.0, 0.5])
    assert np.allclose(modified_noise_covariance(np.eye(2), h22), np.eye(2) / 4)
    assert np.allclose(modified_noise_covariance(np.eye(2), np.eye(2)), np.eye(2))
    with pytest.raises(PreconditionError):
        modified_noise_covariance(np.ones((1, 2)), np.ones((2, 2)))
    with pytest.raises(PreconditionError):
        modified_noise_covariance(np.ones((3, 2)), np.eye(2))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(0, 4), st.integers(1, 4), st.integers(0, 2**31))
def test_modified_noise_spectrum(m2, extra, n2, seed):
    rng = np.random.default_rng(seed)
    h12 = complex_gaussian(rng, (m2 + extra, m2))
    h22 = complex_gaussian(rng, (n2, m2))
    k = modified_noise_covariance(h12, h22)
    assert np.allclose(k, k.conj().T, atol=0)
    lam = np.linalg.eigvalsh(k)
    assert lam.min() > 0 and lam.max() <= 1 + 1e-9


def test_dof_value_examples():
    assert dof_value(SharingPattern(), 3).value == 4
    assert dof_value(SharingPattern.of(("11", "tx2"), channel="interference"), 5).value == 5
    assert dof_value(SharingPattern.of(("11", "rx2")), 2).value == 3
    assert dof_value(SharingPattern.of(("11", "tx2"), ("22", "rx1"), channel="interference"), 3).value == 6


def test_dof_value_single_antenna_bounds():
    v = dof_value(SharingPattern(), 1)
    assert not v.exact and (v.lower, v.upper) == (1, Q(4, 3))
    with pytest.raises(ValueError):
        v.value


@pytest.mark.parametrize("m", range(2, 9))
def test_dof_hierarchy(m):
    none = dof_value(SharingPattern(), m).value
    one = dof_value(SharingPattern.of(("21", "tx2")), m).value
    two = dof_value(SharingPattern.of(("11", "tx2"), ("22", "tx1")), m).value
    assert none == Q(4 * m, 3) and one == Q(3 * m, 2) and two == 2 * m
    assert none <= one <= two


@pytest.mark.parametrize("m", [2, 3, 4])
def test_converse_matches_achievability(m):
    _, best = cognitive_polytope(m)
    assert best == cognitive_tx_plan(_channels(m, 0)).streams_per_use()
    assert best == cognitive_rx_plan(_channels(m, 0)).streams_per_use()


def test_tx_plan_on_extension_rejected():
    with pytest.raises(PreconditionError):
        cognitive_tx_plan(extend(_channels(2, 0), 2))
