import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimox.errors import DefectiveMatrixError
from mimox.numerics import (
    AntennaConfig,
    child_seed,
    eig,
    extend,
    null_space,
    numerical_rank,
    per_slot_channel_set,
    random_channel_set,
)


def test_channels_are_deterministic():
    a = random_channel_set(AntennaConfig(2, 2, 2, 2), 7)
    b = random_channel_set(AntennaConfig(2, 2, 2, 2), 7)
    for link in ("11", "12", "21", "22"):
        assert np.array_equal(getattr(a, "h" + link), getattr(b, "h" + link))


def test_channel_shapes_follow_rx_by_tx():
    ch = random_channel_set(AntennaConfig(2, 3, 4, 1), 1)
    assert ch.h21.shape == (1, 2)
    assert ch.h12.shape == (4, 3)
    assert ch.extension_factor == 1 and ch.extension_kind == "none"


def test_generic_square_channels_full_rank():
    ch = random_channel_set(AntennaConfig(3, 3, 3, 3), 5)
    assert all(numerical_rank(h) == 3 for h in ch.matrices().values())


def test_channels_are_read_only():
    ch = random_channel_set(AntennaConfig(2, 2, 2, 2), 0)
    with pytest.raises(ValueError):
        ch.h11[0, 0] = 1.0


@pytest.mark.parametrize("bad", [(0, 1, 1, 1), (1, -2, 1, 1), (1, 1, 1.5, 1)])
def test_antenna_counts_validated(bad):
    with pytest.raises(ValueError):
        AntennaConfig(*bad)


def test_extend_block_diagonal():
    ch = random_channel_set(AntennaConfig(2, 2, 2, 2), 3)
    ext = extend(ch, 3)
    a = ch.h11
    want = np.zeros((6, 6), dtype=complex)
    for k in range(3):
        want[2 * k:2 * k + 2, 2 * k:2 * k + 2] = a
    assert np.array_equal(ext.h11, want)
    assert ext.extension_kind == "block_repeat" and ext.base_channels() is ch


def test_extend_identity_and_rejections():
    ch = random_channel_set(AntennaConfig(2, 2, 2, 2), 3)
    assert extend(ch, 1) is ch
    with pytest.raises(ValueError):
        extend(ch, 0)
    with pytest.raises(ValueError):
        extend(extend(ch, 2), 2)


def test_extend_replicates_spectrum():
    ch = random_channel_set(AntennaConfig(2, 2, 2, 2), 11)
    f = np.linalg.solve(ch.h11, ch.h12 @ np.linalg.solve(ch.h22, ch.h21))
    big = np.kron(np.eye(3), f)
    small = np.sort_complex(np.linalg.eigvals(f))
    got = np.sort_complex(np.linalg.eigvals(big))
    assert np.allclose(got, np.sort_complex(np.repeat(small, 3)), atol=1e-10)


def test_per_slot_channels():
    ch = per_slot_channel_set(4, 3)
    for h in ch.matrices().values():
        assert h.shape == (3, 3)
        assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
    f = np.diag(ch.h12) * np.diag(ch.h21) / (np.diag(ch.h11) * np.diag(ch.h22))
    assert len({round(abs(x), 9) for x in f}) == 3


def test_per_slot_single_slot_matches_fixed_draw():
    a = per_slot_channel_set(9, 1)
    b = random_channel_set(AntennaConfig(1, 1, 1, 1), 9)
    for link in ("11", "12", "21", "22"):
        assert np.array_equal(getattr(a, "h" + link), getattr(b, "h" + link))


def test_per_slot_constant_links():
    ch = per_slot_channel_set(2, 3, varying=["11"])
    assert len(set(np.diag(ch.h12))) == 1
    assert len(set(np.diag(ch.h11))) == 3


def test_null_space_examples():
    assert null_space(np.zeros((2, 3))).shape == (3, 3)
    rng = np.random.default_rng(0)
    assert null_space(rng.standard_normal((3, 3))).shape[1] == 0
    ch = random_channel_set(AntennaConfig(3, 3, 3, 3), 2)
    assert null_space(np.hstack([ch.h11, ch.h12])).shape[1] == 3


@settings(max_examples=60, deadline=None)
@given(rows=st.integers(1, 6), cols=st.integers(1, 6), rank=st.integers(0, 6), seed=st.integers(0, 2**32 - 1))
def test_null_space_rank_nullity(rows, cols, rank, seed):
    rank = min(rank, rows, cols)
    rng = np.random.default_rng(seed)
    a = (rng.standard_normal((rows, rank)) + 1j * rng.standard_normal((rows, rank))) @ (
        rng.standard_normal((rank, cols)) + 1j * rng.standard_normal((rank, cols)))
    n = null_space(a)
    assert n.shape[1] + numerical_rank(a) == cols
    assert np.allclose(n.conj().T @ n, np.eye(n.shape[1]), atol=1e-10)
    if a.size and n.shape[1]:
        sigma = np.linalg.norm(a, 2)
        assert np.linalg.norm(a @ n) <= 1e-9 * max(sigma, 1.0) * cols


def test_numerical_rank_examples():
    assert numerical_rank(np.eye(4)) == 4
    u = np.arange(1, 4)[:, None] + 0j
    assert numerical_rank(u @ u.T) == 1
    with pytest.raises(ValueError):
        numerical_rank(np.eye(2), tol=0)


def test_eig_examples():
    values, vectors = eig(np.diag([1.0, 2.0, 3.0]))
    assert sorted(values.real) == [1.0, 2.0, 3.0]
    assert np.allclose(np.abs(vectors), np.eye(3)[:, np.argsort(np.argsort(values.real))])
    assert np.allclose(eig(np.eye(3))[0], 1.0)


def test_eig_reconstruction_random_f():
    ch = random_channel_set(AntennaConfig(2, 2, 2, 2), 5)
    f = np.linalg.solve(ch.h11, ch.h12 @ np.linalg.solve(ch.h22, ch.h21))
    values, vectors = eig(f)
    assert abs(values[0] - values[1]) > 1e-6
    assert np.linalg.norm(f @ vectors - vectors * values) <= 1e-8 * np.linalg.norm(f)


def test_eig_flags_defective():
    with pytest.raises(DefectiveMatrixError):
        eig(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_child_seed_accepts_seed_sequences():
    parent = child_seed(5, 1)
    a, b = child_seed(parent, 2), child_seed(parent, 2)
    assert a.generate_state(4).tolist() == b.generate_state(4).tolist()
    assert child_seed(parent, 3).generate_state(4).tolist() != a.generate_state(4).tolist()
    assert parent.n_children_spawned == 0
