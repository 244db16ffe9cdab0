import numpy as np
import pytest

from batchqec.f2 import (
    BinaryMatrix,
    assemble_blocks,
    exhaustive_coset_floor,
    kernel,
    kron,
    min_coset_weight,
    min_weight_outside,
    rank,
    solve,
)


def random_matrix(rng, rows, cols):
    return BinaryMatrix(rng.integers(0, 2, size=(rows, cols), dtype=np.uint8))


def test_rank_identity_and_zero():
    assert rank(np.eye(4, dtype=np.uint8)) == 4
    assert rank(np.zeros((3, 5), dtype=np.uint8)) == 0


def test_rank_kernel_dimension_identity():
    rng = np.random.default_rng(7)
    for _ in range(30):
        rows = int(rng.integers(1, 200))
        cols = int(rng.integers(1, 200))
        m = random_matrix(rng, rows, cols)
        assert m.rank() + m.kernel().rows == cols


def test_kernel_vectors_annihilate():
    rng = np.random.default_rng(11)
    m = random_matrix(rng, 20, 35)
    ker = m.kernel()
    assert (m @ ker.T).is_zero()


def test_kernel_trivial_cases():
    assert kernel(np.eye(5, dtype=np.uint8)).rows == 0
    assert kernel(np.zeros((2, 3), dtype=np.uint8)).rows == 3


def test_solve_identity_and_inconsistent():
    b = np.array([1, 0, 1], dtype=np.uint8)
    assert np.array_equal(solve(np.eye(3, dtype=np.uint8), b), b)
    assert solve(np.zeros((3, 3), dtype=np.uint8), b) is None


def test_solve_random_full_rank():
    rng = np.random.default_rng(3)
    for _ in range(20):
        while True:
            m = random_matrix(rng, 6, 6)
            if m.rank() == 6:
                break
        b = rng.integers(0, 2, size=6, dtype=np.uint8)
        x = m.solve(b)
        assert np.array_equal(m.mv(x), b)


def test_kron_identities():
    i2, i3 = BinaryMatrix.identity(2), BinaryMatrix.identity(3)
    assert kron(i2, i3) == BinaryMatrix.identity(6)
    ones = BinaryMatrix([[1, 1]])
    expected = np.hstack([np.eye(2), np.eye(2)]).astype(np.uint8)
    assert kron(ones, i2) == BinaryMatrix(expected)


def test_kron_mixed_product():
    rng = np.random.default_rng(5)
    for _ in range(10):
        a = random_matrix(rng, 3, 4)
        c = random_matrix(rng, 4, 2)
        b = random_matrix(rng, 2, 5)
        d = random_matrix(rng, 5, 3)
        assert kron(a, b) @ kron(c, d) == kron(a @ c, b @ d)


def test_row_space_and_membership():
    rng = np.random.default_rng(13)
    m = random_matrix(rng, 8, 12)
    basis = m.row_space_basis()
    for row in m.A:
        assert basis.in_row_space(row)
    assert m.same_row_space(m.vstack(m.A[0] ^ m.A[1]))


def test_serialization_round_trips():
    rng = np.random.default_rng(17)
    m = random_matrix(rng, 9, 23)
    assert BinaryMatrix.from_coords(m.to_coords()) == m
    assert BinaryMatrix.from_dense_text(m.to_dense_text()) == m


def test_assemble_blocks():
    a = BinaryMatrix.identity(2)
    out = assemble_blocks([[a, None], [None, a]], [2, 2], [2, 2])
    assert out == BinaryMatrix.identity(4)
    with pytest.raises(ValueError):
        assemble_blocks([[a]], [3], [2])


def test_min_coset_weight_trivial_span():
    e1 = np.zeros(6, dtype=np.uint8)
    e1[0] = 1
    report = min_coset_weight(BinaryMatrix.zeros(0, 6), e1, trials=5)
    assert report.best_weight == 1
    assert np.array_equal(report.best_vector, e1)


def test_min_coset_weight_repetition_codeword():
    # span = parity checks of [3,1,3]; coset of the all-ones codeword offset
    span = BinaryMatrix([[1, 1, 0], [0, 1, 1]])
    # rowspace(span) has weight-2 elements; the codeword coset 111 + rowspace
    offset = np.array([1, 1, 1], dtype=np.uint8)
    report = min_coset_weight(span, offset, trials=20, exhaustive_cap=2)
    assert report.best_weight == 1  # 111 + 110 = 001
    # full codeword space: min nonzero weight of the [3,1,3] code itself
    gen = BinaryMatrix([[1, 1, 1]])
    rep2 = min_coset_weight(gen, offset, trials=20, exhaustive_cap=3)
    assert rep2.best_weight == 0  # offset is itself in the span


def test_min_weight_outside_small_code():
    # [[the kernel of H_rep(5)]] minus its even-weight subcode
    h = BinaryMatrix([[1, 1, 0, 0, 0], [0, 1, 1, 0, 0], [0, 0, 1, 1, 0], [0, 0, 0, 1, 1]])
    full = h.kernel()  # all-ones only
    report = min_weight_outside(full, BinaryMatrix.zeros(0, 5), trials=10, exhaustive_cap=4)
    assert report.best_weight == 5
    assert report.exhaustive_floor == 4


def test_exhaustive_floor_consistent_with_direct_enumeration():
    rng = np.random.default_rng(23)
    for _ in range(10):
        m = random_matrix(rng, 4, 9)
        offset = rng.integers(0, 2, size=9, dtype=np.uint8)
        report = min_coset_weight(m, offset, trials=30, exhaustive_cap=3)
        # direct enumeration over the whole coset
        basis = m.row_space_basis()
        best = int(offset.sum())
        for bits in range(1 << basis.rows):
            v = offset.copy()
            for i in range(basis.rows):
                if (bits >> i) & 1:
                    v = v ^ basis.A[i]
            best = min(best, int(v.sum()))
        if best <= 3:
            assert report.best_weight == best
        assert report.exhaustive_floor < max(best, 1)
        # no coset element at or below the reported floor
        assert best > report.exhaustive_floor


def test_upper_bound_never_increases_with_more_trials():
    rng = np.random.default_rng(29)
    m = random_matrix(rng, 10, 30)
    offset = rng.integers(0, 2, size=30, dtype=np.uint8)
    weights = [
        min_coset_weight(m, offset, trials=t, seed=1).best_weight for t in (1, 5, 25, 100)
    ]
    assert all(w1 >= w2 for w1, w2 in zip(weights, weights[1:]))
    # reported vector really lies in the coset
    report = min_coset_weight(m, offset, trials=50, seed=1)
    assert m.vstack((report.best_vector ^ offset).reshape(1, -1)).rank() == m.rank()


def test_exhaustive_coset_floor_finds_minimum():
    dual = BinaryMatrix([[1, 1, 1, 0], [0, 1, 1, 1]])
    s0 = np.array([1, 0], dtype=np.uint8)
    v = exhaustive_coset_floor(dual, s0, 4)
    assert v is not None
    assert np.array_equal(dual.mv(v), s0)
    assert int(v.sum()) == 1
