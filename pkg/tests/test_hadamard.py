import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from repvar import (
    HadamardMatrix,
    InsufficientBalancedColumns,
    UnconstructibleOrder,
    balanced_columns,
    construct,
    is_constructible,
    smallest_valid_order,
    verify,
)

# Closure of Sylvester doubling and the prime-only Paley construction.
CONSTRUCTIBLE_UP_TO_128 = [
    1, 2, 4, 8, 12, 16, 20, 24, 32, 40, 44, 48, 60, 64, 68, 72,
    80, 84, 88, 96, 104, 108, 120, 128,
]


class TestConstruct:
    def test_order_one(self):
        m = construct(1)
        assert m.entries.tolist() == [[1]]

    def test_order_four_sylvester(self):
        m = construct(4)
        assert m.entries.tolist() == [
            [1, 1, 1, 1],
            [1, -1, 1, -1],
            [1, 1, -1, -1],
            [1, -1, -1, 1],
        ]

    def test_order_twelve_paley(self):
        m = construct(12)
        assert verify(m)
        gram = m.entries.T @ m.entries
        assert np.array_equal(gram, 12 * np.eye(12, dtype=np.int64))

    def test_unconstructible_orders(self):
        for order in (0, -4, 3, 6, 10, 28, 92, 116):
            with pytest.raises(UnconstructibleOrder):
                construct(order)

    def test_constructible_set(self):
        got = [order for order in range(1, 129) if is_constructible(order)]
        assert got == CONSTRUCTIBLE_UP_TO_128

    def test_entries_read_only(self):
        m = construct(4)
        with pytest.raises(ValueError):
            m.entries[0, 0] = -1

    def test_first_column_all_ones(self):
        for order in (2, 4, 8, 12, 20, 24):
            assert np.all(construct(order).entries[:, 0] == 1)


class TestVerify:
    def test_constructed_matrices_verify(self):
        for order in CONSTRUCTIBLE_UP_TO_128[:12]:
            assert verify(construct(order))

    def test_flipped_entry_fails(self):
        e = construct(4).entries.copy()
        e[2, 3] = -e[2, 3]
        assert not verify(e)

    def test_non_sign_entries_fail(self):
        assert not verify(np.zeros((4, 4), dtype=np.int64))
        assert not verify(np.ones((4, 4), dtype=np.int64))

    def test_constructor_rejects_invalid(self):
        e = construct(4).entries.copy()
        e[0, 0] = -e[0, 0]
        with pytest.raises(ValueError):
            HadamardMatrix(4, e)
        with pytest.raises(ValueError):
            HadamardMatrix(3, np.ones((4, 4), dtype=np.int64))


class TestSmallestValidOrder:
    @pytest.mark.parametrize(
        "h,expected",
        [(1, 1), (2, 2), (3, 4), (4, 4), (5, 8), (9, 12), (13, 16), (17, 20), (25, 32), (100, 104)],
    )
    def test_values(self, h, expected):
        assert smallest_valid_order(h) == expected

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            smallest_valid_order(0)

    @given(st.integers(1, 200))
    def test_result_constructible_and_minimal(self, h):
        order = smallest_valid_order(h)
        assert order >= h
        assert is_constructible(order)
        assert not any(is_constructible(k) for k in range(h, order))


class TestBalancedColumns:
    def test_order_four_three_columns(self):
        cols = balanced_columns(construct(4), 3)
        assert cols.shape == (4, 3)
        assert np.all(cols.sum(axis=0) == 0)
        # the all-ones first column is skipped
        assert cols.tolist() == [
            [1, 1, 1],
            [-1, 1, -1],
            [1, -1, -1],
            [-1, -1, 1],
        ]

    def test_order_one_has_none(self):
        with pytest.raises(InsufficientBalancedColumns):
            balanced_columns(construct(1), 1)

    def test_order_eight_seven_columns(self):
        cols = balanced_columns(construct(8), 7)
        assert np.all(cols.sum(axis=0) == 0)
        assert np.array_equal(cols.T @ cols, 8 * np.eye(7, dtype=np.int64))

    def test_too_many_requested(self):
        with pytest.raises(InsufficientBalancedColumns):
            balanced_columns(construct(4), 4)

    def test_read_only(self):
        cols = balanced_columns(construct(4), 2)
        with pytest.raises(ValueError):
            cols[0, 0] = 5

    @pytest.mark.parametrize("order", [2, 4, 8, 12, 16, 20, 24, 32, 40, 64])
    def test_exact_balance_and_orthogonality(self, order):
        cols = balanced_columns(construct(order), order - 1)
        assert np.all(cols.sum(axis=0) == 0)
        assert np.array_equal(cols.T @ cols, order * np.eye(order - 1, dtype=np.int64))


class TestRowOrthogonality:
    @pytest.mark.parametrize("order", [4, 8, 12, 20])
    def test_full_rows_orthogonal(self, order):
        e = construct(order).entries
        assert np.array_equal(e @ e.T, order * np.eye(order, dtype=np.int64))

    def test_subset_rows_need_not_be_orthogonal(self):
        # over the selected H columns the row products generally sum to
        # R * delta_rs minus the all-ones column's contribution
        cols = balanced_columns(construct(4), 3)
        gram = cols @ cols.T
        assert gram[0, 1] != 0
