import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from repvar import Stratum, StratifiedSample, contrasts, direct_variance, total_estimate

from helpers import samples


def make(strata):
    return StratifiedSample(tuple(Stratum(lab, obs) for lab, obs in strata))


class TestTotalEstimate:
    def test_single_stratum(self):
        s = make([("a", ((2, 1), (3, 1)))])
        assert total_estimate(s) == 5.0

    def test_zero_y(self):
        s = make([("a", ((1, 0), (1, 0))), ("b", ((1, 0), (1, 0)))])
        assert total_estimate(s) == 0.0

    def test_hand_sum(self):
        s = make([("a", ((1, 3), (1, 2))), ("b", ((2, 1), (1, 4)))])
        assert total_estimate(s) == 11.0

    @given(samples(), st.floats(min_value=-100, max_value=100))
    def test_linear_in_y(self, sample, c):
        scaled = StratifiedSample.from_arrays(sample.weights, c * sample.y_values)
        assert total_estimate(scaled) == pytest.approx(c * total_estimate(sample), rel=1e-12, abs=1e-9)


class TestContrasts:
    def test_unit_weights(self):
        s = make([("a", ((1, 3), (1, 2)))])
        assert contrasts(s).tolist() == [1.0]

    def test_symmetric_units(self):
        s = make([("a", ((2, 5), (2, 5)))])
        assert contrasts(s).tolist() == [0.0]

    def test_hand_values(self):
        s = make([("a", ((1, 3), (1, 2))), ("b", ((2, 1), (1, 4)))])
        assert contrasts(s).tolist() == [1.0, -2.0]

    @given(samples(), st.integers(0, 15))
    def test_swap_negates_exactly_one(self, sample, raw_index):
        index = raw_index % sample.n_strata
        swapped = sample.with_units_swapped(index)
        d, ds = contrasts(sample), contrasts(swapped)
        assert ds[index] == -d[index]
        mask = np.arange(sample.n_strata) != index
        assert np.array_equal(ds[mask], d[mask])
        assert total_estimate(swapped) == pytest.approx(total_estimate(sample), rel=1e-12)


class TestDirectVariance:
    def test_hand_sum_of_squares(self):
        assert direct_variance([1.0, 2.0]) == 5.0

    def test_degenerate_zeros(self):
        assert direct_variance(np.zeros(7)) == 0.0

    def test_sign_invariance(self):
        assert direct_variance([-3.0]) == 9.0

    @given(samples(), st.integers(0, 15))
    def test_invariant_under_unit_swap(self, sample, raw_index):
        swapped = sample.with_units_swapped(raw_index % sample.n_strata)
        assert direct_variance(contrasts(swapped)) == direct_variance(contrasts(sample))


class TestValidation:
    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ValueError, match="weight"):
            Stratum("a", ((0.0, 1.0), (1.0, 1.0)))
        with pytest.raises(ValueError, match="weight"):
            Stratum("a", ((1.0, 1.0), (-2.0, 1.0)))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Stratum("a", ((float("inf"), 1.0), (1.0, 1.0)))
        with pytest.raises(ValueError, match="y"):
            Stratum("a", ((1.0, float("nan")), (1.0, 1.0)))

    def test_rejects_wrong_unit_count(self):
        with pytest.raises(ValueError, match="two observations"):
            Stratum("a", ((1.0, 1.0),))

    def test_rejects_empty_sample(self):
        with pytest.raises(ValueError, match="at least one stratum"):
            StratifiedSample(())

    def test_from_arrays_shape_checks(self):
        with pytest.raises(ValueError, match="shape"):
            StratifiedSample.from_arrays([[1.0, 2.0, 3.0]], [[1.0, 2.0, 3.0]])
        with pytest.raises(ValueError, match="labels"):
            StratifiedSample.from_arrays([[1.0, 1.0]], [[0.0, 0.0]], labels=["a", "b"])

    def test_immutable(self):
        s = make([("a", ((1, 3), (1, 2)))])
        with pytest.raises(Exception):
            s.strata = ()
        with pytest.raises(ValueError):
            s.weights[0, 0] = 9.0
        with pytest.raises(ValueError):
            s.weights_flat[0] = 9.0

    def test_labels_preserved(self):
        s = StratifiedSample.from_arrays([[1, 1], [1, 1]], [[0, 0], [0, 0]], labels=["x", "y"])
        assert [stratum.label for stratum in s.strata] == ["x", "y"]
