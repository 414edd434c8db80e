import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgscan import CompetingRisksDataset, load_csv, standardize_covariates
from fgscan.errors import (
    DegenerateColumnError,
    EmptyDatasetError,
    ParseError,
    ValidationError,
)


def write_csv(path, text):
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_sorted_index_descending(self, tmp_path):
        f = write_csv(tmp_path / "d.csv", "time,status,z1\n2,1,0.5\n1,0,1.5\n3,2,-1\n")
        ds = load_csv(f)
        assert list(ds.sorted_index) == [2, 0, 1]
        assert ds.n == 3 and ds.p == 1

    def test_row_order_preserved(self, tmp_path):
        f = write_csv(tmp_path / "d.csv", "time,status,z1\n2,1,0.5\n1,0,1.5\n3,2,-1\n")
        ds = load_csv(f)
        np.testing.assert_array_equal(ds.time, [2.0, 1.0, 3.0])
        np.testing.assert_array_equal(ds.cause, [1, 0, 2])

    def test_bad_cause_names_row(self, tmp_path):
        f = write_csv(tmp_path / "d.csv", "time,status,z1\n1,1,0\n2,7,0\n")
        with pytest.raises(ValidationError, match="row 1"):
            load_csv(f)

    def test_collapse_competing(self, tmp_path):
        f = write_csv(tmp_path / "d.csv", "time,status,z1\n1,1,0\n2,7,0\n")
        ds = load_csv(f, collapse_competing=True)
        assert list(ds.cause) == [1, 2]

    def test_tie_groups(self, tmp_path):
        f = write_csv(tmp_path / "d.csv", "time,status,z1\n1,1,0\n3,1,0\n2,0,0\n3,2,0\n5,1,0\n")
        ds = load_csv(f)
        sizes = ds.tie_groups[:, 1] - ds.tie_groups[:, 0]
        assert sorted(sizes) == [1, 1, 1, 2]
        # the duplicated time 3 forms the length-2 group
        g = ds.tie_groups[np.flatnonzero(sizes == 2)[0]]
        members = ds.sorted_index[g[0] : g[1]]
        assert sorted(ds.time[members]) == [3.0, 3.0]
        # stable order inside the tie group
        assert list(members) == [1, 3]

    def test_non_numeric_names_row_and_column(self, tmp_path):
        f = write_csv(tmp_path / "d.csv", "time,status,z1\n1,1,0\n2,1,oops\n")
        with pytest.raises(ParseError, match=r"row 3, column 'z1'"):
            load_csv(f)

    def test_missing_value(self, tmp_path):
        f = write_csv(tmp_path / "d.csv", "time,status,z1\n1,1,0\n,1,2\n")
        with pytest.raises(ParseError, match="'time'"):
            load_csv(f)

    def test_empty(self, tmp_path):
        f = write_csv(tmp_path / "d.csv", "time,status,z1\n")
        with pytest.raises(EmptyDatasetError):
            load_csv(f)

    def test_column_selection_by_position(self, tmp_path):
        f = write_csv(tmp_path / "d.csv", "a,b,c,d\n1,1,7,8\n2,0,9,10\n")
        ds = load_csv(f, time_col=0, status_col=1, covariate_cols=[3])
        assert ds.covariate_names == ("d",)
        np.testing.assert_array_equal(ds.covariates[:, 0], [8.0, 10.0])

    def test_round_trip_bit_identical(self, tmp_path, rng):
        time = rng.exponential(1.0, 40)
        cause = rng.integers(0, 3, 40)
        z = rng.standard_normal((40, 3))
        ds = CompetingRisksDataset.from_arrays(time, cause, z)
        out = tmp_path / "round.csv"
        ds.to_csv(out)
        back = load_csv(out)
        np.testing.assert_array_equal(back.time, ds.time)
        np.testing.assert_array_equal(back.cause, ds.cause)
        np.testing.assert_array_equal(back.covariates, ds.covariates)


class TestStandardize:
    def test_simple_column(self):
        ds = CompetingRisksDataset.from_arrays([1, 2, 3], [1, 0, 2], [[1.0], [2.0], [3.0]])
        out, centers, scales = standardize_covariates(ds)
        np.testing.assert_allclose(out.covariates[:, 0], [-1.0, 0.0, 1.0], atol=1e-12)
        assert centers[0] == pytest.approx(2.0)
        assert scales[0] == pytest.approx(1.0)

    def test_moments_contract(self, rng):
        z = rng.standard_normal((50, 4)) * 3 + 1
        ds = CompetingRisksDataset.from_arrays(rng.exponential(1, 50), rng.integers(0, 3, 50), z)
        out, _, _ = standardize_covariates(ds)
        np.testing.assert_allclose(out.covariates.sum(axis=0), 0.0, atol=1e-10)
        np.testing.assert_allclose((out.covariates**2).sum(axis=0), 49.0, atol=1e-10)

    def test_idempotent(self, rng):
        z = rng.standard_normal((30, 2))
        ds = CompetingRisksDataset.from_arrays(rng.exponential(1, 30), rng.integers(0, 3, 30), z)
        once, _, _ = standardize_covariates(ds)
        twice, centers, scales = standardize_covariates(once)
        np.testing.assert_allclose(twice.covariates, once.covariates, atol=1e-12)
        np.testing.assert_allclose(centers, 0.0, atol=1e-12)
        np.testing.assert_allclose(scales, 1.0, atol=1e-12)

    def test_constant_column_rejected(self):
        ds = CompetingRisksDataset.from_arrays([1, 2, 3], [1, 1, 1], [[5.0], [5.0], [5.0]])
        with pytest.raises(DegenerateColumnError, match="z1"):
            standardize_covariates(ds)

    def test_back_transformation(self, rng):
        z = rng.standard_normal((40, 3)) * [2.0, 0.5, 4.0] + [1.0, -2.0, 0.0]
        ds = CompetingRisksDataset.from_arrays(rng.exponential(1, 40), rng.integers(0, 3, 40), z)
        out, centers, scales = standardize_covariates(ds)
        np.testing.assert_allclose(out.covariates * scales + centers, z, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(
    times=st.lists(st.floats(0.0, 100.0, allow_nan=False), min_size=1, max_size=25),
    seed=st.integers(0, 2**32 - 1),
)
def test_sorted_index_is_stable_descending_permutation(times, seed):
    rng = np.random.default_rng(seed)
    n = len(times)
    ds = CompetingRisksDataset.from_arrays(
        np.array(times), rng.integers(0, 3, n), rng.standard_normal((n, 1))
    )
    assert sorted(ds.sorted_index) == list(range(n))
    ts = ds.time[ds.sorted_index]
    assert (np.diff(ts) <= 0).all()
    for a, b in zip(ds.sorted_index[:-1], ds.sorted_index[1:]):
        if ds.time[a] == ds.time[b]:
            assert a < b  # stable among ties
    # every index sits in exactly one tie group of equal times
    covered = np.concatenate(
        [ds.sorted_index[s:e] for s, e in ds.tie_groups]
    )
    assert sorted(covered) == list(range(n))
    for s, e in ds.tie_groups:
        assert np.unique(ds.time[ds.sorted_index[s:e]]).size == 1
