import numpy as np
import pytest

from tsboss.data import (
    TimeSeriesDataset,
    iid_windows,
    load_csv,
    load_realizations_dir,
    load_realizations_grouped_csv,
    save_csv,
    unroll,
)
from tsboss.errors import (
    FormatError,
    InsufficientDataError,
    InvalidInputError,
    ParseError,
)
from tsboss.graphs import NodeId


def ts(values, names=None):
    values = np.asarray(values, dtype=float)
    if names is None:
        names = tuple(f"X{j + 1}" for j in range(values.shape[1]))
    return TimeSeriesDataset(values, names)


class TestLoadCsv:
    def test_plain_numeric(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2\n3,4\n5,6\n")
        d = load_csv(p)
        assert d.T == 3 and d.m == 2
        assert d.variable_names == ("X1", "X2")

    def test_header_names(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("a,b\n1,2\n")
        d = load_csv(p)
        assert d.variable_names == ("a", "b")

    def test_nan_cell_rejected(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2\n3,NaN\n")
        with pytest.raises(ParseError) as err:
            load_csv(p)
        assert err.value.row == 1 and err.value.col == 1

    def test_non_numeric_cell_rejected(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2\n3,oops\n")
        with pytest.raises(ParseError):
            load_csv(p)

    def test_ragged_rows_rejected(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2\n3\n")
        with pytest.raises(FormatError):
            load_csv(p)

    def test_empty_rejected(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("")
        with pytest.raises(FormatError):
            load_csv(p)

    def test_round_trip(self, tmp_path):
        d = ts([[1.25, -2.5], [0.1, 4.0]], ("u", "v"))
        p = tmp_path / "d.csv"
        save_csv(d, p)
        back = load_csv(p)
        assert back.variable_names == ("u", "v")
        assert np.array_equal(back.values, d.values)


class TestUnroll:
    def test_tau_zero_identity(self):
        d = ts([[1.0, 2.0], [3.0, 4.0]])
        w = unroll(d, 0)
        assert np.array_equal(w.values, d.values)
        assert all(c.lag == 0 for c in w.columns)
        assert not w.iid_flag

    def test_single_series(self):
        d = ts([[1.0], [2.0], [3.0], [4.0], [5.0]])
        w = unroll(d, 2)
        assert np.array_equal(
            w.values, [[1, 2, 3], [2, 3, 4], [3, 4, 5]]
        )
        assert w.columns == (NodeId(0, 2), NodeId(0, 1), NodeId(0, 0))

    def test_two_vars_block_layout(self):
        d = ts(np.arange(8.0).reshape(4, 2))
        w = unroll(d, 1)
        assert w.values.shape == (3, 4)
        assert w.columns == (
            NodeId(0, 1),
            NodeId(1, 1),
            NodeId(0, 0),
            NodeId(1, 0),
        )
        # lag-1 block precedes lag-0 block
        assert np.array_equal(w.values[:, :2], d.values[:3])
        assert np.array_equal(w.values[:, 2:], d.values[1:])

    def test_index_formula_exhaustive(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            T = int(rng.integers(4, 9))
            m = int(rng.integers(1, 4))
            tau = int(rng.integers(0, T - 1))
            d = ts(rng.normal(size=(T, m)))
            w = unroll(d, tau)
            assert w.n == T - tau
            for r in range(w.n):
                for c, node in enumerate(w.columns):
                    assert (
                        w.values[r, c]
                        == d.values[r + tau - node.lag, node.var]
                    )

    def test_insufficient_data(self):
        d = ts([[1.0], [2.0]])
        with pytest.raises(InsufficientDataError):
            unroll(d, 2)


class TestIidWindows:
    def test_shape(self):
        rng = np.random.default_rng(1)
        reals = [ts(rng.normal(size=(6, 5))) for _ in range(100)]
        w = iid_windows(reals, 3)
        assert w.n == 100 and w.values.shape[1] == 20
        assert w.iid_flag

    def test_single_realization(self):
        w = iid_windows([ts([[1.0], [2.0]])], 1)
        assert w.n == 1
        # last window, oldest lag first
        assert np.array_equal(w.values, [[1.0, 2.0]])

    def test_uses_final_window(self):
        r = ts([[10.0], [20.0], [30.0], [40.0]])
        w = iid_windows([r], 1)
        assert np.array_equal(w.values, [[30.0, 40.0]])

    def test_mixed_widths_rejected(self):
        with pytest.raises(InvalidInputError):
            iid_windows([ts([[1.0, 2.0]]), ts([[1.0, 2.0, 3.0]])], 0)

    def test_too_short_realization(self):
        with pytest.raises(InsufficientDataError):
            iid_windows([ts([[1.0]])], 1)

    def test_matches_unroll_columns(self):
        rng = np.random.default_rng(2)
        r = ts(rng.normal(size=(5, 2)))
        w = iid_windows([r], 2)
        u = unroll(r, 2)
        assert w.columns == u.columns
        assert np.array_equal(w.values[0], u.values[-1])


class TestDatasets:
    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            ts([[1.0, np.inf]])

    def test_values_read_only(self):
        d = ts([[1.0]])
        with pytest.raises(ValueError):
            d.values[0, 0] = 2.0

    def test_standardized(self):
        rng = np.random.default_rng(3)
        d = ts(rng.normal(3.0, 2.5, size=(50, 2)))
        s = d.standardized()
        assert np.allclose(s.values.mean(axis=0), 0.0)
        assert np.allclose(s.values.std(axis=0), 1.0)

    def test_standardized_constant_column(self):
        d = ts([[2.0], [2.0], [2.0]])
        s = d.standardized()
        assert np.array_equal(s.values, np.zeros((3, 1)))


class TestRealizationLoaders:
    def test_directory(self, tmp_path):
        for i in range(3):
            (tmp_path / f"r{i}.csv").write_text("1,2\n3,4\n")
        reals = load_realizations_dir(tmp_path)
        assert len(reals) == 3 and all(r.m == 2 for r in reals)

    def test_grouped_csv(self, tmp_path):
        p = tmp_path / "all.csv"
        p.write_text("id,a,b\n0,1,2\n0,3,4\n1,5,6\n1,7,8\n")
        reals = load_realizations_grouped_csv(p)
        assert len(reals) == 2
        assert np.array_equal(reals[1].values, [[5, 6], [7, 8]])
        assert reals[0].variable_names == ("a", "b")
