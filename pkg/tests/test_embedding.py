import numpy as np
import pytest

from dmdaudit.embedding import (
    TimeSeries,
    build_hankel,
    check_pe,
    load_csv,
    pe_length_bound,
    save_csv,
)
from dmdaudit.numerics import numeric_rank

from helpers import elimination_rank


def scalar_series(values, dt=1.0):
    return TimeSeries(data=np.asarray(values, dtype=float)[None, :], dt=dt)


class TestTimeSeries:
    def test_shape_and_labels(self):
        ts = TimeSeries(data=np.zeros((2, 5)) + np.arange(5), dt=0.5)
        assert ts.channels == 2 and ts.samples == 5
        assert ts.labels == ("ch1", "ch2")

    def test_rejects_short(self):
        with pytest.raises(ValueError, match="2 samples"):
            TimeSeries(data=np.ones((1, 1)), dt=1.0)

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError, match="dt"):
            TimeSeries(data=np.ones((1, 3)), dt=0.0)

    def test_rejects_duplicate_labels(self):
        with pytest.raises(ValueError, match="unique"):
            TimeSeries(data=np.ones((2, 3)), dt=1.0, labels=("a", "a"))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            TimeSeries(data=np.array([[1.0, np.inf]]), dt=1.0)

    def test_data_immutable(self):
        ts = TimeSeries(data=np.ones((1, 4)), dt=1.0)
        with pytest.raises(ValueError):
            ts.data[0, 0] = 2.0

    def test_window(self):
        ts = TimeSeries(data=np.arange(10.0)[None, :], dt=1.0)
        w = ts.window(2, 6)
        assert w.samples == 4
        assert np.array_equal(w.data[0], [2.0, 3.0, 4.0, 5.0])


class TestCsv:
    def test_shape_contract(self, tmp_path):
        rng = np.random.default_rng(0)
        path = tmp_path / "two.csv"
        rows = rng.normal(size=(100, 2))
        path.write_text("\n".join(",".join(repr(float(v)) for v in row) for row in rows))
        ts = load_csv(path, dt=0.01)
        assert ts.channels == 2 and ts.samples == 100

    def test_header_detected(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("gen1,gen2\n1.0,2.0\n3.0,4.0\n")
        ts = load_csv(path, dt=1.0)
        assert ts.labels == ("gen1", "gen2")
        assert np.array_equal(ts.data, [[1.0, 3.0], [2.0, 4.0]])

    def test_nan_cell_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n3.0,NaN\n5.0,6.0\n")
        with pytest.raises(ValueError, match=r"row 2, column 2"):
            load_csv(path, dt=1.0)

    def test_non_numeric_cell_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1.0,2.0\n3.0,oops\n")
        with pytest.raises(ValueError, match=r"row 3, column 2"):
            load_csv(path, dt=1.0)

    def test_ragged_rows(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(ValueError, match="ragged"):
            load_csv(path, dt=1.0)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "nope.csv", dt=1.0)

    def test_too_few_samples(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("1.0,2.0\n")
        with pytest.raises(ValueError, match="2 samples"):
            load_csv(path, dt=1.0)

    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        ts = TimeSeries(data=rng.normal(size=(3, 40)), dt=0.02, labels=("a", "b", "c"))
        path = tmp_path / "rt.csv"
        save_csv(ts, path)
        back = load_csv(path, dt=0.02)
        assert back.labels == ts.labels
        assert np.array_equal(back.data, ts.data)  # repr round-trip is value-exact


class TestBuildHankel:
    def test_scalar_definition(self):
        ts = scalar_series([1, 2, 3, 4, 5])
        pair = build_hankel(ts, 2)
        assert np.array_equal(pair.xh, [[1, 2, 3, 4], [2, 3, 4, 5]])
        assert np.array_equal(pair.x1, [[1, 2, 3], [2, 3, 4]])
        assert np.array_equal(pair.x2, [[2, 3, 4], [3, 4, 5]])

    def test_constant_series(self):
        ts = scalar_series([7.0] * 8)
        pair = build_hankel(ts, 3)
        assert np.all(pair.xh == 7.0)

    def test_index_formula_oracle(self):
        rng = np.random.default_rng(2)
        data = rng.normal(size=(2, 10))
        ts = TimeSeries(data=data, dt=1.0)
        pair = build_hankel(ts, 3)
        assert pair.xh.shape == (6, 8)
        n = 2
        for d in range(3):
            for c in range(n):
                for j in range(8):
                    assert pair.xh[d * n + c, j] == data[c, j + d]

    def test_shift_relation(self):
        rng = np.random.default_rng(3)
        ts = TimeSeries(data=rng.normal(size=(3, 12)), dt=1.0)
        pair = build_hankel(ts, 4)
        assert pair.x1.shape == pair.x2.shape == (12, 8)
        assert np.array_equal(pair.x2[:, :-1], pair.x1[:, 1:])

    def test_lag_bounds(self):
        ts = scalar_series([1, 2, 3])
        with pytest.raises(ValueError, match="lag"):
            build_hankel(ts, 0)
        with pytest.raises(ValueError, match="lag"):
            build_hankel(ts, 3)

    def test_block_rows_follow_channel_order(self):
        rng = np.random.default_rng(4)
        data = rng.normal(size=(2, 9))
        ts = TimeSeries(data=data, dt=1.0, labels=("p", "q"))
        flipped = TimeSeries(data=data[::-1], dt=1.0, labels=("q", "p"))
        a = build_hankel(ts, 2).xh
        b = build_hankel(flipped, 2).xh
        assert np.array_equal(a[[1, 0, 3, 2], :], b)


class TestCheckPe:
    def test_constant_series_rank_deficient(self):
        verdict = check_pe(scalar_series([5.0] * 10), 2)
        assert verdict.achieved_rank == 1
        assert verdict.required_rank == 2
        assert not verdict.satisfied

    def test_single_exponential_fails_order_two(self):
        ts = scalar_series(0.9 ** np.arange(20))
        verdict = check_pe(ts, 2)
        assert verdict.achieved_rank == 1
        assert not verdict.satisfied

    def test_two_modes_pass_order_two(self):
        ts = scalar_series(0.9 ** np.arange(20) + 0.5 ** np.arange(20))
        verdict = check_pe(ts, 2)
        assert verdict.achieved_rank == 2
        assert verdict.length_bound_ok  # 20 >= 2*2 - 1
        assert verdict.satisfied
        pair = build_hankel(ts, 2)
        assert elimination_rank(pair.xh) == 2

    def test_order_one_equals_raw_rank(self):
        rng = np.random.default_rng(5)
        ts = TimeSeries(data=rng.normal(size=(3, 15)), dt=1.0)
        assert check_pe(ts, 1).achieved_rank == numeric_rank(ts.data)

    def test_length_bound(self):
        assert pe_length_bound(1, 2) == 3
        assert pe_length_bound(6, 52) == 363
        ts = scalar_series(np.random.default_rng(6).normal(size=6))
        assert check_pe(ts, 3).length_bound_ok  # 6 >= 2*3 - 1 = 5
        assert not check_pe(ts, 4).length_bound_ok  # 6 < 7

    def test_deficiency_monotone_in_lag_for_single_mode(self):
        ts = scalar_series(0.8 ** np.arange(24))
        deficient = False
        for lag in range(1, 8):
            verdict = check_pe(ts, lag)
            short = verdict.achieved_rank < verdict.required_rank
            if deficient:
                assert short
            deficient = deficient or short
        assert deficient
