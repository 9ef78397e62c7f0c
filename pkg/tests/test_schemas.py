import pytest
from pydantic import ValidationError

from shrinkbound.schemas import (
    AnalysisConfig,
    Dataset,
    OracleEstimate,
    Study,
    SweepRow,
    SweepTable,
    label_index,
)


class TestStudy:
    def test_valid(self):
        s = Study(label="a", y=-0.1, sigma=0.2)
        assert s.sigma == 0.2

    @pytest.mark.parametrize("sigma", [0.0, -1.0, float("inf"), float("nan")])
    def test_rejects_bad_sigma(self, sigma):
        with pytest.raises(ValidationError):
            Study(label="a", y=0.0, sigma=sigma)

    def test_rejects_non_finite_y(self):
        with pytest.raises(ValidationError):
            Study(label="a", y=float("inf"), sigma=1.0)

    def test_rejects_empty_label(self):
        with pytest.raises(ValidationError):
            Study(label="", y=0.0, sigma=1.0)


class TestDataset:
    def test_from_arrays_default_labels(self):
        ds = Dataset.from_arrays([0.1, 0.2, 0.3], [1.0, 2.0, 3.0])
        assert ds.labels == ["1", "2", "3"]
        assert ds.k == 3
        assert ds.sigma2.tolist() == [1.0, 4.0, 9.0]

    def test_needs_two_studies(self):
        with pytest.raises(ValidationError):
            Dataset.from_arrays([0.1], [1.0])

    def test_rejects_duplicate_labels(self):
        with pytest.raises(ValidationError, match="duplicate"):
            Dataset.from_arrays([0.1, 0.2], [1.0, 1.0], ["a", "a"])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            Dataset.from_arrays([0.1, 0.2], [1.0])

    def test_index_of(self):
        ds = Dataset.from_arrays([0.1, 0.2], [1.0, 1.0], ["first", "second"])
        assert ds.index_of("second") == 1
        assert ds.index_of("1") == 0
        with pytest.raises(KeyError):
            ds.index_of("3")
        with pytest.raises(KeyError):
            ds.index_of("third")

    def test_label_index_prefers_labels(self):
        assert label_index(["2", "1"], "1") == 1
        assert label_index(["a", "b"], "2") == 1
        with pytest.raises(KeyError):
            label_index(["a", "b"], "0")

    def test_with_y_keeps_sigmas_and_labels(self):
        ds = Dataset.from_arrays([0.1, 0.2], [1.0, 2.0], ["a", "b"])
        moved = ds.with_y([0.0, 0.0])
        assert moved.labels == ["a", "b"]
        assert moved.sigma.tolist() == [1.0, 2.0]
        assert moved.y.tolist() == [0.0, 0.0]


class TestSweepTable:
    def test_rows_must_be_ordered(self):
        rows = [SweepRow(x=x, weight=0.5, mean=0.0, lo=-1.0, hi=1.0) for x in (1.0, 0.0)]
        with pytest.raises(ValidationError):
            SweepTable(abscissa="delta", target=1, prior="HN(0.5)", rows=rows)

    def test_target_is_one_based(self):
        with pytest.raises(ValidationError):
            SweepTable(abscissa="scale", target=0, prior="HN(0.5)", rows=[])


class TestAnalysisConfig:
    def test_defaults(self):
        cfg = AnalysisConfig()
        assert cfg.prior == "half-normal:0.5"
        assert cfg.level == 0.95
        assert cfg.interval == "shortest"
        assert cfg.format == "text"

    @pytest.mark.parametrize("level", [0.0, 1.0])
    def test_level_bounds(self, level):
        with pytest.raises(ValidationError):
            AnalysisConfig(level=level)

    def test_rejects_unknown_interval(self):
        with pytest.raises(ValidationError):
            AnalysisConfig(interval="hpd")


class TestOracleEstimate:
    def test_negative_error_rejected(self):
        with pytest.raises(ValidationError):
            OracleEstimate(value=0.3, mc_std_error=-0.1, method="monte-carlo", size=100)
