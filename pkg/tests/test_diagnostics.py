"""Tests for the residual diagnostics (moments, normality, portmanteau)."""
import numpy as np
import pytest
import scipy.stats
from statsmodels.stats.diagnostic import acorr_ljungbox

from carboncvar.diagnostics import (
    DiagnosticsTable,
    _kurt_z,
    _skew_z,
    diagnostics_table,
    doornik_hansen,
    format_table,
    hosking_portmanteau,
    jarque_bera,
    ljung_box,
    moments,
)
from carboncvar.errors import DegenerateInputError, NumericalError, SampleError


# ------------------------------------------------------------ moments


def test_moments_match_scipy_conventions():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(73) * 1.7 + 0.4
    sd, skew, kurt = moments(x)
    assert sd == pytest.approx(np.std(x, ddof=0), abs=1e-12)
    assert skew == pytest.approx(scipy.stats.skew(x, bias=True), abs=1e-12)
    assert kurt == pytest.approx(
        scipy.stats.kurtosis(x, fisher=False, bias=True), abs=1e-12
    )


def test_moments_reject_constant_series():
    with pytest.raises(DegenerateInputError):
        moments(np.full(30, 2.5))


# ---------------------------------------------------------- normality


def test_jarque_bera_matches_scipy():
    rng = np.random.default_rng(1)
    for n in (30, 62, 250):
        x = rng.standard_normal(n) + 0.1 * rng.standard_normal(n) ** 2
        ours = jarque_bera(x)
        ref_stat, ref_p = scipy.stats.jarque_bera(x)
        assert ours.statistic == pytest.approx(ref_stat, rel=1e-10)
        assert ours.p_value == pytest.approx(ref_p, abs=1e-10)
        assert ours.df == 2


def test_jarque_bera_needs_enough_observations():
    with pytest.raises(SampleError):
        jarque_bera(np.arange(5.0))


def test_skew_transform_matches_scipy_skewtest():
    rng = np.random.default_rng(2)
    for n in (25, 62, 400):
        x = rng.standard_normal(n) * 2.0 + rng.exponential(0.5, n)
        _, skew, _ = moments(x)
        ref = scipy.stats.skewtest(x).statistic
        assert _skew_z(skew, n) == pytest.approx(ref, rel=1e-9)


def test_kurtosis_transform_standard_normal_under_null():
    # no closed-form scipy twin (the transform conditions on skewness),
    # so check it is approximately N(0, 1) under the null
    rng = np.random.default_rng(3)
    z = np.empty(2000)
    for i in range(len(z)):
        x = rng.standard_normal(60)
        _, skew, kurt = moments(x)
        z[i] = _kurt_z(skew, kurt, 60)
    assert abs(z.mean()) < 0.10
    assert 0.80 < z.var() < 1.25


def test_doornik_hansen_null_rate():
    rng = np.random.default_rng(4)
    reps = 300
    rejections = 0
    for _ in range(reps):
        x = rng.standard_normal((200, 3))
        if doornik_hansen(x).p_value < 0.05:
            rejections += 1
    assert 0.02 <= rejections / reps <= 0.09


def test_doornik_hansen_detects_heavy_tails():
    rng = np.random.default_rng(5)
    x = rng.standard_t(df=3, size=(300, 4))
    assert doornik_hansen(x).p_value < 0.01


def test_doornik_hansen_invariant_to_column_affine_maps():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((150, 4))
    y = x * np.array([3.0, 0.2, 11.0, 0.5]) + np.array([1.0, -2.0, 0.0, 40.0])
    assert doornik_hansen(y).statistic == pytest.approx(
        doornik_hansen(x).statistic, rel=1e-8
    )


def test_doornik_hansen_rejects_singular_correlation():
    rng = np.random.default_rng(7)
    base = rng.standard_normal((100, 2))
    x = np.column_stack([base, base[:, 0] + base[:, 1]])
    with pytest.raises(NumericalError):
        doornik_hansen(x)


def test_doornik_hansen_df_counts_both_moments():
    rng = np.random.default_rng(8)
    assert doornik_hansen(rng.standard_normal((80, 4))).df == 8
    assert doornik_hansen(rng.standard_normal(80)).df == 2


# --------------------------------------------------------- portmanteau


def test_ljung_box_matches_statsmodels():
    rng = np.random.default_rng(9)
    x = rng.standard_normal(120)
    x[1:] += 0.4 * x[:-1]
    for lags in (5, 10):
        ours = ljung_box(x, lags)
        ref = acorr_ljungbox(x - x.mean(), lags=[lags])
        assert ours.statistic == pytest.approx(float(ref["lb_stat"].iloc[0]), rel=1e-9)
        assert ours.p_value == pytest.approx(float(ref["lb_pvalue"].iloc[0]), abs=1e-9)


def test_ljung_box_lag_validation():
    x = np.random.default_rng(10).standard_normal(30)
    with pytest.raises(SampleError):
        ljung_box(x, 0)
    with pytest.raises(SampleError):
        ljung_box(x, 15)


def test_ljung_box_null_rate():
    rng = np.random.default_rng(11)
    reps = 400
    rejections = sum(
        ljung_box(rng.standard_normal(100), 5).p_value < 0.05 for _ in range(reps)
    )
    assert 0.02 <= rejections / reps <= 0.09


def test_hosking_zero_lags_degenerate_case():
    x = np.random.default_rng(12).standard_normal((50, 3))
    res = hosking_portmanteau(x, 0)
    assert (res.statistic, res.df, res.p_value) == (0.0, 0, 1.0)


def test_hosking_lag_validation():
    x = np.random.default_rng(13).standard_normal((60, 3))
    with pytest.raises(SampleError):
        hosking_portmanteau(x, 5, var_lags=5)
    with pytest.raises(SampleError):
        hosking_portmanteau(x, 30)


def test_hosking_degrees_of_freedom_subtract_fitted_order():
    x = np.random.default_rng(14).standard_normal((80, 4))
    assert hosking_portmanteau(x, 10, var_lags=0).df == 160
    assert hosking_portmanteau(x, 10, var_lags=2).df == 128


def test_hosking_null_rate_white_noise():
    rng = np.random.default_rng(15)
    reps = 250
    rejections = 0
    for _ in range(reps):
        x = rng.standard_normal((150, 3))
        if hosking_portmanteau(x, 5).p_value < 0.05:
            rejections += 1
    assert 0.02 <= rejections / reps <= 0.10


def test_hosking_detects_vector_autocorrelation():
    rng = np.random.default_rng(16)
    x = rng.standard_normal((200, 3))
    for t in range(1, len(x)):
        x[t] += 0.5 * x[t - 1]
    assert hosking_portmanteau(x, 5).p_value < 1e-6


# --------------------------------------------------------- the table


def test_table_layout_and_system_row(sim_fit):
    residuals = sim_fit.residuals_reduced
    labels = ["dS_L", "dS_O", "dE", "dC"]
    table = diagnostics_table(residuals, labels=labels, var_lags=2)
    assert isinstance(table, DiagnosticsTable)
    assert [r.label for r in table.rows] == labels
    assert table.system.std_dev is None

    direct = hosking_portmanteau(residuals, 5, var_lags=2)
    assert table.system.lb5_p == pytest.approx(direct.p_value, abs=1e-12)
    assert table.system.jb_p == pytest.approx(
        doornik_hansen(residuals).p_value, abs=1e-12
    )
    for j, row in enumerate(table.rows):
        sd, skew, kurt = moments(residuals[:, j])
        assert row.std_dev == pytest.approx(sd, abs=1e-12)
        assert row.skewness == pytest.approx(skew, abs=1e-12)
        assert row.kurtosis == pytest.approx(kurt, abs=1e-12)


def test_table_default_labels_and_validation():
    x = np.random.default_rng(17).standard_normal((60, 4))
    table = diagnostics_table(x)
    assert [r.label for r in table.rows] == ["u1", "u2", "u3", "u4"]
    with pytest.raises(SampleError):
        diagnostics_table(x, labels=["a", "b"])


def test_format_table_renders_all_rows():
    x = np.random.default_rng(18).standard_normal((60, 4))
    text = format_table(diagnostics_table(x, lb_lags=(5, 10)))
    lines = text.splitlines()
    assert len(lines) == 6
    assert "LB(5)" in lines[0] and "LB(10)" in lines[0]
    assert lines[-1].startswith("System")
