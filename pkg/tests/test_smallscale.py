import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as o
from canyon_sim.errors import ConfigError, DomainError, TableEvaluationError
from canyon_sim.pathloss import LinkState
from canyon_sim.smallscale import (
    DEFAULT_COEFFICIENTS,
    DEFAULT_TABLE,
    DistributionSpec,
    Family,
    Param,
    cdf,
    load_table_overrides,
    param_table,
    pdf,
    round_count,
    sample,
    sample_count,
    truncate_nonnegative,
)

s_norms = st.floats(-1.5, 1.5)


def test_table_examples():
    assert param_table(0.0, "LOS")[Param.POWER] == DistributionSpec("normal", -6.93, 3.76)
    assert param_table(0.0, "NLOS")[Param.DELAY] == DistributionSpec("laplace", 12855.5, 233.80)
    aoa = param_table(1.0, "LOS")[Param.AOA]
    assert aoa.family is Family.LAPLACE and aoa.location == 91.0
    assert aoa.scale == pytest.approx((22.62 + 7.21) / math.sqrt(2), rel=1e-15)
    assert aoa.scale == pytest.approx(21.0930, abs=1e-4)


def test_coefficient_keys():
    assert len(DEFAULT_COEFFICIENTS) > 24
    assert all(k.split(".")[0] in ("LOS", "NLOS") for k in DEFAULT_COEFFICIENTS)
    assert DEFAULT_COEFFICIENTS["NLOS.aoa.alpha"] == 12.39


@given(s_norms, st.sampled_from(["LOS", "NLOS"]), st.sampled_from(list(Param)))
def test_table_matches_printed_formulas(s, state, param):
    fam, loc, scale = o.TABLE[(state, param.value)](s)
    spec = param_table(s, state)[param]
    assert spec.family.value == fam
    assert math.isclose(spec.location, loc, rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(spec.scale, scale, rel_tol=1e-12)


def test_extrapolation_flag():
    assert not param_table(0.0, "LOS").extrapolated
    assert not param_table(4 / 3, "LOS").extrapolated
    assert param_table(2.0, "NLOS").extrapolated


def test_nonpositive_scale_is_named():
    # LOS delay scale -0.0015 s + 0.0195 reaches zero at s = 13
    with pytest.raises(TableEvaluationError, match=r"LOS\.delay.*s_norm=13"):
        param_table(13.0, "LOS")
    bad = DEFAULT_TABLE.with_overrides({"NLOS.aoa.alpha": -1.0})
    with pytest.raises(TableEvaluationError, match=r"NLOS\.aoa"):
        param_table(0.0, "NLOS", bad)


def test_overrides(tmp_path):
    t = DEFAULT_TABLE.with_overrides({"LOS.power.a0": -5.0})
    assert t.overrides == {"LOS.power.a0": -5.0}
    assert param_table(0.0, "LOS", t)[Param.POWER].location == -5.0
    with pytest.raises(ConfigError, match="unknown"):
        DEFAULT_TABLE.with_overrides({"LOS.power.zz": 1.0})
    with pytest.raises(ConfigError):
        DEFAULT_TABLE.with_overrides({"LOS.power.a0": "x"})
    p = tmp_path / "t.json"
    p.write_text(json.dumps({"NLOS.eoa.a0": 11.0}))
    assert load_table_overrides(p).overrides == {"NLOS.eoa.a0": 11.0}


def test_monotone_scales():
    grid = np.linspace(-1.5, 1.5, 100)
    b = [param_table(s, "NLOS")[Param.AOA].scale for s in grid]
    sig = [param_table(s, "LOS")[Param.POWER].scale for s in grid]
    assert all(x < y for x, y in zip(b, b[1:]))
    assert all(x > y for x, y in zip(sig, sig[1:]))


# -- sampling ---------------------------------------------------------------------

def test_sample_examples():
    rng = np.random.default_rng(1)
    draws = sample(DistributionSpec("laplace", 5.0, 1e-12), rng, 1000)
    assert np.all(np.abs(draws - 5.0) < 1e-9)
    assert abs(sample(DistributionSpec("normal", 0, 1), rng, 100_000).mean()) < 0.01
    med = np.median(sample(DistributionSpec("lognormal", 0, 0.5), rng, 100_000))
    assert abs(med - 1.0) < 0.02


def test_scalar_and_vector_draws_share_the_stream():
    for fam in Family:
        spec = DistributionSpec(fam, 1.0, 0.5)
        a = sample(spec, np.random.default_rng(9))
        b = sample(spec, np.random.default_rng(9), 1)
        assert isinstance(a, float)
        assert a == pytest.approx(float(b[0]), rel=1e-15)


def test_laplace_inverse_cdf_form():
    spec = DistributionSpec("laplace", 2.0, 3.0)
    u = np.random.default_rng(4).random(5) - 0.5
    want = 2.0 - 3.0 * np.sign(u) * np.log(1 - 2 * np.abs(u))
    assert sample(spec, np.random.default_rng(4), 5) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("x, want", [(2.5, 3), (-0.4, 1), (14.62, 15), (3.49, 3), (0.5, 1)])
def test_round_count(x, want):
    assert int(round_count(x)) == want


def test_sample_count_is_positive_int():
    rng = np.random.default_rng(0)
    spec = DistributionSpec("normal", 0.0, 3.0)
    vals = [sample_count(spec, rng) for _ in range(500)]
    assert all(isinstance(v, int) and v >= 1 for v in vals)
    arr = sample_count(spec, rng, 500)
    assert arr.dtype == np.int64 and arr.min() >= 1


@pytest.mark.parametrize("spec, x, want", [
    (DistributionSpec("normal", 0, 1), 0.0, 1 / math.sqrt(2 * math.pi)),
    (DistributionSpec("laplace", 0, 1), 0.0, 0.5),
    (DistributionSpec("lognormal", 0, 1), 1.0, 1 / math.sqrt(2 * math.pi)),
])
def test_pdf_examples(spec, x, want):
    assert pdf(spec, x) == pytest.approx(want, rel=1e-15)


def test_pdf_lognormal_domain():
    with pytest.raises(DomainError):
        pdf(DistributionSpec("lognormal", 0, 1), 0.0)


@given(st.floats(-50, 50), st.floats(-10, 10), st.floats(0.05, 10))
def test_pdf_matches_oracle(x, mu, s):
    assert math.isclose(pdf(DistributionSpec("normal", mu, s), x), o.normal_pdf(x, mu, s),
                        rel_tol=1e-9, abs_tol=1e-300)
    assert math.isclose(pdf(DistributionSpec("laplace", mu, s), x), o.laplace_pdf(x, mu, s),
                        rel_tol=1e-9, abs_tol=1e-300)
    if x > 0:
        assert math.isclose(pdf(DistributionSpec("lognormal", mu, s), x),
                            o.lognormal_pdf(x, mu, s), rel_tol=1e-9, abs_tol=1e-300)


@given(st.sampled_from(list(Family)), st.floats(-3, 3), st.floats(0.1, 3))
def test_cdf_is_monotone_and_bounded(fam, mu, s):
    spec = DistributionSpec(fam, mu, s)
    x = np.linspace(-20, 40, 301)
    c = cdf(spec, x)
    assert np.all(np.diff(c) >= 0) and c[0] >= 0 and c[-1] <= 1


def test_truncate_examples():
    rng = np.random.default_rng(3)
    spec = DistributionSpec("laplace", 12855.5, 233.8)
    draws, rejected = truncate_nonnegative(spec, rng, 1000)
    assert rejected == 0 and np.all(draws >= 0)
    # nothing rejected, so the stream is consumed exactly like an unconditioned draw
    assert draws == pytest.approx(sample(spec, np.random.default_rng(3), 1000), rel=0)
    with pytest.raises(DomainError, match="almost entirely negative"):
        truncate_nonnegative(DistributionSpec("normal", -10, 1), rng, 5)
    _, rejected = truncate_nonnegative(DistributionSpec("lognormal", -50, 5), rng, 10_000)
    assert rejected == 0


def test_truncate_keeps_shape_of_positive_part():
    rng = np.random.default_rng(11)
    spec = DistributionSpec("normal", 0.0, 1.0)
    draws, rejected = truncate_nonnegative(spec, rng, 20_000)
    assert draws.min() >= 0 and 0.45 < rejected / (rejected + 20_000) < 0.55
    # half-normal mean sqrt(2/pi)
    assert abs(draws.mean() - math.sqrt(2 / math.pi)) < 4 * 0.6 / math.sqrt(20_000)


@given(st.integers(0, 2**32), st.sampled_from(list(Family)))
def test_sampling_is_deterministic(seed, fam):
    spec = DistributionSpec(fam, 1.0, 2.0)
    a = sample(spec, np.random.default_rng(seed), 64)
    b = sample(spec, np.random.default_rng(seed), 64)
    assert np.array_equal(a, b)


def test_spec_moments():
    assert DistributionSpec("lognormal", 0.0, 1.0).mean() == pytest.approx(math.exp(0.5))
    assert DistributionSpec("laplace", 1.0, 2.0).std() == pytest.approx(2 * math.sqrt(2))
    with pytest.raises(DomainError):
        DistributionSpec("normal", 0.0, 0.0)


def test_link_state_parse():
    assert LinkState.parse("los") is LinkState.LOS
    with pytest.raises(ValueError):
        LinkState.parse("foo")
