import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfnoise import noise
from pfnoise.errors import DomainError, NoiseSupportError
from pfnoise.noise import DeterministicSequence, NoiseSpec


@pytest.mark.parametrize(
    "spec",
    [NoiseSpec(), NoiseSpec("beta", alpha=2.0), NoiseSpec("tgauss", sigma=0.5)],
    ids=["uniform", "beta", "tgauss"],
)
def test_builtin_laws_pass_validation(spec):
    rep = noise.validate(spec, 50_000)
    assert rep.passed
    assert -1.0 <= rep.min and rep.max <= 1.0


@pytest.mark.parametrize(
    "spec",
    [NoiseSpec(), NoiseSpec("beta", alpha=2.0), NoiseSpec("tgauss", sigma=0.5)],
    ids=["uniform", "beta", "tgauss"],
)
def test_sample_variance_matches_declared(spec):
    x = noise.sample_stream(spec, 200_000)
    assert np.var(x) == pytest.approx(spec.variance, rel=0.02)


class _Shifted:
    def sample(self, n):
        return np.random.default_rng(1).uniform(-0.5, 1.0, n)


class _Wide:
    def sample(self, n):
        return np.random.default_rng(1).uniform(-2.0, 2.0, n)


def test_asymmetric_source_fails_report():
    assert not noise.validate(_Shifted(), 20_000).passed


def test_out_of_support_source_raises():
    with pytest.raises(NoiseSupportError):
        noise.validate(_Wide(), 1000)


def test_streams_are_reproducible_and_independent():
    spec = NoiseSpec(seed=42)
    a = noise.sample_stream(spec, 100, run_index=3)
    assert np.array_equal(a, noise.sample_stream(spec, 100, run_index=3))
    assert not np.array_equal(a, noise.sample_stream(spec, 100, run_index=4))
    assert not np.array_equal(a, noise.sample_stream(spec.with_seed(43), 100, run_index=3))


def test_stream_prefix_is_stable():
    spec = NoiseSpec(seed=5)
    assert np.array_equal(noise.sample_stream(spec, 10), noise.sample_stream(spec, 1000)[:10])


@pytest.mark.parametrize("kwargs", [{"kind": "cauchy"}, {"kind": "beta"}, {"kind": "tgauss", "sigma": -1.0}, {"seed": -1}])
def test_bad_specs_rejected(kwargs):
    with pytest.raises(DomainError):
        NoiseSpec(**kwargs)


def test_spec_dict_round_trip():
    spec = NoiseSpec("beta", alpha=3.0, seed=9)
    assert NoiseSpec.from_dict(spec.to_dict()) == spec


def test_deterministic_sequences():
    assert list(DeterministicSequence.constant(0.5).values(3)) == [0.5, 0.5, 0.5]
    assert list(DeterministicSequence.alternating(-1, 1).values(5)) == [-1, 1, -1, 1, -1]
    assert list(DeterministicSequence.explicit([0.1, 0.2, 0.3]).values(4)) == [0.1, 0.2, 0.3, 0.1]
    with pytest.raises(DomainError):
        DeterministicSequence.constant(1.5)
    with pytest.raises(DomainError):
        DeterministicSequence("alternating", (1.0,))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), k=st.integers(0, 10_000))
def test_draws_stay_in_support(seed, k):
    x = noise.sample_stream(NoiseSpec(seed=seed), 64, run_index=k)
    assert np.all(np.abs(x) <= 1.0)
