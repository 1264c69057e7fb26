import random

from hypothesis import given, settings, strategies as st

import property_suites as suites


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_shuffled_evaluation_is_deterministic(seed):
    suites.check_shuffle_determinism(instances=2, seed=seed, ticks=25)


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1))
def test_noc_conservation_and_xy_order(seed):
    suites.check_noc_fuzz(packets=320, seed=seed)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_rate_code_conservation(seed):
    suites.check_rate_code_conservation(episodes=5, seed=seed)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_scheduler_matches_model(seed):
    suites.check_scheduler_exactness(sequences=10, seed=seed)


def test_random_networks_are_valid():
    rng = random.Random(5)
    for _ in range(50):
        net, inputs = suites.random_network(rng)
        assert net.cores and all(s.tick >= 1 for s in inputs.spikes)
