import pytest
from hypothesis import HealthCheck, settings

from spikemesh import CoreParams, CoreSpec, GridConfig, NetworkConfig, NeuronConfig, Packet
from spikemesh.mappers import VmmProblem, map_vmm_positive

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("default")


def relay_chain(length=2, offset=1, **neuron_kw):
    """``length`` cores in a row; neuron 0 of each forwards to axon 0 of the next."""
    cores = []
    for x in range(length):
        dest = Packet(1, 0, 0, offset) if x < length - 1 else None
        cores.append(CoreSpec(x, 0, CoreParams(1, 1), (0,),
                              (NeuronConfig(connections=(0,), destination=dest, **neuron_kw),)))
    return NetworkConfig(GridConfig(length, 1), tuple(cores), (length - 1, 0))


@pytest.fixture(scope="session")
def worked_mapping():
    problem = VmmProblem([[2], [1], [4], [12]], [1, 3, 2, 1], magnitude_bits=4)
    return map_vmm_positive(problem)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Time a criterion body and record one PASS/FAIL line for the summary."""
    import time

    def check(number, title, body, limit=None):
        start = time.perf_counter()
        ok, note = False, ""
        try:
            body()
            elapsed = time.perf_counter() - start
            ok = limit is None or elapsed < limit
            note = f"{elapsed:.2f}s" + (f" (limit {limit:g}s)" if limit else "")
        except Exception as exc:
            elapsed = time.perf_counter() - start
            note = f"{elapsed:.2f}s: {exc}"
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} [{note}]"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
