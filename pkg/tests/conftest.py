import numpy as np
import pytest

from stencilcert import DiffOperator, KernelSpec, PointSet


def midpoint_problem_parts():
    return KernelSpec.phs(3.0, 2), DiffOperator.identity(1), PointSet([0.5], [[0.0], [1.0]])


def central_difference_parts(h=1.0):
    return KernelSpec.phs(3.0, 2), DiffOperator.partial((1,)), PointSet([0.0], [[-h], [h]])


def kernel_zoo():
    """One kernel per family with a compatible cpd order, usable in d <= 2."""
    return [
        KernelSpec.phs(3.0, 2),
        KernelSpec.phs(5.0, 3),
        KernelSpec.tps(2, 3),
        KernelSpec.wendland(3, 1, 0),
    ]


def random_stencil(rng, d, n, spread=1.0):
    z = rng.uniform(-0.2, 0.2, d)
    nodes = z + spread * rng.uniform(-1.0, 1.0, (n, d))
    return PointSet(z, nodes)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
