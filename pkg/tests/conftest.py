import numpy as np
import pytest

from sglab import MAX, SUM, KFun, build_network, chain_template, linear

ACCEPTANCE_VERDICTS: list[str] = []


def record_verdict(line: str) -> None:
    ACCEPTANCE_VERDICTS.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)


def random_kfun(rng, max_knots=6, slope_range=(0.05, 3.0), x_scale=1.0):
    """Random strictly increasing PL comparison function."""
    k = int(rng.integers(1, max_knots + 1))
    dx = rng.uniform(0.1, 1.0, size=k) * x_scale
    xs = np.concatenate(([0.0], np.cumsum(dx)))
    slopes = rng.uniform(*slope_range, size=k)
    ys = np.concatenate(([0.0], np.cumsum(slopes * dx)))
    return KFun(xs, ys, float(rng.uniform(*slope_range)))


def random_network(rng, n_max=6, maf=None, slope_range=(0.05, 3.0), p_edge=0.5):
    """Random network with PL gains; MAF drawn from max/sum when not given."""
    n = int(rng.integers(2, n_max + 1))
    edges = []
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < p_edge:
                edges.append((j, i, random_kfun(rng, slope_range=slope_range)))
    if not edges:
        edges.append((1, 0, random_kfun(rng, slope_range=slope_range)))
    m = maf if maf is not None else (MAX if rng.random() < 0.5 else SUM)
    return build_network(n, edges, m)


def contracting_sum_network(rng, n_max=5, row_sum=0.8):
    """Linear sum-aggregation network with row sums capped below one."""
    n = int(rng.integers(2, n_max + 1))
    edges = []
    for i in range(n):
        js = [j for j in range(n) if j != i and rng.random() < 0.7]
        if not js:
            js = [(i + 1) % n]
        weights = rng.uniform(0.1, 1.0, size=len(js))
        weights *= row_sum * rng.uniform(0.5, 1.0) / weights.sum()
        for j, w in zip(js, weights):
            edges.append((j, i, linear(float(w))))
    return build_network(n, edges, SUM)


@pytest.fixture
def two_node_half():
    """Two nodes feeding each other through gain one-half, max aggregation."""
    g = linear(0.5)
    return build_network(2, [(1, 0, g), (0, 1, g)], MAX)


@pytest.fixture
def two_node_double():
    g = linear(2.0)
    return build_network(2, [(1, 0, g), (0, 1, g)], MAX)


@pytest.fixture
def chain10():
    return chain_template(linear(0.25), SUM).instantiate(10)


@pytest.fixture
def chain3():
    return chain_template(linear(0.25), SUM).instantiate(3)
