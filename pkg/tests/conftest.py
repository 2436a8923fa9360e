from __future__ import annotations

import numpy as np
import pytest

from fogalloc.instance import Instance, ServerSpec, UserSpec


def random_small_instance(rng: np.random.Generator, max_vars: int = 16) -> Instance:
    """Mixed-distribution instance with U*S <= max_vars, tuned to be tight."""
    while True:
        n_users = int(rng.integers(1, 6))
        n_servers = int(rng.integers(1, 6))
        if n_users * n_servers <= max_vars:
            break
    mode = rng.integers(0, 4)
    if mode == 0:
        w = rng.integers(1, 20, size=n_servers).astype(float)
    elif mode == 1:
        w = np.abs(rng.normal(10, 3, size=n_servers)) + 0.01
    elif mode == 2:
        w = np.full(n_servers, 10.0)
    else:
        w = rng.integers(0, 4, size=n_servers).astype(float)
    p = rng.choice([0.3, 0.5, 0.7, 0.9, 0.95], size=n_servers) if rng.random() < 0.5 \
        else rng.uniform(0.05, 0.95, size=n_servers)
    servers = tuple(ServerSpec(float(w[s]), int(rng.integers(1, 13)), float(p[s]))
                    for s in range(n_servers))
    users = []
    for _ in range(n_users):
        d = int(rng.integers(1, 5))
        l = float(rng.choice([0.5, 0.75, 0.9])) if rng.random() < 0.5 else float(rng.uniform(0.05, 0.95))
        budget = float(rng.choice([d * 10.0, d * 25.0, d * 60.0, 1e6]))
        users.append(UserSpec(d, budget, l))
    if rng.random() < 0.3 and n_users > 1:
        users = [users[0]] * n_users
    m = int(min(rng.integers(1, 4), n_servers))
    return Instance(tuple(users), servers, m)


def random_corpus(n: int, seed: int = 2024, max_vars: int = 16) -> list[Instance]:
    rng = np.random.default_rng(seed)
    return [random_small_instance(rng, max_vars) for _ in range(n)]


@pytest.fixture(scope="session")
def oracle_corpus() -> list[Instance]:
    return random_corpus(200)


@pytest.fixture
def ab_instance() -> Instance:
    user = UserSpec(demand=1, budget=10.0, service_level=0.6)
    return Instance((user, user),
                    (ServerSpec(1.0, 1, 0.7), ServerSpec(5.0, 2, 0.7)), 2)


@pytest.fixture(params=[False, True], ids=["numba", "pure"])
def backend(request, monkeypatch):
    """Run a test under both kernel backends."""
    if request.param:
        monkeypatch.setenv("FOGALLOC_NO_NUMBA", "1")
    else:
        monkeypatch.delenv("FOGALLOC_NO_NUMBA", raising=False)
    return "pure" if request.param else "numba"


# Acceptance criteria record their verdict here; the summary hook prints one line each.
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, verdict = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{verdict}] criterion {num}: {title}")
