import numpy as np
import pytest
from hypothesis import strategies as st

from nilsoliton.algebra_core import Bracket


def random_bracket(rng, n=6, m=8, upper=True):
    """Random sparse bracket; ``upper`` keeps k > j so the result is nilpotent-shaped."""
    terms = {}
    for _ in range(m):
        i, j = sorted(rng.choice(n, size=2, replace=False) + 1)
        ks = range(j + 1, n + 1) if upper else range(1, n + 1)
        if not ks:
            continue
        k = int(rng.choice(list(ks)))
        terms[(int(i), int(j), k)] = float(rng.normal())
    return Bracket(n, terms)


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


@st.composite
def rational_brackets(draw, max_dim=6):
    n = draw(st.integers(3, max_dim))
    triples = [(i, j, k) for i in range(1, n + 1) for j in range(i + 1, n + 1)
               for k in range(1, n + 1)]
    chosen = draw(st.lists(st.sampled_from(triples), max_size=8, unique=True))
    coefs = draw(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=7)
                          .filter(lambda c: c != 0),
                          min_size=len(chosen), max_size=len(chosen)))
    return Bracket(n, dict(zip(chosen, coefs)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance bookkeeping: a criterion passes when every test marked with it passes
_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, {"title": title, "ok": True, "failed": []})
    if rep.failed:
        entry["ok"] = False
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        status = "PASS" if e["ok"] else "FAIL"
        extra = "" if e["ok"] else f" ({', '.join(e['failed'])})"
        terminalreporter.write_line(f"criterion {n:2d} {status}: {e['title']}{extra}")
