import json

import mpmath as mp
import pytest

from xibrane.xi import ZeroList, find_zeros


@pytest.fixture(autouse=True)
def _reset_mp_precision():
    # tests compare at high precision; keep the global context clean between tests
    saved = mp.mp.dps
    mp.mp.dps = 60
    yield
    mp.mp.dps = saved


def _cached_zeros(request, key, T, digits):
    raw = request.config.cache.get(key, None)
    if raw is not None:
        try:
            zl = ZeroList.from_dict(raw)
            if zl.scan_height >= T and zl.precision_digits >= digits:
                return zl
        except (ValueError, KeyError):
            pass
    zl = find_zeros(T, 0.05, digits)
    request.config.cache.set(key, json.loads(json.dumps(zl.to_dict())))
    return zl


@pytest.fixture(scope="session")
def zeros240(request):
    """Zeros up to T = 240 (the first 102) at 30 digits."""
    return _cached_zeros(request, "xibrane/zeros240", 240, 30)


@pytest.fixture(scope="session")
def zeros100(request):
    """Zeros up to T = 100 at the default 50 digits."""
    return _cached_zeros(request, "xibrane/zeros100", 100, 50)


_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(n, ok, detail)."""

    def record(n, ok, detail):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
