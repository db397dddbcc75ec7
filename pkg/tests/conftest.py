import re
from pathlib import Path

import pytest

from dlecorr.signature import full, load_signature

SIGS = Path(__file__).resolve().parent.parent / "sigs"

_ACCEPT = {}


def sig_file(name):
    return full(load_signature(SIGS / f"{name}.json"))


@pytest.fixture(scope="session")
def sigs():
    return {n: sig_file(n) for n in ("fg", "modal", "heyting", "frege", "prelin", "gcr", "qprim", "pia")}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = re.match(r"test_criterion_(\d+)", item.name)
    if not m or not (rep.when == "call" or rep.failed):
        return
    doc = (getattr(item, "function", None).__doc__ or item.name).strip().splitlines()[0]
    detail = ""
    if rep.failed and call.excinfo is not None:
        detail = str(call.excinfo.value).strip().splitlines()[0][:160]
    _ACCEPT[int(m.group(1))] = ("PASS" if rep.passed else "FAIL", doc, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPT:
        return
    tr = terminalreporter
    tr.write_sep("=", "acceptance criteria")
    for k in sorted(_ACCEPT):
        status, doc, detail = _ACCEPT[k]
        tr.write_line(f"criterion {k:2d}: {status}  {doc}" + (f"  [{detail}]" if detail else ""))
    passed = sum(1 for v in _ACCEPT.values() if v[0] == "PASS")
    tr.write_line(f"{passed}/{len(_ACCEPT)} criteria pass")
