import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qlpay import lightning as ql  # noqa: E402
from qlpay.banknote import BanknoteCircuit  # noqa: E402
from qlpay.ledger import Ledger  # noqa: E402
from qlpay.lightning.toy import toy_setup  # noqa: E402
from qlpay.primitives import PartyId  # noqa: E402

A = PartyId("A", 50)
B = PartyId("B", 20)
C = PartyId("C", 0)


@pytest.fixture
def ideal():
    return ql.setup(ql.BackendKind.IDEAL, 64, seed=7)


@pytest.fixture
def toy():
    return toy_setup(4, 2, 2, seed=3)


@pytest.fixture
def world(ideal):
    """Ledger with A, B, C registered and a banknote circuit for the ideal context."""
    ledger = Ledger()
    for p in (A, B, C):
        ledger.register(p)
    return ledger, ideal, BanknoteCircuit.for_context(ideal)


# ---- acceptance reporting: one PASS/FAIL line per criterion at the end of the run

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call" and report.passed:
        return
    label = marker.args[0]
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    if report.failed or report.when == "call":
        _ACCEPTANCE[label] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE):
        verdict, detail = _ACCEPTANCE[label]
        terminalreporter.write_line(f"{verdict}  {label}" + (f"  [{detail}]" if detail else ""))
