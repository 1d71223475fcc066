import pytest

# filled by tests/test_acceptance.py: criterion label -> list of (passed, detail)
ACCEPTANCE = {}


def report(label, passed, detail):
    ACCEPTANCE.setdefault(label, []).append((bool(passed), detail))
    print(f"{label}: {'PASS' if passed else 'FAIL'} {detail}")
    return passed


@pytest.fixture
def acceptance_report():
    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
        results = ACCEPTANCE[label]
        ok = all(p for p, _ in results)
        details = "; ".join(d for _, d in results)
        terminalreporter.write_line(f"{label}: {'PASS' if ok else 'FAIL'} ({details})")
