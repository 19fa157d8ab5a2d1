"""Acceptance criteria 1-11, one test each, printing a PASS/FAIL line per criterion.

Criterion 2 audits every spectrum the other criteria produced, so it runs last.
"""
import pytest

from blochasym import validation

ORDER = [1, 3, 4, 5, 6, 7, 8, 9, 10, 11, 2]
NAMES = {
    1: "oracle-exactness", 2: "parseval-and-residual", 3: "nonresonance-decay", 4: "second-order-equivalence",
    5: "resonance-block", 6: "lipschitz-bound", 7: "bloch-tail", 8: "gradient-formula",
    9: "measure-asymptotics", 10: "isoenergetic-witness", 11: "classification-soundness",
}


@pytest.fixture(scope="module")
def fixture():
    return validation.Fixture()


@pytest.mark.parametrize("number", ORDER, ids=[f"{n:02d}-{NAMES[n]}" for n in ORDER])
def test_criterion(fixture, number, capsys):
    result = getattr(validation, f"criterion_{number}")(fixture)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
