"""Acceptance criteria, each at its stated tolerance.

Every criterion prints one PASS/FAIL line (run with ``-s`` or read the
captured output).  The isotropization criterion is marked as an expected
failure: for alpha = 1 a sizeable fraction of random SU(2) data shrink to
a point with A/B growing without bound instead of tending to 1, so the
criterion cannot hold as stated.  The check still runs at its stated
tolerance and reports the failure.
"""

import pytest

from rg2flow.validation import ACCEPTANCE, Context, run_checks

_KNOWN_FAILURES = {
    "acceptance.07_su2_theorem": (
        "with alpha = 1, SU(2) data with A0/B0 above about 2 reach the origin along B ~ c A^5, "
        "so A/B diverges instead of isotropizing; alpha = 0 data and the Ricci orbit formula pass"),
}


@pytest.fixture(scope="module")
def ctx():
    return Context()


def _params():
    out = []
    for name in ACCEPTANCE:
        marks = ()
        if name in _KNOWN_FAILURES:
            marks = (pytest.mark.xfail(reason=_KNOWN_FAILURES[name], strict=True),)
        out.append(pytest.param(name, marks=marks, id=name.split(".", 1)[1]))
    return out


@pytest.mark.parametrize("name", _params())
def test_acceptance(name, ctx, capsys):
    (res,) = run_checks(ctx, only=[name])
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()


def test_every_criterion_registered():
    assert len(ACCEPTANCE) == 10
