import pytest

from rg2flow.flows import SOL_TIME_SCALE, LrsFamily, reduced_rhs
from rg2flow.geometry import StructureConstants
from rg2flow.systems import FlowProblem, Mode


@pytest.mark.parametrize("mode,kw,dim,cols", [
    ("full3d", {"geometry": "SU2"}, 3, ("t", "A", "B", "C")),
    ("lrs", {"geometry": "SOL"}, 2, ("t", "x", "y")),
    ("const_curv", {"K": 1.0}, 1, ("t", "phi")),
    ("product", {"kappa": 1.0}, 2, ("t", "D", "E")),
])
def test_shapes(mode, kw, dim, cols):
    p = FlowProblem(mode, 0.5, **kw)
    assert p.mode is Mode(mode)
    assert p.dim == dim
    assert p.columns == cols
    assert len(p.field()([1.0] * dim)) == dim
    assert len(p.multiplicities) == dim


def test_full3d_from_triple():
    p = FlowProblem("full3d", 1.0, structure=StructureConstants(-2.0, 0.0, 2.0))
    assert p.preset_name == "SOL"
    assert p.to_dict()["structure"] == [-2.0, 0.0, 2.0]


def test_lrs_field_is_reduced_system():
    p = FlowProblem("lrs", 0.3, geometry="SOL")
    assert p.family is LrsFamily.SOL_AeqC
    assert tuple(p.field()([1.0, 3.0])) == reduced_rhs(LrsFamily.SOL_AeqC, (1.0, 3.0), 0.3)
    assert SOL_TIME_SCALE == 2.0


@pytest.mark.parametrize("kw", [dict(mode="full3d"), dict(mode="lrs"), dict(mode="lrs", geometry="R3"),
                                dict(mode="const_curv", K=float("nan"))])
def test_invalid_problems(kw):
    mode = kw.pop("mode")
    with pytest.raises(ValueError):
        FlowProblem(mode, 1.0, **kw)


def test_check_initial():
    p = FlowProblem("lrs", 1.0, geometry="NIL")
    assert p.check_initial([1, 2]) == (1.0, 2.0)
    with pytest.raises(ValueError):
        p.check_initial([1, 2, 3])
    with pytest.raises(ValueError):
        p.check_initial([1, 0])
