import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from twomembranes import (
    OBSTACLE_ABSENT_ABOVE,
    OBSTACLE_ABSENT_BELOW,
    GridMismatch,
    InvalidResolution,
    SamplingError,
    ScalarField,
    absent_obstacle,
    build_grid,
    check_same_grid,
    constant_field,
    dump_field_csv,
    load_field_csv,
    sample,
)


def test_smallest_legal_grid():
    g = build_grid(1, 3)
    np.testing.assert_array_equal(g.xs, [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(g.boundary_mask, [True, False, True])


def test_spacing():
    assert build_grid(1, 201).h == 0.005


def test_2d_counts():
    g = build_grid(2, 5)
    assert g.n_nodes == 25
    assert int(g.boundary_mask.sum()) == 16
    assert int(g.interior_mask.sum()) == 9


def test_2d_node_order_is_lexicographic():
    g = build_grid(2, 3)
    xs, ys = g.coords()
    # x varies slowest: flat index = ix * n + iy
    np.testing.assert_array_equal(xs[:3], [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(ys[:3], [0.0, 0.5, 1.0])
    assert g.node_coords(4) == (0.5, 0.5)


@pytest.mark.parametrize("dim,n", [(1, 2), (1, 0), (2, 1), (0, 5), (3, 5)])
def test_invalid_resolution(dim, n):
    with pytest.raises(InvalidResolution):
        build_grid(dim, n)


def test_sample_paper_fields():
    g = build_grid(1, 201)
    center = g.n_per_axis // 2
    assert sample(g, "x*(1-x)").values[center] == 0.25
    assert sample(g, "-5*x*(1-x)+1").values[center] == -0.25
    assert not sample(g, "0").values.any()


def test_sample_accepts_callables_and_numbers():
    g = build_grid(1, 5)
    np.testing.assert_array_equal(sample(g, lambda x: 2 * x).values, 2 * g.xs)
    np.testing.assert_array_equal(sample(g, 1.5).values, np.full(5, 1.5))


def test_sample_nonfinite_names_node():
    g = build_grid(1, 5)
    with pytest.raises(SamplingError) as err:
        sample(g, "1 / x")  # division by zero at the left endpoint
    assert "node" in str(err.value) or "failed" in str(err.value)


def test_sample_2d_uses_both_coordinates():
    g = build_grid(2, 3)
    fld = sample(g, "x + 10*y")
    assert fld.values[g.n_per_axis * 1 + 2] == 0.5 + 10.0  # node (0.5, 1.0)


def test_absent_obstacle_sentinels():
    g = build_grid(1, 3)
    assert absent_obstacle(g, "below").values[0] == OBSTACLE_ABSENT_BELOW
    assert absent_obstacle(g, "above").values[0] == OBSTACLE_ABSENT_ABOVE
    with pytest.raises(ValueError):
        absent_obstacle(g, "sideways")


def test_check_same_grid():
    a = constant_field(build_grid(1, 5), 0.0)
    b = constant_field(build_grid(1, 7), 0.0)
    with pytest.raises(GridMismatch):
        check_same_grid(a, b)


def test_field_roundtrip_1d(tmp_path):
    g = build_grid(1, 33)
    fld = sample(g, "sin(3*x) - x^2")
    path = tmp_path / "f.csv"
    dump_field_csv(fld, path)
    text = path.read_text()
    assert text.splitlines()[0] == "x,value"
    back = load_field_csv(g, path)
    np.testing.assert_array_equal(back.values, fld.values)


def test_field_roundtrip_2d(tmp_path):
    g = build_grid(2, 7)
    fld = sample(g, "x*y + sin(x)")
    path = tmp_path / "f.csv"
    dump_field_csv(fld, path)
    assert path.read_text().splitlines()[0] == "x,y,value"
    back = load_field_csv(g, path)
    np.testing.assert_array_equal(back.values, fld.values)


def test_load_rejects_wrong_grid(tmp_path):
    fld = constant_field(build_grid(1, 9), 1.0)
    path = tmp_path / "f.csv"
    dump_field_csv(fld, path)
    with pytest.raises(GridMismatch):
        load_field_csv(build_grid(1, 11), path)


@settings(max_examples=25, deadline=None)
@given(hnp.arrays(np.float64, 17,
                  elements=st.floats(min_value=-1e12, max_value=1e12,
                                     allow_nan=False, allow_subnormal=False)))
def test_roundtrip_is_exact_for_any_field(tmp_path_factory, values):
    g = build_grid(1, 17)
    fld = ScalarField(g, values)
    path = tmp_path_factory.mktemp("rt") / "f.csv"
    dump_field_csv(fld, path)
    np.testing.assert_array_equal(load_field_csv(g, path).values, fld.values)
