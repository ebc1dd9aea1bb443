import numpy as np
import pytest

from polypix.errors import ArgumentError
from polypix.grid import (
    column_subset,
    make_grid,
    nested_dense_grid,
    pixel_index,
    pixel_rowcol,
)


def test_unit_2x2_columns():
    g = make_grid(2, 2)
    expected = np.array([[0, 1, 0, 1], [0, 0, 1, 1], [1, 1, 1, 1]], dtype=np.float32)
    np.testing.assert_array_equal(g.matrix, expected)


def test_single_pixel_sits_at_region_minimum():
    g = make_grid(1, 1)
    np.testing.assert_array_equal(g.matrix, [[0.0], [0.0], [1.0]])
    g2 = make_grid(1, 3, (0.5, 1.0, -0.25, 0.75))
    assert g2.matrix[1].tolist() == [-0.25, -0.25, -0.25]


def test_extrapolation_region_corners():
    g = make_grid(2, 2, (-0.25, 1.25, -0.25, 1.25))
    assert set(g.matrix[0].tolist()) == {-0.25, 1.25}
    assert set(g.matrix[1].tolist()) == {-0.25, 1.25}


def test_third_row_is_ones():
    g = make_grid(7, 5, (-1.0, 2.0, 0.0, 0.5))
    assert np.all(g.matrix[2] == 1.0)
    assert g.matrix.shape == (3, 35)


def test_unit_axis_endpoints_and_spans():
    g = make_grid(4, 6)
    xs = sorted(set(g.matrix[0].tolist()))
    assert xs[0] == 0.0 and xs[-1] == 1.0 and len(xs) == 6
    ys = sorted(set(g.matrix[1].tolist()))
    assert ys == [0.0, pytest.approx(1 / 3), pytest.approx(2 / 3), 1.0]


def test_bad_arguments():
    with pytest.raises(ArgumentError):
        make_grid(0, 4)
    with pytest.raises(ArgumentError):
        make_grid(4, -1)
    with pytest.raises(ArgumentError):
        make_grid(2, 2, (1.0, 0.0, 0.0, 1.0))
    with pytest.raises(ArgumentError):
        nested_dense_grid(3, 3, 0)
    with pytest.raises(ArgumentError):
        nested_dense_grid(1, 3, 2)


def test_nested_identity_case():
    a = nested_dense_grid(3, 3, 1)
    b = make_grid(3, 3)
    assert np.array_equal(a.matrix, b.matrix)


def test_nested_2x2_factor_2_step_half():
    g = nested_dense_grid(2, 2, 2)
    assert (g.height, g.width) == (3, 3)
    assert sorted(set(g.matrix[0].tolist())) == [0.0, 0.5, 1.0]


def test_nesting_bit_exact_many_sizes():
    rng = np.random.default_rng(0)
    for _ in range(25):
        h = int(rng.integers(2, 14))
        w = int(rng.integers(2, 14))
        f = int(rng.integers(1, 6))
        base = make_grid(h, w)
        dense = nested_dense_grid(h, w, f)
        rows = np.arange(h) * f
        cols = np.arange(w) * f
        sub = dense.matrix.reshape(3, dense.height, dense.width)[:, rows][:, :, cols]
        assert np.array_equal(sub.reshape(3, -1), base.matrix)


def test_extrapolation_containment_bit_exact():
    # step-aligned 1.5x region: (W-1) divisible by 4
    rng = np.random.default_rng(1)
    for _ in range(20):
        k = 4 * int(rng.integers(1, 8))
        unit = make_grid(k + 1, k + 1)
        size = k + k // 2 + 1
        ext = make_grid(size, size, (-0.25, 1.25, -0.25, 1.25))
        off = k // 4
        m = ext.matrix.reshape(3, size, size)
        inner = m[:, off : off + k + 1, off : off + k + 1].reshape(3, -1)
        assert np.array_equal(inner, unit.matrix)


def test_raster_order_round_trip():
    w = 9
    for p in range(9 * 7):
        r, c = pixel_rowcol(p, w)
        assert pixel_index(r, c, w) == p
    seen = {pixel_index(r, c, w) for r in range(7) for c in range(w)}
    assert seen == set(range(63))


def test_column_subset_copies_and_validates():
    g = make_grid(3, 3)
    sub = column_subset(g, [0, 4, 8])
    assert sub.shape == (3, 3)
    assert np.array_equal(sub, g.matrix[:, [0, 4, 8]])
    with pytest.raises(ArgumentError):
        column_subset(g, [9])


def test_float64_grids():
    g = make_grid(5, 5, dtype=np.float64)
    assert g.matrix.dtype == np.float64
    assert g.matrix[0, 1] == 0.25
