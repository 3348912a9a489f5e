import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from csfeas import DenseMatrix, Problem, ProblemFormatError, Signal, UsageError, load_problem, residual, row_dot, save_problem
from csfeas.model import COMPRESSIBLE

from conftest import make_problem


def test_row_dot_examples():
    assert row_dot(DenseMatrix([[1, 2], [3, 4]]), 0, [1, 1]) == 3
    assert row_dot(DenseMatrix(np.eye(3)), 2, [5, 6, 7]) == 7
    assert row_dot(DenseMatrix(np.full((4, 8), 0.5)), 1, np.ones(8)) == 4.0


def test_residual_examples():
    P = make_problem(np.eye(2), [1, 2])
    np.testing.assert_array_equal(residual(P, [1, 2]), [0, 0])
    np.testing.assert_array_equal(residual(P, [0, 0]), [1, 2])
    P = make_problem([[1, 1]], [3])
    np.testing.assert_array_equal(residual(P, [1, 1]), [1])


def test_row_dot_bad_index_and_length():
    M = DenseMatrix(np.eye(3))
    with pytest.raises(UsageError):
        row_dot(M, 3, np.ones(3))
    with pytest.raises(UsageError):
        row_dot(M, 0, np.ones(2))


@settings(max_examples=50, deadline=None)
@given(hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, max_side=12), elements=st.floats(-1e3, 1e3)))
def test_cached_row_norms_match(a):
    M = DenseMatrix(a)
    np.testing.assert_allclose(M.row_norms_sq, np.sum(a * a, axis=1), rtol=1e-12, atol=0)


def test_matrix_is_immutable_and_with_row_copies():
    M = DenseMatrix(np.eye(2))
    with pytest.raises(ValueError):
        M.array[0, 0] = 3.0
    M2 = M.with_row(0, [2.0, 0.0])
    assert M.array[0, 0] == 1.0
    assert M2.row_norms_sq[0] == 4.0


def test_empty_matrix_rejected():
    with pytest.raises(UsageError):
        DenseMatrix(np.zeros((0, 3)))


def test_problem_length_checks():
    with pytest.raises(UsageError):
        Problem(DenseMatrix(np.ones((2, 3))), np.ones(3))
    with pytest.raises(UsageError):
        Problem(DenseMatrix(np.ones((2, 3))), np.ones(2), Signal(np.ones(4)))


def test_overdetermined_warns_but_accepts():
    with pytest.warns(UserWarning):
        Problem(DenseMatrix(np.eye(3)), np.ones(3))


def test_signal_support():
    x = Signal(np.array([0.0, 2.0, 0.0, -1.0]))
    assert x.l0 == 2
    np.testing.assert_array_equal(x.support, [1, 3])


def test_save_load_round_trip(tmp_path, rng):
    H = rng.standard_normal((8, 16))
    x = np.zeros(16)
    x[[1, 5]] = [0.3, -2.0]
    P = make_problem(H, H @ x + 0.01, Signal(x), 0.01)
    path = tmp_path / "p.csprob"
    save_problem(P, path)
    Q = load_problem(path)
    assert Q == P
    np.testing.assert_array_equal(Q.matrix.array, H)
    np.testing.assert_array_equal(Q.y, P.y)
    np.testing.assert_array_equal(Q.truth.values, x)
    assert Q.noise_sigma == 0.01


def test_round_trip_compressible_without_truth(tmp_path):
    P = make_problem([[1.0, 2.0, 3.0]], [1.0], Signal(np.array([0.1, 0.2, 0.3]), COMPRESSIBLE))
    save_problem(P, tmp_path / "c")
    assert load_problem(tmp_path / "c").truth.kind == COMPRESSIBLE
    P = make_problem([[1.0, 2.0, 3.0]], [1.0])
    save_problem(P, tmp_path / "n")
    assert load_problem(tmp_path / "n").truth is None


def test_truncated_file_is_parse_error(tmp_path, rng):
    P = make_problem(rng.standard_normal((4, 6)), np.ones(4))
    p = tmp_path / "p"
    save_problem(P, p)
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:-1]) + "\n")  # drop the last row
    with pytest.raises(ProblemFormatError) as info:
        load_problem(p)
    assert info.value.exit_code == 3


def test_zero_dimension_header_rejected(tmp_path):
    p = tmp_path / "p"
    p.write_text("CSPROB v1 2 0 0\ny: 1 2\n")
    with pytest.raises(ProblemFormatError):
        load_problem(p)


def test_bad_number_reports_line(tmp_path):
    p = tmp_path / "p"
    p.write_text("CSPROB v1 1 2 0\ny: 1\n1 abc\n")
    with pytest.raises(ProblemFormatError) as info:
        load_problem(p)
    assert info.value.line == 3
