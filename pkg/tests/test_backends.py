"""Parity between the compiled batch executor and the pure-Python fallback."""

import numpy as np
import numpy.testing as npt
import pytest

from phaseq import _exprcore_py, parse
from phaseq._kernel import backend_name, run_with
from phaseq.errors import EvalError

try:
    from phaseq import _exprcore
except ImportError:
    _exprcore = None

needs_compiled = pytest.mark.skipif(
    _exprcore is None, reason="compiled extension not built"
)

VARS = ("q1", "q2", "p1", "p2")

CORPUS = [
    "q1 + q2 - p1*p2",
    "q1^2 * p1 - q2^3 / (1 + p2^2)",
    "exp(q1*p2) + sin(q2) * cos(p1)",
    "(q1 + i*p1) * (q2 - i*p2)",
    "sqrt(q1 + 2) / (p1 + 3) + q2^-2",
    "-(q1 - p1)^4 + i*q2",
    "2^10 + q1^2^2",
]


def _points(rng, n):
    return rng.uniform(0.3, 1.5, size=(n, len(VARS)))


@needs_compiled
def test_values_and_partials_match():
    rng = np.random.default_rng(101)
    for src in CORPUS:
        e = parse(src, VARS)
        pts = _points(rng, 64)
        v_c, p_c = run_with(_exprcore, e.program, pts, True)
        v_py, p_py = run_with(_exprcore_py, e.program, pts, True)
        npt.assert_allclose(v_c, v_py, rtol=1e-12, atol=1e-14)
        npt.assert_allclose(p_c, p_py, rtol=1e-12, atol=1e-14)


@needs_compiled
def test_values_only_path_matches():
    rng = np.random.default_rng(55)
    e = parse("exp(q1) * (q2 + i*p1)^3 - p2", VARS)
    pts = _points(rng, 200)
    v_c, _ = run_with(_exprcore, e.program, pts, False)
    v_py, _ = run_with(_exprcore_py, e.program, pts, False)
    npt.assert_allclose(v_c, v_py, rtol=1e-12)


@needs_compiled
def test_error_code_and_index_parity():
    cases = [
        ("1/q1", [[1.0], [0.0], [0.0]], "division by zero", 1),
        ("sqrt(q1)", [[4.0], [2.0], [-1.0]], "sqrt requires a positive real", 2),
        ("q1^-2", [[0.0], [1.0]], "zero raised to a negative power", 0),
    ]
    for src, pts, fragment, index in cases:
        e = parse(src, ("q1",))
        pts = np.array(pts, dtype=float)
        for impl in (_exprcore, _exprcore_py):
            with pytest.raises(EvalError, match=fragment) as info:
                run_with(impl, e.program, pts, True)
            assert info.value.point_index == index


@needs_compiled
def test_error_index_is_lowest_point():
    # both failure kinds present; the report must name the lowest index
    e = parse("1/q1 + q1^-1", ("q1",))
    pts = np.array([[3.0], [1.0], [0.0], [0.0], [0.0]])
    for impl in (_exprcore, _exprcore_py):
        with pytest.raises(EvalError) as info:
            run_with(impl, e.program, pts, False)
        assert info.value.point_index == 2


def test_backend_name_reports_selection(monkeypatch):
    assert backend_name() in ("compiled", "python")


def test_python_backend_selectable(monkeypatch):
    import subprocess
    import sys

    code = (
        "import phaseq; import numpy as np; "
        "e = phaseq.parse('q1^2 + i*p1', ('q1', 'p1')); "
        "print(phaseq.backend_name(), e.evaluate((3.0, 2.0)))"
    )
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True, text=True,
        env={"PHASEQ_BACKEND": "py", "PATH": "/usr/bin:/bin"},
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.startswith("python ")
    assert "(9+2j)" in out.stdout


@needs_compiled
def test_deep_stack_program_parity():
    # heavily nested expression exercises the stack depth accounting
    src = "((((q1 + 1)^2 + p1)^2 + q2)^2 + p2)^2"
    e = parse(src, VARS)
    rng = np.random.default_rng(9)
    pts = rng.uniform(-0.5, 0.5, size=(16, 4))
    v_c, p_c = run_with(_exprcore, e.program, pts, True)
    v_py, p_py = run_with(_exprcore_py, e.program, pts, True)
    npt.assert_allclose(v_c, v_py, rtol=1e-12)
    npt.assert_allclose(p_c, p_py, rtol=1e-12)
