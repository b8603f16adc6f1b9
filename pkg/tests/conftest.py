import numpy as np
import pytest

from coprelax.model import ETRProblem


def example_51_problem() -> ETRProblem:
    """min 0.5 x1^2 + 2 x1 x2 + x2^2  s.t.  x >= 0."""
    return ETRProblem(
        n=2,
        Q0=np.array([[0.5, 1.0], [1.0, 1.0]]),
        q0=np.zeros(2),
        Q1=np.zeros((2, 2)),
        q1=np.zeros(2),
        A=np.zeros((0, 2)),
        a=np.zeros(0),
        B=-np.eye(2),
        b=np.zeros(2),
    )


def cdt_remark_problem() -> ETRProblem:
    """min 2 x1^2 - 2 x2^2  s.t.  ||x|| <= 1, -x1 <= 0 (vacuous second ball)."""
    return ETRProblem(
        n=2,
        Q0=np.diag([2.0, -2.0]),
        q0=np.zeros(2),
        Q1=np.eye(2),
        q1=np.zeros(2),
        A=np.zeros((2, 2)),
        a=np.zeros(2),
        B=np.array([[-1.0, 0.0]]),
        b=np.zeros(1),
    )


@pytest.fixture
def example_51() -> ETRProblem:
    return example_51_problem()


@pytest.fixture
def cdt_remark() -> ETRProblem:
    return cdt_remark_problem()
