import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from models.errors import LinearSolveError


def solve_tridiagonal(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """
    三对角方程组求解

    lower[i] 为第 i 行的次对角元 (lower[0] 不使用),
    upper[i] 为第 i 行的超对角元 (upper[-1] 不使用)
    """
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    try:
        sol = solve_banded((1, 1), ab, rhs, check_finite=False)
    except (LinAlgError, ValueError) as e:
        raise LinearSolveError(f"三对角求解失败: {e}") from e
    if not np.all(np.isfinite(sol)):
        raise LinearSolveError("三对角求解结果包含非有限值")
    return sol


def cosh_ratio(s: float, x: np.ndarray) -> np.ndarray:
    """cosh(s(1-x))/cosh(s), 大 s 时不溢出"""
    x = np.asarray(x, dtype=float)
    return np.exp(-s * x) * (1.0 + np.exp(-2.0 * s * (1.0 - x))) / (1.0 + np.exp(-2.0 * s))


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    wts = np.full(n, h)
    wts[[0, -1]] *= 0.5
    return wts


def l2_norm(values: np.ndarray, h: float) -> float:
    """[0,1] 上的离散 L² 范数 (梯形公式)"""
    return float(np.sqrt(np.dot(trapezoid_weights(values.size, h), values * values)))


def sup_norm(values: np.ndarray) -> float:
    return float(np.max(np.abs(values))) if values.size else 0.0
