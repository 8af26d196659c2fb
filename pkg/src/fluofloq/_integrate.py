"""固定ステップRK4による線形周期系の伝搬。

dY/dt = G(t) Y を、区間ごとの伝搬行列の積として解きます。
RK4の1ステップは Y について線形なので、区間ごとに単位行列から積分して掛け合わせても
1本の積分と丸め誤差の範囲で一致します。
"""

from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .errors import IntegrationBlowupError

Generator = Callable[[NDArray[np.float64]], NDArray[np.complex128]]


def interval_propagators(
    generator: Generator, starts: NDArray[np.float64], h: float, steps: int, dim: int
) -> NDArray[np.complex128]:
    """各開始時刻から h·steps だけ進める伝搬行列を、開始時刻についてまとめて計算します。

    Args:
        generator: 時刻の配列 (B,) から (B, dim, dim) の生成行列を返す関数。
        starts: 開始時刻 (B,)。
        h: ステップ幅。
        steps: ステップ数。
        dim: 状態空間の次元。

    Returns:
        形状 (B, dim, dim) の伝搬行列。
    """
    starts = np.asarray(starts, dtype=float)
    y = np.broadcast_to(np.eye(dim, dtype=complex), starts.shape + (dim, dim)).copy()
    half = 0.5 * h
    for i in range(steps):
        t = starts + i * h
        g_mid = generator(t + half)
        k1 = generator(t) @ y
        k2 = g_mid @ (y + half * k1)
        k3 = g_mid @ (y + half * k2)
        k4 = generator(t + h) @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y)):
        raise IntegrationBlowupError(f"non-finite propagator after {steps} RK4 steps of {h:.3e}")
    return y


def cumulative(props: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """区間伝搬行列 P_0, P_1, … から累積積 I, P_0, P_1P_0, … を返します。形状は (n+1, dim, dim) です。"""
    n, dim = props.shape[0], props.shape[-1]
    out = np.empty((n + 1, dim, dim), dtype=complex)
    out[0] = np.eye(dim)
    for k in range(n):
        out[k + 1] = props[k] @ out[k]
    return out


def period_propagators(
    generator: Generator, period: float, n_intervals: int, steps_per_period: int, dim: int
) -> NDArray[np.complex128]:
    """1周期を n_intervals 等分した区間 [t_k, t_{k+1}) の伝搬行列 (n_intervals, dim, dim) を返します。"""
    if steps_per_period % n_intervals:
        raise ValueError(f"steps_per_period ({steps_per_period}) must be a multiple of {n_intervals}")
    starts = np.arange(n_intervals) * (period / n_intervals)
    return interval_propagators(generator, starts, period / steps_per_period, steps_per_period // n_intervals, dim)
