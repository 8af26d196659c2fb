"""Liouville空間の厳密な時間発展によるスペクトル。

状態ベクトルは (⟨σ₊⟩, ⟨σ₋⟩, ⟨π₊⟩, ⟨π₋⟩) の順です。
周期定常状態は1周期のモノドロミー行列の固有値1の固有ベクトルから求め、
時間平均した一次相関関数は量子回帰定理で伝搬します。
"""

import logging
from dataclasses import dataclass
from typing import Final

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.signal import czt

from . import _integrate
from .errors import CorrelationWindowError, IntegrationBlowupError, MonodromyConsistencyError
from .model import Modulation, SystemParams, eval_f
from .secular import CoherentLine, Spectrum

logger = logging.getLogger(__name__)

PARITY_MATRIX: Final = np.array(
    [[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]],
    dtype=complex,
)

DEFAULT_STEPS_PER_PERIOD: Final = 4096
DEFAULT_SAMPLES: Final = 256
DEFAULT_TPRIME: Final = 32
DEFAULT_TAU_MAX: Final = 40.0
STEADY_TOLERANCE: Final = 1e-8
WINDOW_TOLERANCE: Final = 1e-6
DTFT_CHUNK: Final = 256


def liouvillian(params: SystemParams, mod: Modulation, t: ArrayLike) -> NDArray[np.complex128]:
    """マスター方程式の生成行列 L(t) を (σ₊, σ₋, π₊, π₋) 基底で返します。

    `t`が形状 (B,) の配列なら (B, 4, 4) を返します。
    """
    t = np.asarray(t, dtype=float)
    z = params.detuning + eval_f(mod, t)
    k = params.kappa
    rabi = 0.5j * params.omega_x
    out = np.zeros(t.shape + (4, 4), dtype=complex)
    out[..., 0, 0] = 1.0j * z - 0.5 * k
    out[..., 1, 1] = -1.0j * z - 0.5 * k
    out[..., 0, 2], out[..., 0, 3] = -rabi, rabi
    out[..., 1, 2], out[..., 1, 3] = rabi, -rabi
    out[..., 2, 0], out[..., 2, 1] = -rabi, rabi
    out[..., 3, 0], out[..., 3, 1] = rabi, -rabi
    out[..., 2, 2] = -k
    out[..., 3, 2] = k
    return out


def _generator(params: SystemParams, mod: Modulation) -> _integrate.Generator:
    return lambda t: liouvillian(params, mod, t)


def principal_matrix(
    params: SystemParams, mod: Modulation, t0: float, t1: float, steps: int | None = None
) -> NDArray[np.complex128]:
    """主行列解 Π(t1, t0) を固定ステップRK4で返します。

    `steps`を省略すると1周期あたり4096ステップ相当の刻みを使います。
    """
    if t1 < t0:
        raise ValueError(f"t1 must not precede t0: {t1} < {t0}")
    if t1 == t0:
        return np.eye(4, dtype=complex)
    if steps is None:
        steps = max(1, int(np.ceil((t1 - t0) / mod.period * DEFAULT_STEPS_PER_PERIOD)))
    if steps < 1:
        raise ValueError(f"steps must be positive: {steps}")
    return _integrate.interval_propagators(_generator(params, mod), np.array([t0]), (t1 - t0) / steps, steps, 4)[0]


@dataclass(frozen=True)
class SteadyState:
    """1周期分の周期定常状態。イミュータブルです。

    Attributes:
        time_grid: [0, T) の等間隔格子。
        states: 各時刻の状態ベクトル (N, 4)。
        monodromy_eigenvalue: 選んだモノドロミー固有値（理想的には1）。
    """

    time_grid: NDArray[np.float64]
    states: NDArray[np.complex128]
    monodromy_eigenvalue: complex

    @property
    def sigma_plus(self) -> NDArray[np.complex128]:
        return self.states[:, 0]

    @property
    def sigma_minus(self) -> NDArray[np.complex128]:
        return self.states[:, 1]

    @property
    def pi_plus(self) -> NDArray[np.float64]:
        return self.states[:, 2].real

    @property
    def pi_minus(self) -> NDArray[np.float64]:
        return self.states[:, 3].real

    def mean_excited_population(self) -> float:
        """周期平均した ⟨π₊⟩ を返します。"""
        return float(np.mean(self.pi_plus))

    def trace_defect(self) -> float:
        return float(np.max(np.abs(self.states[:, 2] + self.states[:, 3] - 1.0)))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.states[:, 1] - np.conj(self.states[:, 0]))))


def _period_propagators(
    params: SystemParams, mod: Modulation, steps_per_period: int, n_samples: int
) -> NDArray[np.complex128]:
    if steps_per_period < 256:
        raise ValueError(f"steps_per_period must be >= 256: {steps_per_period}")
    return _integrate.period_propagators(_generator(params, mod), mod.period, n_samples, steps_per_period, 4)


def _steady_from_propagators(props: NDArray[np.complex128], period: float) -> SteadyState:
    chain = _integrate.cumulative(props)
    values, vectors = np.linalg.eig(chain[-1])
    k = int(np.argmin(np.abs(values - 1.0)))
    distance = abs(values[k] - 1.0)
    logger.debug("steady state: monodromy eigenvalue %s (distance %.3e)", values[k], distance)
    if distance > STEADY_TOLERANCE:
        raise MonodromyConsistencyError(f"no monodromy eigenvalue within {STEADY_TOLERANCE} of 1 (closest {values[k]})")

    v = vectors[:, k] / (vectors[2, k] + vectors[3, k])
    coherence = 0.5 * (v[0] + np.conj(v[1]))
    v = np.array([coherence, np.conj(coherence), v[2].real, v[3].real], dtype=complex)
    n = props.shape[0]
    return SteadyState(np.arange(n) * (period / n), chain[:-1] @ v, complex(values[k]))


def steady_state_exact(
    params: SystemParams,
    mod: Modulation,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    n_samples: int = DEFAULT_SAMPLES,
) -> SteadyState:
    """周期定常状態を求めます。

    Raises:
        MonodromyConsistencyError: モノドロミー行列の固有値が1から 1e-8 より離れている場合。
    """
    props = _period_propagators(params, mod, steps_per_period, n_samples)
    return _steady_from_propagators(props, mod.period)


@dataclass(frozen=True)
class CorrelationTrace:
    """時間平均した一次相関関数 ḡ₁(τ)。イミュータブルです。

    Attributes:
        tau_grid: 遅延時間 τ の格子。
        g1: ḡ₁(τ)。
        g1_coherent: 定常値の積で与えられる周期的な漸近形。
        g1_incoherent: g1 − g1_coherent。
        omega_z: 変調の基本周波数。
        sigma_plus_harmonics: 定常状態 ⟨σ₊(t)⟩ のフーリエ係数（numpyのFFT順）。
        steady: 相関の計算に使った周期定常状態。
    """

    tau_grid: NDArray[np.float64]
    g1: NDArray[np.complex128]
    g1_coherent: NDArray[np.complex128]
    g1_incoherent: NDArray[np.complex128]
    omega_z: float
    sigma_plus_harmonics: NDArray[np.complex128]
    steady: SteadyState

    @property
    def tau_step(self) -> float:
        return float(self.tau_grid[1] - self.tau_grid[0])

    def imaginary_ratio(self) -> float:
        """max_τ |Im ḡ₁(τ)| / ḡ₁(0) を返します。"""
        scale = abs(self.g1[0])
        return float(np.max(np.abs(self.g1.imag)) / scale) if scale else 0.0

    def coherent_lines(self) -> tuple[CoherentLine, ...]:
        """周期的な漸近形のフーリエ級数から Δ = lω_z のデルタ線の重み π|a_l|² を返します。"""
        n = self.sigma_plus_harmonics.shape[0]
        ls = np.fft.fftfreq(n, 1.0 / n).astype(int)
        weights = np.pi * np.abs(self.sigma_plus_harmonics) ** 2
        cut = 1e-12 * float(np.max(weights, initial=0.0))
        order = np.argsort(ls)
        return tuple(
            CoherentLine(float(ls[i] * self.omega_z), float(weights[i]), int(ls[i]))
            for i in order
            if weights[i] > cut and abs(ls[i]) < n // 2
        )


def correlation(
    params: SystemParams,
    mod: Modulation,
    n_tprime: int = DEFAULT_TPRIME,
    tau_max: float = DEFAULT_TAU_MAX,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    n_samples: int = DEFAULT_SAMPLES,
) -> CorrelationTrace:
    """量子回帰定理で ḡ₁(τ) = (1/T)∫⟨σ₊(t′+τ)σ₋(t′)⟩dt′ を計算します。

    開始時刻 t′ は1周期を n_tprime 等分した点で、各点から
    g⃗(t′, t′) = (⟨π₊(t′)⟩, 0, 0, ⟨σ₋(t′)⟩) を同じ L(t) で伝搬します。
    τ の刻みは T/n_samples です。

    Raises:
        CorrelationWindowError: 最後の1周期で |g1_incoherent| が 1e-6·|ḡ₁(0)| を超える場合。
    """
    if n_tprime < 16:
        raise ValueError(f"n_tprime must be >= 16: {n_tprime}")
    if n_samples % n_tprime:
        raise ValueError(f"n_tprime ({n_tprime}) must divide n_samples ({n_samples})")
    if tau_max < 10.0 / params.kappa:
        raise ValueError(f"tau_max must be >= 10/kappa: {tau_max}")

    props = _period_propagators(params, mod, steps_per_period, n_samples)
    steady = _steady_from_propagators(props, mod.period)
    period = mod.period
    stride = n_samples // n_tprime
    starts = np.arange(n_tprime) * stride
    n_steps = int(np.ceil(tau_max / period * n_samples))

    g = np.zeros((n_tprime, 4), dtype=complex)
    g[:, 0] = steady.pi_plus[starts]
    g[:, 3] = steady.sigma_minus[starts]
    s_plus, s_minus = steady.sigma_plus, steady.sigma_minus[starts]

    g1 = np.empty(n_steps + 1, dtype=complex)
    g_coh = np.empty(n_steps + 1, dtype=complex)
    for n in range(n_steps + 1):
        index = (starts + n) % n_samples
        g1[n] = np.mean(g[:, 0])
        g_coh[n] = np.mean(s_plus[index] * s_minus)
        if n < n_steps:
            g = np.einsum("kij,kj->ki", props[index], g)
    if not np.all(np.isfinite(g1)):
        raise IntegrationBlowupError("correlation propagation produced non-finite values")

    tau = np.arange(n_steps + 1) * (period / n_samples)
    g_inc = g1 - g_coh
    tail = float(np.max(np.abs(g_inc[tau >= tau[-1] - period])))
    logger.debug("correlation: %d tau steps, g1(0)=%.10g, tail %.3e", n_steps, g1[0].real, tail)
    if tail > WINDOW_TOLERANCE * abs(g1[0]):
        raise CorrelationWindowError(
            f"incoherent correlation has not decayed by tau_max={tau_max} (tail {tail:.3e})", 2.0 * tau_max
        )
    harmonics = np.fft.fft(s_plus) / n_samples
    return CorrelationTrace(tau, g1, g_coh, g_inc, mod.fundamental_freq, harmonics, steady)


def _uniform_step(grid: NDArray[np.float64]) -> float | None:
    if grid.shape[0] < 2:
        return None
    steps = np.diff(grid)
    return float(steps[0]) if np.allclose(steps, steps[0], rtol=1e-10, atol=0.0) else None


def exact_spectrum(trace: CorrelationTrace, grid: ArrayLike, apodization: float = 0.0) -> Spectrum:
    """S_inc(Δ) = Re ∫₀^{τmax} g1_incoherent(τ) e^{−iΔτ} dτ を台形則で評価します。

    等間隔の格子にはchirp z変換を使い、それ以外は格子をいくつかに分けて直接和を取ります。
    `apodization` η > 0 なら e^{−ητ} の窓をかけます。
    """
    grid = np.asarray(grid, dtype=float)
    if apodization < 0.0:
        raise ValueError(f"apodization must be non-negative: {apodization}")
    tau = trace.tau_grid
    h = trace.tau_step
    weighted = trace.g1_incoherent * h
    weighted[0] *= 0.5
    weighted[-1] *= 0.5
    if apodization:
        weighted = weighted * np.exp(-apodization * tau)

    step = _uniform_step(grid)
    if step is not None:
        # X_k = Σ_n w_n e^{−i(Δ₀ + k·dΔ)τ_n}
        values = czt(weighted, grid.shape[0], np.exp(-1.0j * step * h), np.exp(1.0j * grid[0] * h))
    else:
        values = np.empty(grid.shape[0], dtype=complex)
        for lo in range(0, grid.shape[0], DTFT_CHUNK):
            block = grid[lo : lo + DTFT_CHUNK]
            values[lo : lo + DTFT_CHUNK] = np.exp(-1.0j * np.outer(block, tau)) @ weighted
    return Spectrum(grid, values.real, trace.coherent_lines(), (), "exact")


@dataclass(frozen=True)
class ParityChain:
    """一般化パリティの各段の残差。イミュータブルです。

    Attributes:
        liouvillian_residual: max_t |T L(t+T/2) T − L(t)|。
        steady_state_residual: max_t |T ρ⃗(t+T/2) + ρ⃗(t)|。
        propagator_residual: max |T Π(t+T/2, t′+T/2) T − Π(t, t′)|（t − t′ = T/2）。
    """

    liouvillian_residual: float
    steady_state_residual: float
    propagator_residual: float

    @property
    def max_residual(self) -> float:
        return max(self.liouvillian_residual, self.steady_state_residual, self.propagator_residual)

    def passes(self, tol: float = 1e-8) -> bool:
        return self.max_residual < tol


def parity_chain(
    params: SystemParams,
    mod: Modulation,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    n_samples: int = DEFAULT_SAMPLES,
) -> ParityChain:
    """生成行列・定常状態・主行列解のパリティ関係の残差をまとめて返します。"""
    period = mod.period
    t = np.arange(n_samples) * (period / n_samples)
    shifted = PARITY_MATRIX @ liouvillian(params, mod, t + 0.5 * period) @ PARITY_MATRIX
    l_residual = float(np.max(np.abs(shifted - liouvillian(params, mod, t))))

    props = _period_propagators(params, mod, steps_per_period, n_samples)
    steady = _steady_from_propagators(props, period)
    half = n_samples // 2
    states = steady.states
    s_residual = float(np.max(np.abs(np.roll(states, -half, axis=0) @ PARITY_MATRIX.T + states)))

    chain = _integrate.cumulative(props)
    monodromy = chain[-1]
    p_residual = 0.0
    for k in range(half):
        # Π(t_k + T/2, t_k) と Π(t_k + T, t_k + T/2)
        first = np.linalg.solve(chain[k].T, chain[k + half].T).T
        second = np.linalg.solve(chain[k + half].T, (chain[k] @ monodromy).T).T
        p_residual = max(p_residual, float(np.max(np.abs(PARITY_MATRIX @ second @ PARITY_MATRIX - first))))

    logger.debug("parity chain: L %.3e, steady %.3e, propagator %.3e", l_residual, s_residual, p_residual)
    return ParityChain(l_residual, s_residual, p_residual)


def exact_route(
    params: SystemParams,
    mod: Modulation,
    grid: ArrayLike,
    n_tprime: int = DEFAULT_TPRIME,
    tau_max: float = DEFAULT_TAU_MAX,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    n_samples: int = DEFAULT_SAMPLES,
    apodization: float = 0.0,
) -> tuple[Spectrum, CorrelationTrace]:
    """定常状態・相関関数・スペクトルを続けて計算します。"""
    trace = correlation(params, mod, n_tprime, tau_max, steps_per_period, n_samples)
    return exact_spectrum(trace, grid, apodization), trace
