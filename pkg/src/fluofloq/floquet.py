"""回転座標系ハミルトニアンのFloquet状態と準エネルギー。

バックエンドは2つあります。

- モノドロミー: 1周期の時間発展演算子 U(T, 0) を固有分解します（既定）。
- Sambe: 拡張空間で打ち切ったFloquetハミルトニアンを巡回Jacobi法で対角化します（相互検証用）。
"""

import logging
from dataclasses import dataclass
from enum import IntEnum, StrEnum
from typing import Final

import numpy as np
from numpy.typing import NDArray

from . import _integrate
from .errors import FloquetDegeneracyError, SambeCutoffError
from .jacobi import jacobi_eigh
from .model import Modulation, SystemParams, effective_hamiltonian

logger = logging.getLogger(__name__)

DEFAULT_STEPS_PER_PERIOD: Final = 4096
DEFAULT_TIME_SAMPLES: Final = 256
MONODROMY_INTERVALS: Final = 64
DEGENERACY_THRESHOLD: Final = 1e-12
SAMBE_CONVERGENCE: Final = 1e-8
SAMBE_CHECK_INCREMENT: Final = 4


class Branch(IntEnum):
    """Floquet状態のラベル α = ±。配列の添字として使います。"""

    PLUS = 0
    MINUS = 1


class Backend(StrEnum):
    """Floquet状態を求めた方法。"""

    MONODROMY = "monodromy"
    SAMBE = "sambe"
    VANVLECK = "vanvleck"


@dataclass(frozen=True)
class FloquetSolution:
    """準エネルギーと周期的なFloquetモードの標本。イミュータブルです。

    Attributes:
        quasienergy_plus: ε₊。
        quasienergy_minus: ε₋。
        splitting: Δ₊₋ = ε₊ − ε₋ （0 ≤ Δ₊₋ < ω_z）。
        omega_z: 変調の基本周波数。
        time_grid: [0, T) の等間隔格子 (N_t,)。
        modes: |ũ_α(t)⟩ の標本 (2, N_t, 2)。
        backend: 計算に使ったバックエンド。
        unitarity_defect: ‖U†U − I‖_max（モノドロミーのみ）。
        quasienergy_imag: 固有値が単位円から外れた分 |Im Log(λ)/T| の最大値（モノドロミーのみ）。
    """

    quasienergy_plus: float
    quasienergy_minus: float
    splitting: float
    omega_z: float
    time_grid: NDArray[np.float64]
    modes: NDArray[np.complex128]
    backend: Backend
    unitarity_defect: float = 0.0
    quasienergy_imag: float = 0.0

    @property
    def n_time_samples(self) -> int:
        return self.time_grid.shape[0]

    @property
    def fourier_cutoff(self) -> int:
        """モードの標本から信頼できるフーリエ次数 L。"""
        return self.n_time_samples // 2 - 1

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega_z

    def mode(self, alpha: Branch) -> NDArray[np.complex128]:
        """状態 α のモード標本 (N_t, 2) を返します。"""
        return self.modes[alpha]


def _hamiltonian_generator(params: SystemParams, mod: Modulation) -> _integrate.Generator:
    return lambda t: -1.0j * effective_hamiltonian(params, mod, t)


def _check_samples(n_time_samples: int) -> None:
    if n_time_samples < 128 or n_time_samples & (n_time_samples - 1):
        raise ValueError(f"n_time_samples must be a power of two >= 128: {n_time_samples}")


def monodromy(
    params: SystemParams, mod: Modulation, steps_per_period: int = DEFAULT_STEPS_PER_PERIOD
) -> NDArray[np.complex128]:
    """1周期の時間順序付き伝搬演算子 U(T, 0) を返します。

    ユニタリ性の再規格化は行わないので、‖U†U − I‖ は収束の目安になります。
    """
    if steps_per_period < 256:
        raise ValueError(f"steps_per_period must be >= 256: {steps_per_period}")
    intervals = MONODROMY_INTERVALS if steps_per_period % MONODROMY_INTERVALS == 0 else 1
    props = _integrate.period_propagators(
        _hamiltonian_generator(params, mod), mod.period, intervals, steps_per_period, 2
    )
    return _integrate.cumulative(props)[-1]


def unitarity_defect(u: NDArray[np.complex128]) -> float:
    """‖U†U − I‖_max を返します。"""
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def _eig2(u: NDArray[np.complex128]) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """2×2 行列の固有値と正規化した固有ベクトル（列）を解析的に求めます。"""
    a, b, c, d = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    half_trace = 0.5 * (a + d)
    root = np.sqrt(half_trace * half_trace - (a * d - b * c))
    values = np.array([half_trace + root, half_trace - root])
    vectors = np.empty((2, 2), dtype=complex)
    for k, lam in enumerate(values):
        v1 = np.array([b, lam - a])
        v2 = np.array([lam - d, c])
        v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
        if np.linalg.norm(v) == 0.0:
            # U が単位行列の定数倍
            v = np.eye(2, dtype=complex)[k]
        vectors[:, k] = v / np.linalg.norm(v)
    return values, vectors


def _fix_gauge(modes: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """t = 0 で最初の非零成分が正の実数になるよう大域位相を揃えます。"""
    out = modes.copy()
    for alpha in Branch:
        first = out[alpha, 0]
        k = 0 if abs(first[0]) > 1e-8 else 1
        out[alpha] *= np.conj(first[k]) / abs(first[k])
    return out


def _label(eps: NDArray[np.float64], omega_z: float) -> tuple[int, int, float]:
    """大きい方を + とし、(+ の添字, − の添字, Δ₊₋) を返します。縮退していれば例外を送出します。"""
    plus, minus = (0, 1) if eps[0] >= eps[1] else (1, 0)
    splitting = float(eps[plus] - eps[minus])
    if min(splitting, omega_z - splitting) < DEGENERACY_THRESHOLD * omega_z:
        raise FloquetDegeneracyError(
            f"quasienergies are degenerate (splitting {splitting:.3e}); perturb the parameters slightly"
        )
    return plus, minus, splitting


def solve_floquet(
    params: SystemParams,
    mod: Modulation,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    n_time_samples: int = DEFAULT_TIME_SAMPLES,
) -> FloquetSolution:
    """モノドロミー行列の固有分解からFloquet状態を求めます。

    ε_α = (i/T)·Log(λ_α) は主値で (−ω_z/2, ω_z/2] に入り、大きい方を + とします。
    モードは |ũ_α(t)⟩ = e^{iε_α t} U(t, 0)|ψ_α(0)⟩ を格子上で評価したものです。

    Raises:
        FloquetDegeneracyError: 準エネルギー差が 1e-12·ω_z 未満の場合。
    """
    _check_samples(n_time_samples)
    if steps_per_period < 256:
        raise ValueError(f"steps_per_period must be >= 256: {steps_per_period}")
    period = mod.period
    props = _integrate.period_propagators(
        _hamiltonian_generator(params, mod), period, n_time_samples, steps_per_period, 2
    )
    chain = _integrate.cumulative(props)
    u_period = chain[-1]
    defect = unitarity_defect(u_period)

    values, vectors = _eig2(u_period)
    log_values = np.log(values)
    eps_complex = 1.0j * log_values / period
    eps = eps_complex.real
    imag = float(np.max(np.abs(eps_complex.imag)))
    plus, minus, splitting = _label(eps, mod.fundamental_freq)

    time_grid = np.arange(n_time_samples) * (period / n_time_samples)
    modes = np.empty((2, n_time_samples, 2), dtype=complex)
    for alpha, k in ((Branch.PLUS, plus), (Branch.MINUS, minus)):
        psi = chain[:-1] @ vectors[:, k]
        modes[alpha] = np.exp(1.0j * eps[k] * time_grid)[:, None] * psi
    modes = _fix_gauge(modes)

    logger.debug(
        "monodromy: eps+=%.10g eps-=%.10g splitting=%.10g defect=%.2e imag=%.2e",
        eps[plus],
        eps[minus],
        splitting,
        defect,
        imag,
    )
    return FloquetSolution(
        float(eps[plus]),
        float(eps[minus]),
        splitting,
        mod.fundamental_freq,
        time_grid,
        modes,
        Backend.MONODROMY,
        defect,
        imag,
    )


def default_harmonic_cutoff(mod: Modulation) -> int:
    """Sambe空間の既定の打ち切り次数 max(24, 2Σ|Ω_{z,k}|/ω_z + 8)。"""
    return max(24, int(np.ceil(2.0 * mod.total_amplitude / mod.fundamental_freq)) + 8)


def sambe_hamiltonian(params: SystemParams, mod: Modulation, harmonic_cutoff: int) -> NDArray[np.complex128]:
    """打ち切った拡張空間のFloquetハミルトニアン H̃ − i∂_t を返します。

    基底は |s⟩⊗e^{inω_z t} (n = −N…N, s = ↑, ↓) の順で、(n, n') ブロックは
    H_{n−n'} + nω_z δ_{nn'} です。H_q は H̃(t) のフーリエ係数です。
    """
    n_cut = harmonic_cutoff
    size = 2 * (2 * n_cut + 1)
    w = mod.fundamental_freq
    h0 = np.array(
        [[0.5 * params.detuning, 0.5 * params.omega_x], [0.5 * params.omega_x, -0.5 * params.detuning]],
        dtype=complex,
    )
    # f(t)σ_z/2 の e^{±ipω_z t} 成分は (Ω_{z,k}/4)e^{±iφ_k}σ_z
    couplings: dict[int, complex] = {}
    for h in mod.harmonics:
        couplings[h.multiple] = couplings.get(h.multiple, 0.0) + 0.25 * h.amplitude * np.exp(1.0j * h.phase)
        couplings[-h.multiple] = couplings.get(-h.multiple, 0.0) + 0.25 * h.amplitude * np.exp(-1.0j * h.phase)

    matrix = np.zeros((size, size), dtype=complex)
    for i, n in enumerate(range(-n_cut, n_cut + 1)):
        block = slice(2 * i, 2 * i + 2)
        matrix[block, block] = h0 + n * w * np.eye(2)
        for q, amp in couplings.items():
            j = i - q
            if 0 <= j < 2 * n_cut + 1:
                matrix[block, 2 * j : 2 * j + 2] += amp * np.diag([1.0, -1.0])
    return matrix


def _sambe_states(
    params: SystemParams, mod: Modulation, harmonic_cutoff: int
) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """第1ブリルアンゾーン (−ω_z/2, ω_z/2] の2つの固有値と固有ベクトルを返します。"""
    w = mod.fundamental_freq
    values, vectors = jacobi_eigh(sambe_hamiltonian(params, mod, harmonic_cutoff))
    in_zone = np.flatnonzero((values > -0.5 * w) & (values <= 0.5 * w))
    n_index = np.repeat(np.arange(-harmonic_cutoff, harmonic_cutoff + 1), 2)
    # 打ち切り端に局在した偽の状態を除くため、中心付近の重みが大きい2つを選ぶ
    central = np.abs(n_index) <= harmonic_cutoff // 2
    weights = np.array([np.sum(np.abs(vectors[central, k]) ** 2) for k in in_zone])
    if in_zone.size < 2:
        raise SambeCutoffError(f"fewer than two Sambe states in the first zone (N={harmonic_cutoff})")
    chosen = np.sort(in_zone[np.argsort(weights)[-2:]])
    return values[chosen], vectors[:, chosen]


def solve_floquet_sambe(
    params: SystemParams,
    mod: Modulation,
    harmonic_cutoff: int | None = None,
    n_time_samples: int = DEFAULT_TIME_SAMPLES,
    check_convergence: bool = True,
) -> FloquetSolution:
    """Sambe空間の数値対角化でFloquet状態を求めます。

    準エネルギーはモノドロミーと同じく (−ω_z/2, ω_z/2] に取り、大きい方を + とします。

    Raises:
        SambeCutoffError: 打ち切りを N+4 にしたとき準エネルギーが 1e-8·ω_z を超えて動いた場合。
        FloquetDegeneracyError: 準エネルギーが縮退している場合。
    """
    _check_samples(n_time_samples)
    w = mod.fundamental_freq
    if harmonic_cutoff is None:
        harmonic_cutoff = default_harmonic_cutoff(mod)
    floor = 2.0 * mod.total_amplitude / w
    if harmonic_cutoff < floor:
        raise ValueError(f"harmonic_cutoff {harmonic_cutoff} is below the truncation floor {floor:.2f}")

    eps, vectors = _sambe_states(params, mod, harmonic_cutoff)
    if check_convergence:
        eps_check, _ = _sambe_states(params, mod, harmonic_cutoff + SAMBE_CHECK_INCREMENT)
        drift = float(np.max(np.abs(eps_check - eps)))
        if drift > SAMBE_CONVERGENCE * w:
            raise SambeCutoffError(
                f"quasienergies moved by {drift:.3e} when the cutoff grew from {harmonic_cutoff}"
                f" to {harmonic_cutoff + SAMBE_CHECK_INCREMENT}"
            )
    plus, minus, splitting = _label(eps, w)

    period = mod.period
    time_grid = np.arange(n_time_samples) * (period / n_time_samples)
    harmonics = np.arange(-harmonic_cutoff, harmonic_cutoff + 1)
    phases = np.exp(1.0j * w * np.outer(time_grid, harmonics))
    modes = np.empty((2, n_time_samples, 2), dtype=complex)
    for alpha, k in ((Branch.PLUS, plus), (Branch.MINUS, minus)):
        coeffs = vectors[:, k].reshape(-1, 2)
        modes[alpha] = phases @ coeffs
        modes[alpha] /= np.linalg.norm(modes[alpha], axis=1)[:, None]
    modes = _fix_gauge(modes)

    logger.debug("sambe: N=%d eps+=%.10g eps-=%.10g", harmonic_cutoff, eps[plus], eps[minus])
    return FloquetSolution(
        float(eps[plus]), float(eps[minus]), splitting, w, time_grid, modes, Backend.SAMBE
    )
