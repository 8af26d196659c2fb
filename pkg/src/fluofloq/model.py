"""物理パラメーター、変調波形、回転座標系ハミルトニアン、一般化パリティの判定。

単位は κ = 1 です。周波数・レートは κ、時間は 1/κ 単位で扱います。
"""

import logging
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Final

import numpy as np
from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)

# {|↑⟩, |↓⟩} 基底
SIGMA_X: Final = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y: Final = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z: Final = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_PLUS: Final = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_MINUS: Final = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)

PARITY_GRID_POINTS: Final = 4096


@dataclass(frozen=True)
class SystemParams:
    """二準位系のパラメーター。イミュータブルです。

    Attributes:
        omega_x: 駆動強度 Ω_x。
        detuning: 離調 δ = ω₀ − ω_x。
        kappa: 放射減衰率 κ。
    """

    omega_x: float
    detuning: float = 0.0
    kappa: float = 1.0

    def __post_init__(self) -> None:
        if not self.kappa > 0.0:
            raise ValueError(f"kappa must be positive: {self.kappa}")
        if self.omega_x < 0.0:
            raise ValueError(f"omega_x must be non-negative: {self.omega_x}")


@dataclass(frozen=True)
class Harmonic:
    """変調の1成分 Ω_{z,k} cos(p_k ω_z t + φ_k)。"""

    multiple: int
    amplitude: float
    phase: float = 0.0

    def __post_init__(self) -> None:
        if int(self.multiple) != self.multiple or self.multiple < 1:
            # 定数項は離調に含めてください
            raise ValueError(f"harmonic multiple must be a positive integer: {self.multiple}")


@dataclass(frozen=True)
class Modulation:
    """周期 T = 2π/ω_z の変調 f(t) = Σ_k Ω_{z,k} cos(p_k ω_z t + φ_k)。イミュータブルです。

    定数成分を持たないので時間平均は常に0です。
    """

    fundamental_freq: float
    harmonics: tuple[Harmonic, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.fundamental_freq > 0.0:
            raise ValueError(f"fundamental_freq must be positive: {self.fundamental_freq}")
        object.__setattr__(self, "harmonics", tuple(self.harmonics))

    @staticmethod
    def unmodulated(fundamental_freq: float) -> "Modulation":
        """f ≡ 0 の変調を返します。ω_z は周期の定義にだけ使われます。"""
        return Modulation(fundamental_freq, ())

    @staticmethod
    def biharmonic(
        fundamental_freq: float, amplitude: float, p: int, r: float = 1.0, phi: float = 0.0
    ) -> "Modulation":
        """二倍波変調 f(t) = Ω_z[cos(ω_z t) + r cos(p ω_z t + φ)] を返します。"""
        if p < 2:
            raise ValueError(f"p must be >= 2 for a biharmonic modulation: {p}")
        return Modulation(fundamental_freq, (Harmonic(1, amplitude, 0.0), Harmonic(p, r * amplitude, phi)))

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.fundamental_freq

    @property
    def total_amplitude(self) -> float:
        """Σ_k |Ω_{z,k}|。"""
        return float(sum(abs(h.amplitude) for h in self.harmonics))

    def __call__(self, t: ArrayLike) -> NDArray[np.float64]:
        return eval_f(self, t)

    def phase_integral(self, t: ArrayLike) -> NDArray[np.float64]:
        """Φ(t) = ∫₀ᵗ f(t')dt' を返します。周期関数です。"""
        t = np.asarray(t, dtype=float)
        w = self.fundamental_freq
        phi = np.zeros_like(t)
        for h in self.harmonics:
            phi = phi + h.amplitude / (h.multiple * w) * (np.sin(h.multiple * w * t + h.phase) - np.sin(h.phase))
        return phi

    def biharmonic_form(self) -> tuple[float, float, int, float] | None:
        """(Ω_z, r, p, φ) の閉じた形で書ける場合はその組を、そうでなければ`None`を返します。

        基本波の位相が0であることが条件です。単一調和波は r = 0 として扱います。
        """
        match self.harmonics:
            case (Harmonic(multiple=1, amplitude=a, phase=0.0),) if a != 0.0:
                return a, 0.0, 2, 0.0
            case (Harmonic(multiple=1, amplitude=a, phase=0.0), Harmonic(multiple=p, amplitude=b, phase=phi)) if (
                a != 0.0 and p >= 2
            ):
                return a, b / a, int(p), phi
            case _:
                return None


class ParityCase(StrEnum):
    """一般化パリティ条件の分類。"""

    PARITY = "parity"
    DETUNED_ONLY = "detuned_only"
    WAVEFORM_ONLY = "waveform_only"
    BOTH_BROKEN = "both_broken"


@dataclass(frozen=True)
class ParityClass:
    """一般化パリティ判定の結果。イミュータブルです。"""

    has_generalized_parity: bool
    case_label: ParityCase
    waveform_residual: float
    detuning_residual: float
    tolerance: float


def eval_f(mod: Modulation, t: ArrayLike) -> NDArray[np.float64]:
    """f(t) = Σ_k Ω_{z,k} cos(p_k ω_z t + φ_k) を返します。`t`は配列でも構いません。"""
    t = np.asarray(t, dtype=float)
    value = np.zeros_like(t)
    for h in mod.harmonics:
        value = value + h.amplitude * np.cos(h.multiple * mod.fundamental_freq * t + h.phase)
    return value


def effective_hamiltonian(params: SystemParams, mod: Modulation, t: ArrayLike) -> NDArray[np.complex128]:
    """回転座標系のハミルトニアン H̃(t) = (Ω_x/2)σ_x + ½[δ + f(t)]σ_z を返します。

    `t`がスカラーなら 2×2、形状 (B,) の配列なら (B, 2, 2) の行列を返します。
    """
    t = np.asarray(t, dtype=float)
    z = 0.5 * (params.detuning + eval_f(mod, t))
    h = np.empty(t.shape + (2, 2), dtype=complex)
    h[..., 0, 0] = z
    h[..., 1, 1] = -z
    h[..., 0, 1] = 0.5 * params.omega_x
    h[..., 1, 0] = 0.5 * params.omega_x
    return h


def default_parity_tolerance(params: SystemParams, mod: Modulation) -> float:
    """既定の判定許容誤差 1e-9·(|δ| + Σ|Ω_{z,k}| + ω_z) を返します。"""
    return 1e-9 * (abs(params.detuning) + mod.total_amplitude + mod.fundamental_freq)


def classify_parity(params: SystemParams, mod: Modulation, tol: float | None = None) -> ParityClass:
    """δ + f(t) = −[δ + f(t+T/2)] が成り立つかどうかを判定します。

    f の時間平均は0なので、条件は δ = 0 かつ f(t) = −f(t+T/2) と同値です。
    後者は1周期あたり4096点の格子で評価します。
    """
    if tol is None:
        tol = default_parity_tolerance(params, mod)
    if not tol > 0.0:
        raise ValueError(f"tol must be positive: {tol}")

    t = np.arange(PARITY_GRID_POINTS) * (mod.period / PARITY_GRID_POINTS)
    waveform_residual = float(np.max(np.abs(eval_f(mod, t) + eval_f(mod, t + 0.5 * mod.period)), initial=0.0))
    detuning_residual = abs(params.detuning)

    waveform_ok = waveform_residual <= tol
    detuning_ok = detuning_residual <= tol
    match waveform_ok, detuning_ok:
        case True, True:
            case_label = ParityCase.PARITY
        case True, False:
            case_label = ParityCase.DETUNED_ONLY
        case False, True:
            case_label = ParityCase.WAVEFORM_ONLY
        case _:
            case_label = ParityCase.BOTH_BROKEN

    logger.debug(
        "parity: %s (waveform %.3e, detuning %.3e, tol %.3e)",
        case_label,
        waveform_residual,
        detuning_residual,
        tol,
    )
    return ParityClass(case_label is ParityCase.PARITY, case_label, waveform_residual, detuning_residual, tol)
