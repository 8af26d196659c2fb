"""永年近似による共鳴蛍光スペクトル。

緩和率・位相緩和率とFloquet状態の定常占有率から、3系統のローレンツ線とデルタ線（コヒーレント成分）を組み立てます。
スペクトル全体の比例定数は1に固定しています。
"""

import logging
import warnings
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Final

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import trapezoid
from scipy.signal import find_peaks

from .elements import TransitionElements
from .errors import NoRelaxationError, SecularValidityWarning
from .floquet import Branch, FloquetSolution

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS: Final = 8001
DEFAULT_GRID_EXTENT: Final = 4.0
LINE_RETENTION: Final = 1e-12
SECULAR_MARGIN: Final = 10.0


@dataclass(frozen=True)
class SecularRates:
    """永年近似のレートと定常占有率。イミュータブルです。"""

    gamma_rel: float
    gamma_deph: float
    gamma_s: float
    rho_pp_ss: float
    rho_mm_ss: float


class LineFamily(StrEnum):
    """ローレンツ線の系統。"""

    CENTRAL = "central"
    UPPER_SIDEBAND = "upper_sideband"
    LOWER_SIDEBAND = "lower_sideband"


@dataclass(frozen=True)
class SpectralLine:
    """ローレンツ線 weight·Γ/(Γ² + (Δ − position)²) の1本。

    格子全体で積分すると π·weight になります。
    """

    position: float
    weight: float
    width: float
    family: LineFamily
    harmonic: int

    def profile(self, delta: ArrayLike) -> NDArray[np.float64]:
        x = np.asarray(delta, dtype=float) - self.position
        return self.weight * self.width / (self.width * self.width + x * x)

    def weight_between(self, lower: float, upper: float) -> float:
        """[lower, upper] に入る積分強度を解析的に返します。"""
        return self.weight * float(
            np.arctan((upper - self.position) / self.width) - np.arctan((lower - self.position) / self.width)
        )


@dataclass(frozen=True)
class CoherentLine:
    """デルタ線 weight·δ(Δ − position)。"""

    position: float
    weight: float
    harmonic: int


@dataclass(frozen=True)
class Spectrum:
    """非コヒーレント連続成分とデルタ線の表。イミュータブルです。

    Attributes:
        delta_grid: 離調 Δ の格子。
        s_inc: 非コヒーレント成分のスペクトル密度。
        coherent_lines: デルタ線の表。格子には書き込みません。
        line_table: ローレンツ線の表（永年近似の経路のみ）。
        route: 計算経路の名前。
    """

    delta_grid: NDArray[np.float64]
    s_inc: NDArray[np.float64]
    coherent_lines: tuple[CoherentLine, ...] = ()
    line_table: tuple[SpectralLine, ...] = ()
    route: str = field(default="")

    def is_symmetric_grid(self) -> bool:
        grid = self.delta_grid
        return bool(np.allclose(grid, -grid[::-1], rtol=0.0, atol=1e-12 * max(1.0, float(np.max(np.abs(grid))))))

    def asymmetry(self) -> float:
        """非対称度 A = Σ|S(Δ) − S(−Δ)| / Σ|S(Δ) + S(−Δ)| を返します。

        Raises:
            ValueError: 格子が Δ = 0 について対称でない場合。
        """
        if not self.is_symmetric_grid():
            raise ValueError("asymmetry needs a grid that is symmetric about zero")
        s = self.s_inc
        denominator = float(np.sum(np.abs(s + s[::-1])))
        if denominator == 0.0:
            return 0.0
        return float(np.sum(np.abs(s - s[::-1]))) / denominator

    def window_weight(self, center: float, half_width: float) -> float:
        """[center − half_width, center + half_width] の非コヒーレント成分を台形則で積分します。"""
        mask = np.abs(self.delta_grid - center) <= half_width
        if np.count_nonzero(mask) < 2:
            raise ValueError(f"window around {center} holds fewer than two grid points")
        return float(trapezoid(self.s_inc[mask], self.delta_grid[mask]))

    def total_incoherent_weight(self) -> float:
        return float(trapezoid(self.s_inc, self.delta_grid))

    def peak_positions(self, prominence: float = 1e-3) -> NDArray[np.float64]:
        """最大値に対する相対プロミネンスが`prominence`以上の極大の位置を返します。"""
        top = float(np.max(self.s_inc, initial=0.0))
        if top <= 0.0:
            return np.empty(0)
        peaks, _ = find_peaks(self.s_inc, prominence=prominence * top)
        return self.delta_grid[peaks]

    def line_weight_total(self) -> float:
        """ローレンツ線の係数の和とデルタ線の重み/π の和を返します。"""
        return sum(line.weight for line in self.line_table) + sum(c.weight for c in self.coherent_lines) / np.pi

    def analytic_window_weight(self, lower: float, upper: float) -> float:
        """線の表から [lower, upper] に入る非コヒーレント成分の積分強度を返します。"""
        return sum(line.weight_between(lower, upper) for line in self.line_table)


def symmetric_grid(extent: float, points: int = DEFAULT_GRID_POINTS) -> NDArray[np.float64]:
    """[−extent, extent] の等間隔格子を、Δ ↔ −Δ で正確に対称になるように作ります。"""
    if points < 3 or points % 2 == 0:
        raise ValueError(f"points must be an odd integer >= 3: {points}")
    if not extent > 0.0:
        raise ValueError(f"extent must be positive: {extent}")
    half = np.linspace(0.0, extent, (points + 1) // 2)
    return np.concatenate((-half[:0:-1], half))


def default_grid(omega_z: float) -> NDArray[np.float64]:
    """既定の格子 Δ ∈ [−4ω_z, 4ω_z]、8001点を返します。"""
    return symmetric_grid(DEFAULT_GRID_EXTENT * omega_z, DEFAULT_GRID_POINTS)


def _weights(elems: TransitionElements) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    x = np.abs(elems.x_plus) ** 2
    return x[Branch.PLUS, Branch.PLUS], x[Branch.PLUS, Branch.MINUS], x[Branch.MINUS, Branch.PLUS]


def rates(elems: TransitionElements, kappa: float) -> SecularRates:
    """緩和率 Γ_rel、位相緩和率 Γ_deph、Γ_s と定常占有率 ρ̃^{ss}_{++} = Γ_s/Γ_rel を返します。

    Raises:
        NoRelaxationError: Γ_rel < 1e-14·κ の場合。
    """
    pp, pm, mp = _weights(elems)
    gamma_rel = kappa * float(np.sum(pm + mp))
    gamma_deph = 0.5 * kappa * float(np.sum(pm + mp + 4.0 * pp))
    gamma_s = kappa * float(np.sum(mp))
    if gamma_rel < 1e-14 * kappa:
        raise NoRelaxationError(f"relaxation rate {gamma_rel:.3e} vanishes; the secular route does not apply")
    rho_pp = gamma_s / gamma_rel
    logger.debug("rates: rel=%.10g deph=%.10g s=%.10g rho++=%.10g", gamma_rel, gamma_deph, gamma_s, rho_pp)
    return SecularRates(gamma_rel, gamma_deph, gamma_s, rho_pp, 1.0 - rho_pp)


def secular_spectrum(
    elems: TransitionElements,
    rates: SecularRates,
    splitting: float,
    omega_z: float,
    grid: ArrayLike,
    route: str = "secular",
) -> Spectrum:
    """永年近似のスペクトルを組み立てます。

    - Δ = lω_z に幅 Γ_rel、係数 4|x_{++,l}|²ρ_{++}ρ_{−−} の中心線
    - Δ = lω_z + Δ₊₋ に幅 Γ_deph、係数 |x_{+−,l}|²ρ_{++} の側帯
    - Δ = lω_z − Δ₊₋ に幅 Γ_deph、係数 |x_{−+,l}|²ρ_{−−} の側帯
    - Δ = lω_z に重み π|x_{++,l}|²(ρ_{++} − ρ_{−−})² のデルタ線
    """
    grid = np.asarray(grid, dtype=float)
    widest = max(rates.gamma_rel, rates.gamma_deph)
    if splitting <= SECULAR_MARGIN * widest:
        warnings.warn(
            f"quasienergy splitting {splitting:.4g} is not large compared with the rates ({widest:.4g})",
            SecularValidityWarning,
            stacklevel=2,
        )

    pp, pm, mp = _weights(elems)
    rho_pp, rho_mm = rates.rho_pp_ss, rates.rho_mm_ss
    families = (
        (LineFamily.CENTRAL, 4.0 * pp * rho_pp * rho_mm, 0.0, rates.gamma_rel),
        (LineFamily.UPPER_SIDEBAND, pm * rho_pp, splitting, rates.gamma_deph),
        (LineFamily.LOWER_SIDEBAND, mp * rho_mm, -splitting, rates.gamma_deph),
    )
    coherent = np.pi * pp * (rho_pp - rho_mm) ** 2
    largest = max(float(np.max(w)) for _, w, _, _ in families)
    cut = LINE_RETENTION * max(largest, float(np.max(coherent)))

    lines = []
    for family, weights, offset, width in families:
        for l, weight in zip(elems.harmonics, weights):
            if weight > cut:
                lines.append(SpectralLine(float(l * omega_z + offset), float(weight), width, family, int(l)))
    coherent_lines = tuple(
        CoherentLine(float(l * omega_z), float(w), int(l)) for l, w in zip(elems.harmonics, coherent) if w > cut
    )

    s_inc = np.zeros_like(grid)
    for line in lines:
        s_inc += line.profile(grid)
    return Spectrum(grid, s_inc, coherent_lines, tuple(lines), route)


def excited_population(sol: FloquetSolution, rates: SecularRates) -> float:
    """永年近似の定常状態が与える周期平均の励起状態占有率 ⟨π₊⟩ を返します。

    Floquet基底のコヒーレンスは永年近似では0なので、対角成分だけから組み立てます。
    """
    up = np.abs(sol.modes[..., 0]) ** 2
    return float(rates.rho_pp_ss * np.mean(up[Branch.PLUS]) + rates.rho_mm_ss * np.mean(up[Branch.MINUS]))
