"""時間平均した遷移行列要素 x^{(±)}_{αβ,l} と一般化パリティの解析。"""

import logging
from dataclasses import dataclass, replace
from typing import Final

import numpy as np
from numpy.typing import NDArray

from .errors import AliasingError
from .floquet import Backend, Branch, FloquetSolution
from .model import Modulation, ParityClass, SystemParams, default_parity_tolerance

logger = logging.getLogger(__name__)

DEFAULT_L_MAX: Final = 16
ALIASING_TOLERANCE: Final = 1e-6
LAMBDA_TOLERANCE: Final = 1e-8


@dataclass(frozen=True)
class TransitionElements:
    """遷移行列要素の表。イミュータブルです。

    `x_plus[α, β, l + l_max]` が x^{(+)}_{αβ,l}、`x_minus` が x^{(−)}_{αβ,l} です。

    Attributes:
        l_max: 保持するフーリエ次数の上限。
        x_plus: 形状 (2, 2, 2·l_max+1) の σ₊ の要素。
        x_minus: 同じ形状の σ₋ の要素。
        n_time_samples: 元になったモードの時間格子点数（解析解では0）。
        backend: 元になったFloquet状態の計算方法。
    """

    l_max: int
    x_plus: NDArray[np.complex128]
    x_minus: NDArray[np.complex128]
    n_time_samples: int
    backend: Backend

    @property
    def harmonics(self) -> NDArray[np.int_]:
        """l = −l_max…l_max を返します。"""
        return np.arange(-self.l_max, self.l_max + 1)

    def element(self, alpha: Branch, beta: Branch, l: int) -> complex:
        """x^{(+)}_{αβ,l} を返します。範囲外の l は0です。"""
        if abs(l) > self.l_max:
            return 0j
        return complex(self.x_plus[alpha, beta, l + self.l_max])

    def parseval(self) -> float:
        """Σ_{α,β,l} |x^{(+)}_{αβ,l}|² を返します。完全系なら1です。"""
        return float(np.sum(np.abs(self.x_plus) ** 2))

    def mirrored(self) -> NDArray[np.complex128]:
        """[x^{(+)}_{βα,−l}]* を x_plus と同じ並びで返します。"""
        return np.conj(self.x_plus.transpose(1, 0, 2)[..., ::-1])

    def conjugation_residual(self) -> float:
        """max |x^{(+)}_{αβ,l} − [x^{(−)}_{βα,−l}]*| を返します。"""
        return float(np.max(np.abs(self.x_plus - np.conj(self.x_minus.transpose(1, 0, 2)[..., ::-1]))))


@dataclass(frozen=True)
class ParityReport:
    """一般化パリティの解析結果。イミュータブルです。

    λ は残差が閾値を下回り、かつパリティ条件が成り立つときだけ ±1 に丸めて格納し、
    それ以外は`None`です。

    Attributes:
        lambda_plus: λ₊。
        lambda_minus: λ₋。
        lambda_residual: max_t ‖σ_x|ũ_α(t+T/2)⟩ − λ_α|ũ_α(t)⟩‖。
        signed_mirror_residual: max |x_{αβ,l} − (−1)^l λ_αλ_β [x_{βα,−l}]*|。λ が未定義なら`None`。
        modulus_mirror_residual: max ||x_{αβ,l}| − |x_{βα,−l}||。
        even_harmonic_residuals: p が偶数で δ = 0, φ = (n+½)π のときの2つの関係式の残差。
    """

    lambda_plus: float | None
    lambda_minus: float | None
    lambda_residual: float
    signed_mirror_residual: float | None = None
    modulus_mirror_residual: float | None = None
    even_harmonic_residuals: tuple[float, float] | None = None

    @property
    def has_lambdas(self) -> bool:
        return self.lambda_plus is not None and self.lambda_minus is not None

    def to_dict(self) -> dict[str, object]:
        return {
            "lambda_plus": self.lambda_plus,
            "lambda_minus": self.lambda_minus,
            "lambda_residual": self.lambda_residual,
            "signed_mirror_residual": self.signed_mirror_residual,
            "modulus_mirror_residual": self.modulus_mirror_residual,
            "even_harmonic_residuals": (
                None if self.even_harmonic_residuals is None else list(self.even_harmonic_residuals)
            ),
        }


def _fourier(samples: NDArray[np.complex128], l_max: int) -> tuple[NDArray[np.complex128], float]:
    """周期標本のフーリエ係数 (|l| ≤ l_max) と |l| > l_max−2 のエネルギーを返します。"""
    n = samples.shape[0]
    coeffs = np.fft.fft(samples) / n
    ls = np.fft.fftfreq(n, 1.0 / n).astype(int)
    tail = float(np.sum(np.abs(coeffs[np.abs(ls) > l_max - 2]) ** 2))
    return coeffs[np.arange(-l_max, l_max + 1) % n], tail


def transition_elements(sol: FloquetSolution, l_max: int = DEFAULT_L_MAX) -> TransitionElements:
    """Floquetモードから x^{(±)}_{αβ,l} を計算します。

    ⟨ũ_α(t)|σ_±|ũ_β(t)⟩ を時間格子上で離散フーリエ変換し、e^{ilω_z t} の係数を取り出します。

    Raises:
        ValueError: l_max がモードのフーリエ打ち切りを超える場合。
        AliasingError: |l| > l_max−2 に全体の 1e-6 を超えるエネルギーが残る場合。
    """
    if not 0 < l_max <= sol.fourier_cutoff:
        raise ValueError(f"l_max must be in [1, {sol.fourier_cutoff}]: {l_max}")
    up, down = sol.modes[..., 0], sol.modes[..., 1]
    x_plus = np.empty((2, 2, 2 * l_max + 1), dtype=complex)
    x_minus = np.empty_like(x_plus)
    tail = 0.0
    for alpha in Branch:
        for beta in Branch:
            x_plus[alpha, beta], tail_plus = _fourier(np.conj(up[alpha]) * down[beta], l_max)
            x_minus[alpha, beta], tail_minus = _fourier(np.conj(down[alpha]) * up[beta], l_max)
            tail += tail_plus + tail_minus
    # σ₊ と σ₋ はそれぞれノルム1なので全エネルギーは2
    if tail > 2.0 * ALIASING_TOLERANCE:
        raise AliasingError(f"{tail / 2.0:.3e} of the spectral energy lies beyond |l| = {l_max - 2}; raise l_max")
    return TransitionElements(l_max, x_plus, x_minus, sol.n_time_samples, sol.backend)


def parity_eigenvalues(sol: FloquetSolution, parity: ParityClass) -> ParityReport:
    """σ_x|ũ_α(t+T/2)⟩ = λ_α|ũ_α(t)⟩ の λ_α と残差を求めます。

    λ_α は ⟨ũ_α(t)|σ_x|ũ_α(t+T/2)⟩ の時間平均です。半周期のずれは格子の添字で正確に取ります。
    """
    n = sol.n_time_samples
    if n % 2:
        raise ValueError(f"an even number of time samples is required: {n}")
    lambdas: list[float | None] = []
    residual = 0.0
    for alpha in Branch:
        mode = sol.mode(alpha)
        flipped = np.roll(mode, -n // 2, axis=0)[:, ::-1]
        estimate = np.mean(np.sum(np.conj(mode) * flipped, axis=1))
        residual = max(residual, float(np.max(np.linalg.norm(flipped - estimate * mode, axis=1))))
        lambdas.append(float(np.sign(estimate.real)) if estimate.real else None)

    if not (parity.has_generalized_parity and residual < LAMBDA_TOLERANCE):
        lambdas = [None, None]
    logger.debug("parity eigenvalues: %s (residual %.3e)", lambdas, residual)
    return ParityReport(lambdas[0], lambdas[1], residual)


def _even_harmonic_phase(params: SystemParams, mod: Modulation) -> float | None:
    """偶数 p の関係式が成り立つ条件なら θ₀ を、そうでなければ`None`を返します。"""
    form = mod.biharmonic_form()
    if form is None or abs(params.detuning) > default_parity_tolerance(params, mod):
        return None
    _, r, p, phi = form
    if r == 0.0 or p % 2:
        return None
    offset = phi / np.pi - 0.5
    if abs(offset - round(offset)) > 1e-12:
        return None
    # 相互参照を避けるため関数内で読み込む
    from .vanvleck import fourier_amplitudes, theta0

    return theta0(fourier_amplitudes(mod, 0))


def _aligned_residual(a: NDArray[np.complex128], b: NDArray[np.complex128]) -> float:
    """大域位相を1つ揃えたうえでの max |a − e^{iχ}b| を返します。"""
    overlap = np.vdot(b, a)
    chi = np.angle(overlap) if abs(overlap) > 0.0 else 0.0
    return float(np.max(np.abs(a - np.exp(1.0j * chi) * b)))


def verify_identities(
    elems: TransitionElements, report: ParityReport, mod: Modulation, params: SystemParams
) -> ParityReport:
    """遷移行列要素のパリティ関係式の残差を埋めた`ParityReport`を返します。

    - (−1)^l λ_αλ_β の関係式は λ が定まっているときだけ評価します。
    - 絶対値の関係式は常に評価します。
    - p が偶数、δ = 0、φ = (n+½)π のときは x_{++} と x_{−+} の関係式も評価します。
      x_{−+} の方はモードの位相規約に依存します。数値解のモードは大域位相を1つ揃えてから比較し、
      解析解 (Van Vleck) のモードは位相が決まっているのでそのまま比較します。
    """
    if not np.all(np.isfinite(elems.x_plus)):
        raise ValueError("transition elements must be finite")
    x = elems.x_plus
    mirrored = elems.mirrored()
    modulus_mirror = float(np.max(np.abs(np.abs(x) - np.abs(mirrored))))

    signed_mirror = None
    if report.has_lambdas:
        lam = np.array([report.lambda_plus, report.lambda_minus])
        sign = (-1.0) ** np.abs(elems.harmonics)
        factor = lam[:, None, None] * lam[None, :, None] * sign[None, None, :]
        signed_mirror = float(np.max(np.abs(x - factor * mirrored)))

    even = None
    theta = _even_harmonic_phase(params, mod)
    if theta is not None:
        sign = (-1.0) ** np.abs(elems.harmonics)
        pp = x[Branch.PLUS, Branch.PLUS]
        even_pp = float(np.max(np.abs(pp[::-1] - sign * pp)))
        mp_reversed = x[Branch.MINUS, Branch.PLUS][::-1]
        pm = x[Branch.PLUS, Branch.MINUS]
        target = -sign * np.exp(-2.0j * theta) * pm
        if elems.backend is Backend.VANVLECK:
            even_mp = float(np.max(np.abs(mp_reversed - target)))
        else:
            even_mp = _aligned_residual(mp_reversed, target)
        even = (even_pp, even_mp)

    return replace(
        report,
        signed_mirror_residual=signed_mirror,
        modulus_mirror_residual=modulus_mirror,
        even_harmonic_residuals=even,
    )


def parity_analysis(
    sol: FloquetSolution, elems: TransitionElements, parity: ParityClass, mod: Modulation, params: SystemParams
) -> ParityReport:
    """`parity_eigenvalues`と`verify_identities`を続けて実行します。"""
    return verify_identities(elems, parity_eigenvalues(sol, parity), mod, params)
