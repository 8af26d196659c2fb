"""Van Vleck摂動論による準エネルギーとFloquet状態の解析解。

変調を位相因子 e^{iΦ(t)} として取り込んだ後、拡張空間で共鳴する2状態
|↑, 0⟩ と |↓, m⟩ のブロックを二次まで対角化します。
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Final, Literal

import numpy as np
from numpy.typing import NDArray
from scipy.special import jv

from .elements import DEFAULT_L_MAX, TransitionElements
from .errors import FloquetDegeneracyError, VanVleckResonanceError, VanVleckValidityWarning
from .floquet import Backend, Branch
from .model import Modulation, SystemParams

logger = logging.getLogger(__name__)

DEFAULT_J_MAX: Final = 16
TAIL_TOLERANCE: Final = 1e-12
AMBIGUOUS_M: Final = 0.4
RESONANCE_GUARD: Final = 1e-9

Method = Literal["auto", "bessel", "quadrature"]


def _bessel_amplitudes(mod: Modulation, l_max: int) -> NDArray[np.complex128]:
    form = mod.biharmonic_form()
    if form is None:
        raise ValueError("the Bessel sum needs a modulation with harmonics 1 and p")
    amplitude, r, p, phi = form
    w = mod.fundamental_freq
    a = amplitude / w
    b = r * amplitude / (p * w)
    ks = np.arange(-(int(np.ceil(abs(b))) + 24), int(np.ceil(abs(b))) + 25)
    ls = np.arange(-l_max, l_max + 1)
    terms = jv(ks, b)[None, :] * jv(ls[:, None] - ks[None, :] * p, a) * np.exp(1.0j * ks * phi)[None, :]
    return np.exp(-1.0j * b * np.sin(phi)) * terms.sum(axis=1)


def _quadrature_amplitudes(mod: Modulation, l_max: int) -> NDArray[np.complex128]:
    content = int(np.ceil(sum(abs(h.amplitude) / mod.fundamental_freq for h in mod.harmonics)))
    n = 1 << int(np.ceil(np.log2(max(1024, 4 * (2 * (l_max + content) + 1)))))
    t = np.arange(n) * (mod.period / n)
    coeffs = np.fft.fft(np.exp(1.0j * mod.phase_integral(t))) / n
    return coeffs[np.arange(-l_max, l_max + 1) % n]


def fourier_amplitudes(mod: Modulation, l_max: int, method: Method = "auto") -> NDArray[np.complex128]:
    """e^{iΦ(t)} のフーリエ係数 F_l (l = −l_max…l_max) を返します。

    二倍波変調では F_l = e^{−iΘ} Σ_k J_k(rΩ_z/pω_z) J_{l−kp}(Ω_z/ω_z) e^{ikφ} を使い、
    それ以外は (1/T)∫e^{iΦ(t) − ilω_z t}dt をFFTで求めます。

    Args:
        mod: 変調。
        l_max: 次数の上限。
        method: "bessel"、"quadrature"、または形から選ぶ "auto"。
    """
    if l_max < 0:
        raise ValueError(f"l_max must be non-negative: {l_max}")
    match method:
        case "bessel":
            return _bessel_amplitudes(mod, l_max)
        case "quadrature":
            return _quadrature_amplitudes(mod, l_max)
        case "auto":
            if mod.biharmonic_form() is not None:
                return _bessel_amplitudes(mod, l_max)
            return _quadrature_amplitudes(mod, l_max)
        case _:
            raise ValueError(f"unknown method: {method}")


def theta0(amplitudes: NDArray[np.complex128]) -> float:
    """中央の要素 F₀ の位相から θ₀ = −arg F₀ を返します。"""
    return float(-np.angle(amplitudes[amplitudes.shape[0] // 2]))


def modulation_phase(mod: Modulation) -> float:
    """Θ = Σ_k (Ω_{z,k}/p_kω_z) sin φ_k を返します。二倍波なら (rΩ_z/pω_z) sin φ です。"""
    return float(sum(h.amplitude / (h.multiple * mod.fundamental_freq) * np.sin(h.phase) for h in mod.harmonics))


@dataclass(frozen=True)
class VanVleckSolution:
    """Van Vleck摂動論の解。イミュータブルです。

    配列 `F` は l = −fourier_cutoff…fourier_cutoff、`P` と `Q` は j = −j_max…j_max の順で、
    `P[j_max]` と `Q[j_max]` (j = 0) は0です。

    Attributes:
        m: δ/ω_z に最も近い整数。
        F: F_l。
        fourier_cutoff: F の次数の上限。
        Theta: Θ。
        theta0: θ₀ = −arg F₀。
        Omega_m: 準エネルギー差 Ω_m。
        detuning_offset: 二次のシフトを含む δ − mω_z + Σ|f_j|²/2(δ+jω_z)。
        u: |↑, 0⟩ の係数（複素数）。
        v: |↓, m⟩ の係数（実数）。
        B: 規格化前の対角ブロックの重み。
        P: P_j。
        Q: Q_j。
        norm: 規格化定数 N。
        validity_margin: min_{l≠0} (|lω_z| − |f_{−l−m}|/2)。
        omega_z: 変調の基本周波数。
        omega_x: 駆動強度。
    """

    m: int
    F: NDArray[np.complex128]
    fourier_cutoff: int
    Theta: float
    theta0: float
    Omega_m: float
    detuning_offset: float
    u: complex
    v: float
    B: float
    P: NDArray[np.complex128]
    Q: NDArray[np.complex128]
    norm: float
    validity_margin: float
    omega_z: float
    omega_x: float

    @property
    def j_max(self) -> int:
        return self.P.shape[0] // 2

    @property
    def quasienergies(self) -> tuple[float, float]:
        """(ε₊, ε₋) = (mω_z ± Ω_m)/2 を返します。ブリルアンゾーンへの折り返しはしません。"""
        center = 0.5 * self.m * self.omega_z
        return center + 0.5 * self.Omega_m, center - 0.5 * self.Omega_m

    def amplitude(self, l: int) -> complex:
        """F_l を返します。範囲外は0です。"""
        if abs(l) > self.fourier_cutoff:
            return 0j
        return complex(self.F[l + self.fourier_cutoff])

    def mode_coefficients(self, alpha: Branch) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
        """規格化した係数 (a_j, b_j) を返します。

        a_j は |↑, j⟩、b_j は |↓, m+j⟩ の係数で、添字は j + j_max です。
        """
        center = self.j_max
        if alpha is Branch.PLUS:
            a = -self.P.copy()
            b = self.Q.copy()
            a[center], b[center] = self.u * self.B, self.v * self.B
        else:
            a = np.conj(self.Q[::-1])
            b = np.conj(self.P[::-1])
            a[center], b[center] = self.v * self.B, -np.conj(self.u) * self.B
        return a / self.norm, b / self.norm


def _take(values: NDArray[np.complex128], cutoff: int, index: NDArray[np.int_]) -> NDArray[np.complex128]:
    """values[l + cutoff] を返します。範囲外は0です。"""
    inside = np.abs(index) <= cutoff
    out = np.zeros(index.shape, dtype=complex)
    out[inside] = values[index[inside] + cutoff]
    return out


def vanvleck_solution(
    params: SystemParams,
    mod: Modulation,
    j_max: int = DEFAULT_J_MAX,
    l_max: int = DEFAULT_L_MAX,
    m: int | None = None,
) -> VanVleckSolution:
    """二次のVan Vleck摂動論で準エネルギーとFloquet状態の係数を求めます。

    Args:
        params: 二準位系のパラメーター。
        mod: 変調。
        j_max: P_j, Q_j を計算する次数の上限。
        l_max: 後で遷移行列要素を求める次数の上限。F_l の範囲を決めます。
        m: 共鳴する部分空間。省略すると δ/ω_z に最も近い整数です。

    Raises:
        VanVleckResonanceError: j ≠ −m で δ + jω_z = 0 となる場合。
        FloquetDegeneracyError: Ω_m = 0 の場合。
    """
    if j_max < 1:
        raise ValueError(f"j_max must be positive: {j_max}")
    w = mod.fundamental_freq
    delta = params.detuning
    ratio = delta / w
    if m is None:
        m = int(np.rint(ratio))
        if abs(ratio - m) > AMBIGUOUS_M:
            warnings.warn(
                f"delta/omega_z = {ratio:.3f} is far from the nearest integer {m}",
                VanVleckValidityWarning,
                stacklevel=2,
            )

    content = int(np.ceil(mod.total_amplitude / w))
    cutoff = max(l_max, j_max) + 2 * j_max + abs(m) + content + 16
    amplitudes = fourier_amplitudes(mod, cutoff)
    tail = 1.0 - float(np.sum(np.abs(amplitudes) ** 2))
    if tail > TAIL_TOLERANCE:
        warnings.warn(f"Fourier tail energy {tail:.3e} beyond |l| = {cutoff}", VanVleckValidityWarning, stacklevel=2)

    f = params.omega_x * amplitudes
    ls = np.arange(-cutoff, cutoff + 1)
    denominators = delta + ls * w
    off = ls != -m
    if np.any(np.abs(denominators[off]) < RESONANCE_GUARD * w):
        raise VanVleckResonanceError(f"delta + j*omega_z vanishes for some j != {-m}; perturbation theory does not apply")
    f_off, d_off, l_off = f[off], denominators[off], ls[off]

    offset = delta - m * w + float(np.sum(np.abs(f_off) ** 2 / (2.0 * d_off)))
    f_res = complex(f[cutoff - m])
    omega_m = float(np.hypot(offset, abs(f_res)))
    if omega_m == 0.0:
        raise FloquetDegeneracyError("the resonant block is degenerate (Omega_m = 0)")
    phase = f_res / abs(f_res) if abs(f_res) > 0.0 else 1.0
    u = complex(phase * np.sqrt(0.5 * (1.0 + offset / omega_m)))
    v = float(np.sqrt(0.5 * (1.0 - offset / omega_m)))
    b_weight = 1.0 - 0.125 * float(np.sum(np.abs(f_off) ** 2 / d_off**2))

    p_coeffs = np.zeros(2 * j_max + 1, dtype=complex)
    q_coeffs = np.zeros(2 * j_max + 1, dtype=complex)
    for j in range(-j_max, j_max + 1):
        if j == 0:
            continue
        jw = j * w
        forward = np.sum(_take(f, cutoff, l_off + j) * np.conj(f_off) / d_off)
        backward = np.sum(np.conj(_take(f, cutoff, l_off - j)) * f_off / d_off)
        f_p = complex(_take(f, cutoff, np.array([j - m]))[0])
        f_q = complex(np.conj(_take(f, cutoff, np.array([-j - m]))[0]))
        p_coeffs[j + j_max] = f_p / (2.0 * (delta + (j - m) * w)) * (
            v + u * np.conj(f_res) / (2.0 * jw)
        ) + u / (4.0 * jw) * forward
        q_coeffs[j + j_max] = f_q / (2.0 * (delta - (j + m) * w)) * (
            u + v * f_res / (2.0 * jw)
        ) + v / (4.0 * jw) * backward
    norm = float(np.sqrt(b_weight**2 + np.sum(np.abs(p_coeffs) ** 2 + np.abs(q_coeffs) ** 2)))

    reach = cutoff - abs(m)
    ks = np.arange(-reach, reach + 1)
    ks = ks[ks != 0]
    margin = float(np.min(np.abs(ks * w) - 0.5 * np.abs(_take(f, cutoff, -ks - m))))
    largest = float(np.max(np.abs(f)))
    if margin < 2.0 * largest:
        warnings.warn(
            f"validity margin {margin:.4g} is below twice the largest coupling {largest:.4g}",
            VanVleckValidityWarning,
            stacklevel=2,
        )

    logger.debug("vanvleck: m=%d Omega_m=%.10g offset=%.3e B=%.10g N=%.10g", m, omega_m, offset, b_weight, norm)
    return VanVleckSolution(
        m,
        amplitudes,
        cutoff,
        modulation_phase(mod),
        theta0(amplitudes),
        omega_m,
        offset,
        u,
        v,
        b_weight,
        p_coeffs,
        q_coeffs,
        norm,
        margin,
        w,
        params.omega_x,
    )


def vanvleck_elements(vv: VanVleckSolution, l_max: int = DEFAULT_L_MAX) -> TransitionElements:
    """解析的なFloquet状態から遷移行列要素を組み立てます。

    ⟨ũ_α|σ₊|ũ_β⟩ = e^{iΦ(t)} Σ_s c_s e^{isω_z t}、c_s = Σ_k a_α(k)* b_β(k+s−m) なので、
    x^{(+)}_l = Σ_n F_n c_{l−n} です。
    ⟨ũ_α|σ₋|ũ_β⟩ = e^{−iΦ(t)} Σ_s d_s e^{isω_z t}、d_s = Σ_j b_α(j)* a_β(j+s+m) で、
    e^{−iΦ} の係数は F_{−n}* なので x^{(−)}_l = Σ_n F_{−n}* d_{l−n} です。
    """
    j_max = vv.j_max
    if l_max + abs(vv.m) + 2 * j_max > vv.fourier_cutoff:
        raise ValueError(f"l_max {l_max} exceeds what the Fourier cutoff {vv.fourier_cutoff} supports")
    coeffs = {alpha: vv.mode_coefficients(alpha) for alpha in Branch}
    conj_amplitudes = np.conj(vv.F[::-1])
    start_plus = vv.fourier_cutoff - vv.m + 2 * j_max
    start_minus = vv.fourier_cutoff + vv.m + 2 * j_max
    x_plus = np.empty((2, 2, 2 * l_max + 1), dtype=complex)
    x_minus = np.empty_like(x_plus)
    for alpha in Branch:
        a_alpha, b_alpha = coeffs[alpha]
        for beta in Branch:
            a_beta, b_beta = coeffs[beta]
            # c の先頭は s = m − 2j_max、d の先頭は s = −m − 2j_max
            c = np.correlate(b_beta, a_alpha, "full")
            d = np.correlate(a_beta, b_alpha, "full")
            x_plus[alpha, beta] = np.convolve(vv.F, c)[start_plus - l_max : start_plus + l_max + 1]
            x_minus[alpha, beta] = np.convolve(conj_amplitudes, d)[start_minus - l_max : start_minus + l_max + 1]
    return TransitionElements(l_max, x_plus, x_minus, 0, Backend.VANVLECK)
