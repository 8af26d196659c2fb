"""複素エルミート行列の巡回Jacobi法。

Sambe空間の打ち切りFloquetハミルトニアン（百次元程度）の対角化に使います。
"""

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import JacobiConvergenceError

logger = logging.getLogger(__name__)


def jacobi_eigh(
    a: ArrayLike, tol: float = 1e-14, max_sweeps: int = 60
) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """エルミート行列の固有値（昇順）と固有ベクトル（列）を返します。

    各回転は (p, q) 要素の位相を対角位相行列で取り除いてから実Jacobi回転で消去します。
    非対角成分のフロベニウスノルムが tol·‖A‖_F を下回ったら収束とみなします。

    Args:
        a: エルミート行列。
        tol: 相対収束判定値。
        max_sweeps: スイープ数の上限。

    Raises:
        JacobiConvergenceError: 上限までに収束しなかった場合。
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"square matrix expected: {a.shape}")
    if not np.allclose(a, a.conj().T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0.0))):
        raise ValueError("matrix is not Hermitian")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)

    scale = np.linalg.norm(a)
    threshold = tol * scale
    for sweep in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= threshold or (sweep and not rotated):
            logger.debug("jacobi: n=%d converged after %d sweeps (off %.3e)", n, sweep, off)
            return _sorted(a, v)
        rotated = 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                g = abs(b)
                if g <= 1e-300 or g < 1e-3 * threshold / n:
                    continue
                app, aqq = a[p, p].real, a[q, q].real
                zeta = (aqq - app) / (2.0 * g)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                phase = b / g
                # G = diag(1, e^{-iθ}) · [[c, s], [-s, c]]
                rot = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ rot
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                rotated += 1
    raise JacobiConvergenceError(f"cyclic Jacobi did not converge in {max_sweeps} sweeps (n={n})")


def _sorted(a: NDArray[np.complex128], v: NDArray[np.complex128]) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]
