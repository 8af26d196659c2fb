# 奇数倍の二倍波変調でFloquet状態のパリティ固有値と遷移行列要素の関係式の残差を表示する。

import numpy as np

from fluofloq import Modulation, SystemParams, classify_parity, parity_analysis, solve_floquet, transition_elements

params = SystemParams(omega_x=10.0)
for phi in (0.0, 0.25 * np.pi, 0.5 * np.pi):
    mod = Modulation.biharmonic(40.0, 40.0, p=3, phi=phi)
    sol = solve_floquet(params, mod)
    elems = transition_elements(sol)
    report = parity_analysis(sol, elems, classify_parity(params, mod), mod, params)
    print(
        f"phi={phi / np.pi:.2f}pi lambda=({report.lambda_plus}, {report.lambda_minus})"
        f" residual={report.lambda_residual:.2e} mirror={report.signed_mirror_residual:.2e}"
    )
