# Van Vleck摂動論の準エネルギー差と x_{++,l} をモノドロミー行列による値と比べる。

import numpy as np

from fluofloq import Branch, Modulation, SystemParams, solve_floquet, transition_elements, vanvleck_elements, vanvleck_solution

mod = Modulation.biharmonic(40.0, 40.0, p=2, phi=0.5 * np.pi)
for omega_x in (1.0, 2.0, 4.0, 8.0, 16.0):
    params = SystemParams(omega_x)
    sol = solve_floquet(params, mod)
    vv = vanvleck_solution(params, mod)
    exact = transition_elements(sol)
    approx = vanvleck_elements(vv)
    x_exact = exact.element(Branch.PLUS, Branch.PLUS, 1)
    x_approx = approx.element(Branch.PLUS, Branch.PLUS, 1)
    print(
        f"omega_x={omega_x:5.1f} splitting error={abs(vv.Omega_m - sol.splitting):.3e}"
        f" x_pp_1 deviation={abs(x_approx - x_exact) / abs(x_exact):.3e}"
    )
