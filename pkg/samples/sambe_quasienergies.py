# Sambe空間の対角化とモノドロミー行列の準エネルギーを比べる。

from fluofloq import Modulation, SystemParams, solve_floquet, solve_floquet_sambe

params = SystemParams(omega_x=10.0)
mod = Modulation.biharmonic(40.0, 40.0, p=3)
for sol in (solve_floquet(params, mod), solve_floquet_sambe(params, mod)):
    print(f"{sol.backend:>9}: eps+={sol.quasienergy_plus:.10f} eps-={sol.quasienergy_minus:.10f}")
