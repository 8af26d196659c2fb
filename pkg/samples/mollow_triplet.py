# 変調のない駆動二準位系でMollowの三重線の位置・幅・強度を表示する。

from fluofloq import Modulation, SystemParams, rates, secular_spectrum, solve_floquet, transition_elements
from fluofloq.secular import default_grid

params = SystemParams(omega_x=10.0)
mod = Modulation.unmodulated(40.0)
sol = solve_floquet(params, mod)
elems = transition_elements(sol)
spectrum = secular_spectrum(elems, rates(elems, params.kappa), sol.splitting, 40.0, default_grid(40.0))
for line in spectrum.line_table:
    print(f"{line.family:>15}: {line.position:+8.3f} width={line.width:.3f} weight={line.weight:.4f}")
