# 一般化パリティ条件の4つの場合について厳密な経路と永年近似の非対称度を比べる。

from fluofloq import (
    Modulation,
    SystemParams,
    classify_parity,
    exact_route,
    rates,
    secular_spectrum,
    solve_floquet,
    symmetric_grid,
    transition_elements,
)

grid = symmetric_grid(160.0)
for detuning, p in ((0.0, 3), (5.0, 3), (0.0, 2), (5.0, 2)):
    params = SystemParams(omega_x=10.0, detuning=detuning)
    mod = Modulation.biharmonic(40.0, 40.0, p=p)
    sol = solve_floquet(params, mod)
    elems = transition_elements(sol)
    secular = secular_spectrum(elems, rates(elems, params.kappa), sol.splitting, 40.0, grid)
    exact, _ = exact_route(params, mod, grid)
    case = classify_parity(params, mod).case_label
    print(f"{case:>13}: exact A={exact.asymmetry():.3e} secular A={secular.asymmetry():.3e}")
