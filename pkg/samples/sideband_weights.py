# 同梱のレシピを使い、Δ = ±ω_z の線の強度を厳密な経路と永年近似で比べる。

from fluofloq.cli import evaluate, load_config

config = load_config("sideband_weights_p2")
for omega_x in (4.0, 10.0, 20.0):
    report = evaluate(config.with_axis("omega_x", omega_x))
    for route in report.results:
        weights = report.line_weights(route)
        print(f"omega_x={omega_x:4.1f} {route:>17}: -w={weights[-1.0]:.5f} +w={weights[1.0]:.5f}")
