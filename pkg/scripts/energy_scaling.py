"""Energy efficiency in the fixed-density and fixed-extent regimes.

Prints the eta-vs-area slope and, for a handful of correlation maps, the
density-regime slopes and verdicts.

    python scripts/energy_scaling.py --delta 2 --extent 20
"""
import argparse

from gmrfdet.energy import (
    ConstantMap,
    EnergyScenario,
    ExpGapMap,
    ExponentialMap,
    area_regime_sweep,
    density_regime_sweep,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta", type=float, default=2.0)
    ap.add_argument("--extent", type=float, default=20.0)
    ap.add_argument("--snr", type=float, default=1.0)
    ap.add_argument("--n-list", type=int, nargs="+", default=[8, 16, 32, 64, 128, 256, 512])
    args = ap.parse_args()

    template = EnergyScenario(1, 1.0, args.delta, ConstantMap(0.1), args.snr)
    pts, slope = area_regime_sweep(template, args.n_list)
    print(f"area regime (r=1, zeta=0.1): eta-vs-area slope {slope:.5f}")
    for p in pts:
        print(f"  n={p.n:4d} eta={p.eta:.6e}")

    maps = {
        "constant zeta=0": ConstantMap(0.0),
        "exponential r0=1": ExponentialMap(1.0),
        "expgap beta=0.5": ExpGapMap(1.0, 0.5),
        "expgap beta=1": ExpGapMap(1.0, 1.0),
        "expgap beta=1.5": ExpGapMap(1.0, 1.5),
    }
    print(f"\ndensity regime (extent {args.extent}, delta {args.delta}); reference slope "
          f"{0.5 * (1 - args.delta):+.3f}")
    for name, cmap in maps.items():
        _, v = density_regime_sweep(template, args.n_list, args.extent, corr_map=cmap)
        print(f"  {name:18s} K_s slope {v.exponent_slope:+.4f}  eta slope {v.eta_slope:+.4f}  -> {v.verdict}")


if __name__ == "__main__":
    main()
