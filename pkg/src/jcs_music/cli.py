"""Command line front end: configured sweeps, snapshots, and bound tables
emitted as CSV plus a companion plot script."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import harness
from .config import ConfigError, bind, load_config


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file overlaying the defaults")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--legacy-c", action="store_true",
                   help="use c = 3e8 m/s instead of the exact value")
    p.add_argument("--sinr", type=float, nargs="+",
                   help="SINR grid in dB (overrides the config grid)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="jcs-music",
        description="Simulation harness for subspace-based OFDM sensing "
                    "with an on-grid FFT baseline and CSI enhancement.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep-mse", help="AoA/range/velocity/location MSE "
                                         "sweep over sensing SINR")
    _add_common(p)
    p.add_argument("--true-beam", action="store_true",
                   help="beamform at the true AoA instead of the estimate")

    p = sub.add_parser("sweep-ber", help="BER sweep over link SINR for the "
                                         "four CSI cases")
    _add_common(p)
    p.add_argument("--mue-x", type=float, default=75.0,
                   help="pinned user x coordinate")
    p.add_argument("--qam-order", type=int, default=64, choices=(4, 16, 64))

    p = sub.add_parser("spectrum", help="single-shot range/velocity spectra "
                                        "with PSLR")
    _add_common(p)
    p.add_argument("--pad", type=int, default=8, help="FFT zero-pad factor")
    p.add_argument("--scatterers", type=int, default=None,
                   help="override the configured scatterer count")

    p = sub.add_parser("crb", help="closed-form bound table over SINR")
    _add_common(p)

    p = sub.add_parser("validate-theory", help="simulated MSEs next to "
                                               "perturbation predictions")
    _add_common(p)
    p.add_argument("--draws", type=int, default=1000,
                   help="noise draws for the analytic prediction")

    p = sub.add_parser("resolution", help="print baseline range/velocity "
                                          "bin widths")
    p.add_argument("--config", help="JSON config file overlaying the defaults")
    p.add_argument("--legacy-c", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        ctx = bind(cfg, legacy_c=args.legacy_c or None)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "resolution":
            dr, dv = harness.resolution_constants(ctx)
            print(json.dumps({"range_bin_m": dr, "velocity_bin": dv}))
            return 0

        if args.command == "sweep-mse":
            table = harness.run_sweep_mse(ctx, sinr_grid=args.sinr,
                                          trials=args.trials,
                                          master_seed=args.seed,
                                          use_true_beam=args.true_beam)
        elif args.command == "sweep-ber":
            table = harness.run_sweep_ber(ctx, csinr_grid=args.sinr,
                                          trials=args.trials,
                                          master_seed=args.seed,
                                          mue_x=args.mue_x,
                                          qam_order=args.qam_order)
        elif args.command == "crb":
            table = harness.crb_table(ctx, sinr_grid=args.sinr,
                                      master_seed=args.seed)
        elif args.command == "validate-theory":
            kwargs = {"master_seed": args.seed, "n_draws": args.draws}
            if args.sinr:
                kwargs["sinr_grid"] = args.sinr
            if args.trials:
                kwargs["trials"] = args.trials
            table = harness.validate_theory(ctx, **kwargs)
        elif args.command == "spectrum":
            sinr = args.sinr[0] if args.sinr else -20.0
            snap = harness.spectrum_snapshot(ctx, sinr_db=sinr,
                                             master_seed=args.seed,
                                             n_scatterers=args.scatterers,
                                             pad=args.pad)
            rows = [harness.ResultRow(sinr, "pslr", k.replace("_pslr_db", ""),
                                      snap[k], 0.0, 1, args.seed)
                    for k in ("music_range_pslr_db", "music_velocity_pslr_db",
                              "fft_range_pslr_db", "fft_velocity_pslr_db")]
            table = harness.ResultTable(rows)
            out = harness.emit_results(table, args.out, name="pslr")
            npz = f"{args.out}/spectra.npz"
            np.savez(npz, **{k: v for k, v in snap.items()
                             if isinstance(v, np.ndarray)})
            print("\n".join(str(p) for p in out + [npz]))
            return 0
        else:  # pragma: no cover
            raise AssertionError(args.command)
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    paths = harness.emit_results(table, args.out)
    print("\n".join(str(p) for p in paths))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
