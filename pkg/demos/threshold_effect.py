"""The threshold effect: periodic interference splits the operating curve.

Two periodical-noise jammers (stored-segment repeaters) are mutually
coherent, so the covariance pair is mismatched and the largest mismatch
eigenvalue gamma_1 grows with INR. The operating curve then has three
regions:

  failure   (SNR below T1):   the weight locks onto the interference and
                              G falls as SNR^-2,
  threshold (T1 .. T2):       eigenvalue competition, rapid transition,
  operating (above T2):       the SOI wins and G settles at the ceiling G_U.

The demo prints the predicted thresholds, then a sweep with the region
tag per point so the transition is visible in the numbers.
"""

import argparse
import math
from dataclasses import replace

from mpbsim import harness

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--symbols", type=int, default=20_000)
parser.add_argument("--inr-db", type=float, default=30.0)
args = parser.parse_args()

config = replace(harness.preset("fig4b-pn2"),
                 symbols=args.symbols, inr_db=args.inr_db,
                 snr_grid_db=tuple(range(-20, 45, 5)))

report = harness.analyze(config)
th = report["thresholds"]
print(f"gamma_1 = {report['gamma1']:.4g}  (INR {config.inr_db:g} dB, "
      f"{config.scheme.name} monitor)")
print(f"predicted thresholds: T1 = {th['snr_t1_db']:.2f} dB, "
      f"T0 = {th['snr_t0_db']:.2f} dB, T2 = {th['snr_t2_db']:.2f} dB")
print(f"floor G_L = {10 * math.log10(th['g_l']):.2f} dB, "
      f"ceiling G_U = {10 * math.log10(th['g_u']):.2f} dB\n")

print(" SNR (dB)   G simulated (dB)   G predicted (dB)   region")
for row in harness.run_sweep(config):
    print(f"{row.snr_db:9.1f}   {row.g_sim_db:16.3f}   "
          f"{row.g_theory_db:16.3f}   {row.region}")

print("\nBelow T1 the simulation tracks the failure branch; above T2 it")
print("tracks the ceiling. The dip between them is the threshold region")
print("where the top two generalized eigenvalues compete.")
