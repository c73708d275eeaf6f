"""Directional wideband jammers do not hurt the matrix pair beamformer.

Three BPSK jammers at 30 dB INR hit the array from 30, -40 and 50 degrees.
Because their chip-level statistics look the same in the signal channel and
in the interference channel, the covariance pair stays matched and the
normalized output SINR G sits at 0 dB for every input SNR -- no threshold
effect at all.

Runs a reduced Monte Carlo (K = 20000 symbols per point) so it finishes in
a few seconds; bump --symbols for smoother numbers.
"""

import argparse
from dataclasses import replace

from mpbsim import harness

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--symbols", type=int, default=20_000)
args = parser.parse_args()

config = replace(harness.preset("fig4a-bpsk3"),
                 symbols=args.symbols,
                 snr_grid_db=tuple(range(-20, 45, 5)))

print(f"scheme: {config.scheme.name}, INR {config.inr_db:g} dB, "
      f"K = {config.symbols} symbols per point\n")
print(" SNR (dB)   G simulated (dB)   G predicted (dB)")
for row in harness.run_sweep(config):
    print(f"{row.snr_db:9.1f}   {row.g_sim_db:16.3f}   {row.g_theory_db:16.3f}")

print("\nThe simulated curve hugs 0 dB: white interference leaves the")
print("covariance pair matched (gamma_1 = 0), so the beamformer is blind")
print("to the input SNR and never enters a failure region.")
