"""Detecting scenarios whose threshold SNR grows without bound.

Whether the threshold effect saturates or keeps getting worse with INR is
decided by the noise-free covariance pair (Y_S, Y_I): an infinite
generalized eigenvalue there means gamma_1 -- and hence the threshold SNR
-- grows linearly in INR. The toolkit detects this two independent ways:

  * algebraically: counting infinite eigenvalues of the semidefinite
    pencil (Y_S, Y_I);
  * geometrically: checking whether the monitor basis covers the signal
    vector inside the interference waveform subspace.

It also reports the Crawford-number constant C_Y0 behind the lower bound
gamma_1 + 1 > C_Y0 * INR / sqrt(2).
"""

from dataclasses import replace

from mpbsim import harness

for name in ("fig4b-pn2", "fig4a-bpsk3"):
    config = replace(harness.preset(name), symbols=1000)
    report = harness.analyze(config)
    print(f"=== {name} ({report['scheme']} monitor) ===")
    print(f"infinite eigenvalues of (Y_S, Y_I): {report['infinite_count']} "
          f"-> {'UNBOUNDED' if report['has_infinite'] else 'bounded'}")
    if report["geometric_bounded"] is not None:
        print(f"geometric subspace check agrees: "
              f"bounded = {report['geometric_bounded']}")
    print(f"C_Y0 = {report['c_y0']:.4g}")
    print("   INR (dB)   gamma_1 + 1     lower bound")
    for row in report["gamma1_vs_inr"]:
        bound = row["gamma1_lower_bound_plus1"]
        btxt = f"{bound:12.4g}" if bound is not None else "    (inactive)"
        print(f"   {row['inr_db']:8.1f}   {row['gamma1_plus1']:11.4g}   {btxt}")
    slope = report["gamma1_inr_loglog_slope"]
    if slope is not None:
        print(f"log-log slope of (gamma_1 + 1) vs INR: {slope:.3f} "
              f"(1.0 = linear growth)")
    print()

print("The coherent periodical-noise pair is unbounded: every extra dB of")
print("jammer power buys a dB of threshold SNR. The wideband trio is")
print("perfectly matched (gamma_1 = 0 at any INR), so its curve never")
print("develops a threshold at all.")
