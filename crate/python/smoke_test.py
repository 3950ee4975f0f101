"""Imports the extension and checks a handful of closed-form values."""

import math

import qpspec

golden = qpspec.Frequency.golden_mean()
assert abs(golden.value - (math.sqrt(5) - 1) / 2) < 1e-15
assert golden.quotients[:5] == [1, 1, 1, 1, 1]
assert qpspec.Frequency.from_decimal("0.6180339887498948").quotients[:8] == [1] * 8

free = qpspec.Potential.free()
amo = qpspec.Potential.amo(2.0)
assert amo(0.0) == 4.0

# free Laplacian off the band: L(3) = ln((3 + √5)/2)
l3 = qpspec.lyapunov(free, golden, 3.0, n=1000, m=16)
assert abs(l3 - math.log((3 + math.sqrt(5)) / 2)) < 1e-3, l3

# supercritical almost Mathieu: L = ln 2 and acceleration 1
profile = qpspec.acceleration(amo, golden, 0.0, n=2000, m=64)
assert abs(profile["l_zero"] - math.log(2)) < 0.02, profile["l_zero"]
assert profile["omega_int"] == 1
assert qpspec.classify_regime(profile["l_zero"], profile["omega_int"]) == "supercritical"

rot = qpspec.rotation_number(free, golden, 0.0, n=2000, m=16)
assert abs(rot["rho"] - 0.25) < 1e-3

table = qpspec.ids(free, golden, [-3.0 + 0.003 * k for k in range(2001)], n=1000, m=16)
assert abs(table(0.0) - 0.5) < 2e-3
assert abs(table.thouless(3.0) - 0.96242) < 5e-3

g = qpspec.green(free, golden, 3j)
assert abs(g - 1j / math.sqrt(13)) < 1e-6, g

spectrum = qpspec.spectrum_approx(free, golden, n=1000, m=4, margin=0.01)
assert len(spectrum.intervals) == 1 and 0.0 in spectrum
ratios = qpspec.SpectrumApprox([(-2.0, 2.0)]).homogeneity([0.01, 0.1])["min_ratio"]
assert all(abs(r - 1.0) < 1e-12 for r in ratios), ratios

boundary = qpspec.boundary_re_green(free, golden, 3.0)
assert abs(boundary["value"] + 1 / math.sqrt(5)) < 0.01

report = golden.sdc_check(0.2, 1.1, k_max=10_000)
assert report["kind"] == "SDC" and report["worst_margin"] >= 0.2

try:
    qpspec.lyapunov(free, golden, 0.0, n=10, m=16)
except ValueError as err:
    assert "n" in str(err)
else:
    raise AssertionError("expected ValueError for n < 100")

print(f"qpspec {qpspec.__version__}: smoke test passed")
