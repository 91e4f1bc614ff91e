"""Regenerates the high-precision Bessel reference values used in special_reference.rs."""
import mpmath as mp

mp.mp.dps = 50

CASES = [(300, 200), (300, 150), (10, 3.7), (50, 0.25), (2048, 1e5), (3, 1e6), (300, 1e6)]

for d, kappa in CASES:
    nu = mp.mpf(d) / 2 - 1
    k = mp.mpf(kappa)
    ratio = mp.besseli(nu + 1, k) / mp.besseli(nu, k)
    log_z = mp.mpf(d) / 2 * mp.log(2 * mp.pi) + mp.log(mp.besseli(nu, k)) - nu * mp.log(k)
    print(f"({d}, {kappa}, {mp.nstr(ratio, 20)}, {mp.nstr(log_z, 20)}),")
