"""Reference formulas written independently of the package, plain ``math`` only.

Inputs are plain Python numbers and lists so that nothing here shares code
with the implementation under test.
"""

import cmath
import math

# morphology: buildings are (height, footprint_area) pairs
mean_height = lambda b: sum(h * s for h, s in b) / sum(s for _, s in b)
dispersion = lambda b: 0.0 if len(b) == 1 else math.sqrt(
    sum((h - mean_height(b)) ** 2 for h, _ in b) / (len(b) - 1))
density = lambda b, a: sum(s for _, s in b) / a
composite = lambda b, a: 0.5 * mean_height(b) + 0.2 * dispersion(b) + 0.8 * density(b, a)
normalized = lambda s: (s - 30.0) / 15.0

# path loss, f in GHz, d in m
pl_los = lambda d, s, f=5.8, ka=0.5, kb=-1.3: (
    (20 + ka * s) * math.log10(d) + 51.4 + kb * s + 21 * math.log10(f))
pl_nlos = lambda d, s, f=5.8, h=2.5, d0=50.0, kc=9.1, kd=-9.2: (
    (35.3 + kc * s) * math.log10(d) + 22.4 + 21.3 * math.log10(f) - 0.3 * (h - 1.5)
    + kd * s * math.log10(d0))

# frequency-averaged CTF power -> path loss
pl_ctf = lambda H: -10 * math.log10(sum(abs(x) ** 2 for x in H) / len(H))

# densities
normal_pdf = lambda x, mu, s: math.exp(-(x - mu) ** 2 / (2 * s * s)) / (math.sqrt(2 * math.pi) * s)
lognormal_pdf = lambda x, mu, s: math.exp(-(math.log(x) - mu) ** 2 / (2 * s * s)) / (
    x * s * math.sqrt(2 * math.pi))
laplace_pdf = lambda x, mu, b: math.exp(-abs(x - mu) / b) / (2 * b)

# second-order statistics; taps are (delay, power) pairs
rms_ds = lambda taps: math.sqrt(max(
    sum(p * t * t for t, p in taps) / sum(p for _, p in taps)
    - (sum(p * t for t, p in taps) / sum(p for _, p in taps)) ** 2, 0.0))


def fleury(angles_deg, powers):
    tot = sum(powers)
    mu = sum(p / tot * cmath.exp(1j * math.radians(a)) for a, p in zip(angles_deg, powers))
    return math.sqrt(sum(p / tot * abs(cmath.exp(1j * math.radians(a)) - mu) ** 2
                         for a, p in zip(angles_deg, powers)))


def ctf(taps, freqs_hz):
    """``taps`` are (delay_ns, complex amplitude) pairs."""
    return [sum(a * cmath.exp(-2j * math.pi * f * t * 1e-9) for t, a in taps) for f in freqs_hz]


# small-scale tables as printed, s = normalized factor
R2 = math.sqrt(2.0)
TABLE = {
    ("LOS", "power"): lambda s: ("normal", 0.74 * s - 6.93, 3.76 * math.exp(-0.03 * s)),
    ("LOS", "delay"): lambda s: ("lognormal", -0.03 * s + 9.49, -0.0015 * s + 0.0195),
    ("LOS", "aoa"): lambda s: ("laplace", 91.0, (22.62 + 7.21 * s) / R2),
    ("LOS", "eoa"): lambda s: ("laplace", 88.0, 1.21 * s + 7.31),
    ("LOS", "n_cl"): lambda s: ("normal", 0.13 * s + 1.69, 0.80 * math.exp(0.12 * s)),
    ("LOS", "n_mpc"): lambda s: ("normal", -0.03 * s + 14.62, 0.63 * math.exp(0.15 * s)),
    ("NLOS", "power"): lambda s: ("normal", 2.83 * s - 5.54, 2.70 * math.exp(-0.45 * s)),
    ("NLOS", "delay"): lambda s: ("laplace", -1100 * s + 12855.5, 233.80 * math.exp(1.26 * s)),
    ("NLOS", "aoa"): lambda s: ("laplace", 92.0, 12.39 * math.exp(0.06 * s)),
    ("NLOS", "eoa"): lambda s: ("laplace", 88.0, 2.45 * s + 10.55),
    ("NLOS", "n_cl"): lambda s: ("normal", 0.50 * s + 2.70, 1.03 * math.exp(0.44 * s)),
    ("NLOS", "n_mpc"): lambda s: ("normal", 0.06 * s + 14.66, 0.61 * math.exp(0.01 * s)),
}


def rounded_count_mean(mu, sigma):
    """E[max(1, floor(X + 1/2))] for X ~ Normal(mu, sigma), by summing over integers."""
    Phi = lambda x: 0.5 * (1 + math.erf((x - mu) / (sigma * R2)))
    hi = int(mu + 12 * sigma) + 2
    # P(count = k) = Phi(k + 1/2) - Phi(k - 1/2) for k >= 2, the rest collapses onto 1
    mean = 1.0 * Phi(1.5)
    for k in range(2, hi + 1):
        mean += k * (Phi(k + 0.5) - Phi(k - 0.5))
    return mean
