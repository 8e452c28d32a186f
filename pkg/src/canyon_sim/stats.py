"""Second-order channel statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError

# one delay bin of the 30 MHz sounder
SOUNDER_BIN_NS = 33.3


@dataclass(frozen=True, eq=False)
class Pdp:
    delay_ns: np.ndarray
    power: np.ndarray
    bin_width: Optional[float] = None

    def __len__(self):
        return int(self.delay_ns.size)

    @property
    def entries(self) -> list[tuple[float, float]]:
        return list(zip(self.delay_ns.tolist(), self.power.tolist()))


def pdp(taps, bin_width: Optional[float] = None) -> Pdp:
    """Power delay profile from a :class:`~canyon_sim.synthesis.Cir`.

    ``taps`` may also be a ``(delay_ns, amplitude)`` pair. With ``bin_width``
    the powers are accumulated into bins ``[k w, (k+1) w)`` reported at
    their left edge.
    """
    if hasattr(taps, "delay_ns"):
        delay, amp = taps.delay_ns, taps.amplitude
    else:
        delay, amp = taps
    delay = np.asarray(delay, dtype=float)
    amp = np.asarray(amp)
    if delay.size == 0:
        raise DomainError("empty tap list")
    power = np.abs(amp) ** 2
    if power.ndim == 2:
        # array mode: power summed over elements
        power = power.sum(axis=0)
    order = np.argsort(delay, kind="stable")
    delay, power = delay[order], power[order]
    if bin_width is None:
        return Pdp(delay, power)
    if not bin_width > 0:
        raise DomainError(f"bin_width must be > 0, got {bin_width}")
    idx = np.floor(delay / bin_width).astype(np.int64)
    bins, inverse = np.unique(idx, return_inverse=True)
    acc = np.zeros(bins.size)
    np.add.at(acc, inverse, power)
    return Pdp(bins * float(bin_width), acc, float(bin_width))


def rms_delay_spread(p: Pdp) -> float:
    """Square root of the second central moment of the PDP, in ns."""
    w = np.asarray(p.power, dtype=float)
    total = w.sum()
    if not total > 0:
        raise DomainError("PDP has zero total power")
    w = w / total
    # centring first avoids cancellation for large absolute delays
    tau = np.asarray(p.delay_ns, dtype=float)
    mean = float(w @ tau)
    var = float(w @ (tau - mean) ** 2)
    return math.sqrt(max(var, 0.0))


def angular_spread(angles_deg: Sequence[float], powers: Sequence[float]) -> float:
    """Power-weighted circular spread of unit phasors (dimensionless).

    ``sqrt(sum p |e^{j theta} - mu|^2)`` with ``mu = sum p e^{j theta}`` and
    powers normalised to sum to one. Lies in ``[0, 1]``.
    """
    th = np.deg2rad(np.asarray(angles_deg, dtype=float))
    p = np.asarray(powers, dtype=float)
    if th.shape != p.shape:
        raise DomainError(f"angles and powers differ in length ({th.size} vs {p.size})")
    total = p.sum()
    if not total > 0:
        raise DomainError("zero total power")
    p = p / total
    z = np.exp(1j * th)
    mu = p @ z
    return math.sqrt(float(p @ np.abs(z - mu) ** 2))


def angular_spreads(angles_deg: np.ndarray, powers: np.ndarray) -> np.ndarray:
    """:func:`angular_spread` for each row of a ``(k, n)`` angle block."""
    th = np.deg2rad(np.asarray(angles_deg, dtype=float))
    p = np.asarray(powers, dtype=float)
    if th.ndim != 2 or th.shape[1] != p.size:
        raise DomainError(f"expected a (k, {p.size}) angle block, got shape {th.shape}")
    total = p.sum()
    if not total > 0:
        raise DomainError("zero total power")
    p = p / total
    z = np.exp(1j * th)
    mu = z @ p
    z -= mu[:, None]
    return np.sqrt((z.real ** 2 + z.imag ** 2) @ p)


def pathloss_from_ctf(h) -> float:
    """Path loss in dB from the frequency-averaged power of ``H``."""
    h = np.asarray(h)
    if h.size == 0:
        raise DomainError("empty transfer function")
    mean_power = float(np.vdot(h, h).real) / h.size
    if mean_power == 0:
        raise DomainError("transfer function is identically zero (infinite path loss)")
    return -10.0 * math.log10(mean_power)


def empirical_cdf(samples) -> list[tuple[float, float]]:
    """Step CDF ``(value, k/N)``; tied values keep only their last index."""
    x = np.sort(np.asarray(samples, dtype=float), kind="stable")
    n = x.size
    if n == 0:
        raise DomainError("empty sample")
    last = np.append(x[1:] != x[:-1], True)
    k = np.flatnonzero(last) + 1
    return list(zip(x[last].tolist(), (k / n).tolist()))
