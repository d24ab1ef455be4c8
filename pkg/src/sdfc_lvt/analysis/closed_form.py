"""Closed-form SNR and accuracy expressions.

These are regression formulas evaluated exactly as published, with ``bt``
read as the time-bandwidth product B*T_p.  They are not re-derived here and
the dimensional bookkeeping is kept as printed.
"""
from __future__ import annotations

import math

import numpy as np


def _positive(**kw):
    for k, v in kw.items():
        if not np.all(np.asarray(v) > 0):
            raise ValueError(f"{k} must be positive")


def snr_sdfc_closed_form(snr_pc):
    """Output SNR of the conjugate product for a compressed-pulse SNR ``snr_pc``.

    Both values are linear.  Evaluates ``snr_pc**2 / (4 + 4 snr_pc)``, which
    falls off as ``snr_pc**2 / 4`` below one and approaches ``snr_pc / 4``
    (a 6 dB loss) above.
    """
    _positive(snr_pc=snr_pc)
    s = np.asarray(snr_pc, dtype=float)
    out = s * s / (4.0 + 4.0 * s)
    return float(out) if out.ndim == 0 else out


def snr_lvt_bound(n, time_bandwidth, snr_in):
    """Lower bound on the SNR after the LVT (all arguments linear).

    ``N^2 bt^4 s^4 / (8 N bt^3 s^3 + (8N + 32) bt^2 s^2 + 64 bt s + 32)``.
    """
    _positive(n=n, time_bandwidth=time_bandwidth, snr_in=snr_in)
    bt = float(time_bandwidth)
    s = np.asarray(snr_in, dtype=float)
    num = n * n * bt**4 * s**4
    den = 8 * n * bt**3 * s**3 + (8 * n + 32) * bt**2 * s**2 + 64 * bt * s + 32
    out = num / den
    return float(out) if out.ndim == 0 else out


def variance_bounds(n, pri, delta_f, q, time_bandwidth, snr_in, h=1.0, c=2.99792458e8):
    """Upper bounds on the velocity and acceleration estimate variances.

    Parameters
    ----------
    n : int
        Pulse count N.
    pri : float
        Pulse repetition interval T (s).  It does not enter the printed
        expressions and is accepted for interface symmetry only.
    delta_f : float
        Equivalent carrier of the product signal (Hz).
    q : int
        LVT delay sample count, ``1 <= q <= N/2``.
    time_bandwidth : float
        B*T_p.
    snr_in : float or ndarray
        Linear input SNR.
    h : float
        LVT scaling factor; only the acceleration bound depends on it.
    c : float
        Propagation speed (m/s).

    Returns
    -------
    (var_v, var_a) : tuple
        In (m/s)^2 and (m/s^2)^2.
    """
    _positive(n=n, pri=pri, delta_f=delta_f, q=q, time_bandwidth=time_bandwidth,
              snr_in=snr_in, h=h, c=c)
    if q > n / 2:
        raise ValueError("q must not exceed N/2")
    bt = float(time_bandwidth)
    s = np.asarray(snr_in, dtype=float)
    n = float(n)
    q = float(q)
    common = (1 + bt * s) / (math.pi**2 * delta_f**2 * bt**2 * s**2)
    var_v = c * c * (147 * n**3 + 36 * q * q * n * n) / (98 * n**4 + 72 * q**4) * common
    var_a = 588 * c * c * h * h / (2 * n) * common
    if var_v.ndim == 0:
        return float(var_v), float(var_a)
    return var_v, var_a
