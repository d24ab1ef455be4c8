import math

import numpy as np
import pytest

from sdfc_lvt.model import Scene, TargetMotion, table1_targets, table2_radar


@pytest.fixture
def radar256():
    return table2_radar(pulse_count=256)


@pytest.fixture
def radar1024():
    return table2_radar(pulse_count=1024)


@pytest.fixture
def table1_pair():
    return table1_targets()


def lfm(n, pri, f0, gamma, amp=1.0):
    """exp(j 2 pi (f0 t + gamma t^2 / 2)) on t = n T."""
    t = np.arange(n) * pri
    return amp * np.exp(2j * math.pi * (f0 * t + 0.5 * gamma * t * t))


def dechirp_fft_oracle(x, pri, gammas, pad=8):
    """Brute-force (f at aperture centre, gamma): dechirp each hypothesis, FFT, take the max."""
    n = len(x)
    t = (np.arange(n) - (n - 1) / 2) * pri
    best = (-1.0, 0.0, 0.0)
    freqs = np.fft.fftfreq(pad * n, pri)
    for g in gammas:
        y = np.abs(np.fft.fft(x * np.exp(-1j * math.pi * g * t * t), pad * n))
        k = int(np.argmax(y))
        if y[k] > best[0]:
            best = (y[k], freqs[k], g)
    return best[1], best[2]


# -- acceptance summary ------------------------------------------------------------

ACCEPTANCE = {}


@pytest.fixture
def record():
    """record(criterion, part, passed, detail): collect one acceptance result."""
    def _record(criterion, part, passed, detail):
        ACCEPTANCE.setdefault(criterion, []).append((part, bool(passed), detail))
        return bool(passed)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[crit]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name} {'pass' if good else 'FAIL'}: {d}" for name, good, d in parts)
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'} ({detail})")
