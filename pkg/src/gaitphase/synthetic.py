"""Synthetic lower-limb walking dataset generator.

Produces the on-disk layout ingest expects: one tab-delimited file per
subject with time, rectus-femoris EMG and knee-angle columns. The EMG
is band-limited noise whose envelope and spectral content are locked to
the gait cycle (with a short electromechanical lead), and each
subject's |EMG| quantiles are calibrated to the reference screening
table, so subjects 5 and 8 present as flat, phase-unlocked channels.

Used for tests and demos; point ``root`` at a real dataset mirror to
run on recorded data instead.
"""

from pathlib import Path

import numpy as np
from scipy import signal as sps

# target (p50, p90, p95) of |raw EMG| per subject
SCREENING_TARGETS = {
    1: (0.0055, 0.0242, 0.0354),
    2: (0.0050, 0.0229, 0.0337),
    3: (0.0024, 0.0113, 0.0176),
    4: (0.0033, 0.0275, 0.0436),
    5: (0.0026, 0.0067, 0.0086),
    6: (0.0025, 0.0138, 0.0228),
    7: (0.0229, 0.1116, 0.1562),
    8: (0.0018, 0.0059, 0.0089),
    9: (0.0031, 0.0217, 0.0401),
    10: (0.0019, 0.0326, 0.0542),
    11: (0.0235, 0.2043, 0.3240),
}

FLAT_SUBJECTS = (5, 8)


def _band_noise(rng, n, fs, lo, hi):
    sos = sps.butter(4, [lo, hi], btype="bandpass", fs=fs, output="sos")
    x = sps.sosfilt(sos, rng.standard_normal(n))
    return x / x.std()


def _slow_noise(rng, n, fs, cut_hz, sigma):
    sos = sps.butter(2, cut_hz, btype="lowpass", fs=fs, output="sos")
    x = sps.sosfilt(sos, rng.standard_normal(n))
    return sigma * x / x.std()


def _smooth(env, fs, width_ms=30.0):
    w = sps.windows.hann(max(3, int(width_ms * fs / 1000)))
    return sps.convolve(env, w / w.sum(), mode="same")


def _calibrate_quantiles(x, targets):
    """Monotone rescale of |x| so its 50/90/95% quantiles hit the targets."""
    t50, t90, t95 = targets
    a = np.abs(x)
    e50, e90, e95 = (np.quantile(a, q) for q in (0.50, 0.90, 0.95))
    knots_x = np.array([0.0, e50, e90, e95])
    knots_y = np.array([0.0, t50, t90, t95])
    g = np.interp(a, knots_x, knots_y)
    tail = a > e95
    g[tail] = t95 + (a[tail] - e95) * (t95 - t90) / (e95 - e90)
    return np.sign(x) * g


def synth_subject(subject_id, seed, duration_s=20.0, sample_rate_hz=1000.0):
    """One subject's (emg, knee_angle_deg) pair."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, subject_id]))
    fs = sample_rate_hz
    n = int(round(duration_s * fs)) + 1
    t = np.arange(n) / fs

    f_c = rng.uniform(0.85, 1.05)  # gait cadence, cycles/s
    phi0 = rng.uniform(0, 2 * np.pi)
    theta = 2 * np.pi * f_c * t + phi0

    knee = (
        30.0
        - 25.0 * np.cos(theta)
        + 3.0 * np.sin(2 * theta + rng.uniform(0, 2 * np.pi))
        + _slow_noise(rng, n, fs, 3.0, 0.6)
    )

    if subject_id in FLAT_SUBJECTS:
        emg = _band_noise(rng, n, fs, 20.0, 350.0)
    else:
        # muscle activity leads the mechanical phase; jitter the lead per cycle
        lead_s = rng.uniform(0.05, 0.07) + _slow_noise(rng, n, fs, 1.5, 0.008)
        theta_l = theta + 2 * np.pi * f_c * lead_s
        frac = np.mod(theta_l, 2 * np.pi) / (2 * np.pi)  # 0 = swing onset
        swing = frac < 0.5
        stance = ~swing
        parity = np.floor_divide(theta_l, 2 * np.pi).astype(np.int64) % 2

        burst_frac = rng.uniform(0.13, 0.17) * f_c  # ~150 ms burst as cycle fraction
        burst = swing & (parity == 0) & (frac < burst_frac)
        swing_rest = swing & ~burst

        amp_burst = rng.uniform(2.0, 2.5)
        env_mid = _smooth(stance * (1.0 + 0.25 * np.sin(2 * theta_l)), fs)
        env_high = _smooth(amp_burst * burst, fs)
        env_low = _smooth(0.30 * swing_rest, fs)

        emg = (
            env_mid * _band_noise(rng, n, fs, 60.0, 150.0)
            + env_high * _band_noise(rng, n, fs, 150.0, 280.0)
            + env_low * _band_noise(rng, n, fs, 20.0, 60.0)
            + 0.12 * _band_noise(rng, n, fs, 20.0, 350.0)
        )

    emg = _calibrate_quantiles(emg, SCREENING_TARGETS.get(subject_id, (0.003, 0.02, 0.035)))
    return emg, knee


def write_subject_file(path, emg, knee, sample_rate_hz):
    with open(path, "w") as fh:
        fh.write("time\trf_emg\tknee_angle\n")
        for i in range(emg.size):
            fh.write(f"{i / sample_rate_hz!r}\t{float(emg[i])!r}\t{float(knee[i])!r}\n")


def generate_dataset(root, seed=12345, duration_s=20.0, sample_rate_hz=1000.0,
                     include_impaired=True):
    """Write the full 11-subject walking tree (plus one impaired subject)."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    paths = []
    for sid in sorted(SCREENING_TARGETS):
        emg, knee = synth_subject(sid, seed, duration_s, sample_rate_hz)
        path = root / f"healthy_subject{sid:02d}_walk.txt"
        write_subject_file(path, emg, knee, sample_rate_hz)
        paths.append(path)
    if include_impaired:
        emg, knee = synth_subject(12, seed, duration_s, sample_rate_hz)
        path = root / "impaired_subject12_walk.txt"
        write_subject_file(path, emg, knee, sample_rate_hz)
        paths.append(path)
    return paths
