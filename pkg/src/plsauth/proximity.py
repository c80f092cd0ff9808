"""RSSI-based proximity estimation for a mobile node and a static server.

Raw RSSI samples follow the log-distance path-loss model with log-normal
shadowing. The node smooths them with a scalar Kalman filter, inverts the
path-loss model on the 20th filter output and classifies the server as
IMMEDIATE (1 m), NEAR (3 m) or FAR (6 m).
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, replace

import numpy as np

from .crypto import derive_rng

DECISION_STEP = 20
REFERENCE_DISTANCES = {"IMMEDIATE": 1.0, "NEAR": 3.0, "FAR": 6.0}


class InsufficientSamples(ValueError):
    pass


class Region(str, enum.Enum):
    IMMEDIATE = "IMMEDIATE"
    NEAR = "NEAR"
    FAR = "FAR"

    @property
    def reference_distance(self) -> float:
        return REFERENCE_DISTANCES[self.value]


# region boundaries: geometric midpoints of the reference distances
IMMEDIATE_NEAR_BOUNDARY = math.sqrt(1.0 * 3.0)
NEAR_FAR_BOUNDARY = math.sqrt(3.0 * 6.0)


@dataclass(frozen=True)
class PathLossParams:
    p0: float
    d0: float
    n_exp: float
    sigma_x: float
    name: str = ""

    def __post_init__(self):
        if self.d0 <= 0 or self.n_exp <= 0 or self.sigma_x < 0:
            raise ValueError("need d0 > 0, n_exp > 0 and sigma_x >= 0")

    def mean_rssi(self, distance: float) -> float:
        return self.p0 - 10.0 * self.n_exp * math.log10(distance / self.d0)


AUDITORIUM = PathLossParams(p0=-60.12, d0=1.0, n_exp=1.7, sigma_x=6.49, name="auditorium")
LIBRARY = PathLossParams(p0=-61.91, d0=1.0, n_exp=1.85, sigma_x=6.30, name="library")
SCENARIOS = {"auditorium": AUDITORIUM, "library": LIBRARY}


@dataclass(frozen=True)
class KalmanConfig:
    a: float = 1.0
    b: float = 0.0
    h: float = 1.0
    q: float = 1e-6
    r: float = 0.1 ** 2
    u: float = 0.0


@dataclass(frozen=True)
class KalmanState:
    x: float
    p_cov: float


DEFAULT_KALMAN = KalmanConfig()


def synthesize_rssi(params: PathLossParams, true_distance: float, count: int, seed=None,
                    tx_offset_db: float = 0.0) -> np.ndarray:
    """``count`` RSSI samples (dBm) at ``true_distance`` metres.

    ``tx_offset_db`` shifts the transmit power, as an impersonator tuning
    its power level would.
    """
    if true_distance <= 0:
        raise ValueError("distance must be positive")
    if count < 1:
        raise ValueError("need at least one sample")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    mean = params.mean_rssi(true_distance) + tx_offset_db
    if params.sigma_x == 0:
        return np.full(count, mean)
    return mean + rng.normal(0.0, params.sigma_x, size=count)


def kalman_step(state: KalmanState, config: KalmanConfig, z: float) -> KalmanState:
    x_pred = config.a * state.x + config.b * config.u
    p_pred = config.a * state.p_cov * config.a + config.q
    gain = p_pred * config.h / (config.h * p_pred * config.h + config.r)
    x = x_pred + gain * (z - config.h * x_pred)
    p_cov = (1.0 - gain * config.h) * p_pred
    return KalmanState(x, p_cov)


def kalman_filter(samples, config: KalmanConfig = DEFAULT_KALMAN, steps=None, p0=1.0):
    """Filter outputs after each update; the first sample seeds the state."""
    samples = np.asarray(samples, dtype=float)
    steps = samples.size if steps is None else steps
    state = KalmanState(float(samples[0]), p0)
    out = np.empty(steps)
    for i in range(steps):
        state = kalman_step(state, config, float(samples[i]))
        out[i] = state.x
    return out


def kalman_weights(steps=DECISION_STEP, config: KalmanConfig = DEFAULT_KALMAN, p0=1.0):
    """Weights ``w`` with ``x_steps = w @ samples[:steps]``.

    The filter is linear in its measurements once the initial state is the
    first sample, so the weights follow from running it on unit impulses.
    """
    w = np.zeros(steps)
    for j in range(steps):
        impulse = np.zeros(steps)
        impulse[j] = 1.0
        state = KalmanState(impulse[0], p0)
        for i in range(steps):
            state = kalman_step(state, config, impulse[i])
        w[j] = state.x
    return w


def estimate_distance(rssi: float, params: PathLossParams) -> float:
    """Invert the log-normal path-loss model, including the shadowing bias term."""
    spread = params.sigma_x * math.log(10.0) / (10.0 * params.n_exp)
    return (params.d0 * 10.0 ** ((params.p0 - rssi) / (10.0 * params.n_exp))
            * math.exp(-0.5 * spread ** 2))


def classify(distance: float) -> Region:
    if distance < IMMEDIATE_NEAR_BOUNDARY:
        return Region.IMMEDIATE
    if distance < NEAR_FAR_BOUNDARY:
        return Region.NEAR
    return Region.FAR


def smoothed_params(params: PathLossParams, steps=DECISION_STEP,
                    config: KalmanConfig = DEFAULT_KALMAN) -> PathLossParams:
    """Path-loss parameters as seen through the filter.

    The filter output averages ``steps`` shadowing draws, so its deviation
    from the mean path loss has standard deviation ``sigma_x * ||w||``.
    """
    w = kalman_weights(steps, config)
    return replace(params, sigma_x=params.sigma_x * float(np.sqrt(w @ w)))


@dataclass(frozen=True)
class ProximityDecision:
    smoothed_rssi: float
    estimated_distance: float
    region: Region
    accepted: bool


def decide_proximity(params: PathLossParams, samples, expected_region,
                     config: KalmanConfig = DEFAULT_KALMAN) -> ProximityDecision:
    """Kalman-smooth the first 20 samples and classify the 20th output."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < DECISION_STEP:
        raise InsufficientSamples(f"need {DECISION_STEP} samples, got {samples.size}")
    smoothed = float(kalman_filter(samples, config, steps=DECISION_STEP)[-1])
    d_hat = estimate_distance(smoothed, smoothed_params(params, DECISION_STEP, config))
    region = classify(d_hat)
    return ProximityDecision(smoothed, d_hat, region, region == Region(expected_region))


def multi_location_verify(params: PathLossParams, location_count: int, samples_per_location,
                          expected_regions, config: KalmanConfig = DEFAULT_KALMAN) -> bool:
    """Accept only if every location's decision matches its expected region."""
    if location_count < 1:
        return False
    if len(samples_per_location) != location_count or len(expected_regions) != location_count:
        raise ValueError("one sample sequence and one expected region per location")
    return all(decide_proximity(params, s, r, config).accepted
               for s, r in zip(samples_per_location, expected_regions))


# -- experiment -------------------------------------------------------------------

PROXIMITY_CSV_VERSION = "proximity-v1"
PROXIMITY_COLUMNS = ["scenario", "true_distance_m", "trial", "rssi_raw_mean", "rssi_kalman_20",
                     "d_hat_m", "region", "accepted"]


def run_proximity_experiment(scenario: str, trials: int, seed: int,
                             distances=(1.0, 3.0, 6.0)):
    """Per-trial decisions at each reference distance, plus a confusion matrix.

    Returns ``(rows, confusion)`` where ``confusion[d][region]`` is the
    fraction of trials at true distance ``d`` classified as ``region``.
    """
    if scenario not in SCENARIOS:
        raise KeyError(f"unknown scenario {scenario!r}; choose from {sorted(SCENARIOS)}")
    params = SCENARIOS[scenario]
    rows = []
    confusion = {}
    for d in distances:
        expected = classify(d)
        counts = {r: 0 for r in Region}
        for t in range(trials):
            rng = derive_rng(seed, "proximity", scenario, int(d * 1000), t)
            samples = synthesize_rssi(params, d, DECISION_STEP, rng)
            dec = decide_proximity(params, samples, expected)
            counts[dec.region] += 1
            rows.append([scenario, d, t, float(samples.mean()), dec.smoothed_rssi,
                         dec.estimated_distance, dec.region.value, dec.accepted])
        confusion[d] = {r.value: counts[r] / trials for r in Region}
    return rows, confusion


def proximity_csv(scenario: str, rows, confusion) -> str:
    params = SCENARIOS[scenario]
    buf = io.StringIO()
    buf.write(f"# {PROXIMITY_CSV_VERSION} scenario={scenario} p0={params.p0} d0={params.d0} "
              f"n={params.n_exp} sigma={params.sigma_x}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PROXIMITY_COLUMNS)
    for row in rows:
        scen, d, t, raw, kal, dh, region, acc = row
        writer.writerow([scen, d, t, f"{raw:.4f}", f"{kal:.4f}", f"{dh:.4f}", region, int(acc)])
    buf.write("# confusion true_distance_m," + ",".join(r.value for r in Region) + "\n")
    for d, frac in confusion.items():
        buf.write(f"# confusion {d}," + ",".join(f"{frac[r.value]:.4f}" for r in Region) + "\n")
    return buf.getvalue()
