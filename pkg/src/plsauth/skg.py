"""Secret key generation: correlated sources, reconciliation, privacy amplification
and the frame-error-rate experiment driver.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .bits import BitVector
from .coding.base import DecodeFailure, Family, SlepianWolfCode, Syndrome
from .crypto import derive_rng, hash_bits

CSV_VERSION = "fer-v1"
CSV_COLUMNS = ["family", "n", "L_or_t", "p", "H_p", "trials", "failures", "fer", "ci_lo", "ci_hi"]

# decoder parameter that the L_or_t column reports, per family
SWEEP_PARAM = {Family.POLAR: "list_size", Family.LDPC: "osd_order", Family.BCH: "list_order"}


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def entropy_to_p(h: float) -> float:
    """Crossover probability in [0, 0.5] whose binary entropy is ``h``."""
    if not 0.0 <= h <= 1.0:
        raise ValueError(f"entropy {h} outside [0, 1]")
    if h == 0.0:
        return 0.0
    if h == 1.0:
        return 0.5
    return bisect(lambda p: binary_entropy(p) - h, 1e-300, 0.5, xtol=1e-12, maxiter=400)


class BscSource:
    """Quantized reciprocal channel seen as a binary symmetric source.

    Alice's bits are i.i.d. uniform; Bob's differ from hers independently with
    probability ``p``. Other quantizers plug in by providing the same
    ``sample(n, rng)`` method.
    """

    def __init__(self, p: float):
        if not 0.0 <= p <= 0.5:
            raise ValueError(f"crossover {p} outside [0, 0.5]")
        self.p = p

    def sample(self, n: int, rng: np.random.Generator):
        y_a = rng.integers(0, 2, size=n, dtype=np.uint8)
        flips = (rng.random(n) < self.p).astype(np.uint8)
        return y_a, y_a ^ flips


@dataclass(frozen=True)
class CorrelatedSourcePair:
    y_a: BitVector
    y_b: BitVector
    p: float
    seed: int | None = None

    @property
    def n(self) -> int:
        return len(self.y_a)


def sample_pair(n: int, p: float, seed=None, source=None) -> CorrelatedSourcePair:
    """Draw one correlated pair; ``seed`` may be an int or a Generator."""
    source = source or BscSource(p)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    y_a, y_b = source.sample(n, rng)
    return CorrelatedSourcePair(BitVector(y_a), BitVector(y_b), p,
                                seed if isinstance(seed, int) else None)


def privacy_amplification(y) -> BitVector:
    return hash_bits(y if isinstance(y, BitVector) else BitVector(y))


def alice_reconciliation(code: SlepianWolfCode, y_a):
    """Syndrome to publish and Alice's key."""
    bits = y_a.bits if isinstance(y_a, BitVector) else np.asarray(y_a, dtype=np.uint8)
    return code.syndrome(bits), privacy_amplification(bits)


@dataclass
class BobOutcome:
    estimate: np.ndarray | None
    key: BitVector | None
    verified: bool
    info: dict = field(default_factory=dict)


def bob_reconciliation(code: SlepianWolfCode, y_b, syndrome: Syndrome, p: float,
                       **params) -> BobOutcome:
    """Estimate Alice's sequence and derive the key; a decoder failure yields no key."""
    bits = y_b.bits if isinstance(y_b, BitVector) else np.asarray(y_b, dtype=np.uint8)
    try:
        res = code.decode(bits, syndrome, p, **params)
    except DecodeFailure as exc:
        return BobOutcome(None, None, False, {"error": str(exc)})
    return BobOutcome(res.estimate, privacy_amplification(res.estimate), res.verified, res.info)


@dataclass
class Reconciliation:
    success: bool
    key_a: BitVector
    key_b: BitVector | None
    estimate: np.ndarray | None
    verified: bool


def reconcile(pair: CorrelatedSourcePair, code: SlepianWolfCode, decoder_params=None,
              in_transit=None) -> Reconciliation:
    """Run both sides of reconciliation and privacy amplification.

    ``in_transit`` may rewrite the syndrome between Alice and Bob (fault
    injection). ``success`` means Bob's estimate equals Alice's sequence.
    """
    if pair.n != code.n:
        raise ValueError(f"pair length {pair.n} does not match code length {code.n}")
    syndrome, key_a = alice_reconciliation(code, pair.y_a)
    if in_transit is not None:
        syndrome = in_transit(syndrome)
    bob = bob_reconciliation(code, pair.y_b, syndrome, pair.p, **(decoder_params or {}))
    success = bob.estimate is not None and bool(np.array_equal(bob.estimate, pair.y_a.bits))
    return Reconciliation(success, key_a, bob.key, bob.estimate, bob.verified)


# -- FER experiments ------------------------------------------------------------

def wald_interval(failures: int, trials: int, z: float = 1.96):
    """Normal-approximation interval with a 0.5/trials continuity term, clipped to [0, 1]."""
    fer = failures / trials
    half = z * math.sqrt(fer * (1 - fer) / trials) + 0.5 / trials
    return max(0.0, fer - half), min(1.0, fer + half)


@dataclass
class FerPoint:
    family: str
    n: int
    param: object
    p: float
    trials: int
    failures: int

    @property
    def fer(self) -> float:
        return self.failures / self.trials

    @property
    def sigma(self) -> float:
        f = self.fer
        return math.sqrt(f * (1 - f) / self.trials)

    @property
    def ci(self):
        return wald_interval(self.failures, self.trials)

    def row(self):
        lo, hi = self.ci
        return [self.family, self.n, "bp" if self.param is None else self.param,
                repr(self.p), f"{binary_entropy(self.p):.6f}", self.trials, self.failures,
                f"{self.fer:.6g}", f"{lo:.6g}", f"{hi:.6g}"]


@dataclass
class FerExperiment:
    """One code, several decoder settings, a grid of crossover probabilities.

    ``params`` lists the values of the family's sweep parameter
    (``list_size``, ``osd_order`` or ``list_order``); every decoder setting at
    a grid point sees the same sampled pairs.
    """

    code: SlepianWolfCode
    params: list
    p_grid: list
    trials: int
    seed: int = 0
    results: list = field(default_factory=list)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be positive")


def trial_rng(seed: int, p_index: int, trial: int):
    return derive_rng(seed, "fer", p_index, trial)


def run_fer_sweep(experiment: FerExperiment, progress=None):
    """Fill ``experiment.results`` with one :class:`FerPoint` per (param, p)."""
    code = experiment.code
    key = SWEEP_PARAM[code.family]
    experiment.results = []
    for pi, p in enumerate(experiment.p_grid):
        failures = [0] * len(experiment.params)
        source = BscSource(p)
        for t in range(experiment.trials):
            y_a, y_b = source.sample(code.n, trial_rng(experiment.seed, pi, t))
            s = code.syndrome(y_a)
            for j, value in enumerate(experiment.params):
                try:
                    est = code.decode(y_b, s, p, **{key: value}).estimate
                    failures[j] += not np.array_equal(est, y_a)
                except DecodeFailure:
                    failures[j] += 1
        for j, value in enumerate(experiment.params):
            experiment.results.append(FerPoint(code.family.value, code.n, value, p,
                                               experiment.trials, failures[j]))
        if progress:
            progress(pi, p)
    return experiment.results


def results_csv(points) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for pt in points:
        writer.writerow(pt.row())
    return buf.getvalue()


def monotonicity_violations(values, sigmas, increasing=True):
    """Adjacent-pair violations of a monotone trend.

    Returns ``(within, beyond)``: violations whose size is at most two
    combined standard deviations, and those larger than that.
    """
    within = beyond = 0
    for (a, sa), (b, sb) in zip(zip(values, sigmas), zip(values[1:], sigmas[1:])):
        drop = (a - b) if increasing else (b - a)
        if drop <= 0:
            continue
        if drop <= 2 * math.hypot(sa, sb):
            within += 1
        else:
            beyond += 1
    return within, beyond
