"""Distance bounding from RSSI: path loss, Kalman smoothing and regions.

Run with ``python3 demos/proximity_demo.py``.
"""
import numpy as np

from plsauth.proximity import (AUDITORIUM, DECISION_STEP, Region, classify, decide_proximity,
                               estimate_distance, kalman_filter, kalman_weights,
                               multi_location_verify, smoothed_params, synthesize_rssi)


def main():
    params = AUDITORIUM
    print(f"environment {params.name}: P0={params.p0} dBm, n={params.n_exp}, sigma={params.sigma_x} dB")

    w = kalman_weights(DECISION_STEP)
    eff = smoothed_params(params)
    print(f"filter weights sum to {w.sum():.3f}; effective sigma after {DECISION_STEP} steps "
          f"= {eff.sigma_x:.2f} dB\n")

    rng = np.random.default_rng(11)
    for d in (1.0, 3.0, 6.0):
        samples = synthesize_rssi(params, d, DECISION_STEP, rng)
        smooth = kalman_filter(samples, steps=DECISION_STEP)
        dec = decide_proximity(params, samples, classify(d))
        print(f"true {d:3.1f} m: raw mean {samples.mean():7.2f} dBm, filtered {smooth[-1]:7.2f} dBm, "
              f"estimate {dec.estimated_distance:5.2f} m -> {dec.region.value:<9} accepted={dec.accepted}")

    print(f"\nraw single-sample estimate at 3 m: "
          f"{estimate_distance(float(synthesize_rssi(params, 3.0, 1, rng)[0]), params):.2f} m")

    print("\nAn attacker 6 m away boosting transmit power by 10 dB, checked at three locations:")
    expected = [Region.IMMEDIATE, Region.NEAR, Region.FAR]
    true_d = [1.0, 3.0, 6.0]
    accepted = 0
    for t in range(200):
        seqs = [synthesize_rssi(params, 6.0, DECISION_STEP, rng) + 10.0 for _ in true_d]
        accepted += multi_location_verify(params, 3, seqs, expected)
    print(f"  accepted {accepted}/200")


if __name__ == "__main__":
    main()
