"""Enroll a device, authenticate, resume with early data and audit state.

Run with ``python3 demos/lifecycle_demo.py``.
"""
import numpy as np

from plsauth.coding import builtin_code
from plsauth.protocol import (SKG_CODE, SKG_DECODER_PARAMS, DirectChannel, RadioEnvironment,
                              Server, audit_state, authenticate, enroll, resume)
from plsauth.puf import PufDevice


def show(run):
    srv = run.server.label() if run.server is not None else "-"
    print(f"{run.phase:<7} node={run.node.label():<12} server={srv:<12} "
          f"keys agree={run.keys_agree()}  messages={len(run.transcript)}")


def main():
    rng = np.random.default_rng(5)
    server = Server()
    device = PufDevice.manufacture("demo-node", rng)
    node, _ = enroll(device, server, rng)
    print(f"enrolled {device.device_id}; emergency aliases held: {len(node.emergency)}")

    code = builtin_code(SKG_CODE)
    channel = DirectChannel()
    env = RadioEnvironment(p=0.05)

    show(authenticate(node, server, channel, code, env, rng, dict(SKG_DECODER_PARAMS)))
    print(f"audit: {audit_state(node, server)}")
    for i in range(2):
        run = resume(node, server, channel, code, f"reading {i}".encode(), env, rng,
                     dict(SKG_DECODER_PARAMS))
        show(run)
    print(f"audit: {audit_state(node, server)}")

    print("\nfirst authentication messages on the wire:")
    run = authenticate(node, server, channel, code, env, rng, dict(SKG_DECODER_PARAMS))
    for entry in run.transcript:
        line = entry.line()
        print("  " + (line[:90] + "..." if len(line) > 90 else line))


if __name__ == "__main__":
    main()
