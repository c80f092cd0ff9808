"""Honest end-to-end lifecycles: enroll, authenticate, then resume."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..coding import builtin_code
from ..crypto import derive_rng
from ..protocol.core import (SKG_CODE, SKG_DECODER_PARAMS, NodeState, Server, SessionOutcome,
                             enroll)
from ..protocol.runner import DirectChannel, RadioEnvironment, SessionRun, authenticate, resume
from ..puf import PufDevice


def states_agree(node: NodeState, server: Server) -> bool:
    """Node and server hold the same alias, fuzzy key, next CRP and resumption secret."""
    rec = server.record(node.real_id)
    return (node.alias == rec.alias and node.k_r == rec.k_r and not rec.alias_presented
            and (node.next_challenge is None or node.next_challenge == rec.challenge)
            and node.z == rec.z)


@dataclass
class LifecycleResult:
    runs: list = field(default_factory=list)
    consistent: bool = True

    @property
    def success(self) -> bool:
        return bool(self.runs) and all(r.keys_agree() for r in self.runs) and self.consistent

    @property
    def failure_reason(self) -> str:
        for r in self.runs:
            if not r.keys_agree():
                srv = r.server.label() if r.server is not None else "-"
                return f"{r.phase}: node={r.node.label()} server={srv}"
        return "" if self.consistent else "state mismatch after SUCCESS"


def run_lifecycle(seed: int, index: int = 0, p: float = 0.05, p_intra: float = 0.05,
                  resumptions: int = 3, code=None, decoder_params=None,
                  environment: RadioEnvironment | None = None, channel=None) -> LifecycleResult:
    """Enroll a fresh device, authenticate once, resume ``resumptions`` times.

    Stops at the first session that does not end with both parties
    accepting; after every accepted session the stored state is compared.
    """
    code = code or builtin_code(SKG_CODE)
    if decoder_params is None and code.family.value == "polar":
        decoder_params = dict(SKG_DECODER_PARAMS)
    env = environment or RadioEnvironment(p=p)
    channel = channel if channel is not None else DirectChannel()
    server = Server()
    device = PufDevice.manufacture(f"node-{index}", derive_rng(seed, "device", index),
                                   p_intra=p_intra)
    node, _ = enroll(device, server, derive_rng(seed, "enroll", index))
    result = LifecycleResult()

    def step(label, fn):
        run: SessionRun = fn(derive_rng(seed, label, index, "node"),
                             derive_rng(seed, label, index, "server"))
        result.runs.append(run)
        if run.keys_agree():
            result.consistent &= states_agree(node, server)
        return run.keys_agree()

    if not step("auth", lambda r, s: authenticate(node, server, channel, code, env, r,
                                                  decoder_params, s)):
        return result
    for i in range(resumptions):
        data = f"early-data-{i}".encode()
        if not step(f"resume-{i}", lambda r, s: resume(node, server, channel, code, data, env,
                                                       r, decoder_params, s)):
            break
    return result


def outcome_line(outcome: SessionOutcome | None) -> str:
    return "-" if outcome is None else outcome.label()
