"""Drive the node and server state machines over a message channel."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..bits import BitVector
from ..coding.base import SlepianWolfCode
from ..proximity import AUDITORIUM, DECISION_STEP, PathLossParams, synthesize_rssi
from ..skg import BscSource
from .core import EmergencyExhausted, NodeState, Server, SessionOutcome
from .session import (AUTH, NODE, RESUME, SERVER, NodeAuthSession, NodeResumeSession,
                      ProximityInputs, ServerSession)


@dataclass
class TranscriptEntry:
    index: int
    phase: str
    direction: str
    sent: bytes
    delivered: bytes | None
    action: str

    def line(self) -> str:
        payload = (self.delivered if self.delivered is not None else self.sent).hex()
        return f"{self.phase} {self.direction} {payload} {self.action}"


class DirectChannel:
    """Delivers every message unchanged and records it."""

    def __init__(self):
        self.transcript: list[TranscriptEntry] = []

    def transmit(self, data: bytes, phase: str, direction: str) -> bytes | None:
        self.transcript.append(TranscriptEntry(len(self.transcript), phase, direction,
                                               data, data, "DELIVER"))
        return data


@dataclass
class RadioEnvironment:
    """Physical conditions of one session.

    ``p`` is the crossover probability between the two quantized channel
    observations; ``server_distances`` are the true distances between the
    node and whoever answers it, one per measurement location.
    """

    p: float = 0.05
    path_loss: PathLossParams = AUDITORIUM
    server_distances: tuple = (1.0,)
    tx_offset_db: float = 0.0
    samples: int = DECISION_STEP

    def pilots(self, n: int, rng: np.random.Generator):
        y_a, y_b = BscSource(self.p).sample(n, rng)
        return BitVector(y_a), BitVector(y_b)

    def measure(self, rng: np.random.Generator) -> ProximityInputs:
        return ProximityInputs(self.path_loss, [
            synthesize_rssi(self.path_loss, d, self.samples, rng, self.tx_offset_db)
            for d in self.server_distances])


@dataclass
class SessionRun:
    """Both parties' outcomes of one session plus the messages exchanged."""

    phase: str
    node: SessionOutcome
    server: SessionOutcome | None
    transcript: list = field(default_factory=list)

    @property
    def both_accepted(self) -> bool:
        return self.node.accepted and self.server is not None and self.server.accepted

    def keys_agree(self) -> bool:
        return (self.both_accepted and self.node.session_key is not None
                and self.node.session_key == self.server.session_key)


def _exchange(first: bytes | None, phase: str, node_sess, server_sess, channel):
    start = len(channel.transcript)
    out, sender = first, NODE
    while out is not None:
        direction = "node->server" if sender == NODE else "server->node"
        delivered = channel.transmit(out, phase, direction)
        if delivered is None:
            break
        if sender == NODE:
            out, sender = server_sess.handle(delivered), SERVER
        else:
            out, sender = node_sess.handle(delivered), NODE
    return channel.transcript[start:]


def _finish(phase, node_sess, server_sess, transcript) -> SessionRun:
    node_out = node_sess.outcome or SessionOutcome.reject("timeout")
    if server_sess.outcome is not None:
        server_out = server_sess.outcome
    elif server_sess.started:
        server_out = SessionOutcome.reject("timeout")
    else:
        server_out = None
    for o in (node_out, server_out):
        if o is not None:
            o.transcript = transcript
    return SessionRun(phase, node_out, server_out, transcript)


def authenticate(node: NodeState, server: Server, channel, skg_code: SlepianWolfCode,
                 environment: RadioEnvironment | None = None, rng=None,
                 decoder_params=None, server_rng=None, use_emergency=None) -> SessionRun:
    """One mutual authentication, using an emergency entry if the node needs recovery."""
    env = environment or RadioEnvironment()
    rng = rng if rng is not None else np.random.default_rng()
    server_rng = server_rng if server_rng is not None else rng
    y_a, y_b = env.pilots(skg_code.n, rng)
    proximity = env.measure(rng)
    node_sess = NodeAuthSession(node, skg_code, y_a, rng, use_emergency)
    server_sess = ServerSession(server, skg_code, y_b, env.p, server_rng, decoder_params)
    first = node_sess.start(proximity)
    transcript = _exchange(first, AUTH, node_sess, server_sess, channel)
    return _finish(AUTH, node_sess, server_sess, transcript)


def recover_desync(node: NodeState, server: Server, channel, skg_code: SlepianWolfCode,
                   environment: RadioEnvironment | None = None, rng=None,
                   decoder_params=None, server_rng=None) -> SessionRun:
    """Authenticate with the next emergency alias; raises EmergencyExhausted if none remain."""
    if not node.emergency:
        raise EmergencyExhausted("no emergency aliases left; re-enrollment required")
    return authenticate(node, server, channel, skg_code, environment, rng, decoder_params,
                        server_rng, use_emergency=True)


def resume(node: NodeState, server: Server, channel, skg_code: SlepianWolfCode,
           early_data: bytes = b"", environment: RadioEnvironment | None = None, rng=None,
           decoder_params=None, server_rng=None) -> SessionRun:
    """0-RTT resumption carrying ``early_data`` in the first flight."""
    env = environment or RadioEnvironment()
    rng = rng if rng is not None else np.random.default_rng()
    server_rng = server_rng if server_rng is not None else rng
    y_a, y_b = env.pilots(skg_code.n, rng)
    node_sess = NodeResumeSession(node, skg_code, y_a, rng, early_data)
    server_sess = ServerSession(server, skg_code, y_b, env.p, server_rng, decoder_params)
    transcript = _exchange(node_sess.start(), RESUME, node_sess, server_sess, channel)
    return _finish(RESUME, node_sess, server_sess, transcript)
