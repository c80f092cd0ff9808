"""Dolev-Yao message channel driven by a per-message action script."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..bits import BitVector
from ..crypto import SymmetricKey
from ..protocol.messages import ProtocolMessage, enc_bits, pack_fields
from ..protocol.runner import TranscriptEntry
from ..protocol.session import AUTH, NODE, SERVER, seal
from ..puf import fe_gen


class ScriptExhausted(RuntimeError):
    """The message flow outran the adversary's script."""


class ActionKind(str, enum.Enum):
    DELIVER = "DELIVER"
    DROP = "DROP"
    REPLAY = "REPLAY"
    INJECT = "INJECT"
    MODIFY = "MODIFY"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    index: int | None = None        # REPLAY: transcript index
    payload: bytes | str | None = None  # INJECT: raw bytes or "@forger-name"
    bits: tuple = ()                # MODIFY: bit positions, negative counts from the end

    def tag(self) -> str:
        if self.kind == ActionKind.REPLAY:
            return f"REPLAY({self.index})"
        if self.kind == ActionKind.INJECT:
            label = self.payload if isinstance(self.payload, str) else f"{len(self.payload)}B"
            return f"INJECT({label})"
        if self.kind == ActionKind.MODIFY:
            return "MODIFY(" + ",".join(map(str, self.bits)) + ")"
        return self.kind.value

    def __str__(self) -> str:
        if self.kind == ActionKind.REPLAY:
            return f"REPLAY:{self.index}"
        if self.kind == ActionKind.INJECT:
            return "INJECT:" + (self.payload if isinstance(self.payload, str) else self.payload.hex())
        if self.kind == ActionKind.MODIFY:
            return "MODIFY:" + ",".join(map(str, self.bits))
        return self.kind.value


DELIVER = Action(ActionKind.DELIVER)
DROP = Action(ActionKind.DROP)


def replay(index: int) -> Action:
    return Action(ActionKind.REPLAY, index=index)


def inject(payload) -> Action:
    return Action(ActionKind.INJECT, payload=payload)


def modify(*bits: int) -> Action:
    return Action(ActionKind.MODIFY, bits=tuple(bits))


def parse_action(token: str) -> Action:
    """``DELIVER``, ``DROP``, ``REPLAY:<i>``, ``INJECT:<hex|@forger>``, ``MODIFY:<b>,<b>``."""
    head, _, arg = token.strip().partition(":")
    head = head.upper()
    try:
        kind = ActionKind(head)
    except ValueError:
        raise ValueError(f"unknown action {token!r}") from None
    if kind in (ActionKind.DELIVER, ActionKind.DROP):
        if arg:
            raise ValueError(f"{head} takes no argument")
        return Action(kind)
    if not arg:
        raise ValueError(f"{head} needs an argument")
    if kind == ActionKind.REPLAY:
        return replay(int(arg))
    if kind == ActionKind.INJECT:
        if arg.startswith("@"):
            if arg[1:] not in FORGERS:
                raise ValueError(f"unknown forger {arg!r}")
            return inject(arg)
        return inject(bytes.fromhex(arg))
    return modify(*(int(b) for b in arg.split(",")))


def parse_script(text: str) -> list[Action]:
    """Whitespace-separated actions; commas belong to ``MODIFY`` bit lists."""
    return [parse_action(tok) for tok in text.split()]


def flip_bits(data: bytes, positions) -> bytes:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    for pos in positions:
        if not -bits.size <= pos < bits.size:
            raise ValueError(f"bit position {pos} outside a {bits.size}-bit message")
        bits[pos] ^= 1
    return np.packbits(bits).tobytes()


# -- forgers: messages an adversary can build from public knowledge alone --------

def forge_response(channel: "AdversarialChannel", in_flight: bytes) -> bytes:
    """A well-formed (C_A, T_A, H') from an adversary without the device's PUF."""
    rng = channel.rng
    fake = fe_gen(BitVector.random(511, rng), rng)
    plain = pack_fields(rng.bytes(8), rng.bytes(8), enc_bits(BitVector.random(245, rng)),
                        rng.bytes(16), enc_bits(BitVector.random(511, rng)),
                        enc_bits(BitVector.random(511, rng)))
    c_a, t_a = seal(fake.key, plain, f"{AUTH}/3|{NODE}".encode(), rng, [])
    return ProtocolMessage(AUTH, NODE, (c_a, t_a, enc_bits(fake.helper))).serialize()


def forge_challenge(channel: "AdversarialChannel", in_flight: bytes) -> bytes:
    """A well-formed (C_B, T_B) under a key the adversary made up."""
    rng = channel.rng
    key = SymmetricKey(BitVector.random(256, rng))
    plain = pack_fields(rng.bytes(8), rng.bytes(8), rng.bytes(32), rng.bytes(16), rng.bytes(16))
    c_b, t_b = seal(key, plain, f"{AUTH}/2|{SERVER}".encode(), rng, [])
    return ProtocolMessage(AUTH, SERVER, (c_b, t_b)).serialize()


FORGERS = {"forge-response": forge_response, "forge-challenge": forge_challenge}


class AdversarialChannel:
    """Sees every message verbatim and applies the next scripted action.

    With no script loaded (``None``) every message is delivered; with a
    script, running out of actions raises :class:`ScriptExhausted`.
    """

    def __init__(self, script=None, rng: np.random.Generator | None = None):
        self.transcript: list[TranscriptEntry] = []
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.load(script)

    def load(self, script):
        self._script = None if script is None else deque(script)

    @property
    def pending(self) -> int:
        return 0 if self._script is None else len(self._script)

    def transmit(self, data: bytes, phase: str, direction: str) -> bytes | None:
        if self._script is None:
            action = DELIVER
        elif not self._script:
            raise ScriptExhausted(f"no action left for message {len(self.transcript)} "
                                  f"({phase} {direction})")
        else:
            action = self._script.popleft()

        if action.kind == ActionKind.DELIVER:
            delivered = data
        elif action.kind == ActionKind.DROP:
            delivered = None
        elif action.kind == ActionKind.REPLAY:
            if not 0 <= action.index < len(self.transcript):
                raise ValueError(f"no transcript entry {action.index} to replay")
            delivered = self.transcript[action.index].sent
        elif action.kind == ActionKind.INJECT:
            if isinstance(action.payload, str):
                delivered = FORGERS[action.payload.lstrip("@")](self, data)
            else:
                delivered = bytes(action.payload)
        else:
            delivered = flip_bits(data, action.bits)
        self.transcript.append(TranscriptEntry(len(self.transcript), phase, direction, data,
                                               delivered, action.tag()))
        return delivered

    def dump(self) -> str:
        return "".join(entry.line() + "\n" for entry in self.transcript)
