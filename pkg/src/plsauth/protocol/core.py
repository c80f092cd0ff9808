"""Protocol constants, derivations, party state and enrollment.

Every configurable length lives in :data:`CONSTANTS`; the reference table in
``docs/protocol.md`` mirrors it.
"""

from __future__ import annotations

import enum
import hashlib
import threading
from dataclasses import dataclass, field

import numpy as np

from ..bits import BitVector
from ..crypto import NONCE_BITS, NonceRegistry, SymmetricKey, expand_bits, hash_bits
from ..proximity import Region
from ..puf import CHALLENGE_BITS, PufDevice, fe_gen, majority_response

ID_BITS = 64
ALIAS_BITS = 128
LOOKUP_BITS = 128
PUF_READS = 5
DEFAULT_EMERGENCY_SETS = 4
SERVER_NAME = "server-B"
SKG_CODE = "polar_512_267"
SKG_DECODER_PARAMS = {"list_size": 128}

CONSTANTS = {
    "real_id_bits": ID_BITS,
    "alias_bits": ALIAS_BITS,
    "nonce_bits": NONCE_BITS,
    "challenge_bits": CHALLENGE_BITS,
    "lookup_bits": LOOKUP_BITS,
    "puf_reads_per_response": PUF_READS,
    "default_emergency_sets": DEFAULT_EMERGENCY_SETS,
    "skg_code": SKG_CODE,
    "skg_list_size": SKG_DECODER_PARAMS["list_size"],
}


class DuplicateRegistration(ValueError):
    pass


class EmergencyExhausted(RuntimeError):
    """No emergency entries left; the device has to be re-enrolled."""


class ResumptionUnavailable(RuntimeError):
    """Resumption requested without a resumption secret."""


class Status(str, enum.Enum):
    SUCCESS = "SUCCESS"
    REJECT = "REJECT"
    DESYNC_RECOVERED = "DESYNC_RECOVERED"


@dataclass
class SessionOutcome:
    status: Status
    reason: str = ""
    session_key: BitVector | None = None
    early_data: bytes | None = None
    transcript: list = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return self.status in (Status.SUCCESS, Status.DESYNC_RECOVERED)

    def label(self) -> str:
        return f"REJECT({self.reason})" if self.status == Status.REJECT else self.status.value

    @classmethod
    def reject(cls, reason: str) -> "SessionOutcome":
        return cls(Status.REJECT, reason)


# -- derivations ------------------------------------------------------------------

def identity_bits(name: str, length: int = ID_BITS) -> BitVector:
    return BitVector.from_bytes(hashlib.sha256(b"identity" + name.encode()).digest()[:length // 8])


def derive_alias_next(real_id: BitVector, n_b: BitVector, r3: BitVector) -> BitVector:
    """Next alias = hash(A || N_B || R3), truncated to the alias length."""
    return hash_bits(BitVector.concat(real_id, n_b, r3))[:ALIAS_BITS]


def derive_challenge_chain(challenge: BitVector, nonce: BitVector) -> BitVector:
    """Ch' = hash(Ch || nonce); 256 bits, the challenge length."""
    return hash_bits(BitVector.concat(challenge, nonce))


def derive_resumption_alias(real_id: BitVector, y_a: BitVector) -> BitVector:
    return hash_bits(BitVector.concat(real_id, y_a))[:ALIAS_BITS]


def derive_resumption_secret(session_key: BitVector, lookup: BitVector, n: int) -> BitVector:
    """Z = expand(hash(K || look-up identifier)) stretched to ``n`` bits."""
    return expand_bits(hash_bits(BitVector.concat(session_key, lookup)), n)


def fe_rng(r3: BitVector, n_a: BitVector, n_b: BitVector) -> np.random.Generator:
    """Codeword randomness for Gen(R3), reproducible on both sides.

    Both parties must arrive at the same next key K_R3 while only R3 crosses
    the channel (encrypted), so the codeword is drawn from a generator
    seeded by the session's private values.
    """
    seed = hash_bits(BitVector.concat(r3, n_a, n_b)).to_bytes()
    return np.random.default_rng(int.from_bytes(seed[:16], "big"))


# Which stored or exchanged values each derived value is computed from. Used
# to check structurally that stored state never determines older secrets.
DERIVATIONS = {
    "Ch3": ("Ch2", "N_A"),
    "Ch4": ("Ch3", "N_B"),
    "R3": ("PUF", "Ch3"),
    "R4": ("PUF", "Ch4"),
    "K_R3": ("R3", "N_A", "N_B"),
    "alias2": ("A", "N_B", "R3"),
    "K": ("Y_A",),
    "Z": ("K", "lookup"),
    "Y*": ("Z", "Y_A"),
    "K*": ("Y*",),
    "alias_resume": ("A", "Y_A"),
}


# -- party state ------------------------------------------------------------------

@dataclass
class EmergencyEntry:
    alias: BitVector
    key: SymmetricKey


@dataclass
class NodeState:
    real_id: BitVector
    device: PufDevice
    alias: BitVector
    k_r: SymmetricKey
    emergency: list
    expected_regions: tuple = (Region.IMMEDIATE,)
    server_id: BitVector = field(default_factory=lambda: identity_bits(SERVER_NAME))
    z: BitVector | None = None
    next_challenge: BitVector | None = None
    needs_recovery: bool = False
    seen_nonces: NonceRegistry = field(default_factory=NonceRegistry)
    key_log: list = field(default_factory=list)

    def stored_secrets(self) -> dict:
        """Everything the node keeps between sessions."""
        out = {"A": self.real_id, "alias": self.alias, "K_R": self.k_r.material}
        if self.z is not None:
            out["Z"] = self.z
        for i, e in enumerate(self.emergency):
            out[f"emerg_alias_{i}"] = e.alias
            out[f"emerg_key_{i}"] = e.key.material
        return out


@dataclass
class EmergencyRecord:
    challenge: BitVector
    response: BitVector
    key: SymmetricKey


@dataclass
class DeviceRecord:
    real_id: BitVector
    alias: BitVector
    k_r: SymmetricKey
    challenge: BitVector
    response: BitVector
    emergency: dict  # alias bytes -> EmergencyRecord, in enrollment order
    z: BitVector | None = None
    alias_presented: bool = False
    used_nonces: NonceRegistry = field(default_factory=NonceRegistry)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self.lock = threading.Lock()


class Server:
    """Device database plus the server's own identity."""

    def __init__(self, name: str = SERVER_NAME):
        self.name = name
        self.server_id = identity_bits(name)
        self.records: dict[bytes, DeviceRecord] = {}
        self._aliases: dict[bytes, bytes] = {}
        self._lookup_lock = threading.Lock()
        self.issued_aliases: set[bytes] = set()
        self.key_log: list = []

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_lookup_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lookup_lock = threading.Lock()

    def record(self, real_id: BitVector) -> DeviceRecord:
        return self.records[real_id.to_bytes()]

    def find_alias(self, alias: BitVector):
        """``(record, emergency_entry_or_None)`` for an alias, or ``None``."""
        with self._lookup_lock:
            owner = self._aliases.get(alias.to_bytes())
        if owner is None:
            return None
        rec = self.records[owner]
        if alias == rec.alias:
            return rec, None
        entry = rec.emergency.get(alias.to_bytes())
        return (rec, entry) if entry is not None else None

    def bind_alias(self, rec: DeviceRecord, alias: BitVector):
        with self._lookup_lock:
            self._aliases[alias.to_bytes()] = rec.real_id.to_bytes()
            self.issued_aliases.add(alias.to_bytes())

    def unbind_alias(self, alias: BitVector):
        with self._lookup_lock:
            self._aliases.pop(alias.to_bytes(), None)

    def fresh_alias(self, rng) -> BitVector:
        while True:
            alias = BitVector.random(ALIAS_BITS, rng)
            if alias.to_bytes() not in self.issued_aliases:
                return alias


# -- enrollment -------------------------------------------------------------------

@dataclass
class SecureChannel:
    """Off-line enrollment link; records what crossed it."""

    log: list = field(default_factory=list)

    def send(self, direction: str, *fields):
        self.log.append((direction, fields))
        return fields


def enroll(device: PufDevice, server: Server, rng: np.random.Generator,
           secure_channel: SecureChannel | None = None,
           emergency_count: int = DEFAULT_EMERGENCY_SETS,
           expected_regions=(Region.IMMEDIATE,)):
    """Register ``device`` with ``server``; returns ``(NodeState, DeviceRecord)``."""
    channel = secure_channel or SecureChannel()
    real_id = identity_bits(device.device_id)
    (a,) = channel.send("node->server", real_id)
    if a.to_bytes() in server.records:
        raise DuplicateRegistration(f"device {device.device_id!r} is already registered")

    ch1 = BitVector.random(CHALLENGE_BITS, rng)
    ch2 = BitVector.random(CHALLENGE_BITS, rng)
    alias1 = server.fresh_alias(rng)
    server.issued_aliases.add(alias1.to_bytes())
    c_emerg = [BitVector.random(CHALLENGE_BITS, rng) for _ in range(emergency_count)]
    a_emerg = []
    for _ in range(emergency_count):
        alias = server.fresh_alias(rng)
        server.issued_aliases.add(alias.to_bytes())
        a_emerg.append(alias)
    channel.send("server->node", ch1, ch2, alias1, tuple(c_emerg), tuple(a_emerg))

    r1 = majority_response(device, ch1, rng, PUF_READS)
    r2 = majority_response(device, ch2, rng, PUF_READS)
    r_emerg = [majority_response(device, c, rng, PUF_READS) for c in c_emerg]
    k_r1 = fe_gen(r1, rng).key
    k_emerg = [fe_gen(r, rng).key for r in r_emerg]
    channel.send("node->server", r2, tuple(r_emerg), k_r1, tuple(k_emerg))

    node = NodeState(real_id, device, alias1, k_r1,
                     [EmergencyEntry(al, k) for al, k in zip(a_emerg, k_emerg)],
                     tuple(Region(r) for r in expected_regions), server.server_id)
    record = DeviceRecord(real_id, alias1, k_r1, ch2, r2,
                          {al.to_bytes(): EmergencyRecord(c, r, k)
                           for al, c, r, k in zip(a_emerg, c_emerg, r_emerg, k_emerg)})
    server.records[real_id.to_bytes()] = record
    server.bind_alias(record, alias1)
    for al in a_emerg:
        server.bind_alias(record, al)
    return node, record


def audit_state(node: NodeState, server: Server) -> str:
    """``"synced"``, ``"emergency"`` (recoverable) or ``"broken"``.

    Synced means alias, fuzzy key and next challenge agree; otherwise the
    pair is recoverable if some node emergency alias is still on file at
    the server.
    """
    rec = server.records.get(node.real_id.to_bytes())
    if rec is None:
        return "broken"
    synced = (node.alias == rec.alias and node.k_r == rec.k_r and not rec.alias_presented
              and (node.next_challenge is None or node.next_challenge == rec.challenge))
    if synced and not node.needs_recovery:
        return "synced"
    for e in node.emergency:
        srv = rec.emergency.get(e.alias.to_bytes())
        if srv is not None and srv.key == e.key:
            return "emergency"
    return "synced" if synced else "broken"
