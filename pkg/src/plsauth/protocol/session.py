"""Node and server state machines for authentication and 0-RTT resumption.

Message flow of one authentication (phase ``auth``)::

    1  node   -> server   (A_ID || N1)
    2  server -> node     (C_B || T_B)
    3  node   -> server   (C_A || T_A || H')
    4  server -> node     (C_L || T_L)          look-up identifier under K

and of one resumption (phase ``resume``)::

    1  node   -> server   (S* || A_ID || N1 || C || T)
    2  server -> node     (C_L || T_L)          fresh look-up identifier under K*

Each state machine consumes serialized bytes and returns the reply bytes
(or ``None``); ``outcome`` is set once the party has finished.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..bits import BitVector
from ..coding.base import DecodeFailure, SlepianWolfCode, Syndrome
from ..crypto import (AuthenticationFailure, AuthTag, CipherText, SymmetricKey, aead_decrypt,
                      aead_encrypt, fresh_nonce, hash_bits, mac_sign, mac_verify)
from ..proximity import InsufficientSamples, PathLossParams, multi_location_verify
from ..puf import CHALLENGE_BITS, fe_gen, fe_rep, majority_response
from ..skg import alice_reconciliation, bob_reconciliation
from .core import (ALIAS_BITS, LOOKUP_BITS, PUF_READS, DeviceRecord, EmergencyExhausted,
                   NodeState, ResumptionUnavailable, Server, SessionOutcome, Status,
                   derive_alias_next, derive_challenge_chain, derive_resumption_alias,
                   derive_resumption_secret, fe_rng)
from .messages import (MalformedMessage, ProtocolMessage, dec_bits, enc_bits, pack_fields,
                       unpack_fields)

NODE = "node"
SERVER = "server"
AUTH = "auth"
RESUME = "resume"

NONCE_LEN = 128


def _context(phase: str, step: int, sender: str) -> bytes:
    return f"{phase}/{step}|{sender}".encode()


def _fingerprint(half: BitVector) -> bytes:
    return hash_bits(half).to_bytes()[:8]


def seal(key: SymmetricKey, plaintext: bytes, context: bytes, rng, log: list):
    """Encrypt under the first key half and MAC the ciphertext under the second."""
    k1, k2 = key.halves()
    log.append(("enc", _fingerprint(k1)))
    log.append(("mac", _fingerprint(k2)))
    ct = aead_encrypt(k1, plaintext, context, rng)
    return ct.data, mac_sign(k2, ct.data).value


def unseal(key: SymmetricKey, ct: bytes, tag: bytes, context: bytes, log: list) -> bytes:
    k1, k2 = key.halves()
    log.append(("mac", _fingerprint(k2)))
    if len(tag) != 16 or not mac_verify(k2, ct, AuthTag(tag)):
        raise AuthenticationFailure("tag does not verify")
    log.append(("enc", _fingerprint(k1)))
    return aead_decrypt(k1, CipherText(ct), context)


@dataclass
class ProximityInputs:
    """RSSI samples the node measured at each known server location."""

    params: PathLossParams
    samples: list
    expected_regions: tuple | None = None


# -- node -------------------------------------------------------------------------

class NodeAuthSession:
    def __init__(self, node: NodeState, code: SlepianWolfCode, y_a: BitVector,
                 rng: np.random.Generator, use_emergency: bool | None = None):
        self.node = node
        self.code = code
        self.y_a = y_a
        self.rng = rng
        self.emergency = node.needs_recovery if use_emergency is None else use_emergency
        self.outcome: SessionOutcome | None = None
        self._step = 0

    def start(self, proximity: ProximityInputs) -> bytes | None:
        node = self.node
        expected = proximity.expected_regions or node.expected_regions
        try:
            near = multi_location_verify(proximity.params, len(proximity.samples),
                                         proximity.samples, expected)
        except (InsufficientSamples, ValueError):
            near = False
        if not near:
            self.outcome = SessionOutcome.reject("proximity")
            return None

        if self.emergency:
            if not node.emergency:
                raise EmergencyExhausted("no emergency aliases left")
            entry = node.emergency.pop(0)  # single use: gone once presented
            alias, self.key = entry.alias, entry.key
        else:
            alias, self.key = node.alias, node.k_r
        # whatever happens next, this alias is spent; only a completed session clears the flag
        node.needs_recovery = True
        node.z = None
        self.n1 = fresh_nonce(self.rng, NODE).value
        self._step = 1
        return ProtocolMessage(AUTH, NODE, (alias.to_bytes(), self.n1.to_bytes())).serialize()

    def handle(self, data: bytes) -> bytes | None:
        if self.outcome is not None:
            return None
        try:
            msg = ProtocolMessage.deserialize(data)
            if msg.phase != AUTH or msg.sender != SERVER:
                raise MalformedMessage("unexpected phase or sender")
            if self._step == 1:
                return self._on_challenge(msg)
            if self._step == 3:
                return self._on_lookup(msg)
            raise MalformedMessage("no message expected")
        except AuthenticationFailure:
            self.outcome = SessionOutcome.reject("mac" if self._step == 1 else "key-mismatch")
        except ValueError:
            self.outcome = SessionOutcome.reject("malformed")
        return None

    def _on_challenge(self, msg: ProtocolMessage) -> bytes | None:
        node = self.node
        if len(msg.fields) != 2:
            raise MalformedMessage("expected (C_B, T_B)")
        c_b, t_b = msg.fields
        plain = unseal(self.key, c_b, t_b, _context(AUTH, 2, SERVER), node.key_log)
        a, b, ch, n1, n_b = unpack_fields(plain, 5)
        a, b = BitVector.from_bytes(a, len(node.real_id)), BitVector.from_bytes(b, len(node.server_id))
        ch = BitVector.from_bytes(ch, CHALLENGE_BITS)
        n1, n_b = BitVector.from_bytes(n1, NONCE_LEN), BitVector.from_bytes(n_b, NONCE_LEN)
        if a != node.real_id or b != node.server_id:
            raise AuthenticationFailure("identities do not match")
        if n1 != self.n1 or not node.seen_nonces.register(n_b):
            self.outcome = SessionOutcome.reject("replay")
            return None

        rng = self.rng
        fresh = fe_gen(majority_response(node.device, ch, rng, PUF_READS), rng)
        n_a = fresh_nonce(rng, NODE).value
        ch3 = derive_challenge_chain(ch, n_a)
        ch4 = derive_challenge_chain(ch3, n_b)
        r3 = majority_response(node.device, ch3, rng, PUF_READS)
        r4 = majority_response(node.device, ch4, rng, PUF_READS)
        k_r3 = fe_gen(r3, fe_rng(r3, n_a, n_b)).key
        alias2 = derive_alias_next(node.real_id, n_b, r3)

        s_a, self.session_key = alice_reconciliation(self.code, self.y_a)
        plain = pack_fields(node.real_id.to_bytes(), node.server_id.to_bytes(),
                            enc_bits(BitVector(s_a.bits)), n_a.to_bytes(),
                            enc_bits(r3), enc_bits(r4))
        c_a, t_a = seal(fresh.key, plain, _context(AUTH, 3, NODE), rng, node.key_log)

        node.k_r, node.alias, node.next_challenge = k_r3, alias2, ch4
        self._step = 3
        return ProtocolMessage(AUTH, NODE, (c_a, t_a, enc_bits(fresh.helper))).serialize()

    def _on_lookup(self, msg: ProtocolMessage) -> None:
        if len(msg.fields) != 2:
            raise MalformedMessage("expected (C_L, T_L)")
        key = SymmetricKey(self.session_key)
        plain = unseal(key, msg.fields[0], msg.fields[1], _context(AUTH, 4, SERVER),
                       self.node.key_log)
        (lookup,) = unpack_fields(plain, 1)
        lookup = BitVector.from_bytes(lookup, LOOKUP_BITS)
        self.node.z = derive_resumption_secret(self.session_key, lookup, self.code.n)
        self.node.needs_recovery = False
        status = Status.DESYNC_RECOVERED if self.emergency else Status.SUCCESS
        self.outcome = SessionOutcome(status, session_key=self.session_key)
        return None


class NodeResumeSession:
    def __init__(self, node: NodeState, code: SlepianWolfCode, y_a: BitVector,
                 rng: np.random.Generator, early_data: bytes = b""):
        if node.z is None or node.needs_recovery:
            raise ResumptionUnavailable("no resumption secret held; authenticate first")
        if len(node.z) != code.n:
            raise ResumptionUnavailable("resumption secret length differs from the code length")
        self.node, self.code, self.y_a, self.rng = node, code, y_a, rng
        self.early_data = early_data
        self.outcome: SessionOutcome | None = None

    def start(self) -> bytes:
        node = self.node
        y_star = node.z ^ self.y_a
        s_star, k_star = alice_reconciliation(self.code, y_star)
        self.key = SymmetricKey(k_star)
        n1 = fresh_nonce(self.rng, NODE).value
        c, t = seal(self.key, pack_fields(self.early_data), _context(RESUME, 1, NODE),
                    self.rng, node.key_log)
        msg = ProtocolMessage(RESUME, NODE, (enc_bits(BitVector(s_star.bits)), node.alias.to_bytes(),
                                             n1.to_bytes(), c, t))
        node.alias = derive_resumption_alias(node.real_id, self.y_a)
        node.z = None  # replaced once the server's look-up identifier arrives
        node.needs_recovery = True
        return msg.serialize()

    def handle(self, data: bytes) -> None:
        if self.outcome is not None:
            return None
        try:
            msg = ProtocolMessage.deserialize(data)
            if msg.phase != RESUME or msg.sender != SERVER or len(msg.fields) != 2:
                raise MalformedMessage("expected (C_L, T_L)")
            plain = unseal(self.key, msg.fields[0], msg.fields[1], _context(RESUME, 2, SERVER),
                           self.node.key_log)
            (lookup,) = unpack_fields(plain, 1)
            lookup = BitVector.from_bytes(lookup, LOOKUP_BITS)
        except AuthenticationFailure:
            self.outcome = SessionOutcome.reject("key-mismatch")
            return None
        except ValueError:
            self.outcome = SessionOutcome.reject("malformed")
            return None
        self.node.z = derive_resumption_secret(self.key.material, lookup, self.code.n)
        self.node.needs_recovery = False
        self.outcome = SessionOutcome(Status.SUCCESS, session_key=self.key.material,
                                      early_data=self.early_data)
        return None


# -- server -----------------------------------------------------------------------

@dataclass
class _AuthContext:
    record: DeviceRecord
    key: SymmetricKey
    challenge: BitVector
    response: BitVector
    emergency: bool
    n_b: BitVector = None
    outcome_status: Status = Status.SUCCESS
    extra: dict = field(default_factory=dict)


class ServerSession:
    """Server side of one session; the first message decides the phase."""

    def __init__(self, server: Server, code: SlepianWolfCode, y_b: BitVector, p: float,
                 rng: np.random.Generator, decoder_params=None):
        self.server, self.code, self.y_b, self.p, self.rng = server, code, y_b, p, rng
        self.decoder_params = dict(decoder_params or code.default_params())
        self.outcome: SessionOutcome | None = None
        self.ctx: _AuthContext | None = None
        self.phase: str | None = None

    @property
    def started(self) -> bool:
        return self.phase is not None

    def handle(self, data: bytes) -> bytes | None:
        if self.outcome is not None:
            return None
        try:
            msg = ProtocolMessage.deserialize(data)
            if msg.sender != NODE:
                raise MalformedMessage("unexpected sender")
            if self.phase is None:
                self.phase = msg.phase
                if msg.phase == AUTH:
                    return self._on_request(msg)
                if msg.phase == RESUME:
                    return self._on_resume(msg)
                raise MalformedMessage(f"unknown phase {msg.phase!r}")
            if msg.phase == AUTH == self.phase and self.ctx is not None and self.ctx.n_b is not None:
                return self._on_response(msg)
            raise MalformedMessage("no message expected")
        except AuthenticationFailure:
            self.outcome = SessionOutcome.reject("mac")
        except ValueError:
            self.outcome = SessionOutcome.reject("malformed")
        return None

    def _reject(self, reason: str):
        self.outcome = SessionOutcome.reject(reason)
        return None

    # authentication ---------------------------------------------------------------

    def _on_request(self, msg: ProtocolMessage) -> bytes | None:
        if len(msg.fields) != 2:
            raise MalformedMessage("expected (A_ID, N1)")
        alias = BitVector.from_bytes(msg.fields[0])
        n1 = BitVector.from_bytes(msg.fields[1])
        if len(alias) != ALIAS_BITS or len(n1) != NONCE_LEN:
            raise MalformedMessage("bad field length")
        found = self.server.find_alias(alias)
        if found is None:
            return self._reject("bad-alias")
        rec, entry = found
        with rec.lock:
            if entry is None:
                if rec.alias_presented:
                    return self._reject("bad-alias")
                rec.alias_presented = True
                ctx = _AuthContext(rec, rec.k_r, rec.challenge, rec.response, False)
            else:
                # emergency entries are single use: delete on consumption
                del rec.emergency[alias.to_bytes()]
                self.server.unbind_alias(alias)
                ctx = _AuthContext(rec, entry.key, entry.challenge, entry.response, True,
                                   outcome_status=Status.DESYNC_RECOVERED)
            if not rec.used_nonces.register(n1):
                return self._reject("replay")
        ctx.n_b = fresh_nonce(self.rng, SERVER).value
        ctx.extra["n1"] = n1
        self.ctx = ctx
        plain = pack_fields(rec.real_id.to_bytes(), self.server.server_id.to_bytes(),
                            ctx.challenge.to_bytes(), n1.to_bytes(), ctx.n_b.to_bytes())
        c_b, t_b = seal(ctx.key, plain, _context(AUTH, 2, SERVER), self.rng, self.server.key_log)
        return ProtocolMessage(AUTH, SERVER, (c_b, t_b)).serialize()

    def _on_response(self, msg: ProtocolMessage) -> bytes | None:
        ctx = self.ctx
        rec = ctx.record
        if len(msg.fields) != 3:
            raise MalformedMessage("expected (C_A, T_A, H')")
        c_a, t_a, helper = msg.fields
        helper = dec_bits(helper, len(ctx.response))
        try:
            k_fresh = fe_rep(ctx.response, helper)
            plain = unseal(k_fresh, c_a, t_a, _context(AUTH, 3, NODE), self.server.key_log)
        except (DecodeFailure, AuthenticationFailure):
            return self._reject("fe-mismatch")
        a, b, s_a, n_a, r3, r4 = unpack_fields(plain, 6)
        if a != rec.real_id.to_bytes() or b != self.server.server_id.to_bytes():
            return self._reject("mac")
        n_a = BitVector.from_bytes(n_a, NONCE_LEN)
        s_a = dec_bits(s_a, self.code.syndrome_length)
        r3, r4 = dec_bits(r3, len(ctx.response)), dec_bits(r4, len(ctx.response))
        with rec.lock:
            if not rec.used_nonces.register(n_a):
                return self._reject("replay")
            ch3 = derive_challenge_chain(ctx.challenge, n_a)
            ch4 = derive_challenge_chain(ch3, ctx.n_b)
            k_r3 = fe_gen(r3, fe_rng(r3, n_a, ctx.n_b)).key
            alias2 = derive_alias_next(rec.real_id, ctx.n_b, r3)
            # PUF authentication passed: advance the CRP pipeline now so that
            # both sides stay in step even if reconciliation fails below
            self.server.unbind_alias(rec.alias)
            rec.alias, rec.k_r, rec.challenge, rec.response = alias2, k_r3, ch4, r4
            rec.alias_presented = False
            rec.z = None
            self.server.bind_alias(rec, alias2)

        bob = bob_reconciliation(self.code, self.y_b, Syndrome(s_a.bits, self.code), self.p,
                                 **self.decoder_params)
        if bob.key is None or not bob.verified:
            return self._reject("reconciliation-failure")
        lookup = BitVector.random(LOOKUP_BITS, self.rng)
        key = SymmetricKey(bob.key)
        c_l, t_l = seal(key, pack_fields(lookup.to_bytes()), _context(AUTH, 4, SERVER),
                        self.rng, self.server.key_log)
        with rec.lock:
            rec.z = derive_resumption_secret(bob.key, lookup, self.code.n)
        self.outcome = SessionOutcome(ctx.outcome_status, session_key=bob.key)
        return ProtocolMessage(AUTH, SERVER, (c_l, t_l)).serialize()

    # resumption ---------------------------------------------------------------------

    def _on_resume(self, msg: ProtocolMessage) -> bytes | None:
        if len(msg.fields) != 5:
            raise MalformedMessage("expected (S*, A_ID, N1, C, T)")
        s_star, alias, n1, c, t = msg.fields
        s_star = dec_bits(s_star, self.code.syndrome_length)
        alias = BitVector.from_bytes(alias)
        n1 = BitVector.from_bytes(n1)
        if len(alias) != ALIAS_BITS or len(n1) != NONCE_LEN:
            raise MalformedMessage("bad field length")
        found = self.server.find_alias(alias)
        if found is None or found[1] is not None:
            return self._reject("bad-alias")
        rec = found[0]
        with rec.lock:
            if rec.alias_presented or rec.z is None:
                return self._reject("bad-alias")
            rec.alias_presented = True
            if not rec.used_nonces.register(n1):
                return self._reject("replay")
            z = rec.z

        y_star_b = z ^ self.y_b
        bob = bob_reconciliation(self.code, y_star_b, Syndrome(s_star.bits, self.code), self.p,
                                 **self.decoder_params)
        if bob.key is None:
            return self._reject("reconciliation-failure")
        # an unverified estimate still yields a candidate K*'; the check K*' == K* on the
        # early-data MAC below is what accepts or rejects the resumption
        key = SymmetricKey(bob.key)
        try:
            plain = unseal(key, c, t, _context(RESUME, 1, NODE), self.server.key_log)
        except AuthenticationFailure:
            return self._reject("key-mismatch")
        (early,) = unpack_fields(plain, 1)
        y_a = BitVector(bob.estimate) ^ z
        lookup = BitVector.random(LOOKUP_BITS, self.rng)
        c_l, t_l = seal(key, pack_fields(lookup.to_bytes()), _context(RESUME, 2, SERVER),
                        self.rng, self.server.key_log)
        with rec.lock:
            self.server.unbind_alias(rec.alias)
            rec.alias = derive_resumption_alias(rec.real_id, y_a)
            rec.alias_presented = False
            rec.z = derive_resumption_secret(bob.key, lookup, self.code.n)
            self.server.bind_alias(rec, rec.alias)
        self.outcome = SessionOutcome(Status.SUCCESS, session_key=bob.key, early_data=early)
        return ProtocolMessage(RESUME, SERVER, (c_l, t_l)).serialize()
