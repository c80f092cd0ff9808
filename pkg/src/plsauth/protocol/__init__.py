"""Enrollment, mutual authentication and 0-RTT resumption state machines."""

from .core import (ALIAS_BITS, CONSTANTS, DEFAULT_EMERGENCY_SETS, DERIVATIONS, ID_BITS,
                   LOOKUP_BITS, PUF_READS, SKG_CODE, SKG_DECODER_PARAMS, DeviceRecord,
                   DuplicateRegistration, EmergencyEntry, EmergencyExhausted, EmergencyRecord,
                   NodeState, ResumptionUnavailable, SecureChannel, Server, SessionOutcome, Status,
                   audit_state, derive_alias_next, derive_challenge_chain,
                   derive_resumption_alias, derive_resumption_secret, enroll, fe_rng,
                   identity_bits)
from .messages import (MalformedMessage, ProtocolMessage, dec_bits, enc_bits, pack_fields,
                       unpack_fields)
from .runner import (DirectChannel, RadioEnvironment, SessionRun, TranscriptEntry,
                     authenticate, recover_desync, resume)
from .session import (AUTH, NODE, RESUME, SERVER, NodeAuthSession, NodeResumeSession,
                      ProximityInputs, ServerSession, seal, unseal)

__all__ = [name for name in dir() if not name.startswith("_")]
