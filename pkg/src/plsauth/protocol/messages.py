"""Wire format: length-prefixed fields in the order the message tuples list them.

Serialized message::

    magic "PLSM" | u8 version | u16 len + phase | u16 len + sender
    | u16 field count | (u32 len + field bytes)*

Plaintexts inside ciphertexts use the same field packing without the
header. Bit vectors travel as a u32 bit length followed by packed bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from ..bits import BitVector

MAGIC = b"PLSM"
WIRE_VERSION = 1


class MalformedMessage(ValueError):
    pass


def pack_fields(*fields: bytes) -> bytes:
    out = [struct.pack(">H", len(fields))]
    for f in fields:
        out.append(struct.pack(">I", len(f)))
        out.append(bytes(f))
    return b"".join(out)


def unpack_fields(data: bytes, expected: int | None = None) -> tuple[bytes, ...]:
    try:
        (count,) = struct.unpack_from(">H", data, 0)
        pos = 2
        fields = []
        for _ in range(count):
            (size,) = struct.unpack_from(">I", data, pos)
            pos += 4
            if pos + size > len(data):
                raise MalformedMessage("field runs past the end of the buffer")
            fields.append(bytes(data[pos:pos + size]))
            pos += size
    except struct.error as exc:
        raise MalformedMessage(str(exc)) from exc
    if pos != len(data):
        raise MalformedMessage("trailing bytes after the last field")
    if expected is not None and count != expected:
        raise MalformedMessage(f"expected {expected} fields, got {count}")
    return tuple(fields)


def enc_bits(bits: BitVector) -> bytes:
    return struct.pack(">I", len(bits)) + bits.to_bytes()


def dec_bits(data: bytes, length: int | None = None) -> BitVector:
    if len(data) < 4:
        raise MalformedMessage("bit field too short")
    (n,) = struct.unpack_from(">I", data, 0)
    if (n + 7) // 8 != len(data) - 4:
        raise MalformedMessage("bit field length mismatch")
    if length is not None and n != length:
        raise MalformedMessage(f"expected {length} bits, got {n}")
    return BitVector.from_bytes(data[4:], n)


def _short(s: str) -> bytes:
    b = s.encode()
    return struct.pack(">H", len(b)) + b


@dataclass(frozen=True)
class ProtocolMessage:
    phase: str
    sender: str
    fields: tuple[bytes, ...]

    def serialize(self) -> bytes:
        head = MAGIC + bytes([WIRE_VERSION]) + _short(self.phase) + _short(self.sender)
        return head + pack_fields(*self.fields)

    @classmethod
    def deserialize(cls, data: bytes) -> "ProtocolMessage":
        if data[:4] != MAGIC:
            raise MalformedMessage("bad magic")
        if len(data) < 5 or data[4] != WIRE_VERSION:
            raise MalformedMessage("unsupported wire version")
        pos = 5
        parts = []
        try:
            for _ in range(2):
                (size,) = struct.unpack_from(">H", data, pos)
                pos += 2
                if pos + size > len(data):
                    raise MalformedMessage("header runs past the end of the buffer")
                parts.append(data[pos:pos + size].decode())
                pos += size
        except (struct.error, UnicodeDecodeError) as exc:
            raise MalformedMessage(str(exc)) from exc
        return cls(parts[0], parts[1], unpack_fields(data[pos:]))
