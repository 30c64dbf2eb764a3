"""Wire-format helpers: hex big integers, unpadded base64url, fixed-width ints."""

import base64
import struct

from .errors import EncodingError


def int_to_hex(value: int) -> str:
    if value < 0:
        raise EncodingError("negative integers have no wire encoding")
    return format(value, "x")


def hex_to_int(text: str) -> int:
    if not isinstance(text, str) or not text:
        raise EncodingError(f"expected hex string, got {text!r}")
    if text != text.lower() or (len(text) > 1 and text[0] == "0"):
        raise EncodingError(f"non-canonical hex integer {text!r}")
    try:
        return int(text, 16)
    except ValueError as exc:
        raise EncodingError(f"bad hex integer {text!r}") from exc


def b64e(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def b64d(text: str) -> bytes:
    if not isinstance(text, str):
        raise EncodingError(f"expected base64url string, got {text!r}")
    try:
        raw = base64.urlsafe_b64decode(text + "=" * (-len(text) % 4))
    except (ValueError, TypeError) as exc:
        raise EncodingError(f"bad base64url {text!r}") from exc
    if b64e(raw) != text:
        raise EncodingError(f"non-canonical base64url {text!r}")
    return raw


def u32(value: int) -> bytes:
    return struct.pack(">I", value)


def lp(data: bytes) -> bytes:
    """u32 big-endian length prefix followed by ``data``."""
    return u32(len(data)) + data


class Reader:
    """Cursor over a byte string; raises EncodingError on truncation."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise EncodingError("truncated input")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def lp(self) -> bytes:
        return self.take(self.u32())

    def done(self) -> None:
        if self.pos != len(self.data):
            raise EncodingError("trailing bytes")
