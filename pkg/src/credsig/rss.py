"""Merkle-tree redactable signatures.

Each block becomes a salted leaf; the signer Schnorr-signs the Merkle root.
A holder redacts a block by swapping its salt for the leaf digest, which
hides the value yet still lets a verifier recompute the root. Redaction
needs no key material.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from . import primitives as prim
from .document import Block, BlockSequence, blocks_from_json, blocks_to_json, encode_block
from .encoding import Reader, b64d, b64e, hex_to_int, int_to_hex, lp, u32
from .errors import CanonicalizationError, EncodingError, RedactionError, SigningError
from .primitives import GroupParams, KeyPair, SchnorrSignature

SCHEME = "rss-merkle-v1"
MAGIC = b"RSS1"
SALT_LEN = 16
DIGEST_LEN = 32


@dataclass(frozen=True)
class Disclosed:
    salt: bytes


@dataclass(frozen=True)
class Redacted:
    leaf: bytes


Entry = Union[Disclosed, Redacted]


@dataclass(frozen=True)
class RedactableSignature:
    context: str
    n: int
    profile: str
    base_sig: SchnorrSignature
    disclosure: tuple  # tuple[Entry, ...], one per block index

    def disclosed_indices(self) -> list[int]:
        return [i for i, e in enumerate(self.disclosure) if isinstance(e, Disclosed)]

    def redacted_indices(self) -> list[int]:
        return [i for i, e in enumerate(self.disclosure) if isinstance(e, Redacted)]

    def to_bytes(self) -> bytes:
        return signature_to_bytes(self)

    def to_json(self) -> dict:
        return {
            "v": 1,
            "scheme": SCHEME,
            "profile": self.profile,
            "n": self.n,
            "context": self.context,
            "sig": {"e": int_to_hex(self.base_sig.e), "s": int_to_hex(self.base_sig.s)},
            "disclosure": [
                {"i": i, "salt": b64e(e.salt)} if isinstance(e, Disclosed) else {"i": i, "leaf": b64e(e.leaf)}
                for i, e in enumerate(self.disclosure)
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "RedactableSignature":
        try:
            if obj["v"] != 1 or obj["scheme"] != SCHEME:
                raise EncodingError("not an rss-merkle-v1 envelope")
            n = obj["n"]
            items = obj["disclosure"]
            if [it["i"] for it in items] != list(range(n)):
                raise EncodingError("disclosure entries must list indices 0..n-1 in order")
            entries = []
            for it in items:
                if "salt" in it and "leaf" not in it:
                    entries.append(Disclosed(b64d(it["salt"])))
                elif "leaf" in it and "salt" not in it:
                    entries.append(Redacted(b64d(it["leaf"])))
                else:
                    raise EncodingError(f"entry {it['i']} must carry exactly one of salt/leaf")
            sig = SchnorrSignature(hex_to_int(obj["sig"]["e"]), hex_to_int(obj["sig"]["s"]))
            return cls(obj["context"], n, obj["profile"], sig, tuple(entries))
        except (KeyError, TypeError) as exc:
            raise EncodingError(f"malformed rss envelope: {exc}") from exc


@dataclass(frozen=True)
class Presentation:
    blocks: BlockSequence  # disclosed blocks only, ascending index
    signature: RedactableSignature
    signer_public: int

    def to_json(self) -> dict:
        return {
            "envelope": self.signature.to_json(),
            "signer": int_to_hex(self.signer_public),
            "blocks": blocks_to_json(self.blocks),
        }

    @classmethod
    def from_json(cls, obj) -> "Presentation":
        try:
            return cls(blocks_from_json(obj["blocks"]),
                       RedactableSignature.from_json(obj["envelope"]),
                       hex_to_int(obj["signer"]))
        except (KeyError, TypeError, CanonicalizationError) as exc:
            raise EncodingError(f"malformed presentation: {exc}") from exc

    def to_bytes(self) -> bytes:
        sig = self.signature.to_bytes()
        body = b"".join(u32(b.index) + encode_block(b) for b in self.blocks)
        return lp(sig) + u32(len(self.blocks)) + body


# ---------------------------------------------------------------------------
# Merkle tree

def _split_point(n: int) -> int:
    k = 1
    while k * 2 < n:
        k *= 2
    return k


def merkle_root(leaves: Sequence[bytes]) -> bytes:
    """Root with the left subtree holding the largest power of two below n."""
    if not leaves:
        raise SigningError("cannot build a Merkle tree over zero leaves")
    if len(leaves) == 1:
        return leaves[0]
    k = _split_point(len(leaves))
    return prim.tagged_hash(prim.TAG_NODE, merkle_root(leaves[:k]) + merkle_root(leaves[k:]))


def leaf_digest(salt: bytes, block: Block) -> bytes:
    return prim.tagged_hash(prim.TAG_LEAF, salt + encode_block(block))


def header_bytes(context: str, n: int, profile: str) -> bytes:
    return SCHEME.encode() + lp(context.encode("utf-8")) + u32(n) + lp(profile.encode())


def _signed_message(root: bytes, context: str, n: int, profile: str) -> bytes:
    return root + header_bytes(context, n, profile)


# ---------------------------------------------------------------------------
# operations

def rss_sign(signer: KeyPair, blocks: Sequence[Block], rng: random.Random | None = None,
             context: str = "") -> RedactableSignature:
    if not blocks:
        raise SigningError("empty documents are unsignable")
    if [b.index for b in blocks] != list(range(len(blocks))):
        raise SigningError("block indices must be dense 0..n-1")
    rng = rng or prim.default_rng()
    salts = [rng.randbytes(SALT_LEN) for _ in blocks]
    root = merkle_root([leaf_digest(s, b) for s, b in zip(salts, blocks)])
    n, profile = len(blocks), signer.params.profile_id
    base = prim.schnorr_sign(signer, _signed_message(root, context, n, profile), rng)
    return RedactableSignature(context, n, profile, base, tuple(Disclosed(s) for s in salts))


def rss_redact(sig: RedactableSignature, blocks: Sequence[Block],
               redact_set: Iterable[int]) -> tuple[RedactableSignature, BlockSequence]:
    """Hide ``redact_set``; returns the derived signature and remaining blocks.

    ``blocks`` are the blocks currently disclosed under ``sig``. Indices that
    are already redacted may appear in ``redact_set`` and are left alone.
    """
    redact = set(redact_set)
    bad = sorted(i for i in redact if not (isinstance(i, int) and 0 <= i < sig.n))
    if bad:
        raise RedactionError(f"indices out of range: {bad}")
    by_index = {}
    for b in blocks:
        if not 0 <= b.index < sig.n or b.index in by_index:
            raise RedactionError(f"bad or duplicate block index {b.index}")
        if isinstance(sig.disclosure[b.index], Redacted):
            raise RedactionError(f"block {b.index} is redacted; it cannot be un-redacted")
        by_index[b.index] = b
    missing = [i for i in sig.disclosed_indices() if i not in by_index]
    if missing:
        raise RedactionError(f"disclosed blocks missing from input: {missing}")

    entries = list(sig.disclosure)
    for i in redact:
        entry = entries[i]
        if isinstance(entry, Disclosed):
            entries[i] = Redacted(leaf_digest(entry.salt, by_index[i]))
    kept = tuple(by_index[i] for i in sorted(by_index) if i not in redact)
    derived = RedactableSignature(sig.context, sig.n, sig.profile, sig.base_sig, tuple(entries))
    return derived, kept


def present(sig: RedactableSignature, blocks: Sequence[Block], signer_public: int,
            redact_set: Iterable[int] = ()) -> Presentation:
    derived, kept = rss_redact(sig, blocks, redact_set)
    return Presentation(kept, derived, signer_public)


def rss_verify(public: int, presentation: Presentation, params: GroupParams | None = None) -> bool:
    sig = presentation.signature
    try:
        params = params or prim.group_params(sig.profile)
    except Exception:
        return False
    if sig.profile != params.profile_id or presentation.signer_public != public:
        return False
    if not isinstance(sig.n, int) or sig.n < 1 or len(sig.disclosure) != sig.n:
        return False
    blocks = list(presentation.blocks)
    if [b.index for b in blocks] != sig.disclosed_indices():
        return False
    by_index = {b.index: b for b in blocks}
    leaves = []
    for i, entry in enumerate(sig.disclosure):
        if isinstance(entry, Disclosed):
            if len(entry.salt) != SALT_LEN:
                return False
            leaves.append(leaf_digest(entry.salt, by_index[i]))
        elif isinstance(entry, Redacted) and len(entry.leaf) == DIGEST_LEN:
            leaves.append(entry.leaf)
        else:
            return False
    message = _signed_message(merkle_root(leaves), sig.context, sig.n, sig.profile)
    return prim.schnorr_verify(params, public, message, sig.base_sig)


# ---------------------------------------------------------------------------
# compact binary envelope (the size-accounted form)

def header_size(context: str, n: int, profile: str) -> int:
    """Bytes of the binary envelope not attributable to the signature or entries."""
    return len(MAGIC) + 1 + len(profile.encode()) + 2 + len(context.encode("utf-8")) + 4 + (n + 7) // 8


def signature_to_bytes(sig: RedactableSignature) -> bytes:
    params = prim.group_params(sig.profile)
    ctx = sig.context.encode("utf-8")
    prof = sig.profile.encode()
    bitmap = bytearray((sig.n + 7) // 8)
    for i in sig.redacted_indices():
        bitmap[i // 8] |= 0x80 >> (i % 8)
    out = [MAGIC, bytes([len(prof)]), prof, len(ctx).to_bytes(2, "big"), ctx, u32(sig.n), bytes(bitmap),
           params.scalar_bytes(sig.base_sig.e), params.scalar_bytes(sig.base_sig.s)]
    out.extend(e.salt if isinstance(e, Disclosed) else e.leaf for e in sig.disclosure)
    return b"".join(out)


def signature_from_bytes(data: bytes) -> RedactableSignature:
    r = Reader(data)
    if r.take(4) != MAGIC:
        raise EncodingError("bad magic")
    try:
        profile = r.take(r.u8()).decode()
        context = r.take(r.u16()).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError("bad text field") from exc
    try:
        params = prim.group_params(profile)
    except Exception as exc:
        raise EncodingError(f"unknown profile {profile!r}") from exc
    n = r.u32()
    if n > 1 << 20:
        raise EncodingError("implausible block count")
    bitmap = r.take((n + 7) // 8)
    if n % 8 and bitmap[-1] & (0xFF >> (n % 8)):
        raise EncodingError("padding bits set in redaction bitmap")
    e = int.from_bytes(r.take(params.scalar_len), "big")
    s = int.from_bytes(r.take(params.scalar_len), "big")
    entries = []
    for i in range(n):
        if bitmap[i // 8] & (0x80 >> (i % 8)):
            entries.append(Redacted(r.take(DIGEST_LEN)))
        else:
            entries.append(Disclosed(r.take(SALT_LEN)))
    r.done()
    return RedactableSignature(context, n, profile, SchnorrSignature(e, s), tuple(entries))


def expected_size(context: str, n: int, profile: str, n_redacted: int) -> int:
    scalar_len = prim.group_params(profile).scalar_len
    return header_size(context, n, profile) + 2 * scalar_len + DIGEST_LEN * n_redacted + SALT_LEN * (n - n_redacted)
