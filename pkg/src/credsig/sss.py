"""Chameleon-hash sanitizable signatures.

Admissible blocks are committed with a chameleon hash keyed to the
sanitizer, so the sanitizer can rewrite them by recomputing the
randomizer. Fixed blocks are committed with a salted hash. The signer
Schnorr-signs the whole digest vector plus a header that binds the
admissible set, the constraints and the sanitizer key; the signature
bytes never change after signing.

Accountability: the signer keeps the original openings. A sanitized block
yields two openings of one chameleon digest, and any such pair reveals
the sanitizer's trapdoor.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from . import primitives as prim
from .document import (PLACEHOLDER, Block, BlockSequence, Constraint, blocks_from_json, blocks_to_json,
                       check_constraint, constraints_from_json, constraints_to_json, dump_canonical_json,
                       encode_block, encode_scalar, require_constraint)
from .encoding import Reader, b64d, b64e, hex_to_int, int_to_hex, lp, u32
from .errors import (CanonicalizationError, ConfigurationError, CredsigError, EncodingError,
                     ImmutabilityError, NothingToProveError, SigningError)
from .primitives import ChameleonOpening, GroupParams, KeyPair, SchnorrSignature

SCHEME = "sss-chameleon-v1"
MAGIC = b"SSS1"
TAG_LEN = 16
SALT_LEN = 16


@dataclass(frozen=True)
class SanitizableSignature:
    tag: bytes
    n: int
    admissible: tuple  # sorted indices
    constraints: Mapping[str, Constraint]
    profile: str
    sanitizer_public: int
    base_sig: SchnorrSignature
    randomizers: Mapping[int, int]
    salts: Mapping[int, bytes]

    def to_json(self) -> dict:
        return {
            "v": 1,
            "scheme": SCHEME,
            "profile": self.profile,
            "tag": b64e(self.tag),
            "n": self.n,
            "A": list(self.admissible),
            "constraints": constraints_to_json(self.constraints),
            "y": int_to_hex(self.sanitizer_public),
            "sig": {"e": int_to_hex(self.base_sig.e), "s": int_to_hex(self.base_sig.s)},
            "rand": {str(i): int_to_hex(r) for i, r in sorted(self.randomizers.items())},
            "salts": {str(i): b64e(s) for i, s in sorted(self.salts.items())},
        }

    @classmethod
    def from_json(cls, obj) -> "SanitizableSignature":
        try:
            if obj["v"] != 1 or obj["scheme"] != SCHEME:
                raise EncodingError("not an sss-chameleon-v1 envelope")
            return cls(
                tag=b64d(obj["tag"]),
                n=obj["n"],
                admissible=tuple(obj["A"]),
                constraints=constraints_from_json(obj["constraints"]),
                profile=obj["profile"],
                sanitizer_public=hex_to_int(obj["y"]),
                base_sig=SchnorrSignature(hex_to_int(obj["sig"]["e"]), hex_to_int(obj["sig"]["s"])),
                randomizers={int(i): hex_to_int(r) for i, r in obj["rand"].items()},
                salts={int(i): b64d(s) for i, s in obj["salts"].items()},
            )
        except (KeyError, TypeError, ValueError, ConfigurationError) as exc:
            raise EncodingError(f"malformed sss envelope: {exc}") from exc

    def to_bytes(self) -> bytes:
        return signature_to_bytes(self)


@dataclass(frozen=True)
class SanitizationRecord:
    """Signer-side private file: the openings as originally signed."""
    tag: bytes
    openings: Mapping[int, ChameleonOpening]

    def to_json(self) -> dict:
        return {
            "tag": b64e(self.tag),
            "openings": {str(i): {"m": b64e(o.message), "r": int_to_hex(o.r)}
                         for i, o in sorted(self.openings.items())},
        }

    @classmethod
    def from_json(cls, obj) -> "SanitizationRecord":
        try:
            return cls(b64d(obj["tag"]), {int(i): ChameleonOpening(b64d(o["m"]), hex_to_int(o["r"]))
                                          for i, o in obj["openings"].items()})
        except (KeyError, TypeError, ValueError) as exc:
            raise EncodingError(f"malformed sanitization record: {exc}") from exc


@dataclass(frozen=True)
class CollisionProof:
    index: int
    original: ChameleonOpening
    current: ChameleonOpening
    sanitizer_public: int
    profile: str

    def to_json(self) -> dict:
        return {
            "i": self.index,
            "profile": self.profile,
            "y": int_to_hex(self.sanitizer_public),
            "original": {"m": b64e(self.original.message), "r": int_to_hex(self.original.r)},
            "current": {"m": b64e(self.current.message), "r": int_to_hex(self.current.r)},
        }

    @classmethod
    def from_json(cls, obj) -> "CollisionProof":
        try:
            return cls(
                obj["i"],
                ChameleonOpening(b64d(obj["original"]["m"]), hex_to_int(obj["original"]["r"])),
                ChameleonOpening(b64d(obj["current"]["m"]), hex_to_int(obj["current"]["r"])),
                hex_to_int(obj["y"]),
                obj["profile"],
            )
        except (KeyError, TypeError) as exc:
            raise EncodingError(f"malformed collision proof: {exc}") from exc


class Attribution(str, enum.Enum):
    SANITIZED = "Sanitized"
    SIGNER_ONLY = "SignerOnly"
    UNPROVEN = "SignerOnly-unproven"


@dataclass(frozen=True)
class Judgement:
    attribution: Attribution
    trapdoor: int | None = None
    reason: str = ""

    @property
    def sanitized(self) -> bool:
        return self.attribution is Attribution.SANITIZED


# ---------------------------------------------------------------------------
# digests

def constraints_digest(constraints: Mapping[str, Constraint]) -> bytes:
    return prim.tagged_hash(prim.TAG_CONSTRAINTS, dump_canonical_json(constraints_to_json(constraints)).encode())


def chameleon_message(tag: bytes, index: int, block: Block) -> bytes:
    return tag + u32(index) + encode_block(block)


def fixed_digest(tag: bytes, index: int, salt: bytes, block: Block) -> bytes:
    return prim.tagged_hash(prim.TAG_FIXED_BLOCK, tag + u32(index) + salt + encode_block(block))


def header_bytes(sig_fields, params: GroupParams) -> bytes:
    tag, n, admissible, constraints, profile, y = sig_fields
    return (SCHEME.encode() + tag + u32(n) + u32(len(admissible)) + b"".join(u32(i) for i in admissible)
            + constraints_digest(constraints) + lp(profile.encode()) + params.element_bytes(y))


def _header_fields(sig: SanitizableSignature):
    return sig.tag, sig.n, sig.admissible, sig.constraints, sig.profile, sig.sanitizer_public


def digest_vector(params: GroupParams, sig: SanitizableSignature, blocks: Sequence[Block]) -> list[bytes]:
    out = []
    admissible = set(sig.admissible)
    for b in blocks:
        if b.index in admissible:
            d = prim.chameleon_hash(params, sig.sanitizer_public, chameleon_message(sig.tag, b.index, b),
                                    sig.randomizers[b.index])
            out.append(params.element_bytes(d))
        else:
            out.append(fixed_digest(sig.tag, b.index, sig.salts[b.index], b))
    return out


def _signed_message(params, sig, blocks) -> bytes:
    return b"".join(digest_vector(params, sig, blocks)) + header_bytes(_header_fields(sig), params)


# ---------------------------------------------------------------------------
# operations

def sss_sign(signer: KeyPair, sanitizer_public: int, blocks: Sequence[Block], admissible,
             constraints: Mapping[str, Constraint] | None = None,
             rng: random.Random | None = None) -> tuple[SanitizableSignature, SanitizationRecord]:
    params = signer.params
    rng = rng or prim.default_rng()
    constraints = dict(constraints or {})
    n = len(blocks)
    if [b.index for b in blocks] != list(range(n)):
        raise SigningError("block indices must be dense 0..n-1")
    A = tuple(sorted(set(admissible)))
    if any(not 0 <= i < n for i in A):
        raise SigningError(f"admissible indices out of range: {A}")
    if not params.is_element(sanitizer_public):
        raise SigningError("sanitizer public key is not a group element")
    admissible_paths = {blocks[i].path for i in A}
    stray = sorted(set(constraints) - admissible_paths)
    if stray:
        raise SigningError(f"constraints on non-admissible blocks: {stray}")

    tag = rng.randbytes(TAG_LEN)
    randomizers, salts, openings = {}, {}, {}
    for b in blocks:
        if b.index in A:
            r = rng.randrange(params.q)
            randomizers[b.index] = r
            openings[b.index] = ChameleonOpening(chameleon_message(tag, b.index, b), r)
        else:
            salts[b.index] = rng.randbytes(SALT_LEN)
    unsigned = SanitizableSignature(tag, n, A, constraints, params.profile_id, sanitizer_public,
                                    SchnorrSignature(0, 0), randomizers, salts)
    base = prim.schnorr_sign(signer, _signed_message(params, unsigned, blocks), rng)
    sig = SanitizableSignature(tag, n, A, constraints, params.profile_id, sanitizer_public, base,
                               randomizers, salts)
    return sig, SanitizationRecord(tag, openings)


def sss_sanitize(trapdoor: int, sig: SanitizableSignature, blocks: Sequence[Block],
                 modifications: Mapping[int, Any],
                 params: GroupParams | None = None) -> tuple[SanitizableSignature, BlockSequence]:
    """Rewrite admissible blocks; only randomizers change.

    A wrong trapdoor is not detected here: the output simply fails
    verification.
    """
    params = params or prim.group_params(sig.profile)
    admissible = set(sig.admissible)
    blocks = list(blocks)
    randomizers = dict(sig.randomizers)
    for i, value in sorted(modifications.items()):
        if i not in admissible:
            raise ImmutabilityError(f"block {i} is not admissible")
        old = blocks[i]
        new = Block(i, old.path, encode_scalar(value))
        require_constraint(sig.constraints.get(old.path), old.path, new.value_bytes)
        randomizers[i] = prim.chameleon_collide(
            params, trapdoor, chameleon_message(sig.tag, i, old), randomizers[i],
            chameleon_message(sig.tag, i, new))
        blocks[i] = new
    out = SanitizableSignature(sig.tag, sig.n, sig.admissible, sig.constraints, sig.profile,
                               sig.sanitizer_public, sig.base_sig, randomizers, dict(sig.salts))
    return out, tuple(blocks)


def constraints_hold(sig: SanitizableSignature, blocks: Sequence[Block], allow_placeholder: bool = True) -> bool:
    by_path = {b.path: b for b in blocks}
    admissible = set(sig.admissible)
    placeholder = encode_scalar(PLACEHOLDER)
    for path, c in sig.constraints.items():
        b = by_path.get(path)
        if b is None or b.index not in admissible:
            return False
        if b.value_bytes == placeholder and allow_placeholder:
            continue
        if not check_constraint(c, b.value_bytes):
            return False
    return True


def sss_verify(signer_public: int, sig: SanitizableSignature, blocks: Sequence[Block],
               params: GroupParams | None = None) -> bool:
    try:
        params = params or prim.group_params(sig.profile)
        if sig.profile != params.profile_id or len(sig.tag) != TAG_LEN:
            return False
        n = sig.n
        if not isinstance(n, int) or [b.index for b in blocks] != list(range(n)):
            return False
        A = tuple(sig.admissible)
        if A != tuple(sorted(set(A))) or any(not (isinstance(i, int) and 0 <= i < n) for i in A):
            return False
        if set(sig.randomizers) != set(A) or set(sig.salts) != set(range(n)) - set(A):
            return False
        if not all(params.is_scalar(r) for r in sig.randomizers.values()):
            return False
        if not all(len(s) == SALT_LEN for s in sig.salts.values()):
            return False
        if not params.is_element(sig.sanitizer_public):
            return False
        if not constraints_hold(sig, blocks):
            return False
        return prim.schnorr_verify(params, signer_public, _signed_message(params, sig, blocks), sig.base_sig)
    except (CredsigError, TypeError, ValueError, AttributeError):
        return False


def sss_proof(record: SanitizationRecord, sig: SanitizableSignature, blocks: Sequence[Block],
              index: int) -> CollisionProof:
    if index not in sig.admissible:
        raise ImmutabilityError(f"block {index} is not admissible")
    if record.tag != sig.tag:
        raise NothingToProveError("record belongs to a different document")
    original = record.openings[index]
    current = ChameleonOpening(chameleon_message(sig.tag, index, blocks[index]), sig.randomizers[index])
    if current.message == original.message:
        raise NothingToProveError(f"block {index} is unmodified")
    return CollisionProof(index, original, current, sig.sanitizer_public, sig.profile)


def sss_judge(proof: CollisionProof) -> Judgement:
    try:
        params = prim.group_params(proof.profile)
    except ConfigurationError:
        return Judgement(Attribution.UNPROVEN, reason="unknown profile")
    y = proof.sanitizer_public
    a, b = proof.original, proof.current
    if not (params.is_element(y) and isinstance(a, ChameleonOpening) and isinstance(b, ChameleonOpening)
            and params.is_scalar(a.r) and params.is_scalar(b.r)
            and isinstance(a.message, bytes) and isinstance(b.message, bytes)):
        return Judgement(Attribution.UNPROVEN, reason="malformed proof")
    prefix = a.message[TAG_LEN:TAG_LEN + 4]
    if len(a.message) < TAG_LEN + 4 or a.message[:TAG_LEN + 4] != b.message[:TAG_LEN + 4] \
            or prefix != u32(proof.index):
        return Judgement(Attribution.UNPROVEN, reason="openings are not bound to the same document position")
    if a.message == b.message:
        return Judgement(Attribution.SIGNER_ONLY, reason="openings carry the same message")
    if prim.chameleon_hash(params, y, a.message, a.r) != prim.chameleon_hash(params, y, b.message, b.r):
        return Judgement(Attribution.SIGNER_ONLY, reason="openings do not collide")
    try:
        x = prim.chameleon_extract(params, a, b, y)
    except CredsigError as exc:
        return Judgement(Attribution.SIGNER_ONLY, reason=str(exc))
    return Judgement(Attribution.SANITIZED, trapdoor=x)


# ---------------------------------------------------------------------------
# serialization

@dataclass(frozen=True)
class SignedDocument:
    """Envelope plus the blocks it covers; the unit exchanged between parties."""
    signature: SanitizableSignature
    blocks: BlockSequence = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {"envelope": self.signature.to_json(), "blocks": blocks_to_json(self.blocks)}

    @classmethod
    def from_json(cls, obj) -> "SignedDocument":
        try:
            return cls(SanitizableSignature.from_json(obj["envelope"]), blocks_from_json(obj["blocks"]))
        except (KeyError, TypeError, CanonicalizationError) as exc:
            raise EncodingError(f"malformed signed document: {exc}") from exc


def signature_to_bytes(sig: SanitizableSignature) -> bytes:
    params = prim.group_params(sig.profile)
    prof = sig.profile.encode()
    cons = dump_canonical_json(constraints_to_json(sig.constraints)).encode()
    out = [MAGIC, bytes([len(prof)]), prof, sig.tag, u32(sig.n), u32(len(sig.admissible))]
    out += [u32(i) for i in sig.admissible]
    out += [lp(cons), params.element_bytes(sig.sanitizer_public),
            params.scalar_bytes(sig.base_sig.e), params.scalar_bytes(sig.base_sig.s)]
    out += [params.scalar_bytes(sig.randomizers[i]) for i in sig.admissible]
    out += [sig.salts[i] for i in range(sig.n) if i not in set(sig.admissible)]
    return b"".join(out)


def signature_from_bytes(data: bytes) -> SanitizableSignature:
    r = Reader(data)
    if r.take(4) != MAGIC:
        raise EncodingError("bad magic")
    try:
        profile = r.take(r.u8()).decode()
        params = prim.group_params(profile)
    except (UnicodeDecodeError, ConfigurationError) as exc:
        raise EncodingError("bad profile") from exc
    tag = r.take(TAG_LEN)
    n = r.u32()
    k = r.u32()
    if n > 1 << 20 or k > n:
        raise EncodingError("implausible counts")
    A = tuple(r.u32() for _ in range(k))
    if A != tuple(sorted(set(A))) or any(i >= n for i in A):
        raise EncodingError("admissible set must be strictly increasing and in range")
    try:
        raw = r.lp().decode("utf-8")
        cons_obj = json.loads(raw)
        if dump_canonical_json(cons_obj) != raw:
            raise EncodingError("non-canonical constraints")
        constraints = constraints_from_json(cons_obj)
        if dump_canonical_json(constraints_to_json(constraints)) != raw:
            raise EncodingError("constraints do not re-encode to the bytes received")
    except (UnicodeDecodeError, ValueError, AttributeError, ConfigurationError) as exc:
        raise EncodingError("bad constraints") from exc
    y = int.from_bytes(r.take(params.element_len), "big")
    e = int.from_bytes(r.take(params.scalar_len), "big")
    s = int.from_bytes(r.take(params.scalar_len), "big")
    randomizers = {i: int.from_bytes(r.take(params.scalar_len), "big") for i in A}
    salts = {i: r.take(SALT_LEN) for i in range(n) if i not in set(A)}
    r.done()
    return SanitizableSignature(tag, n, A, constraints, profile, y, SchnorrSignature(e, s), randomizers, salts)
