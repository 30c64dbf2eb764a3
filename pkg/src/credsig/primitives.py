"""Number-theoretic building blocks over a prime-order subgroup of Z_p^*.

Everything here is a pure function of its inputs plus an injected
``random.Random``-compatible source, so seeded runs are reproducible.
Pass ``secrets.SystemRandom()`` for real keys.

Domain-separation bytes used by :func:`tagged_hash` across the package::

    0x00  RSS leaf            0x04  SSS constraints digest
    0x01  Merkle node         0x05  Schnorr challenge
    0x02  SSS fixed block     0x06  chameleon message
    0x03  grant template      0x07  block value encoding
"""

from __future__ import annotations

import functools
import hashlib
import random
import secrets
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import gmpy2

from .errors import (
    ConfigurationError,
    DegenerateInputError,
    InconsistentOpeningsError,
    InsufficientSharesError,
    InvalidKeyError,
    InvalidShareError,
    ThresholdTooSmallError,
)

TAG_LEAF = 0x00
TAG_NODE = 0x01
TAG_FIXED_BLOCK = 0x02
TAG_TEMPLATE = 0x03
TAG_CONSTRAINTS = 0x04
TAG_SCHNORR = 0x05
TAG_CHAMELEON = 0x06
TAG_BLOCK = 0x07


def tagged_hash(domain_tag: int, data: bytes) -> bytes:
    return hashlib.sha256(bytes([domain_tag]) + data).digest()


def hash_to_scalar(domain_tag: int, data: bytes, q: int) -> int:
    return int.from_bytes(tagged_hash(domain_tag, data), "big") % q


def default_rng() -> random.Random:
    return secrets.SystemRandom()


# ---------------------------------------------------------------------------
# groups

class _FixedBase:
    """Comb table: row i holds base^(j * 256^i), so base^e is one product per exponent byte."""

    def __init__(self, base: int, p, n_bytes: int):
        self.n_bytes = n_bytes
        self.rows = []
        step = gmpy2.mpz(base)
        for _ in range(n_bytes):
            row = [gmpy2.mpz(1)]
            for _ in range(255):
                row.append(row[-1] * step % p)
            self.rows.append(row)
            step = row[-1] * step % p

    def pow(self, e: int, p) -> int:
        acc = gmpy2.mpz(1)
        for row, byte in zip(self.rows, e.to_bytes(self.n_bytes, "little")):
            if byte:
                acc = acc * row[byte] % p
        return acc


_TABLE_AFTER_USES = 32   # bases used this often (verification keys) earn a table
_MAX_TABLES = 16


@dataclass(frozen=True)
class GroupParams:
    p: int
    q: int
    g: int
    profile_id: str
    _mp: object = field(init=False, repr=False, compare=False, hash=False)
    _tables: dict = field(init=False, repr=False, compare=False, hash=False)
    _uses: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_mp", gmpy2.mpz(self.p))
        object.__setattr__(self, "_tables", {})
        object.__setattr__(self, "_uses", {})

    def _table(self, base: int) -> _FixedBase | None:
        table = self._tables.get(base)
        if table is not None or self.p.bit_length() < 512:
            return table
        uses = self._uses[base] = self._uses.get(base, 0) + 1
        if base == self.g or uses >= _TABLE_AFTER_USES:
            if len(self._tables) >= _MAX_TABLES:
                victim = next(k for k in self._tables if k != self.g)
                del self._tables[victim]
            table = self._tables[base] = _FixedBase(base, self._mp, self.scalar_len)
            self._uses.pop(base, None)
            if len(self._uses) > 4096:
                self._uses.clear()
        return table

    def exp(self, base: int, e: int) -> int:
        if 0 <= e < self.q:
            table = self._table(base)
            if table is not None:
                return int(table.pow(e, self._mp))
        return int(gmpy2.powmod(base, e, self._mp))

    def gexp(self, e: int) -> int:
        return self.exp(self.g, e)

    @property
    def element_len(self) -> int:
        return (self.p.bit_length() + 7) // 8

    @property
    def scalar_len(self) -> int:
        return (self.q.bit_length() + 7) // 8

    def element_bytes(self, x: int) -> bytes:
        return x.to_bytes(self.element_len, "big")

    def scalar_bytes(self, s: int) -> bytes:
        return s.to_bytes(self.scalar_len, "big")

    def is_element(self, y) -> bool:
        """True for members of the order-q subgroup other than the identity."""
        return isinstance(y, int) and not isinstance(y, bool) and 1 < y < self.p and _in_subgroup(self, y)

    def is_scalar(self, s) -> bool:
        return isinstance(s, int) and not isinstance(s, bool) and 0 <= s < self.q

    def inv(self, s: int) -> int:
        return pow(s, -1, self.q)


@functools.lru_cache(maxsize=1024)
def _in_subgroup(params: GroupParams, y: int) -> bool:
    return int(gmpy2.powmod(y, params.q, params._mp)) == 1


# RFC 5114 section 2.3: 2048-bit MODP group with a 256-bit prime-order subgroup.
_RFC5114_P = int(
    "87a8e61db4b6663cffbbd19c651959998ceef608660dd0f25d2ceed4435e3b00"
    "e00df8f1d61957d4faf7df4561b2aa3016c3d91134096faa3bf4296d830e9a7c"
    "209e0c6497517abd5a8a9d306bcf67ed91f9e6725b4758c022e0b1ef4275bf7b"
    "6c5bfc11d45f9088b941f54eb1e59bb8bc39a0bf12307f5c4fdb70c581b23f76"
    "b63acae1caa6b7902d52526735488a0ef13c6d9a51bfa4ab3ad8347796524d8e"
    "f6a167b5a41825d967e144e5140564251ccacb83e6b486f6b3ca3f7971506026"
    "c0b857f689962856ded4010abd0be621c3a3960a54e710c375f26375d7014103"
    "a4b54330c198af126116d2276e11715f693877fad7ef09cadb094ae91e1a1597", 16)
_RFC5114_G = int(
    "3fb32c9b73134d0b2e77506660edbd484ca7b18f21ef205407f4793a1a0ba125"
    "10dbc15077be463fff4fed4aac0bb555be3a6c1b0c6b47b1bc3773bf7e8c6f62"
    "901228f8c28cbb18a55ae31341000a650196f931c77a57f2ddf463e5e9ec144b"
    "777de62aaab8a8628ac376d282d6ed3864e67982428ebc831d14348f6f2f9193"
    "b5045af2767164e1dfc967c1fb3f2e55a4bd1bffe83b9c80d052b985d182ea0a"
    "db2a3b7313d3fe14c8484b1e052588b9b7d2bbd2df016199ecd06e1557cd0915"
    "b3353bbb64e0ec377fd028370df92b52c7891428cdc67eb6184b523d1db246c3"
    "2f63078490f00ef8d647d148d47954515e2327cfef98c582664b4c0f6cc41659", 16)
_RFC5114_Q = int(
    "8cf83642a709a097b447997640129da299b1a47d1eb3750ba308b0fe64f5fbd3", 16)

_PROFILES = {
    # Insecure: every property is brute-forceable over q = 101.
    "tiny-test": (607, 101, 64),
    "standard": (_RFC5114_P, _RFC5114_Q, _RFC5114_G),
}

PROFILES = tuple(_PROFILES)


@functools.lru_cache(maxsize=None)
def group_params(profile: str) -> GroupParams:
    try:
        p, q, g = _PROFILES[profile]
    except KeyError:
        raise ConfigurationError(
            f"unknown group profile {profile!r}; expected one of {PROFILES}") from None
    return GroupParams(p, q, g, profile)


# ---------------------------------------------------------------------------
# keys and Schnorr signatures

@dataclass(frozen=True)
class KeyPair:
    secret: int
    public: int
    params: GroupParams

    @classmethod
    def from_secret(cls, params: GroupParams, secret: int) -> "KeyPair":
        if not 1 <= secret <= params.q - 1:
            raise InvalidKeyError("secret exponent must lie in [1, q-1]")
        return cls(secret, params.gexp(secret), params)


def keygen(params: GroupParams, rng: random.Random | None = None) -> KeyPair:
    rng = rng or default_rng()
    return KeyPair.from_secret(params, rng.randrange(1, params.q))


@dataclass(frozen=True)
class SchnorrSignature:
    e: int
    s: int


def _challenge(params: GroupParams, commitment: int, public: int, message: bytes) -> int:
    data = params.element_bytes(commitment) + params.element_bytes(public) + message
    return hash_to_scalar(TAG_SCHNORR, data, params.q)


def schnorr_sign(kp: KeyPair, message: bytes, rng: random.Random | None = None) -> SchnorrSignature:
    params = kp.params
    rng = rng or default_rng()
    k = rng.randrange(1, params.q)
    e = _challenge(params, params.gexp(k), kp.public, message)
    return SchnorrSignature(e, (k + kp.secret * e) % params.q)


def schnorr_verify(params: GroupParams, public: int, message: bytes, sig: SchnorrSignature) -> bool:
    if not (isinstance(sig, SchnorrSignature) and params.is_scalar(sig.e)
            and params.is_scalar(sig.s) and params.is_element(public)):
        return False
    commitment = params.gexp(sig.s) * params.exp(public, params.q - sig.e) % params.p
    return _challenge(params, commitment, public, message) == sig.e


# ---------------------------------------------------------------------------
# chameleon hash (discrete-log trapdoor commitment)

@dataclass(frozen=True)
class ChameleonOpening:
    message: bytes
    r: int


def message_scalar(params: GroupParams, message: bytes) -> int:
    return hash_to_scalar(TAG_CHAMELEON, message, params.q)


@functools.lru_cache(maxsize=8192)
def chameleon_hash(params: GroupParams, y: int, message: bytes, r: int) -> int:
    if not params.is_scalar(r):
        raise ValueError("chameleon randomizer must lie in [0, q-1]")
    return params.gexp(message_scalar(params, message)) * params.exp(y, r) % params.p


def chameleon_collide(params: GroupParams, x: int, message: bytes, r: int, new_message: bytes) -> int:
    """Randomizer that makes ``new_message`` hash like ``(message, r)`` under y = g^x."""
    if x % params.q == 0:
        raise InvalidKeyError("chameleon trapdoor must be non-zero mod q")
    delta = message_scalar(params, message) - message_scalar(params, new_message)
    return (r + delta * params.inv(x % params.q)) % params.q


def chameleon_extract(params: GroupParams, a: ChameleonOpening, b: ChameleonOpening,
                      y: int | None = None) -> int:
    """Recover the trapdoor from two openings of the same chameleon digest.

    If ``y`` is given, the openings must collide under it and the recovered
    exponent is checked against it.
    """
    if a.message == b.message:
        raise DegenerateInputError("openings carry the same message")
    if a.r % params.q == b.r % params.q:
        raise InconsistentOpeningsError("distinct messages with identical randomizers")
    if y is not None and chameleon_hash(params, y, a.message, a.r) != chameleon_hash(params, y, b.message, b.r):
        raise InconsistentOpeningsError("openings do not collide under the given key")
    q = params.q
    x = (message_scalar(params, a.message) - message_scalar(params, b.message)) * params.inv((b.r - a.r) % q) % q
    if y is not None and params.gexp(x) != y:
        raise InconsistentOpeningsError("extracted exponent does not match the key")
    return x


# ---------------------------------------------------------------------------
# Feldman verifiable secret sharing

@dataclass(frozen=True)
class Share:
    index: int
    value: int


@dataclass(frozen=True)
class VSSDeal:
    threshold: int
    coefficients: tuple[int, ...]
    commitments: tuple[int, ...]

    @property
    def secret(self) -> int:
        return self.coefficients[0]

    def share(self, index: int, q: int) -> Share:
        return Share(index, poly_eval(self.coefficients, index, q))


def poly_eval(coefficients: Sequence[int], x: int, q: int) -> int:
    acc = 0
    for c in reversed(coefficients):
        acc = (acc * x + c) % q
    return acc


def vss_deal(params: GroupParams, secret: int, t: int, rng: random.Random | None = None,
             coefficients: Sequence[int] | None = None) -> VSSDeal:
    """Deal a degree-``t`` sharing of ``secret``; ``t+1`` shares reconstruct it.

    ``coefficients`` forces a_1..a_t (tests); otherwise they are drawn from ``rng``.
    """
    q = params.q
    if t < 1:
        raise ThresholdTooSmallError("t = 0 would leak the secret with a single share")
    if t + 1 >= q:
        raise ThresholdTooSmallError("threshold too large for the group order")
    if not 1 <= secret <= q - 1:
        raise InvalidKeyError("secret must lie in [1, q-1]")
    if coefficients is None:
        rng = rng or default_rng()
        coefficients = [rng.randrange(q) for _ in range(t)]
    elif len(coefficients) != t:
        raise ValueError(f"expected {t} forced coefficients, got {len(coefficients)}")
    coeffs = (secret, *(c % q for c in coefficients))
    return VSSDeal(t, coeffs, tuple(params.gexp(c) for c in coeffs))


def vss_verify_share(params: GroupParams, commitments: Sequence[int], share: Share) -> bool:
    if not isinstance(share, Share) or not commitments:
        return False
    i, v = share.index, share.value
    if not (isinstance(i, int) and 1 <= i < params.q and params.is_scalar(v)):
        return False
    rhs, power = 1, 1
    for c in commitments:
        rhs = rhs * params.exp(c, power) % params.p
        power = power * i % params.q
    return params.gexp(v) == rhs


def lagrange_at_zero(indices: Iterable[int], i: int, q: int) -> int:
    num, den = 1, 1
    for j in indices:
        if j != i:
            num = num * j % q
            den = den * (j - i) % q
    return num * pow(den, -1, q) % q


def vss_reconstruct(params: GroupParams, commitments: Sequence[int], shares: Iterable[Share]) -> int:
    """Interpolate the dealt secret at zero from any ``t+1`` valid shares."""
    t = len(commitments) - 1
    by_index: dict[int, Share] = {}
    for sh in shares:
        by_index.setdefault(sh.index, sh)
    if len(by_index) < t + 1:
        raise InsufficientSharesError(
            f"need {t + 1} shares with distinct indices, have {len(by_index)}")
    for sh in by_index.values():
        if not vss_verify_share(params, commitments, sh):
            raise InvalidShareError(sh.index)
    chosen = sorted(by_index)[:t + 1]
    q = params.q
    secret = sum(by_index[i].value * lagrange_at_zero(chosen, i, q) for i in chosen) % q
    if params.gexp(secret) != commitments[0]:
        raise InvalidShareError(chosen[0], "interpolated secret does not match C_0")
    return secret
