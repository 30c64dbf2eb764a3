"""Template delegation with share-leak tracing.

The issuer hands a delegate an SSS-signed template, the delegate's
chameleon trapdoor ``x`` and a Feldman deal whose secret is ``x``. Each
credential the delegate fills in must carry one share of that deal, so a
registry that sees more than ``t`` credentials can rebuild ``x`` and the
delegate loses exclusive control of the template.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

from .. import primitives as prim
from ..document import (PLACEHOLDER, Block, BlockSequence, Template, blocks_from_json, blocks_to_json,
                        canonical_bytes, check_constraint, dump_canonical_json, encode_scalar)
from ..encoding import b64d, b64e, hex_to_int, int_to_hex, u32
from ..errors import (CanonicalizationError, ConstraintError, EncodingError, GrantError,
                      InsufficientSharesError, InvalidCredentialError, IssuanceError, TemplateError)
from ..primitives import GroupParams, KeyPair, SchnorrSignature, Share, VSSDeal
from ..sss import SanitizableSignature, constraints_hold, sss_sanitize, sss_sign, sss_verify


def template_digest(template: Template) -> bytes:
    return prim.tagged_hash(prim.TAG_TEMPLATE, dump_canonical_json(template.to_json()).encode("utf-8"))


@dataclass(frozen=True)
class DelegationGrant:
    template: Template
    envelope: SanitizableSignature
    commitments: tuple
    threshold: int
    issuer_sig: SchnorrSignature

    @property
    def grant_id(self) -> str:
        return b64e(self.envelope.tag)

    @property
    def sanitizer_public(self) -> int:
        return self.envelope.sanitizer_public

    def to_json(self) -> dict:
        return {
            "template": self.template.to_json(),
            "envelope": self.envelope.to_json(),
            "commitments": [int_to_hex(c) for c in self.commitments],
            "t": self.threshold,
            "issuer_sig": {"e": int_to_hex(self.issuer_sig.e), "s": int_to_hex(self.issuer_sig.s)},
        }

    @classmethod
    def from_json(cls, obj) -> "DelegationGrant":
        try:
            return cls(Template.from_json(obj["template"]), SanitizableSignature.from_json(obj["envelope"]),
                       tuple(hex_to_int(c) for c in obj["commitments"]), obj["t"],
                       SchnorrSignature(hex_to_int(obj["issuer_sig"]["e"]), hex_to_int(obj["issuer_sig"]["s"])))
        except (KeyError, TypeError, TemplateError) as exc:
            raise EncodingError(f"malformed grant: {exc}") from exc


@dataclass(frozen=True)
class DelegateSecrets:
    """What the issuer hands the delegate once, at grant time."""
    trapdoor: int
    deal: VSSDeal
    profile: str

    def share(self, counter: int) -> Share:
        return self.deal.share(counter, prim.group_params(self.profile).q)

    def to_json(self) -> dict:
        return {
            "profile": self.profile,
            "x": int_to_hex(self.trapdoor),
            "t": self.deal.threshold,
            "coefficients": [int_to_hex(a) for a in self.deal.coefficients],
            "commitments": [int_to_hex(c) for c in self.deal.commitments],
        }

    @classmethod
    def from_json(cls, obj) -> "DelegateSecrets":
        try:
            deal = VSSDeal(obj["t"], tuple(hex_to_int(a) for a in obj["coefficients"]),
                           tuple(hex_to_int(c) for c in obj["commitments"]))
            return cls(hex_to_int(obj["x"]), deal, obj["profile"])
        except (KeyError, TypeError) as exc:
            raise EncodingError(f"malformed delegate secrets: {exc}") from exc


@dataclass(frozen=True)
class IssuedCredential:
    blocks: BlockSequence
    envelope: SanitizableSignature
    trace_share: Share | None
    grant_id: str

    def document_digest(self) -> bytes:
        return prim.tagged_hash(prim.TAG_TEMPLATE, canonical_bytes(self.blocks))

    def to_json(self) -> dict:
        share = None if self.trace_share is None else {
            "i": self.trace_share.index, "v": int_to_hex(self.trace_share.value)}
        return {"grant": self.grant_id, "envelope": self.envelope.to_json(),
                "blocks": blocks_to_json(self.blocks), "share": share}

    @classmethod
    def from_json(cls, obj) -> "IssuedCredential":
        try:
            sh = obj.get("share")
            share = None if sh is None else Share(sh["i"], hex_to_int(sh["v"]))
            return cls(blocks_from_json(obj["blocks"]), SanitizableSignature.from_json(obj["envelope"]),
                       share, obj["grant"])
        except (KeyError, TypeError, CanonicalizationError) as exc:
            raise EncodingError(f"malformed credential: {exc}") from exc


def _grant_message(params: GroupParams, commitments, t: int, template: Template, y: int,
                   envelope: SanitizableSignature) -> bytes:
    return (b"credsig-grant-v1" + u32(len(commitments)) + b"".join(params.element_bytes(c) for c in commitments)
            + u32(t) + template_digest(template) + params.element_bytes(y) + envelope.tag)


def grant_create(issuer: KeyPair, template: Template, threshold: int, rng: random.Random | None = None,
                 *, delegate_public: int | None = None, trapdoor: int | None = None,
                 coefficients: Sequence[int] | None = None) -> tuple[DelegationGrant, DelegateSecrets]:
    """Sign ``template`` for offline filling and deal the delegate's trapdoor.

    The issuer acts as dealer: it picks ``x`` (unless ``trapdoor`` is given)
    and shares it with a degree-``threshold`` Feldman polynomial. If
    ``delegate_public`` is supplied it must equal g^x. ``trapdoor`` and
    ``coefficients`` pin the deal for reproducible examples.
    """
    params = issuer.params
    rng = rng or prim.default_rng()
    if threshold < 1:
        raise GrantError("threshold must be at least 1; t = 0 leaks x on the first issuance")
    x = trapdoor if trapdoor is not None else rng.randrange(1, params.q)
    delegate = KeyPair.from_secret(params, x)
    if delegate_public is not None and delegate_public != delegate.public:
        raise GrantError("supplied delegate public key is not g^x; C_0 = y would not hold")
    deal = prim.vss_deal(params, x, threshold, rng, coefficients)
    envelope, _record = sss_sign(issuer, delegate.public, template.blocks, template.admissible_indices(),
                                 template.constraints, rng)
    msg = _grant_message(params, deal.commitments, threshold, template, delegate.public, envelope)
    grant = DelegationGrant(template, envelope, deal.commitments, threshold, prim.schnorr_sign(issuer, msg, rng))
    return grant, DelegateSecrets(x, deal, params.profile_id)


def verify_grant(issuer_public: int, grant: DelegationGrant) -> bool:
    try:
        params = prim.group_params(grant.envelope.profile)
    except Exception:
        return False
    env = grant.envelope
    if len(grant.commitments) != grant.threshold + 1 or grant.commitments[0] != env.sanitizer_public:
        return False
    if not all(params.is_element(c) for c in grant.commitments):
        return False
    msg = _grant_message(params, grant.commitments, grant.threshold, grant.template, env.sanitizer_public, env)
    if not prim.schnorr_verify(params, issuer_public, msg, grant.issuer_sig):
        return False
    return sss_verify(issuer_public, env, grant.template.blocks, params)


def delegate_issue(grant: DelegationGrant, secrets: DelegateSecrets, counter: int,
                   field_values: Mapping[str, Any], used_counters=()) -> IssuedCredential:
    """Fill the template offline; no message to the issuer is needed."""
    if not isinstance(counter, int) or counter < 1:
        raise IssuanceError("issuance counter must be a positive integer")
    if counter in used_counters:
        raise IssuanceError(f"counter {counter} already used by this delegate")
    template = grant.template
    unknown = sorted(set(field_values) - template.admissible_paths)
    if unknown:
        raise IssuanceError(f"not admissible: {unknown}")
    missing = sorted(template.admissible_paths - set(field_values))
    if missing:
        raise IssuanceError(f"missing placeholder values: {missing}")
    index_of = {b.path: b.index for b in template.blocks}
    mods = {index_of[path]: value for path, value in field_values.items()}
    envelope, blocks = sss_sanitize(secrets.trapdoor, grant.envelope, template.blocks, mods)
    return IssuedCredential(blocks, envelope, secrets.share(counter), grant.grant_id)


class Delegate:
    """Delegate-side state: keeps the issuance counter monotonic."""

    def __init__(self, grant: DelegationGrant, secrets: DelegateSecrets):
        self.grant = grant
        self.secrets = secrets
        self.used: set[int] = set()

    def issue(self, field_values: Mapping[str, Any], counter: int | None = None) -> IssuedCredential:
        counter = counter if counter is not None else max(self.used, default=0) + 1
        cred = delegate_issue(self.grant, self.secrets, counter, field_values, self.used)
        self.used.add(counter)
        return cred


class Reason(str, enum.Enum):
    OK = "ok"
    BAD_SIGNATURE = "bad-signature"
    BAD_SHARE = "bad-share"
    BAD_CONSTRAINT = "bad-constraint"


@dataclass(frozen=True)
class Verdict:
    reason: Reason

    @property
    def accepted(self) -> bool:
        return self.reason is Reason.OK

    def __bool__(self):
        return self.accepted


def verify_issued(issuer_public: int, grant: DelegationGrant, cred: IssuedCredential) -> Verdict:
    """A credential needs a valid issuer signature AND a valid trace share."""
    env = cred.envelope
    try:
        params = prim.group_params(env.profile)
    except Exception:
        return Verdict(Reason.BAD_SIGNATURE)
    if (cred.grant_id != grant.grant_id or env.tag != grant.envelope.tag
            or env.base_sig != grant.envelope.base_sig or not verify_grant(issuer_public, grant)):
        return Verdict(Reason.BAD_SIGNATURE)
    try:
        if not constraints_hold(env, cred.blocks, allow_placeholder=False):
            return Verdict(Reason.BAD_CONSTRAINT)
    except (TypeError, AttributeError):
        return Verdict(Reason.BAD_CONSTRAINT)
    placeholder = encode_scalar(PLACEHOLDER)
    if any(b.value_bytes == placeholder for b in cred.blocks):
        return Verdict(Reason.BAD_CONSTRAINT)
    if not sss_verify(issuer_public, env, cred.blocks, params):
        return Verdict(Reason.BAD_SIGNATURE)
    share = cred.trace_share
    if share is None or share.index < 1 or not prim.vss_verify_share(params, grant.commitments, share):
        return Verdict(Reason.BAD_SHARE)
    return Verdict(Reason.OK)


# ---------------------------------------------------------------------------
# registry

class EventKind(str, enum.Enum):
    RECORDED = "ShareRecorded"
    THRESHOLD_CROSSED = "ThresholdCrossed"
    EQUIVOCATION = "Equivocation"
    COUNTER_REUSE = "CounterReuse"


@dataclass(frozen=True)
class RegistryEvent:
    kind: EventKind
    grant_id: str
    index: int
    detail: str = ""


@dataclass(frozen=True)
class _Entry:
    share: Share
    document: bytes


@dataclass(frozen=True)
class ShareRegistry:
    """Shares seen per grant. Values are treated as immutable; record() copies."""
    entries: Mapping[str, Mapping[int, _Entry]] = field(default_factory=dict)
    crossed: frozenset = frozenset()

    def shares(self, grant_id: str) -> list[Share]:
        return [e.share for _, e in sorted(self.entries.get(grant_id, {}).items())]

    def threshold_crossed(self, grant_id: str) -> bool:
        return grant_id in self.crossed

    def to_json(self) -> dict:
        return {
            "grants": {
                gid: [{"i": i, "v": int_to_hex(e.share.value), "doc": b64e(e.document)}
                      for i, e in sorted(ents.items())]
                for gid, ents in sorted(self.entries.items())
            },
            "crossed": sorted(self.crossed),
        }

    @classmethod
    def from_json(cls, obj) -> "ShareRegistry":
        try:
            entries = {gid: {it["i"]: _Entry(Share(it["i"], hex_to_int(it["v"])), b64d(it["doc"])) for it in items}
                       for gid, items in obj["grants"].items()}
            return cls(entries, frozenset(obj["crossed"]))
        except (KeyError, TypeError) as exc:
            raise EncodingError(f"malformed registry: {exc}") from exc


def registry_record(registry: ShareRegistry, issuer_public: int, grant: DelegationGrant,
                    cred: IssuedCredential) -> tuple[ShareRegistry, list[RegistryEvent]]:
    gid = grant.grant_id
    current = dict(registry.entries.get(gid, {}))
    share = cred.trace_share
    if share is not None and share.index in current:
        seen = current[share.index]
        if seen.share.value != share.value:
            return registry, [RegistryEvent(EventKind.EQUIVOCATION, gid, share.index,
                                            "second value for an index already on record")]
    verdict = verify_issued(issuer_public, grant, cred)
    if not verdict:
        raise InvalidCredentialError(f"credential rejected: {verdict.reason.value}")
    doc = cred.document_digest()
    if share.index in current:
        if current[share.index].document == doc:
            return registry, []
        return registry, [RegistryEvent(EventKind.COUNTER_REUSE, gid, share.index,
                                        "same counter used for a different credential")]
    current[share.index] = _Entry(share, doc)
    entries = dict(registry.entries)
    entries[gid] = current
    events = [RegistryEvent(EventKind.RECORDED, gid, share.index)]
    crossed = registry.crossed
    if len(current) >= grant.threshold + 1 and gid not in crossed:
        crossed = crossed | {gid}
        events.append(RegistryEvent(EventKind.THRESHOLD_CROSSED, gid, share.index,
                                    f"{len(current)} shares > t = {grant.threshold}"))
    return ShareRegistry(entries, crossed), events


def trace_reconstruct(registry: ShareRegistry, grant: DelegationGrant) -> int:
    """Rebuild the delegate trapdoor once more than ``t`` shares are on record."""
    params = prim.group_params(grant.envelope.profile)
    shares = registry.shares(grant.grant_id)
    if len(shares) < grant.threshold + 1:
        raise InsufficientSharesError(f"{len(shares)} shares on record, need {grant.threshold + 1}")
    return prim.vss_reconstruct(params, grant.commitments, shares)
