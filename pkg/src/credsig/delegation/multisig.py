"""Two-party issuance baseline: delegate proposes, issuer checks and co-signs.

States move Drafted -> Proposed -> Approved -> Finalized, or
Proposed -> Rejected when the issuer's template check fails.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, replace
from typing import Any

from .. import primitives as prim
from ..document import Template, canonical_bytes, canonicalize, validate_against_template
from ..errors import ProtocolError
from ..primitives import GroupParams, KeyPair, SchnorrSignature

CONTEXT = b"credsig-multisig-v1"


class State(str, enum.Enum):
    DRAFTED = "Drafted"
    PROPOSED = "Proposed"
    APPROVED = "Approved"
    REJECTED = "Rejected"
    FINALIZED = "Finalized"


@dataclass(frozen=True)
class MultisigState:
    state: State
    document: Any
    template: Template
    delegate_sig: SchnorrSignature | None = None
    issuer_sig: SchnorrSignature | None = None
    reason: str = ""
    profile: str = ""


@dataclass(frozen=True)
class Propose:
    delegate: KeyPair


@dataclass(frozen=True)
class Review:
    issuer: KeyPair
    delegate_public: int


@dataclass(frozen=True)
class Finalize:
    issuer_public: int
    delegate_public: int


def draft(document, template: Template) -> MultisigState:
    return MultisigState(State.DRAFTED, document, template)


def document_message(document) -> bytes:
    return CONTEXT + canonical_bytes(canonicalize(document))


def multisig_verify(params: GroupParams, issuer_public: int, delegate_public: int, document,
                    delegate_sig: SchnorrSignature, issuer_sig: SchnorrSignature) -> bool:
    try:
        msg = document_message(document)
    except Exception:
        return False
    return (prim.schnorr_verify(params, delegate_public, msg, delegate_sig)
            and prim.schnorr_verify(params, issuer_public, msg, issuer_sig))


_LEGAL = {
    (State.DRAFTED, Propose),
    (State.PROPOSED, Review),
    (State.APPROVED, Finalize),
}


def multisig_step(session: MultisigState, event, rng: random.Random | None = None) -> MultisigState:
    if (session.state, type(event)) not in _LEGAL:
        raise ProtocolError(f"{type(event).__name__} is illegal in state {session.state.value}")
    rng = rng or prim.default_rng()

    if isinstance(event, Propose):
        sig = prim.schnorr_sign(event.delegate, document_message(session.document), rng)
        return replace(session, state=State.PROPOSED, delegate_sig=sig,
                       profile=event.delegate.params.profile_id)

    if isinstance(event, Review):
        params = event.issuer.params
        msg = document_message(session.document)
        if not prim.schnorr_verify(params, event.delegate_public, msg, session.delegate_sig):
            return replace(session, state=State.REJECTED, reason="delegate signature invalid")
        problem = validate_against_template(session.template, session.document)
        if problem:
            return replace(session, state=State.REJECTED, reason=problem)
        return replace(session, state=State.APPROVED, issuer_sig=prim.schnorr_sign(event.issuer, msg, rng))

    params = prim.group_params(session.profile)
    if not multisig_verify(params, event.issuer_public, event.delegate_public, session.document,
                           session.delegate_sig, session.issuer_sig):
        raise ProtocolError("signatures do not cover the document being finalized")
    return replace(session, state=State.FINALIZED)

