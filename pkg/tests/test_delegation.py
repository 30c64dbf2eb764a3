import json
from dataclasses import replace
from importlib import resources

import pytest

from credsig import primitives as prim
from credsig.delegation import (Delegate, DelegationGrant, EventKind, Finalize, IssuedCredential, Propose,
                                Reason, Review, ShareRegistry, State, delegate_issue, draft, grant_create,
                                multisig_step, multisig_verify, registry_record, trace_reconstruct,
                                verify_grant, verify_issued)
from credsig.document import Block, Template, base58_encode, encode_scalar, fill_template
from credsig.errors import (GrantError, InsufficientSharesError, InvalidCredentialError, IssuanceError,
                            ProtocolError)
from credsig.primitives import Share
from credsig.sss import sss_sanitize, sss_verify

from oracles import lagrange_secret, modexp


def did_template():
    text = resources.files("credsig").joinpath("data/did_template.json").read_text(encoding="utf-8")
    return Template.from_json(json.loads(text))


def did_values(k):
    did = f"did:example:holder{k}"
    key = "z" + base58_encode(b"\xed\x01" + bytes([k % 256]) * 32)
    return {
        "/id": did,
        "/authentication/0": f"{did}#key-1",
        "/verificationMethod/0/id": f"{did}#key-1",
        "/verificationMethod/0/controller": did,
        "/verificationMethod/0/type": "Ed25519VerificationKey2020",
        "/verificationMethod/0/publicKeyMultibase": key,
    }


@pytest.fixture
def setup(standard, rng):
    issuer = prim.keygen(standard, rng)
    grant, secrets = grant_create(issuer, did_template(), 3, rng)
    return issuer, grant, secrets


def test_grant_invariants(setup, standard):
    issuer, grant, secrets = setup
    assert verify_grant(issuer.public, grant)
    assert len(grant.commitments) == 4
    assert grant.commitments[0] == standard.gexp(secrets.trapdoor) == grant.sanitizer_public
    again = DelegationGrant.from_json(json.loads(json.dumps(grant.to_json())))
    assert again == grant and verify_grant(issuer.public, again)


def test_tampered_commitment_fails(setup, standard):
    issuer, grant, _ = setup
    c = list(grant.commitments)
    c[1] = c[1] * standard.g % standard.p
    assert not verify_grant(issuer.public, replace(grant, commitments=tuple(c)))


def test_grant_errors(standard, rng):
    issuer = prim.keygen(standard, rng)
    with pytest.raises(GrantError):
        grant_create(issuer, did_template(), 0, rng)
    with pytest.raises(GrantError):
        grant_create(issuer, did_template(), 2, rng, delegate_public=standard.g, trapdoor=5)


def test_issue_and_verify(setup):
    issuer, grant, secrets = setup
    cred = delegate_issue(grant, secrets, 1, did_values(1))
    assert verify_issued(issuer.public, grant, cred).reason is Reason.OK
    assert cred.envelope.base_sig == grant.envelope.base_sig
    assert IssuedCredential.from_json(json.loads(json.dumps(cred.to_json()))) == cred


def test_issue_errors(setup):
    _, grant, secrets = setup
    values = did_values(1)
    del values["/id"]
    with pytest.raises(IssuanceError):
        delegate_issue(grant, secrets, 1, values)
    with pytest.raises(IssuanceError):
        delegate_issue(grant, secrets, 0, did_values(1))
    with pytest.raises(IssuanceError):
        delegate_issue(grant, secrets, 2, did_values(1), used_counters={2})
    with pytest.raises(IssuanceError):
        delegate_issue(grant, secrets, 1, {**did_values(1), "/controller": "did:example:x"})
    d = Delegate(grant, secrets)
    assert [d.issue(did_values(k)).trace_share.index for k in range(3)] == [1, 2, 3]


def test_rejection_reasons(setup, standard):
    issuer, grant, secrets = setup
    cred = delegate_issue(grant, secrets, 1, did_values(1))
    assert verify_issued(issuer.public, grant, replace(cred, trace_share=None)).reason is Reason.BAD_SHARE
    bad_share = Share(1, (cred.trace_share.value + 1) % standard.q)
    assert verify_issued(issuer.public, grant, replace(cred, trace_share=bad_share)).reason is Reason.BAD_SHARE
    assert verify_issued(issuer.public, grant, replace(cred, trace_share=Share(0, secrets.trapdoor))).reason \
        is Reason.BAD_SHARE
    blocks = list(cred.blocks)
    i = next(b.index for b in blocks if b.path == "/id")
    blocks[i] = Block(i, "/id", encode_scalar("did:example:mallory"))
    assert verify_issued(issuer.public, grant, replace(cred, blocks=tuple(blocks))).reason is Reason.BAD_SIGNATURE
    blocks[i] = Block(i, "/id", encode_scalar("not a did"))
    assert verify_issued(issuer.public, grant, replace(cred, blocks=tuple(blocks))).reason is Reason.BAD_CONSTRAINT
    # the unfilled template itself is not a credential
    raw = IssuedCredential(grant.template.blocks, grant.envelope, secrets.share(1), grant.grant_id)
    assert verify_issued(issuer.public, grant, raw).reason is Reason.BAD_CONSTRAINT


def test_registry_threshold_and_trace(setup, standard):
    issuer, grant, secrets = setup
    reg = ShareRegistry()
    creds = [delegate_issue(grant, secrets, k, did_values(k)) for k in range(1, 5)]
    kinds = []
    for cred in creds:
        reg, events = registry_record(reg, issuer.public, grant, cred)
        kinds.append([e.kind for e in events])
    assert kinds[:3] == [[EventKind.RECORDED]] * 3
    assert kinds[3] == [EventKind.RECORDED, EventKind.THRESHOLD_CROSSED]
    x = trace_reconstruct(reg, grant)
    assert x == secrets.trapdoor and standard.gexp(x) == grant.commitments[0]
    again, events = registry_record(reg, issuer.public, grant, creds[0])
    assert events == [] and again == reg
    assert ShareRegistry.from_json(json.loads(json.dumps(reg.to_json()))) == reg


def test_registry_insufficient(setup):
    issuer, grant, secrets = setup
    reg = ShareRegistry()
    for k in range(1, 4):
        reg, _ = registry_record(reg, issuer.public, grant, delegate_issue(grant, secrets, k, did_values(k)))
    with pytest.raises(InsufficientSharesError):
        trace_reconstruct(reg, grant)


def test_equivocation_and_counter_reuse(setup, standard):
    issuer, grant, secrets = setup
    cred = delegate_issue(grant, secrets, 1, did_values(1))
    reg, _ = registry_record(ShareRegistry(), issuer.public, grant, cred)
    forged = replace(cred, trace_share=Share(1, (cred.trace_share.value + 1) % standard.q))
    same, events = registry_record(reg, issuer.public, grant, forged)
    assert same == reg and [e.kind for e in events] == [EventKind.EQUIVOCATION]
    reused = delegate_issue(grant, secrets, 1, did_values(9))
    same, events = registry_record(reg, issuer.public, grant, reused)
    assert same == reg and [e.kind for e in events] == [EventKind.COUNTER_REUSE]
    with pytest.raises(InvalidCredentialError):
        registry_record(reg, issuer.public, grant, replace(cred, trace_share=None))


def test_trace_tiny_worked_example(tiny, rng):
    issuer = prim.keygen(tiny, rng)
    grant, secrets = grant_create(issuer, did_template(), 1, rng, trapdoor=5, coefficients=[3])
    assert secrets.share(1) == Share(1, 8) and secrets.share(2) == Share(2, 11)
    reg = ShareRegistry()
    for k in (1, 2):
        reg, events = registry_record(reg, issuer.public, grant, delegate_issue(grant, secrets, k, did_values(k)))
    assert events[-1].kind is EventKind.THRESHOLD_CROSSED
    x = trace_reconstruct(reg, grant)
    assert x == lagrange_secret([(1, 8), (2, 11)], 101) == 5
    assert modexp(64, 5, 607) == grant.commitments[0]


def test_reconstructed_trapdoor_can_sanitize(setup):
    issuer, grant, secrets = setup
    reg = ShareRegistry()
    for k in range(1, 5):
        reg, _ = registry_record(reg, issuer.public, grant, delegate_issue(grant, secrets, k, did_values(k)))
    x = trace_reconstruct(reg, grant)
    index_of = {b.path: b.index for b in grant.template.blocks}
    mods = {index_of[p]: v for p, v in did_values(42).items()}
    env, blocks = sss_sanitize(x, grant.envelope, grant.template.blocks, mods)
    assert sss_verify(issuer.public, env, blocks)


# -- two-signature baseline --------------------------------------------------

def test_multisig_honest_run(standard, rng):
    issuer, delegate = prim.keygen(standard, rng), prim.keygen(standard, rng)
    tpl = did_template()
    doc = fill_template(tpl, did_values(1))
    s = draft(doc, tpl)
    s = multisig_step(s, Propose(delegate), rng)
    assert s.state is State.PROPOSED
    s = multisig_step(s, Review(issuer, delegate.public), rng)
    assert s.state is State.APPROVED
    s = multisig_step(s, Finalize(issuer.public, delegate.public), rng)
    assert s.state is State.FINALIZED
    assert multisig_verify(standard, issuer.public, delegate.public, s.document, s.delegate_sig, s.issuer_sig)
    with pytest.raises(ProtocolError):
        multisig_step(s, Propose(delegate), rng)


def test_multisig_rejects_constraint_violation(standard, rng):
    issuer, delegate = prim.keygen(standard, rng), prim.keygen(standard, rng)
    tpl = did_template()
    doc = fill_template(tpl, {**did_values(1), "/verificationMethod/0/type": "RsaKey"})
    s = multisig_step(draft(doc, tpl), Propose(delegate), rng)
    s = multisig_step(s, Review(issuer, delegate.public), rng)
    assert s.state is State.REJECTED and s.reason
    with pytest.raises(ProtocolError):
        multisig_step(s, Finalize(issuer.public, delegate.public), rng)


def test_multisig_mutation_after_approval(standard, rng):
    issuer, delegate = prim.keygen(standard, rng), prim.keygen(standard, rng)
    tpl = did_template()
    s = multisig_step(draft(fill_template(tpl, did_values(1)), tpl), Propose(delegate), rng)
    s = multisig_step(s, Review(issuer, delegate.public), rng)
    mutated = replace(s, document=fill_template(tpl, did_values(2)))
    with pytest.raises(ProtocolError):
        multisig_step(mutated, Finalize(issuer.public, delegate.public), rng)
    assert not multisig_verify(standard, issuer.public, delegate.public, mutated.document,
                               s.delegate_sig, s.issuer_sig)
