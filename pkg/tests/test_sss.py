import hashlib
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from credsig import primitives as prim
from credsig import sss
from credsig.document import Block, Constraint, canonicalize, encode_block, encode_scalar
from credsig.encoding import u32
from credsig.errors import ConstraintError, ImmutabilityError, NothingToProveError, SigningError
from credsig.primitives import ChameleonOpening
from credsig.sss import (Attribution, CollisionProof, SanitizableSignature, SanitizationRecord, SignedDocument,
                         digest_vector, sss_judge, sss_proof, sss_sanitize, sss_sign, sss_verify)

from oracles import h_scalar, modexp

DOC = {"holder": "did:example:alice", "level": "gold", "issued": "2023-04-18", "score": 7}


@pytest.fixture
def parties(standard, rng):
    return prim.keygen(standard, rng), prim.keygen(standard, rng)


@pytest.fixture
def blocks():
    return canonicalize(DOC)  # /holder /issued /level /score


def idx(blocks, path):
    return next(b.index for b in blocks if b.path == path)


def test_digest_vector_matches_oracle(tiny, rng):
    signer, san = prim.keygen(tiny, rng), prim.keygen(tiny, rng)
    blocks = canonicalize(DOC)
    sig, _ = sss_sign(signer, san.public, blocks, {1, 3}, {}, rng)
    got = digest_vector(tiny, sig, blocks)
    for b in blocks:
        if b.index in (1, 3):
            m = sig.tag + u32(b.index) + encode_block(b)
            d = modexp(64, h_scalar(6, m, 101), 607) * modexp(san.public, sig.randomizers[b.index], 607) % 607
            assert got[b.index] == d.to_bytes(tiny.element_len, "big")
        else:
            data = sig.tag + u32(b.index) + sig.salts[b.index] + encode_block(b)
            assert got[b.index] == hashlib.sha256(b"\x02" + data).digest()


def test_empty_admissible_set(parties, blocks, rng):
    signer, san = parties
    sig, record = sss_sign(signer, san.public, blocks, set(), {}, rng)
    assert sig.randomizers == {} and record.openings == {}
    assert sss_verify(signer.public, sig, blocks)
    with pytest.raises(ImmutabilityError):
        sss_sanitize(san.secret, sig, blocks, {0: "x"})


def test_sanitize_identity_and_modify(parties, blocks, rng):
    signer, san = parties
    level = idx(blocks, "/level")
    sig, _ = sss_sign(signer, san.public, blocks, {level}, {}, rng)
    same, same_blocks = sss_sanitize(san.secret, sig, blocks, {})
    assert same == sig and same_blocks == blocks
    new_sig, new_blocks = sss_sanitize(san.secret, sig, blocks, {level: "platinum"})
    assert new_blocks[level].value == "platinum"
    assert new_sig.base_sig == sig.base_sig  # signature bytes unchanged
    assert sss_verify(signer.public, new_sig, new_blocks)
    assert not sss_verify(signer.public, sig, new_blocks)


def test_wrong_trapdoor_fails_verification(parties, blocks, rng):
    signer, san = parties
    level = idx(blocks, "/level")
    sig, _ = sss_sign(signer, san.public, blocks, {level}, {}, rng)
    forged = sss_sanitize(san.secret + 1, sig, blocks, {level: "platinum"})
    assert not sss_verify(signer.public, *forged)


def test_fixed_blocks_are_immutable(parties, blocks, rng):
    signer, san = parties
    level, holder = idx(blocks, "/level"), idx(blocks, "/holder")
    sig, _ = sss_sign(signer, san.public, blocks, {level}, {}, rng)
    with pytest.raises(ImmutabilityError):
        sss_sanitize(san.secret, sig, blocks, {holder: "did:example:mallory"})
    edited = list(blocks)
    edited[holder] = Block(holder, "/holder", encode_scalar("did:example:mallory"))
    assert not sss_verify(signer.public, sig, edited)


def test_cannot_widen_admissible_set(parties, blocks, rng):
    signer, san = parties
    level, holder = idx(blocks, "/level"), idx(blocks, "/holder")
    sig, _ = sss_sign(signer, san.public, blocks, {level}, {}, rng)
    wider = SanitizableSignature(sig.tag, sig.n, (holder, level), sig.constraints, sig.profile,
                                 sig.sanitizer_public, sig.base_sig, {**sig.randomizers, holder: 1},
                                 {i: s for i, s in sig.salts.items() if i != holder})
    assert not sss_verify(signer.public, wider, blocks)


def test_constraints_enforced(parties, blocks, rng):
    signer, san = parties
    level = idx(blocks, "/level")
    cons = {"/level": Constraint.value_set(["gold", "platinum"])}
    sig, _ = sss_sign(signer, san.public, blocks, {level}, cons, rng)
    with pytest.raises(ConstraintError):
        sss_sanitize(san.secret, sig, blocks, {level: "diamond"})
    ok = sss_sanitize(san.secret, sig, blocks, {level: "platinum"})
    assert sss_verify(signer.public, *ok)
    # a sanitizer that skips the check still cannot produce an accepted envelope
    unchecked = SanitizableSignature(sig.tag, sig.n, sig.admissible, {}, sig.profile, sig.sanitizer_public,
                                     sig.base_sig, sig.randomizers, sig.salts)
    bad_sig, bad_blocks = sss_sanitize(san.secret, unchecked, blocks, {level: "diamond"})
    relabelled = SanitizableSignature(sig.tag, sig.n, sig.admissible, cons, sig.profile, sig.sanitizer_public,
                                      sig.base_sig, bad_sig.randomizers, sig.salts)
    assert not sss_verify(signer.public, relabelled, bad_blocks)
    assert not sss_verify(signer.public, bad_sig, bad_blocks)


def test_constraint_outside_admissible_set(parties, blocks, rng):
    signer, san = parties
    with pytest.raises(SigningError):
        sss_sign(signer, san.public, blocks, {idx(blocks, "/level")},
                 {"/holder": Constraint.of_format("did")}, rng)


def test_sanitize_needs_no_signer(parties, blocks, rng, monkeypatch):
    signer, san = parties
    level = idx(blocks, "/level")
    sig, _ = sss_sign(signer, san.public, blocks, {level}, {}, rng)

    def forbidden(*a, **k):
        raise AssertionError("sanitization must not sign")
    monkeypatch.setattr(prim, "schnorr_sign", forbidden)
    out = sss_sanitize(san.secret, sig, blocks, {level: "platinum"})
    monkeypatch.undo()
    assert sss_verify(signer.public, *out)


def test_proof_and_judge(parties, blocks, rng):
    signer, san = parties
    level = idx(blocks, "/level")
    sig, record = sss_sign(signer, san.public, blocks, {level}, {}, rng)
    with pytest.raises(NothingToProveError):
        sss_proof(record, sig, blocks, level)
    new_sig, new_blocks = sss_sanitize(san.secret, sig, blocks, {level: "platinum"})
    proof = sss_proof(record, new_sig, new_blocks, level)
    verdict = sss_judge(CollisionProof.from_json(json.loads(json.dumps(proof.to_json()))))
    assert verdict.attribution is Attribution.SANITIZED and verdict.trapdoor == san.secret


def test_fabricated_proofs(parties, blocks, rng, standard):
    signer, san = parties
    level = idx(blocks, "/level")
    sig, record = sss_sign(signer, san.public, blocks, {level}, {}, rng)
    orig = record.openings[level]
    fake = ChameleonOpening(orig.message[:-1] + b"X", rng.randrange(standard.q))
    assert sss_judge(CollisionProof(level, orig, fake, san.public, "standard")).attribution \
        is Attribution.SIGNER_ONLY
    same = ChameleonOpening(orig.message, (orig.r + 1) % standard.q)
    assert sss_judge(CollisionProof(level, orig, same, san.public, "standard")).attribution \
        is Attribution.SIGNER_ONLY
    other_pos = ChameleonOpening(b"\x00" * 20 + b"z", 1)
    assert sss_judge(CollisionProof(level, orig, other_pos, san.public, "standard")).attribution \
        is Attribution.UNPROVEN
    out_of_range = ChameleonOpening(orig.message, standard.q)
    assert sss_judge(CollisionProof(level, orig, out_of_range, san.public, "standard")).attribution \
        is Attribution.UNPROVEN


def test_record_mismatch(parties, blocks, rng):
    signer, san = parties
    level = idx(blocks, "/level")
    sig, _ = sss_sign(signer, san.public, blocks, {level}, {}, rng)
    _, other_record = sss_sign(signer, san.public, blocks, {level}, {}, rng)
    with pytest.raises(NothingToProveError):
        sss_proof(other_record, sig, blocks, level)


def test_serialization_round_trips(parties, blocks, rng):
    signer, san = parties
    sig, record = sss_sign(signer, san.public, blocks, {1, 2}, {"/level": Constraint.value_set(["gold"])}, rng)
    doc = SignedDocument(sig, blocks)
    again = SignedDocument.from_json(json.loads(json.dumps(doc.to_json())))
    assert again == doc and sss_verify(signer.public, again.signature, again.blocks)
    assert sss.signature_from_bytes(sig.to_bytes()) == sig
    assert SanitizationRecord.from_json(record.to_json()) == record


@settings(max_examples=30, deadline=None)
@given(st.sets(st.integers(0, 3)), st.text(max_size=10))
def test_any_admissible_rewrite_verifies(admissible, value):
    params = prim.group_params("tiny-test")
    import random
    rnd = random.Random(7)
    signer, san = prim.keygen(params, rnd), prim.keygen(params, rnd)
    blocks = canonicalize(DOC)
    sig, record = sss_sign(signer, san.public, blocks, admissible, {}, rnd)
    new_sig, new_blocks = sss_sanitize(san.secret, sig, blocks, {i: value for i in admissible}, params)
    assert sss_verify(signer.public, new_sig, new_blocks, params)
    assert new_sig.base_sig == sig.base_sig and new_sig.salts == sig.salts
    for i in admissible:
        if new_blocks[i] != blocks[i]:
            verdict = sss_judge(sss_proof(record, new_sig, new_blocks, i))
            # distinct messages can share h(m) in a 101-element group; extraction then fails
            if prim.message_scalar(params, record.openings[i].message) != \
                    prim.message_scalar(params, sss.chameleon_message(sig.tag, i, new_blocks[i])):
                assert verdict.trapdoor == san.secret
