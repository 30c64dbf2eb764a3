import hashlib
import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from credsig import primitives as prim
from credsig.document import Block, canonicalize, encode_block, encode_scalar
from credsig.errors import EncodingError, RedactionError, SigningError
from credsig.rss import (Disclosed, Presentation, RedactableSignature, Redacted, expected_size, leaf_digest,
                         merkle_root, present, rss_redact, rss_sign, rss_verify, signature_from_bytes)


def sha(tag, data):
    return hashlib.sha256(bytes([tag]) + data).digest()


def oracle_root(leaves):
    # split left at the largest power of two strictly below n
    if len(leaves) == 1:
        return leaves[0]
    k = 1
    while 2 * k < len(leaves):
        k *= 2
    return sha(1, oracle_root(leaves[:k]) + oracle_root(leaves[k:]))


@pytest.fixture
def signer(standard, rng):
    return prim.keygen(standard, rng)


@pytest.fixture
def doc_blocks():
    return canonicalize({"name": "Ada", "age": 36, "email": "ada@example.org", "admin": False, "team": None})


def test_merkle_shapes():
    a, b, c, d, e = (bytes([i]) * 32 for i in range(5))
    assert merkle_root([a]) == a
    assert merkle_root([a, b]) == sha(1, a + b)
    five = sha(1, sha(1, sha(1, a + b) + sha(1, c + d)) + e)
    assert merkle_root([a, b, c, d, e]) == five
    with pytest.raises(SigningError):
        merkle_root([])


@settings(max_examples=50)
@given(st.lists(st.binary(min_size=32, max_size=32), min_size=1, max_size=40))
def test_merkle_matches_oracle(leaves):
    assert merkle_root(leaves) == oracle_root(leaves)


def test_leaf_digest_matches_hashlib():
    b = Block(0, "/a", encode_scalar("x"))
    salt = bytes(16)
    assert leaf_digest(salt, b) == sha(0, salt + encode_block(b))


def test_sign_verify_round_trip(signer, doc_blocks, rng):
    sig = rss_sign(signer, doc_blocks, rng, context="ctx")
    assert rss_verify(signer.public, Presentation(doc_blocks, sig, signer.public))


def test_salts_differ_between_signings(signer, doc_blocks, rng):
    a = rss_sign(signer, doc_blocks, rng)
    b = rss_sign(signer, doc_blocks, rng)
    assert a.disclosure != b.disclosure


def test_empty_document_unsignable(signer, rng):
    with pytest.raises(SigningError):
        rss_sign(signer, (), rng)


def test_wrong_key_and_context(signer, doc_blocks, rng, standard):
    sig = rss_sign(signer, doc_blocks, rng, context="ctx")
    other = prim.keygen(standard, rng)
    assert not rss_verify(other.public, Presentation(doc_blocks, sig, other.public))
    moved = RedactableSignature("other", sig.n, sig.profile, sig.base_sig, sig.disclosure)
    assert not rss_verify(signer.public, Presentation(doc_blocks, moved, signer.public))
    assert not rss_verify(signer.public, Presentation(doc_blocks, sig, other.public))


def test_redact_none_and_all(signer, doc_blocks, rng):
    sig = rss_sign(signer, doc_blocks, rng)
    same, kept = rss_redact(sig, doc_blocks, [])
    assert same == sig and kept == doc_blocks
    everything, kept = rss_redact(sig, doc_blocks, range(len(doc_blocks)))
    assert kept == ()
    assert all(isinstance(e, Redacted) for e in everything.disclosure)
    assert rss_verify(signer.public, Presentation((), everything, signer.public))


def test_redaction_composes(signer, doc_blocks, rng):
    sig = rss_sign(signer, doc_blocks, rng)
    step1, kept1 = rss_redact(sig, doc_blocks, {1})
    step2, kept2 = rss_redact(step1, kept1, {3})
    direct, kept = rss_redact(sig, doc_blocks, {1, 3})
    assert step2 == direct and kept2 == kept
    assert rss_verify(signer.public, Presentation(kept2, step2, signer.public))


@settings(max_examples=25, deadline=None)
@given(st.sets(st.integers(0, 4)), st.sets(st.integers(0, 4)))
def test_redaction_order_irrelevant(first, second):
    params = prim.group_params("tiny-test")
    rnd = random.Random(1)
    kp = prim.keygen(params, rnd)
    blocks = canonicalize({"a": 1, "b": 2, "c": 3, "d": 4, "e": 5})
    sig = rss_sign(kp, blocks, rnd)
    s1, k1 = rss_redact(*rss_redact(sig, blocks, first), second)
    s2, k2 = rss_redact(*rss_redact(sig, blocks, second), first)
    assert (s1, k1) == (s2, k2) == rss_redact(sig, blocks, first | second)
    assert rss_verify(kp.public, Presentation(k1, s1, kp.public))


def test_cannot_unredact_or_go_out_of_range(signer, doc_blocks, rng):
    sig = rss_sign(signer, doc_blocks, rng)
    derived, kept = rss_redact(sig, doc_blocks, {2})
    with pytest.raises(RedactionError):
        rss_redact(derived, doc_blocks, set())
    with pytest.raises(RedactionError):
        rss_redact(sig, doc_blocks, {len(doc_blocks)})


def test_altered_or_swapped_values_rejected(signer, doc_blocks, rng):
    sig = rss_sign(signer, doc_blocks, rng)
    blocks = list(doc_blocks)
    blocks[0] = Block(0, blocks[0].path, encode_scalar("Bob"))
    assert not rss_verify(signer.public, Presentation(tuple(blocks), sig, signer.public))
    swapped = list(doc_blocks)
    swapped[1] = Block(1, doc_blocks[1].path, doc_blocks[2].value_bytes)
    swapped[2] = Block(2, doc_blocks[2].path, doc_blocks[1].value_bytes)
    assert not rss_verify(signer.public, Presentation(tuple(swapped), sig, signer.public))


def test_redacted_block_cannot_be_smuggled_back(signer, doc_blocks, rng):
    pres = present(rss_sign(signer, doc_blocks, rng), doc_blocks, signer.public, {0})
    assert not rss_verify(signer.public, Presentation(doc_blocks, pres.signature, signer.public))


def test_redacted_leaf_hides_value(signer, doc_blocks, rng):
    name = next(b.index for b in doc_blocks if b.path == "/name")
    pres = present(rss_sign(signer, doc_blocks, rng), doc_blocks, signer.public, {name})
    text = json.dumps(pres.to_json())
    assert "Ada" not in text and "/name" not in text


def test_json_and_binary_round_trip(signer, doc_blocks, rng):
    pres = present(rss_sign(signer, doc_blocks, rng, "ctx"), doc_blocks, signer.public, {1, 4})
    again = Presentation.from_json(json.loads(json.dumps(pres.to_json())))
    assert again == pres
    assert signature_from_bytes(pres.signature.to_bytes()) == pres.signature
    with pytest.raises(EncodingError):
        signature_from_bytes(pres.signature.to_bytes() + b"\x00")


@pytest.mark.parametrize("n", [1, 7, 8, 9, 33])
def test_size_law(signer, rng, n):
    blocks = canonicalize({f"k{i:02d}": i for i in range(n)})
    sig = rss_sign(signer, blocks, rng, "ü-ctx")
    for r in range(n + 1):
        derived, _ = rss_redact(sig, blocks, range(r))
        assert len(derived.to_bytes()) == expected_size("ü-ctx", n, "standard", r)
    header = 4 + 1 + len("standard") + 2 + len("ü-ctx".encode()) + 4 + (n + 7) // 8
    assert expected_size("ü-ctx", n, "standard", 0) == header + 64 + 16 * n


def test_rejects_malformed_entries(signer, doc_blocks, rng):
    sig = rss_sign(signer, doc_blocks, rng)
    short = list(sig.disclosure)
    short[0] = Disclosed(b"\x00" * 3)
    bad = RedactableSignature(sig.context, sig.n, sig.profile, sig.base_sig, tuple(short))
    assert not rss_verify(signer.public, Presentation(doc_blocks, bad, signer.public))
    unknown = RedactableSignature(sig.context, sig.n, "nope", sig.base_sig, sig.disclosure)
    assert not rss_verify(signer.public, Presentation(doc_blocks, unknown, signer.public))
