"""
Selective disclosure with a redactable signature
=================================================

An issuer signs a small credential once. The holder later hides the
fields a verifier has no business seeing, without talking to the issuer.
"""

import json
import random

from credsig import canonicalize, group_params, keygen
from credsig import rss

# seeded so the printout is stable; use secrets.SystemRandom() for real keys
rng = random.Random(7)
params = group_params("standard")
issuer = keygen(params, rng)

credential = {
    "name": "Ada Lovelace",
    "birthdate": "1815-12-10",
    "degree": {"field": "mathematics", "year": 1835},
    "address": "12 St James's Square",
}
blocks = canonicalize(credential)
for b in blocks:
    print(b.index, b.path, repr(b.value))

sig = rss.rss_sign(issuer, blocks, rng, context="university-diploma")

# The holder drops birthdate and address. Redaction needs no key.
hidden = {b.index for b in blocks if b.path in ("/birthdate", "/address")}
presentation = rss.present(sig, blocks, issuer.public, hidden)
print("disclosed:", [b.path for b in presentation.blocks])
print("verifies:", rss.rss_verify(issuer.public, presentation))

# Nothing about the hidden values survives in the wire form
wire = json.dumps(presentation.to_json())
print("'1815' in wire form:", "1815" in wire)

# Compact size: header + Schnorr pair + 32 bytes per hidden leaf + 16 per salt
n_hidden = len(hidden)
print("bytes:", len(presentation.signature.to_bytes()),
      "predicted:", rss.expected_size("university-diploma", len(blocks), "standard", n_hidden))

# Tampering with a disclosed value breaks verification
from credsig.document import Block, encode_scalar
forged = list(presentation.blocks)
forged[0] = Block(forged[0].index, forged[0].path, encode_scalar("physics"))
print("forged verifies:", rss.rss_verify(issuer.public, rss.Presentation(tuple(forged), presentation.signature,
                                                                           issuer.public)))
