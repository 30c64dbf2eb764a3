"""
Delegated DID issuance from a signed template
=============================================

The issuer signs a DID document template once and hands a delegate the
trapdoor for its placeholder fields. The delegate then fills in new
DID documents offline, and each one verifies under the issuer's key.
"""

import json
import random
from importlib import resources

from credsig import group_params, keygen
from credsig.delegation import Delegate, grant_create, verify_issued
from credsig.document import Template, base58_encode, reassemble

rng = random.Random(11)
params = group_params("standard")
issuer = keygen(params, rng)

# the bundled template: every identifier and key field is a placeholder
text = resources.files("credsig").joinpath("data/did_template.json").read_text()
template = Template.from_json(json.loads(text))
print("placeholders:", sorted(template.admissible_paths))

# t = 3: up to three credentials reveal nothing about the delegate's trapdoor
grant, secrets = grant_create(issuer, template, threshold=3, rng=rng)
delegate = Delegate(grant, secrets)


def fields_for(name, key_seed):
    did = f"did:example:{name}"
    key = "z" + base58_encode(b"\xed\x01" + bytes([key_seed]) * 32)
    return {
        "/id": did,
        "/authentication/0": f"{did}#key-1",
        "/verificationMethod/0/id": f"{did}#key-1",
        "/verificationMethod/0/controller": did,
        "/verificationMethod/0/type": "Ed25519VerificationKey2020",
        "/verificationMethod/0/publicKeyMultibase": key,
    }


cred = delegate.issue(fields_for("alice", 1))
print(json.dumps(reassemble(cred.blocks), indent=2))
print("verdict:", verify_issued(issuer.public, grant, cred).reason.value)

# the issuer's signature bytes are the same ones it produced at grant time
print("same base signature:", cred.envelope.base_sig == grant.envelope.base_sig)

# a value outside the template's constraints cannot be issued
try:
    delegate.issue({**fields_for("bob", 2), "/verificationMethod/0/type": "RsaVerificationKey2018"})
except Exception as exc:
    print("refused:", exc)
