"""
Tracing a delegate that issues too much
=======================================

Every delegated credential carries one Feldman share of the delegate's
trapdoor. Past the threshold, anyone holding the shares rebuilds the
trapdoor, and the delegate loses exclusive control of the template.
"""

import json
import random
from importlib import resources

from credsig import group_params, keygen
from credsig.delegation import Delegate, ShareRegistry, grant_create, registry_record, trace_reconstruct
from credsig.document import Template, base58_encode
from credsig.sss import sss_sanitize, sss_verify

rng = random.Random(5)
params = group_params("standard")
issuer = keygen(params, rng)
template = Template.from_json(json.loads(
    resources.files("credsig").joinpath("data/did_template.json").read_text()))
grant, secrets = grant_create(issuer, template, threshold=2, rng=rng)
delegate = Delegate(grant, secrets)


def fields(k):
    did = f"did:example:user{k}"
    return {
        "/id": did, "/authentication/0": f"{did}#k", "/verificationMethod/0/id": f"{did}#k",
        "/verificationMethod/0/controller": did, "/verificationMethod/0/type": "Ed25519VerificationKey2020",
        "/verificationMethod/0/publicKeyMultibase": "z" + base58_encode(b"\xed\x01" + bytes([k]) * 32),
    }


registry = ShareRegistry()
for k in range(1, 5):
    cred = delegate.issue(fields(k))
    registry, events = registry_record(registry, issuer.public, grant, cred)
    print(f"issuance {k}:", ", ".join(e.kind.value for e in events))

x = trace_reconstruct(registry, grant)
print("recovered trapdoor matches:", x == secrets.trapdoor)
print("g^x equals C_0:", params.gexp(x) == grant.commitments[0])

# with x in hand the registry can fill the template itself
index_of = {b.path: b.index for b in template.blocks}
env, blocks = sss_sanitize(x, grant.envelope, template.blocks, {index_of[p]: v for p, v in fields(99).items()})
print("issuer-key verification of a registry-made document:", sss_verify(issuer.public, env, blocks))
