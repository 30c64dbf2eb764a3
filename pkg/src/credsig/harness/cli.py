"""``credsig`` command line: thin wrappers over the library operations.

Exit codes: 0 success, 1 verification reject, 2 usage/config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import random
import secrets
import sys
from importlib import resources
from pathlib import Path

from .. import primitives as prim
from .. import rss, sss
from ..delegation import grant as dg
from ..delegation import simulator
from ..document import (Template, blocks_to_json, canonicalize, constraints_from_json, encode_scalar,
                        make_template, parse_document)
from ..encoding import hex_to_int, int_to_hex
from ..errors import CredsigError
from . import bench, export

EXIT_OK, EXIT_REJECT, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class Reject(Exception):
    pass


# ---------------------------------------------------------------------------
# file helpers

def read_json(path):
    text = sys.stdin.read() if path in (None, "-") else Path(path).read_text(encoding="utf-8")
    return parse_document(text)


def write_json(path, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def load_keypair(path) -> prim.KeyPair:
    obj = read_json(path)
    params = prim.group_params(obj["profile"])
    return prim.KeyPair.from_secret(params, hex_to_int(obj["secret"]))


def load_public(path) -> tuple[prim.GroupParams, int]:
    obj = read_json(path)
    return prim.group_params(obj["profile"]), hex_to_int(obj["public"])


def make_rng(args) -> random.Random:
    return random.Random(args.seed) if args.seed is not None else secrets.SystemRandom()


def parse_assignments(items) -> dict:
    out = {}
    for item in items or ():
        path, sep, raw = item.partition("=")
        if not sep:
            raise CredsigError(f"--set expects path=value, got {item!r}")
        try:
            value = parse_document(raw)
            encode_scalar(value)
        except (ValueError, CredsigError):
            value = raw
        out[path] = value
    return out


def split_list(text) -> list[str]:
    return [s for s in (text or "").split(",") if s]


def load_template(path) -> Template:
    return Template.from_json(read_json(path))


def bundled_did_template() -> Template:
    text = resources.files("credsig").joinpath("data/did_template.json").read_text(encoding="utf-8")
    return Template.from_json(parse_document(text))


# ---------------------------------------------------------------------------
# commands

def cmd_keygen(args):
    kp = prim.keygen(prim.group_params(args.profile), make_rng(args))
    write_json(args.out, {"profile": args.profile, "secret": int_to_hex(kp.secret),
                          "public": int_to_hex(kp.public)})
    if args.public_out:
        write_json(args.public_out, {"profile": args.profile, "public": int_to_hex(kp.public)})


def cmd_canonicalize(args):
    write_json(args.out, blocks_to_json(canonicalize(read_json(args.input))))


def cmd_template(args):
    if args.did:
        tpl = bundled_did_template()
    else:
        cons = constraints_from_json(read_json(args.constraints)) if args.constraints else {}
        tpl = make_template(read_json(args.input), split_list(args.admissible), cons)
    write_json(args.out, tpl.to_json())


def cmd_rss_sign(args):
    kp = load_keypair(args.key)
    blocks = canonicalize(read_json(args.input))
    sig = rss.rss_sign(kp, blocks, make_rng(args), args.context)
    write_json(args.out, rss.Presentation(blocks, sig, kp.public).to_json())


def cmd_redact(args):
    pres = rss.Presentation.from_json(read_json(args.input))
    paths = set(split_list(args.paths))
    known = {b.path: b.index for b in pres.blocks}
    unknown = sorted(paths - set(known))
    if unknown:
        raise CredsigError(f"paths not disclosed in this presentation: {unknown}")
    derived, kept = rss.rss_redact(pres.signature, pres.blocks, {known[p] for p in paths})
    write_json(args.out, rss.Presentation(kept, derived, pres.signer_public).to_json())


def cmd_rss_verify(args):
    params, public = load_public(args.public)
    pres = rss.Presentation.from_json(read_json(args.input))
    if not rss.rss_verify(public, pres, params):
        raise Reject("rss signature rejected")
    print("accept")


def _template_or_doc(args) -> Template:
    obj = read_json(args.input)
    if isinstance(obj, dict) and "document" in obj and "admissible" in obj:
        return Template.from_json(obj)
    return make_template(obj, split_list(args.admissible), {})


def cmd_sss_sign(args):
    kp = load_keypair(args.key)
    _, y = load_public(args.sanitizer_public)
    tpl = _template_or_doc(args)
    env, record = sss.sss_sign(kp, y, tpl.blocks, tpl.admissible_indices(), tpl.constraints, make_rng(args))
    write_json(args.out, sss.SignedDocument(env, tpl.blocks).to_json())
    if args.record:
        write_json(args.record, record.to_json())


def cmd_sanitize(args):
    x = load_keypair(args.trapdoor).secret
    doc = sss.SignedDocument.from_json(read_json(args.input))
    index_of = {b.path: b.index for b in doc.blocks}
    mods = {}
    for path, value in parse_assignments(args.set).items():
        if path not in index_of:
            raise CredsigError(f"no block at {path}")
        mods[index_of[path]] = value
    env, blocks = sss.sss_sanitize(x, doc.signature, doc.blocks, mods)
    write_json(args.out, sss.SignedDocument(env, blocks).to_json())


def cmd_sss_verify(args):
    params, public = load_public(args.public)
    doc = sss.SignedDocument.from_json(read_json(args.input))
    if not sss.sss_verify(public, doc.signature, doc.blocks, params):
        raise Reject("sss signature rejected")
    print("accept")


def cmd_proof(args):
    record = sss.SanitizationRecord.from_json(read_json(args.record))
    doc = sss.SignedDocument.from_json(read_json(args.input))
    index = next((b.index for b in doc.blocks if b.path == args.path), None)
    if index is None:
        raise CredsigError(f"no block at {args.path}")
    write_json(args.out, sss.sss_proof(record, doc.signature, doc.blocks, index).to_json())


def cmd_judge(args):
    verdict = sss.sss_judge(sss.CollisionProof.from_json(read_json(args.input)))
    out = {"attribution": verdict.attribution.value, "reason": verdict.reason}
    if verdict.trapdoor is not None:
        out["extracted_trapdoor"] = int_to_hex(verdict.trapdoor)
    write_json(args.out, out)
    if not verdict.sanitized:
        raise Reject(verdict.attribution.value)


def cmd_grant(args):
    issuer = load_keypair(args.key)
    tpl = bundled_did_template() if args.did else load_template(args.input)
    grant, delegate = dg.grant_create(issuer, tpl, args.threshold, make_rng(args))
    write_json(args.out, grant.to_json())
    write_json(args.secrets, delegate.to_json())


def cmd_issue(args):
    grant = dg.DelegationGrant.from_json(read_json(args.grant))
    delegate = dg.DelegateSecrets.from_json(read_json(args.secrets))
    cred = dg.delegate_issue(grant, delegate, args.counter, parse_assignments(args.set))
    write_json(args.out, cred.to_json())


def cmd_verify_issued(args):
    _, public = load_public(args.public)
    grant = dg.DelegationGrant.from_json(read_json(args.grant))
    verdict = dg.verify_issued(public, grant, dg.IssuedCredential.from_json(read_json(args.input)))
    print(verdict.reason.value)
    if not verdict:
        raise Reject(verdict.reason.value)


def cmd_record(args):
    _, public = load_public(args.public)
    grant = dg.DelegationGrant.from_json(read_json(args.grant))
    cred = dg.IssuedCredential.from_json(read_json(args.input))
    reg_path = Path(args.registry)
    registry = dg.ShareRegistry.from_json(read_json(reg_path)) if reg_path.exists() else dg.ShareRegistry()
    registry, events = dg.registry_record(registry, public, grant, cred)
    write_json(args.out or reg_path, registry.to_json())
    for ev in events:
        print(f"{ev.kind.value} grant={ev.grant_id} index={ev.index} {ev.detail}".rstrip())


def cmd_trace(args):
    grant = dg.DelegationGrant.from_json(read_json(args.grant))
    registry = dg.ShareRegistry.from_json(read_json(args.registry))
    x = dg.trace_reconstruct(registry, grant)
    params = prim.group_params(grant.envelope.profile)
    write_json(args.out, {"profile": params.profile_id, "secret": int_to_hex(x),
                          "public": int_to_hex(params.gexp(x))})


def cmd_simulate(args):
    downtime = []
    for w in args.downtime or ():
        start, _, end = w.partition(":")
        downtime.append((float(start), float(end)))
    if args.downtime_fraction:
        horizon = args.issuances * args.interarrival_ms + 10 * args.latency_ms + args.downtime_window_ms
        downtime.extend(simulator.periodic_downtime(args.downtime_fraction, horizon, args.downtime_window_ms,
                                                    random.Random(args.seed or 0)))
    jitter = tuple(float(v) for v in split_list(args.jitter)) or None
    latency = simulator.LatencyModel(args.latency_ms, jitter, tuple(sorted(downtime)), args.retry_ms)
    reports = [simulator.simulate(p, latency, args.issuances, args.seed or 0, args.interarrival_ms)
               for p in (simulator.PROTOCOLS if args.protocol == "both" else (args.protocol,))]
    text = reports[0].to_csv() + "".join(r.to_csv().split("\r\n", 1)[1] for r in reports[1:])
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8", newline="")
    for r in reports:
        print(f"{r.protocol}: mean {r.mean_latency_ms:.1f} ms, max {r.max_latency_ms:.1f} ms, "
              f"issuer msgs/issuance {sum(r.issuer_msgs) / len(r.rows):.2f}", file=sys.stderr)


def cmd_bench(args):
    config = bench.BenchConfig(
        profile=args.profile,
        block_counts=tuple(int(n) for n in split_list(args.blocks)),
        fractions=tuple(float(f) for f in split_list(args.fractions)),
        repetitions=args.reps,
        seed=args.seed or 0,
    )
    export.export_report(bench.run_bench(config), "csv", args.out)


def cmd_export(args):
    export.export_report(export.read_report(args.input), args.format, args.out)


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--profile", default="standard", choices=prim.PROFILES)
    common.add_argument("--seed", type=int, default=None, help="deterministic randomness (testing only)")
    common.add_argument("--in", dest="input", default=None)
    common.add_argument("--out", default=None)

    parser = argparse.ArgumentParser(prog="credsig", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=fn)
        return p

    add("keygen", cmd_keygen, "generate a key pair").add_argument("--public-out")
    add("canonicalize", cmd_canonicalize, "print the block sequence of a document")
    p = add("template", cmd_template, "mark admissible placeholder fields")
    p.add_argument("--admissible", help="comma-separated JSON pointers")
    p.add_argument("--constraints", help="JSON file mapping path -> constraint")
    p.add_argument("--did", action="store_true", help="emit the bundled DID template")
    p = add("rss-sign", cmd_rss_sign, "redactably sign a document")
    p.add_argument("--key", required=True)
    p.add_argument("--context", default="")
    add("redact", cmd_redact, "redact paths from a presentation").add_argument("--paths", required=True)
    add("rss-verify", cmd_rss_verify, "verify a presentation").add_argument("--public", required=True)
    p = add("sss-sign", cmd_sss_sign, "sanitizably sign a template")
    p.add_argument("--key", required=True)
    p.add_argument("--sanitizer-public", required=True)
    p.add_argument("--admissible")
    p.add_argument("--record", help="where to keep the private sanitization record")
    p = add("sanitize", cmd_sanitize, "rewrite admissible fields")
    p.add_argument("--trapdoor", required=True)
    p.add_argument("--set", action="append", metavar="PATH=VALUE")
    add("sss-verify", cmd_sss_verify, "verify a sanitizable signature").add_argument("--public", required=True)
    p = add("proof", cmd_proof, "build a collision proof for a sanitized field")
    p.add_argument("--record", required=True)
    p.add_argument("--path", required=True)
    add("judge", cmd_judge, "attribute a collision proof")
    p = add("grant", cmd_grant, "delegate a template with share-leak tracing")
    p.add_argument("--key", required=True)
    p.add_argument("--threshold", type=int, required=True)
    p.add_argument("--secrets", required=True, help="output file for the delegate's secrets")
    p.add_argument("--did", action="store_true", help="use the bundled DID template")
    p = add("issue", cmd_issue, "fill a granted template offline")
    p.add_argument("--grant", required=True)
    p.add_argument("--secrets", required=True)
    p.add_argument("--counter", type=int, required=True)
    p.add_argument("--set", action="append", metavar="PATH=VALUE")
    p = add("verify-issued", cmd_verify_issued, "verify a delegated credential")
    p.add_argument("--public", required=True)
    p.add_argument("--grant", required=True)
    p = add("record", cmd_record, "record a credential's trace share")
    p.add_argument("--registry", required=True)
    p.add_argument("--public", required=True)
    p.add_argument("--grant", required=True)
    p = add("trace", cmd_trace, "reconstruct a delegate trapdoor past the threshold")
    p.add_argument("--registry", required=True)
    p.add_argument("--grant", required=True)
    p = add("simulate", cmd_simulate, "run the issuance simulator")
    p.add_argument("--protocol", choices=simulator.PROTOCOLS + ("both",), default="both")
    p.add_argument("--issuances", type=int, default=10)
    p.add_argument("--latency-ms", type=float, default=50.0)
    p.add_argument("--jitter", help="low,high uniform one-way delay in ms")
    p.add_argument("--downtime", action="append", metavar="START:END")
    p.add_argument("--downtime-fraction", type=float)
    p.add_argument("--downtime-window-ms", type=float, default=250.0)
    p.add_argument("--retry-ms", type=float)
    p.add_argument("--interarrival-ms", type=float, default=100.0)
    p = add("bench", cmd_bench, "benchmark the schemes")
    p.add_argument("--blocks", default="4,8,16,32,64")
    p.add_argument("--fractions", default="0,0.25,0.5,1")
    p.add_argument("--reps", type=int, default=5)
    add("export", cmd_export, "convert a bench CSV").add_argument(
        "--format", choices=("csv", "svg-plot"), default="svg-plot")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        args.func(args)
    except Reject as exc:
        print(f"reject: {exc}", file=sys.stderr)
        return EXIT_REJECT
    except export.ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc.__cause__, OSError) else EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CredsigError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
