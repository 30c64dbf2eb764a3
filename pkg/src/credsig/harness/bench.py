"""Size and speed benchmarks for RSS, SSS and the two-signature baseline."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .. import primitives as prim
from .. import rss, sss
from ..document import canonicalize, encode_block
from ..errors import ConfigurationError

SCHEME_OPS = (
    ("rss", "sign"), ("rss", "redact"), ("rss", "verify"),
    ("sss", "sign"), ("sss", "sanitize"), ("sss", "verify"),
    ("multisig", "sign"), ("multisig", "verify"),
)
VALUE_LEN = 24


@dataclass(frozen=True)
class BenchConfig:
    """``fractions`` is the redaction fraction for rss and the admissible
    fraction for sss; multisig rows repeat per fraction."""
    profile: str = "standard"
    block_counts: tuple[int, ...] = (4, 8, 16, 32, 64)
    fractions: tuple[float, ...] = (0.0, 0.25, 0.5, 1.0)
    repetitions: int = 5
    seed: int = 0
    context: str = "bench"

    def __post_init__(self):
        prim.group_params(self.profile)
        if self.repetitions < 3:
            raise ConfigurationError("repetitions must be at least 3")
        if any(not 0.0 <= f <= 1.0 for f in self.fractions):
            raise ConfigurationError("fractions must lie in [0, 1]")
        if any(n < 1 for n in self.block_counts):
            raise ConfigurationError("block counts must be positive")


@dataclass(frozen=True)
class BenchRow:
    scheme: str
    operation: str
    n_blocks: int
    fraction: float
    mean_ns: float
    p95_ns: float
    artifact_size_bytes: int


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    def select(self, scheme: str | None = None, operation: str | None = None) -> list[BenchRow]:
        return [r for r in self.rows
                if (scheme is None or r.scheme == scheme) and (operation is None or r.operation == operation)]


def synthetic_document(n: int, rng: random.Random) -> dict:
    alphabet = "abcdefghijklmnopqrstuvwxyz0123456789"
    return {f"field{i:04d}": "".join(rng.choice(alphabet) for _ in range(VALUE_LEN)) for i in range(n)}


def _time(fn: Callable[[], object], reps: int) -> tuple[float, float]:
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - t0)
    arr = np.asarray(samples, dtype=float)
    return float(arr.mean()), float(np.percentile(arr, 95))


def pick(n: int, fraction: float, rng: random.Random) -> list[int]:
    return sorted(rng.sample(range(n), round(fraction * n)))


def run_bench(config: BenchConfig) -> BenchReport:
    params = prim.group_params(config.profile)
    rng = random.Random(config.seed)
    signer = prim.keygen(params, rng)
    sanitizer = prim.keygen(params, rng)
    reps = config.repetitions
    report = BenchReport()

    def add(scheme, op, n, f, timing, size):
        report.rows.append(BenchRow(scheme, op, n, f, timing[0], timing[1], size))

    for n in config.block_counts:
        for f in config.fractions:
            blocks = canonicalize(synthetic_document(n, rng))
            chosen = pick(n, f, rng)

            sig = rss.rss_sign(signer, blocks, rng, config.context)
            add("rss", "sign", n, f, _time(lambda: rss.rss_sign(signer, blocks, rng, config.context), reps),
                len(sig.to_bytes()))
            derived, kept = rss.rss_redact(sig, blocks, chosen)
            add("rss", "redact", n, f, _time(lambda: rss.rss_redact(sig, blocks, chosen), reps),
                len(derived.to_bytes()))
            pres = rss.Presentation(kept, derived, signer.public)
            assert rss.rss_verify(signer.public, pres, params)
            add("rss", "verify", n, f, _time(lambda: rss.rss_verify(signer.public, pres, params), reps),
                len(derived.to_bytes()))

            env, _ = sss.sss_sign(signer, sanitizer.public, blocks, chosen, {}, rng)
            size = len(env.to_bytes())
            add("sss", "sign", n, f,
                _time(lambda: sss.sss_sign(signer, sanitizer.public, blocks, chosen, {}, rng), reps), size)
            mods = {i: synthetic_document(1, rng)["field0000"] for i in chosen}
            add("sss", "sanitize", n, f,
                _time(lambda: sss.sss_sanitize(sanitizer.secret, env, blocks, mods, params), reps), size)
            env2, blocks2 = sss.sss_sanitize(sanitizer.secret, env, blocks, mods, params)
            assert sss.sss_verify(signer.public, env2, blocks2, params)
            prim.chameleon_hash.cache_clear()

            def sss_verify_cold():
                prim.chameleon_hash.cache_clear()
                return sss.sss_verify(signer.public, env2, blocks2, params)
            add("sss", "verify", n, f, _time(sss_verify_cold, reps), size)

            message = b"".join(encode_block(b) for b in blocks)
            delegate = sanitizer

            def ms_sign():
                return prim.schnorr_sign(delegate, message, rng), prim.schnorr_sign(signer, message, rng)
            s1, s2 = ms_sign()
            ms_size = 4 * params.scalar_len
            add("multisig", "sign", n, f, _time(ms_sign, reps), ms_size)

            def ms_verify():
                return (prim.schnorr_verify(params, delegate.public, message, s1)
                        and prim.schnorr_verify(params, signer.public, message, s2))
            assert ms_verify()
            add("multisig", "verify", n, f, _time(ms_verify, reps), ms_size)
    return report
