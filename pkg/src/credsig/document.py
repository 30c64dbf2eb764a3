"""Credential documents as ordered, path-labelled block sequences.

A document is a JSON tree of maps and arrays with string / integer /
boolean / null leaves. :func:`canonicalize` flattens it into blocks sorted
by JSON-Pointer path; the block is the unit every signature scheme signs.
Templates mark some leaf paths as fillable placeholders, optionally with a
format or value-set constraint.
"""

from __future__ import annotations

import datetime
import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .encoding import lp
from .errors import CanonicalizationError, ConfigurationError, ConstraintError, TemplateError

MAX_DEPTH = 32
MAX_LEAVES = 4096
PLACEHOLDER = "\u0000PLACEHOLDER"

# type tag byte that opens every value encoding
T_NULL, T_BOOL, T_INT, T_STR = 0x00, 0x01, 0x02, 0x03


@dataclass(frozen=True)
class Block:
    index: int
    path: str
    value_bytes: bytes

    @property
    def value(self):
        return decode_scalar(self.value_bytes)


BlockSequence = tuple  # tuple[Block, ...]


# ---------------------------------------------------------------------------
# scalar encoding

def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def encode_scalar(value) -> bytes:
    if value is None:
        return bytes([T_NULL])
    if isinstance(value, bool):
        return bytes([T_BOOL, 1 if value else 0])
    if _is_int(value):
        return bytes([T_INT]) + str(value).encode("ascii")
    if isinstance(value, str):
        return bytes([T_STR]) + value.encode("utf-8")
    raise CanonicalizationError(f"unsupported leaf type {type(value).__name__}")


_INT_RE = re.compile(rb"-?(0|[1-9][0-9]*)\Z")


def decode_scalar(data: bytes):
    if not data:
        raise CanonicalizationError("empty value encoding")
    tag, body = data[0], data[1:]
    if tag == T_NULL and not body:
        return None
    if tag == T_BOOL and body in (b"\x00", b"\x01"):
        return body == b"\x01"
    if tag == T_INT and _INT_RE.match(body) and body != b"-0":
        return int(body)
    if tag == T_STR:
        try:
            return body.decode("utf-8")
        except UnicodeDecodeError:
            pass
    raise CanonicalizationError(f"malformed value encoding {data!r}")


def encode_block(block: Block) -> bytes:
    return lp(block.path.encode("utf-8")) + lp(block.value_bytes)


# ---------------------------------------------------------------------------
# paths

def escape_segment(segment: str) -> str:
    return segment.replace("~", "~0").replace("/", "~1")


def unescape_segment(segment: str) -> str:
    return segment.replace("~1", "/").replace("~0", "~")


def split_path(path: str) -> list[str]:
    if not path.startswith("/"):
        raise CanonicalizationError(f"path must start with '/': {path!r}")
    return [unescape_segment(s) for s in path[1:].split("/")]


def _path_key(path: str) -> bytes:
    return path.encode("utf-8")


# ---------------------------------------------------------------------------
# canonicalization

def _leaves(node, prefix: str, depth: int, out: list):
    if depth > MAX_DEPTH:
        raise CanonicalizationError(f"document deeper than {MAX_DEPTH}")
    if isinstance(node, Mapping):
        for key, child in node.items():
            if not isinstance(key, str):
                raise CanonicalizationError(f"map key {key!r} is not a string")
            _leaves(child, f"{prefix}/{escape_segment(key)}", depth + 1, out)
    elif isinstance(node, (list, tuple)):
        for i, child in enumerate(node):
            _leaves(child, f"{prefix}/{i}", depth + 1, out)
    else:
        if not prefix:
            raise CanonicalizationError("document root must be a map or array")
        out.append((prefix, encode_scalar(node)))
        if len(out) > MAX_LEAVES:
            raise CanonicalizationError(f"document has more than {MAX_LEAVES} leaves")


def canonicalize(doc) -> BlockSequence:
    leaves: list = []
    _leaves(doc, "", 0, leaves)
    leaves.sort(key=lambda kv: _path_key(kv[0]))
    for (a, _), (b, _) in zip(leaves, leaves[1:]):
        if a == b:
            raise CanonicalizationError(f"duplicate path {a!r}")
    return tuple(Block(i, path, vb) for i, (path, vb) in enumerate(leaves))


def _listify(node):
    if not isinstance(node, dict):
        return node
    node = {k: _listify(v) for k, v in node.items()}
    keys = list(node)
    if keys and all(k.isascii() and k.isdigit() and (k == "0" or k[0] != "0") for k in keys):
        indices = sorted(int(k) for k in keys)
        if indices == list(range(len(indices))):
            return [node[str(i)] for i in indices]
    return node


def reassemble(blocks: Iterable[Block]) -> dict:
    """Rebuild a document tree from blocks.

    A container whose child segments are exactly ``0..k-1`` comes back as an
    array; everything else is a map.
    """
    root: dict = {}
    for block in blocks:
        segments = split_path(block.path)
        node = root
        for seg in segments[:-1]:
            child = node.setdefault(seg, {})
            if not isinstance(child, dict):
                raise CanonicalizationError(f"path {block.path!r} conflicts with a leaf")
            node = child
        if segments[-1] in node:
            raise CanonicalizationError(f"duplicate path {block.path!r}")
        node[segments[-1]] = block.value
    return _listify(root)


def _reject_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise CanonicalizationError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _reject_float(text):
    raise CanonicalizationError(f"floating point leaf {text} is not supported")


def parse_document(text: str | bytes):
    """Parse JSON, rejecting duplicate keys and non-integer numbers."""
    return json.loads(text, object_pairs_hook=_reject_duplicates,
                      parse_float=_reject_float, parse_constant=_reject_float)


def dump_canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def blocks_to_json(blocks: Iterable[Block]) -> list:
    return [{"i": b.index, "path": b.path, "value": b.value} for b in blocks]


def blocks_from_json(items) -> BlockSequence:
    try:
        return tuple(Block(int(it["i"]), it["path"], encode_scalar(it["value"])) for it in items)
    except (KeyError, TypeError) as exc:
        raise CanonicalizationError(f"malformed block list: {exc}") from exc


def canonical_bytes(blocks: Iterable[Block]) -> bytes:
    return b"".join(encode_block(b) for b in blocks)


def replace_value(blocks: Sequence[Block], index: int, value) -> BlockSequence:
    out = list(blocks)
    pos = next(k for k, b in enumerate(out) if b.index == index)
    out[pos] = Block(index, out[pos].path, encode_scalar(value))
    return tuple(out)


# ---------------------------------------------------------------------------
# constraints

_B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_B58_INDEX = {c: i for i, c in enumerate(_B58_ALPHABET)}


def base58_decode(text: str) -> bytes | None:
    if not text or any(c not in _B58_INDEX for c in text):
        return None
    n = 0
    for c in text:
        n = n * 58 + _B58_INDEX[c]
    body = n.to_bytes((n.bit_length() + 7) // 8, "big") if n else b""
    zeros = len(text) - len(text.lstrip("1"))
    return b"\x00" * zeros + body


def base58_encode(data: bytes) -> str:
    n = int.from_bytes(data, "big")
    out = ""
    while n:
        n, rem = divmod(n, 58)
        out = _B58_ALPHABET[rem] + out
    zeros = len(data) - len(data.lstrip(b"\x00"))
    return "1" * zeros + out


_DATE_RE = re.compile(r"\d{4}-\d{2}-\d{2}\Z")
_DATETIME_RE = re.compile(r"\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2})\Z")
_URI_RE = re.compile(r"[A-Za-z][A-Za-z0-9+.-]*:[^\s]+\Z")
_DID_RE = re.compile(r"did:[a-z0-9]+:[A-Za-z0-9._:%-]*[A-Za-z0-9._%-]\Z")


def _date(s: str) -> bool:
    if not _DATE_RE.match(s):
        return False
    try:
        datetime.date.fromisoformat(s)
    except ValueError:
        return False
    return True


def _datetime(s: str) -> bool:
    if not _DATETIME_RE.match(s):
        return False
    try:
        datetime.datetime.fromisoformat(s.replace("Z", "+00:00"))
    except ValueError:
        return False
    return True


def _multibase_ed25519(s: str) -> bool:
    raw = base58_decode(s[1:]) if s.startswith("z") else None
    return raw is not None and len(raw) == 34 and raw[:2] == b"\xed\x01"


FORMATS = {
    "base58-32bytes": lambda s: (raw := base58_decode(s)) is not None and len(raw) == 32,
    "multibase-ed25519": _multibase_ed25519,
    "uri": lambda s: bool(_URI_RE.match(s)),
    "did": lambda s: bool(_DID_RE.match(s)),
    "date-iso8601": _date,
    "datetime-iso8601": _datetime,
    "nonempty-string": lambda s: bool(s),
}


@dataclass(frozen=True)
class Constraint:
    kind: str  # "value-set" | "format"
    values: tuple = ()
    format: str | None = None

    def __post_init__(self):
        if self.kind == "value-set":
            if not self.values:
                raise ConfigurationError("value-set constraint must be non-empty")
            for v in self.values:
                encode_scalar(v)
        elif self.kind == "format":
            if self.format not in FORMATS:
                raise ConfigurationError(f"unregistered format id {self.format!r}")
        else:
            raise ConfigurationError(f"unknown constraint kind {self.kind!r}")

    @classmethod
    def value_set(cls, values: Iterable) -> "Constraint":
        return cls("value-set", values=tuple(values))

    @classmethod
    def of_format(cls, format_id: str) -> "Constraint":
        return cls("format", format=format_id)

    def to_json(self) -> dict:
        if self.kind == "value-set":
            return {"kind": "value-set", "values": list(self.values)}
        return {"kind": "format", "format": self.format}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Constraint":
        try:
            if obj["kind"] == "value-set" and set(obj) == {"kind", "values"}:
                return cls.value_set(obj["values"])
            if obj["kind"] == "format" and set(obj) == {"kind", "format"}:
                return cls.of_format(obj["format"])
            raise ConfigurationError(f"malformed constraint {obj!r}")
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"malformed constraint {obj!r}") from exc


def check_constraint(constraint: Constraint, value_bytes: bytes) -> bool:
    if constraint.kind == "value-set":
        return any(encode_scalar(v) == value_bytes for v in constraint.values)
    predicate = FORMATS.get(constraint.format)
    if predicate is None:
        raise ConfigurationError(f"unregistered format id {constraint.format!r}")
    try:
        value = decode_scalar(value_bytes)
    except CanonicalizationError:
        return False
    return isinstance(value, str) and predicate(value)


def constraints_to_json(constraints: Mapping[str, Constraint]) -> dict:
    return {path: c.to_json() for path, c in sorted(constraints.items())}


def constraints_from_json(obj: Mapping) -> dict[str, Constraint]:
    return {path: Constraint.from_json(c) for path, c in obj.items()}


# ---------------------------------------------------------------------------
# templates

@dataclass(frozen=True)
class Template:
    document: Any
    admissible_paths: frozenset
    constraints: Mapping[str, Constraint] = field(default_factory=dict)

    @property
    def blocks(self) -> BlockSequence:
        return canonicalize(self.document)

    def admissible_indices(self) -> frozenset:
        return frozenset(b.index for b in self.blocks if b.path in self.admissible_paths)

    def to_json(self) -> dict:
        return {
            "document": self.document,
            "admissible": sorted(self.admissible_paths),
            "constraints": constraints_to_json(self.constraints),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Template":
        try:
            return make_template(obj["document"], obj["admissible"],
                                 constraints_from_json(obj.get("constraints", {})))
        except (KeyError, TypeError) as exc:
            raise TemplateError(f"malformed template: {exc}") from exc


def _set_leaf(doc, path: str, value):
    node = doc
    segments = split_path(path)
    for seg in segments[:-1]:
        node = node[int(seg)] if isinstance(node, list) else node[seg]
    last = segments[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def make_template(doc, admissible_paths: Iterable[str],
                  constraints: Mapping[str, Constraint] | None = None) -> Template:
    constraints = dict(constraints or {})
    admissible = frozenset(admissible_paths)
    leaf_paths = {b.path for b in canonicalize(doc)}
    missing = sorted(admissible - leaf_paths)
    if missing:
        raise TemplateError(f"admissible paths not present in document: {missing}")
    stray = sorted(set(constraints) - admissible)
    if stray:
        raise TemplateError(f"constraints on non-admissible paths: {stray}")
    filled = json.loads(json.dumps(doc))
    for path in admissible:
        _set_leaf(filled, path, PLACEHOLDER)
    return Template(filled, admissible, constraints)


def fill_template(template: Template, values: Mapping[str, Any]):
    """Copy of the template document with placeholders replaced."""
    doc = json.loads(json.dumps(template.document))
    for path, value in values.items():
        if path not in template.admissible_paths:
            raise TemplateError(f"{path!r} is not an admissible path")
        _set_leaf(doc, path, value)
    return doc


def validate_against_template(template: Template, doc) -> str | None:
    """Reason string if ``doc`` is not a valid filling of ``template``, else None."""
    try:
        blocks = canonicalize(doc)
    except CanonicalizationError as exc:
        return f"canonicalization: {exc}"
    expected = template.blocks
    if [b.path for b in blocks] != [b.path for b in expected]:
        return "field layout differs from template"
    for got, want in zip(blocks, expected):
        if got.path in template.admissible_paths:
            if got.value_bytes == encode_scalar(PLACEHOLDER):
                return f"placeholder left at {got.path}"
            c = template.constraints.get(got.path)
            if c is not None and not check_constraint(c, got.value_bytes):
                return f"constraint violated at {got.path}"
        elif got.value_bytes != want.value_bytes:
            return f"fixed field {got.path} modified"
    return None


def require_constraint(constraint: Constraint | None, path: str, value_bytes: bytes) -> None:
    if constraint is not None and not check_constraint(constraint, value_bytes):
        raise ConstraintError(f"value at {path} violates {constraint.to_json()}")
