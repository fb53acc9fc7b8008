"""Fingerprints, the signature database, and matching.

A fingerprint is the ordered record of one battery run.  It serializes to a
small line-oriented text file whose last line is a SHA-256 digest over the
canonical lines (header plus deterministic probe lines), so tampering is
detectable while the creation time and timing numbers stay out of the
canonical form.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence, Union

from .errors import (ConfigurationError, DigestError, EncodingError, ParseError, SchemaError,
                     SpecificationError, VersionError)
from .probes import (DETERMINISTIC_IDS, PROBE_IDS, REGISTRY, TIMING_ID, ErrorPayload, Payload,
                     ProbeResult, SinPayload, decode_payload)

SCHEMA_VERSION = 1

_FP_HEADER_RE = re.compile(r"procscope-fp v(\d+) backend=(\S+)")
_DB_HEADER_RE = re.compile(r"procscope-db v(\d+)")
_PROBE_RE = re.compile(r"probe=(\S+) kind=(\S+) value=(.*)")
_DB_PROBE_RE = re.compile(r"probe=(\S+) kind=(\S+) weight=(\d+) value=(.*)")
_CLASS_RE = re.compile(r"class=(\S(?:.*\S)?) provenance=(\S+)")
_DIGEST_RE = re.compile(r"digest=([0-9a-f]{64})")
_CREATED_PREFIX = "# created="

PROVENANCES = ("paper-table", "measured", "synthetic-emulated")


def _digest(lines: Iterable[str]) -> str:
    h = hashlib.sha256()
    for line in lines:
        h.update(line.encode("utf-8") + b"\n")
    return h.hexdigest()


def _text(data: Union[bytes, str]) -> str:
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc}") from None
    return data


# ---------------------------------------------------------------------------
# Fingerprint
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Fingerprint:
    backend: str
    results: tuple[ProbeResult, ...]
    schema_version: int = SCHEMA_VERSION
    created: str | None = field(default=None, compare=False)
    declared_digest: str | None = field(default=None, compare=False)

    def payload(self, probe_id: str) -> Payload | None:
        for r in self.results:
            if r.probe_id == probe_id:
                return r.payload
        return None

    @property
    def canonical(self) -> tuple[ProbeResult, ...]:
        """Deterministic results only; what digests, diffs and matching see."""
        return tuple(r for r in self.results if r.probe_id != TIMING_ID)

    def header(self) -> str:
        return f"procscope-fp v{self.schema_version} backend={self.backend}"

    def canonical_lines(self) -> list[str]:
        return [self.header()] + [_result_line(r) for r in self.canonical]

    def digest(self) -> str:
        return _digest(self.canonical_lines())


def _result_line(r: ProbeResult) -> str:
    return f"probe={r.probe_id} kind={r.kind} value={r.payload.encode()}"


def assemble(results: Sequence[ProbeResult], backend: str | None = None,
             created: str | None = None) -> Fingerprint:
    """Put battery output into canonical order, checking completeness."""
    seen: dict[str, ProbeResult] = {}
    for r in results:
        if r.probe_id not in REGISTRY:
            raise SchemaError(f"unknown probe {r.probe_id!r}")
        if r.probe_id in seen:
            raise SchemaError(f"duplicate probe {r.probe_id!r}")
        seen[r.probe_id] = r
    missing = [p for p in DETERMINISTIC_IDS if p not in seen]
    if missing:
        raise SchemaError(f"missing probes: {', '.join(missing)}")
    if backend is None:
        names = {r.backend for r in results}
        if len(names) != 1:
            raise SchemaError(f"results come from several backends: {sorted(names)}")
        backend = names.pop()
    if not backend or any(c.isspace() for c in backend):
        raise SchemaError(f"bad backend name {backend!r}")
    if created is None:
        created = datetime.now(timezone.utc).isoformat(timespec="seconds")
    ordered = tuple(seen[p] for p in PROBE_IDS if p in seen)
    return Fingerprint(backend, ordered, created=created)


def serialize(fp: Fingerprint) -> bytes:
    lines = [fp.header()]
    if fp.created:
        lines.append(_CREATED_PREFIX + fp.created)
    lines.extend(_result_line(r) for r in fp.results)
    lines.append(f"digest={fp.digest()}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse(data: Union[bytes, str]) -> Fingerprint:
    """Parse a fingerprint file.  The digest is read but not checked; see :func:`verify_digest`."""
    lines = _text(data).split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty document")
    m = _FP_HEADER_RE.fullmatch(lines[0])
    if not m:
        raise ParseError("expected 'procscope-fp v<N> backend=<name>' header", 1)
    version, backend = int(m.group(1)), m.group(2)
    if version != SCHEMA_VERSION:
        raise VersionError(f"unsupported schema version {version}", 1)
    created = None
    results = []
    digest = None
    for lineno, line in enumerate(lines[1:], start=2):
        if digest is not None:
            raise ParseError("content after digest line", lineno)
        if line.startswith(_CREATED_PREFIX):
            created = line[len(_CREATED_PREFIX):]
            continue
        if line.startswith("digest="):
            dm = _DIGEST_RE.fullmatch(line)
            if not dm:
                raise ParseError("malformed digest line", lineno)
            digest = dm.group(1)
            continue
        pm = _PROBE_RE.fullmatch(line)
        if not pm:
            raise ParseError(f"malformed line {line[:40]!r}", lineno)
        probe_id, kind, value = pm.groups()
        results.append(ProbeResult(probe_id, backend, _decode_result(probe_id, kind, value, lineno)))
    if digest is None:
        raise ParseError("missing digest line", len(lines))
    try:
        fp = assemble(results, backend, created=created or "")
    except SchemaError as exc:
        raise ParseError(str(exc), len(lines)) from None
    if fp.results != tuple(results):
        raise ParseError("probe lines out of canonical order", len(lines))
    return Fingerprint(backend, fp.results, version, created, digest)


def _decode_result(probe_id: str, kind: str, value: str, lineno: int) -> Payload:
    spec = REGISTRY.get(probe_id)
    if spec is None:
        raise ParseError(f"unknown probe {probe_id!r}", lineno)
    if kind not in (spec.kind, ErrorPayload.kind):
        raise ParseError(f"probe {probe_id} has kind {spec.kind}, not {kind}", lineno)
    try:
        return decode_payload(kind, value)
    except (EncodingError, ValueError) as exc:
        raise ParseError(str(exc), lineno) from None


def verify_digest(fp: Fingerprint) -> bool:
    return fp.declared_digest is not None and fp.declared_digest == fp.digest()


def load(data: Union[bytes, str], verify: bool = True) -> Fingerprint:
    fp = parse(data)
    if verify and not verify_digest(fp):
        raise DigestError("digest mismatch")
    return fp


def diff(a: Fingerprint, b: Fingerprint) -> list[tuple[str, Payload | None, Payload | None]]:
    """Probe-by-probe differences in canonical content."""
    if a.schema_version != b.schema_version:
        raise VersionError(f"schema versions differ: {a.schema_version} vs {b.schema_version}")
    return [(p, a.payload(p), b.payload(p)) for p in DETERMINISTIC_IDS
            if a.payload(p) != b.payload(p)]


# ---------------------------------------------------------------------------
# Signature database
# ---------------------------------------------------------------------------

WEAK_WEIGHT = 1
STRONG_WEIGHT = 4


@dataclass(frozen=True)
class Expectation:
    """Expected outcome of one probe.

    ``text`` is ``*`` (wildcard), ``dec:<prefix>`` (rendered-decimal prefix
    of a sine result, weak), ``lo32:<hex>`` (low 32 bits of the result's bit
    pattern), or a canonical payload encoding compared exactly.
    """

    kind: str
    text: str
    weight: int

    @property
    def wildcard(self) -> bool:
        return self.text == "*"

    @property
    def weak(self) -> bool:
        return self.text.startswith("dec:")

    def validate(self) -> None:
        if self.weight < 0:
            raise SchemaError("weights must be non-negative")
        if self.wildcard:
            return
        if self.text.startswith("dec:"):
            if self.kind != "sin" or len(self.text) == 4 or " " in self.text:
                raise SchemaError(f"bad decimal expectation {self.text!r}")
        elif self.text.startswith("lo32:"):
            if self.kind not in ("sin", "bits") or not re.fullmatch(r"[0-9a-f]{1,8}", self.text[5:]):
                raise SchemaError(f"bad lo32 expectation {self.text!r}")
        else:
            try:
                decode_payload(self.kind, self.text)
            except (EncodingError, ValueError) as exc:
                raise SchemaError(str(exc)) from None

    def matches(self, payload: Payload) -> bool:
        if self.wildcard:
            return True
        if payload.kind != self.kind:
            return False
        if self.text.startswith("dec:"):
            return isinstance(payload, SinPayload) and payload.dec.startswith(self.text[4:])
        if self.text.startswith("lo32:"):
            return payload.bits.low32() == int(self.text[5:], 16)
        return payload.encode() == self.text


@dataclass(frozen=True)
class SignatureEntry:
    class_name: str
    provenance: str
    expected: dict[str, Expectation]
    comments: tuple[str, ...] = ()

    def validate(self) -> None:
        if self.provenance not in PROVENANCES:
            raise SchemaError(f"unknown provenance {self.provenance!r}")
        for probe_id, exp in self.expected.items():
            spec = REGISTRY.get(probe_id)
            if spec is None:
                raise SchemaError(f"unknown probe {probe_id!r}")
            if not spec.deterministic:
                raise SchemaError("timing probes cannot appear in signatures")
            if exp.kind != spec.kind:
                raise SchemaError(f"probe {probe_id} has kind {spec.kind}, not {exp.kind}")
            exp.validate()


@dataclass(frozen=True)
class SignatureDb:
    entries: tuple[SignatureEntry, ...]

    def __post_init__(self):
        names = [e.class_name for e in self.entries]
        if len(set(names)) != len(names):
            raise SchemaError("class names must be unique")
        for e in self.entries:
            e.validate()

    def get(self, class_name: str) -> SignatureEntry:
        for e in self.entries:
            if e.class_name == class_name:
                return e
        raise KeyError(class_name)

    def canonical_lines(self) -> list[str]:
        lines = [f"procscope-db v{SCHEMA_VERSION}"]
        for e in self.entries:
            lines.append(f"class={e.class_name} provenance={e.provenance}")
            for probe_id in PROBE_IDS:
                exp = e.expected.get(probe_id)
                if exp is not None:
                    lines.append(f"probe={probe_id} kind={exp.kind} weight={exp.weight} value={exp.text}")
        return lines

    def serialize(self) -> bytes:
        out = []
        lines = self.canonical_lines()
        # comments ride along after their class header but stay out of the digest
        by_class = {f"class={e.class_name} provenance={e.provenance}": e.comments for e in self.entries}
        for line in lines:
            out.append(line)
            out.extend(f"# {c}" for c in by_class.get(line, ()))
        out.append(f"digest={_digest(lines)}")
        return ("\n".join(out) + "\n").encode("utf-8")

    @classmethod
    def parse(cls, data: Union[bytes, str], verify: bool = True) -> SignatureDb:
        lines = _text(data).split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise ParseError("empty document")
        m = _DB_HEADER_RE.fullmatch(lines[0])
        if not m:
            raise ParseError("expected 'procscope-db v<N>' header", 1)
        if int(m.group(1)) != SCHEMA_VERSION:
            raise VersionError(f"unsupported schema version {m.group(1)}", 1)
        entries: list[SignatureEntry] = []
        digest = None
        for lineno, line in enumerate(lines[1:], start=2):
            if digest is not None:
                raise ParseError("content after digest line", lineno)
            if line.startswith("#"):
                if not entries:
                    raise ParseError("comment before first class", lineno)
                last = entries[-1]
                entries[-1] = SignatureEntry(last.class_name, last.provenance, last.expected,
                                             last.comments + (line[1:].strip(),))
                continue
            if line.startswith("digest="):
                dm = _DIGEST_RE.fullmatch(line)
                if not dm:
                    raise ParseError("malformed digest line", lineno)
                digest = dm.group(1)
                continue
            cm = _CLASS_RE.fullmatch(line)
            if cm:
                entries.append(SignatureEntry(cm.group(1), cm.group(2), {}))
                continue
            pm = _DB_PROBE_RE.fullmatch(line)
            if not pm:
                raise ParseError(f"malformed line {line[:40]!r}", lineno)
            if not entries:
                raise ParseError("probe line before first class", lineno)
            probe_id, kind, weight, value = pm.groups()
            if probe_id in entries[-1].expected:
                raise ParseError(f"duplicate probe {probe_id!r} in class", lineno)
            exp = Expectation(kind, value, int(weight))
            try:
                SignatureEntry("x", "measured", {probe_id: exp}).validate()
            except SchemaError as exc:
                raise ParseError(str(exc), lineno) from None
            entries[-1].expected[probe_id] = exp
        if digest is None:
            raise ParseError("missing digest line", len(lines))
        try:
            db = cls(tuple(entries))
        except SchemaError as exc:
            raise ParseError(str(exc), len(lines)) from None
        if verify and _digest(db.canonical_lines()) != digest:
            raise DigestError("digest mismatch")
        return db


def default_db_path() -> Path:
    return Path(str(resources.files("procscope") / "data" / "signatures.db"))


def load_db(path: str | Path | None = None) -> SignatureDb:
    return SignatureDb.parse(Path(path or default_db_path()).read_bytes())


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassScore:
    class_name: str
    provenance: str
    score: int
    max_score: int
    matched: int
    total: int
    weak_matches: int = 0


@dataclass(frozen=True)
class MatchReport:
    ranked: tuple[ClassScore, ...]
    verdict: str

    @property
    def ambiguous(self) -> bool:
        return self.verdict == "ambiguous"

    def top(self) -> list[ClassScore]:
        """Every class sharing the best score."""
        return [c for c in self.ranked if c.score == self.ranked[0].score]


def score_entry(fp: Fingerprint, entry: SignatureEntry) -> ClassScore:
    score = max_score = matched = total = weak = 0
    for probe_id, exp in entry.expected.items():
        if exp.wildcard:
            continue
        total += 1
        max_score += exp.weight
        payload = fp.payload(probe_id)
        if payload is not None and exp.matches(payload):
            matched += 1
            score += exp.weight
            weak += exp.weak
    return ClassScore(entry.class_name, entry.provenance, score, max_score, matched, total, weak)


def match(fp: Fingerprint, db: SignatureDb) -> MatchReport:
    if not db.entries:
        raise ConfigurationError("signature database is empty")
    ranked = tuple(sorted((score_entry(fp, e) for e in db.entries),
                          key=lambda c: (-c.score, c.class_name)))
    if len(ranked) > 1 and ranked[0].score == ranked[1].score:
        return MatchReport(ranked, "ambiguous")
    return MatchReport(ranked, ranked[0].class_name)


# ---------------------------------------------------------------------------
# Target predicates (a benign boolean gate over fingerprints)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    probe_id: str
    field: str
    value: str


@dataclass(frozen=True)
class AllOf:
    terms: tuple = ()


@dataclass(frozen=True)
class AnyOf:
    terms: tuple = ()


Predicate = Union[Atom, AllOf, AnyOf]

_TOKEN_RE = re.compile(r"\s*(\(|\)|==|[^\s()=]+)")


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SpecificationError(f"cannot tokenize predicate at {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def parse_predicate(text: str) -> Predicate:
    """Parse ``probe.field == value`` atoms joined by ``and``/``or`` with parentheses.

    An empty string is the empty conjunction (always true).
    """
    tokens = _tokenize(text)
    if not tokens:
        return AllOf(())
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise SpecificationError("unexpected end of predicate")
        pos += 1
        return tokens[pos - 1]

    def disjunction() -> Predicate:
        terms = [conjunction()]
        while peek() == "or":
            take()
            terms.append(conjunction())
        return terms[0] if len(terms) == 1 else AnyOf(tuple(terms))

    def conjunction() -> Predicate:
        terms = [factor()]
        while peek() == "and":
            take()
            terms.append(factor())
        return terms[0] if len(terms) == 1 else AllOf(tuple(terms))

    def factor() -> Predicate:
        tok = take()
        if tok == "(":
            inner = disjunction()
            if take() != ")":
                raise SpecificationError("expected ')'")
            return inner
        if tok in (")", "==", "and", "or"):
            raise SpecificationError(f"unexpected {tok!r}")
        if take() != "==":
            raise SpecificationError(f"expected '==' after {tok!r}")
        value = take()
        if value in ("(", ")", "==", "and", "or"):
            raise SpecificationError(f"bad value {value!r}")
        probe_id, _, fld = tok.partition(".")
        return Atom(probe_id, fld or "value", value)

    tree = disjunction()
    if pos != len(tokens):
        raise SpecificationError(f"trailing tokens: {' '.join(tokens[pos:])}")
    return tree


def _check(pred: Predicate) -> None:
    if isinstance(pred, Atom):
        spec = REGISTRY.get(pred.probe_id)
        if spec is None:
            raise SpecificationError(f"unknown probe {pred.probe_id!r} in predicate")
        if not spec.deterministic:
            raise SpecificationError("timing probes cannot be used for gating")
    else:
        for t in pred.terms:
            _check(t)


def _eval(fp: Fingerprint, pred: Predicate) -> bool:
    if isinstance(pred, AllOf):
        return all(_eval(fp, t) for t in pred.terms)
    if isinstance(pred, AnyOf):
        return any(_eval(fp, t) for t in pred.terms)
    payload = fp.payload(pred.probe_id)
    if payload is None or isinstance(payload, ErrorPayload):
        return False
    fields = payload.fields()
    if pred.field not in fields:
        raise SpecificationError(f"probe {pred.probe_id} has no field {pred.field!r}")
    return fields[pred.field] == pred.value


def matches_target(fp: Fingerprint, predicate: Union[str, Predicate]) -> bool:
    """Evaluate a predicate over a fingerprint.

    This is a pure boolean gate, provided to study fingerprint-conditioned
    control flow from the defender's side.  It has no side effects.
    """
    pred = parse_predicate(predicate) if isinstance(predicate, str) else predicate
    _check(pred)
    return _eval(fp, pred)


# ---------------------------------------------------------------------------
# Shipped signature rows
# ---------------------------------------------------------------------------

_EASY = {
    "VAX 750": "true,true,false,false",
    "AMD 32": "false,true,false,false",
    "AMD 64": "false,true,false,false",
    "ATOM": "false,true,false,false",
    "INTEL DC": "false,true,false,false",
    "MIPS 12000": "false,true,false,false",
    "dsPIC33": "false,true,true,false",
    "IPHONE 3G": "false,true,false,false",
}

# sin(10^k * pi1) for k = 10, 17, 37, as printed (leading digits only).
_SIN_DEC = {
    "IPHONE 3G": ("0.375", "0.423", "-0.837"),
    "AMD 32": ("0.375", "0.424", "-0.837"),
    "AMD 64": ("0.375", "0.424", "0.837"),
    "ATOM": ("0.375", "0.423", "-0.832"),
    "INTEL DC": ("0.375", "0.423", "-0.832"),
    "MIPS 12000": ("0.375", "0.423", "-0.832"),
    "dsPIC33": ("0.81", "0.62", "-0.44"),
}

# sin(10^37 * pi_i), i = 1..4: low 32 bits of the result as printed in hex.
_SIN37_LO32 = {
    "IPHONE 3G": ("47257756", "9d94ef4d", "99f9067", "99f9067"),
    "AMD 64": ("af545000",) * 4,
    "ATOM": ("47257756", "9d94ef4d", "99f9067", "99f9067"),
    "INTEL DC": ("47257756", "9d94ef4d", "99f9067", "99f9067"),
    "MIPS 12000": ("47257756", "9d94ef4d", "99f9067", "99f9067"),
    "dsPIC33": ("bee5",) * 4,
}

_PAPER_ORDER = ("VAX 750", "AMD 32", "AMD 64", "ATOM", "INTEL DC", "MIPS 12000", "dsPIC33",
                "IPHONE 3G")

_PAPER_COMMENTS = {
    "AMD 64": ("the decimal table prints sin(1e37*pi1) as +0.837 where other rows read -0.837,"
               " probably a sign typo; the hex cells are used for k=37 instead",),
    "dsPIC33": ("the hex cells read 'bee5', shorter than a 32-bit word; kept as printed",),
}


def paper_table_entries() -> list[SignatureEntry]:
    """Rows transcribed from the published easy-computation and sine tables."""
    entries = []
    for name in _PAPER_ORDER:
        exp = {"easy-computations": Expectation("bools", _EASY[name], STRONG_WEIGHT)}
        dec = _SIN_DEC.get(name)
        lo32 = _SIN37_LO32.get(name)
        if dec:
            exp["sin-k10-pi1"] = Expectation("sin", "dec:" + dec[0], WEAK_WEIGHT)
            exp["sin-k17-pi1"] = Expectation("sin", "dec:" + dec[1], WEAK_WEIGHT)
            if not lo32:
                exp["sin-k37-pi1"] = Expectation("sin", "dec:" + dec[2], WEAK_WEIGHT)
        if lo32:
            for i, hx in enumerate(lo32, start=1):
                exp[f"sin-k37-pi{i}"] = Expectation("sin", "lo32:" + hx, STRONG_WEIGHT)
        entries.append(SignatureEntry(name, "paper-table", exp, _PAPER_COMMENTS.get(name, ())))
    return entries


def synthetic_entry(class_name: str, fp: Fingerprint) -> SignatureEntry:
    exp = {r.probe_id: Expectation(r.kind, r.payload.encode(), STRONG_WEIGHT)
           for r in fp.canonical if not isinstance(r.payload, ErrorPayload)}
    return SignatureEntry(class_name, "synthetic-emulated", exp,
                          (f"generated by the emulator under {fp.backend}",))


def synthetic_entries(configs: Iterable) -> list[SignatureEntry]:
    """One fully specified row per emulator configuration, named ``<label>-synthetic``."""
    from .emul import EmulatedBackend
    from .probes import run_battery

    out = []
    for cfg in configs:
        backend = EmulatedBackend(cfg)
        fp = assemble(run_battery(backend, include_timing=False), created="")
        out.append(synthetic_entry(f"{cfg.label}-synthetic", fp))
    return out


def build_default_db() -> SignatureDb:
    from .emul import PRESETS

    return SignatureDb(tuple(paper_table_entries() + synthetic_entries(PRESETS.values())))
