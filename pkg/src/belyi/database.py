"""JSONL storage of passports and Galois orbit data, and the statistics built on them.

Records are stored one per line, sorted by key, as compact JSON with sorted
keys, so that write -> read -> write is byte-identical.  Rationals are
written as ``"p/q"`` strings.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .perm import Partition, PermutationTriple

_KEY_RE = re.compile(r"^(\d+)T([^-]+)-g(\d+)-([^-]+)-([^-]+)-([^-]+)$")


class DatabaseError(ValueError):
    """Malformed or inconsistent database content."""


# ---------------------------------------------------------------------------
# keys
# ---------------------------------------------------------------------------

def lam_token(part: Sequence[int]) -> str:
    """``(6, 1) -> "6^1.1^1"``."""
    return Partition(part).exponent_str().replace(" ", ".")


def parse_lam_token(tok: str) -> tuple:
    return tuple(Partition.from_exponent_str(tok.replace(".", " ")))


def passport_key(degree: int, group_id, genus: int, lam: Sequence[Sequence[int]]) -> str:
    gid = str(group_id)
    if not gid or "-" in gid or any(c.isspace() for c in gid):
        raise DatabaseError(f"group id {gid!r} cannot be used in a key")
    return f"{degree}T{gid}-g{genus}-" + "-".join(lam_token(l) for l in lam)


def parse_key(key: str) -> tuple:
    """``(degree, group_id, genus, lam)``; the group id is returned as a string."""
    m = _KEY_RE.match(key)
    if not m:
        raise DatabaseError(f"malformed passport key {key!r}")
    d, gid, g = int(m.group(1)), m.group(2), int(m.group(3))
    try:
        lam = tuple(parse_lam_token(m.group(i)) for i in (4, 5, 6))
    except (ValueError, IndexError) as exc:
        raise DatabaseError(f"malformed partition in key {key!r}") from exc
    return d, gid, g, lam


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

@dataclass
class PassportRecord:
    key: str
    degree: int
    genus: int
    lam: tuple
    group: dict
    size: int
    triples: list | None = None  # image arrays; None when only the size is known
    pointed: list | None = None  # [{"s", "e", "a", "size"}]
    descends_guaranteed: bool | None = None
    attachments: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lam = tuple(tuple(int(x) for x in l) for l in self.lam)
        self.validate()

    def validate(self):
        d, _, g, lam = parse_key(self.key)
        if (d, g, lam) != (self.degree, self.genus, self.lam):
            raise DatabaseError(f"{self.key}: key does not match degree/genus/lambda")
        if any(sum(l) != self.degree for l in self.lam):
            raise DatabaseError(f"{self.key}: partitions do not sum to the degree")
        if self.size < 1:
            raise DatabaseError(f"{self.key}: size must be positive")
        if self.triples is not None and len(self.triples) != self.size:
            raise DatabaseError(f"{self.key}: size {self.size} but {len(self.triples)} triples")
        for pp in self.pointed or ():
            if pp.get("size", 0) < 1:
                raise DatabaseError(f"{self.key}: pointed passport with size < 1")

    @classmethod
    def from_passport(cls, p, pointed=None, descends=None) -> "PassportRecord":
        lam = tuple(tuple(l) for l in p.lam)
        gid = p.group.canonical_id if p.group.canonical_id is not None else p.group.label
        group = {"order": p.group.order, "signature": p.group.signature_hash,
                 "label": p.group.label}
        rec = cls(passport_key(p.degree, gid, p.genus, lam), p.degree, p.genus, lam, group,
                  p.size, [t.to_json() for t in p.triples])
        if pointed is not None:
            rec.set_pointed(pointed, descends)
        return rec

    def set_pointed(self, pointed, descends=None):
        self.pointed = [{"s": pp.base_label, "e": pp.length, "a": pp.aut_order, "size": pp.size}
                        for pp in pointed]
        self.descends_guaranteed = descends
        self.validate()

    def triple_objects(self) -> list[PermutationTriple]:
        if self.triples is None:
            raise DatabaseError(f"{self.key}: no triples stored")
        return [PermutationTriple.from_json(t) for t in self.triples]

    def to_json(self) -> dict:
        out = {"key": self.key, "degree": self.degree, "genus": self.genus,
               "lambda": [list(l) for l in self.lam], "group": self.group, "size": self.size}
        if self.triples is not None:
            out["triples"] = self.triples
        if self.pointed is not None:
            out["pointed"] = self.pointed
        if self.descends_guaranteed is not None:
            out["descends_guaranteed"] = self.descends_guaranteed
        if self.attachments:
            out["attachments"] = self.attachments
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PassportRecord":
        try:
            return cls(data["key"], int(data["degree"]), int(data["genus"]), data["lambda"],
                       dict(data.get("group", {})), int(data["size"]), data.get("triples"),
                       data.get("pointed"), data.get("descends_guaranteed"),
                       dict(data.get("attachments", {})))
        except KeyError as exc:
            raise DatabaseError(f"missing field {exc.args[0]!r}") from exc


@dataclass
class OrbitRecord:
    key: str
    parts: list
    labels: list | None = None

    def __post_init__(self):
        parse_key(self.key)
        self.parts = [int(x) for x in self.parts]
        if not self.parts or any(x < 1 for x in self.parts):
            raise DatabaseError(f"{self.key}: orbit sizes must be positive")
        if self.labels is not None and len(self.labels) != len(self.parts):
            raise DatabaseError(f"{self.key}: one label per orbit expected")

    def to_json(self) -> dict:
        out = {"key": self.key, "orbits": self.parts}
        if self.labels is not None:
            out["labels"] = self.labels
        return out

    @classmethod
    def from_json(cls, data: dict) -> "OrbitRecord":
        try:
            return cls(data["key"], data["orbits"], data.get("labels"))
        except KeyError as exc:
            raise DatabaseError(f"missing field {exc.args[0]!r}") from exc


# ---------------------------------------------------------------------------
# JSONL
# ---------------------------------------------------------------------------

def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def write_jsonl(path, records: Iterable) -> None:
    """Write records sorted by key; the file is replaced atomically."""
    records = list(records)
    _check_unique(records)
    records.sort(key=lambda r: r.key)
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".jsonl", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for r in records:
                fh.write(_dumps(r.to_json()) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _check_unique(records):
    seen = set()
    for r in records:
        if r.key in seen:
            raise DatabaseError(f"duplicate key {r.key}")
        seen.add(r.key)


def _read(path, cls) -> list:
    out = []
    seen = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = cls.from_json(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DatabaseError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            except (DatabaseError, ValueError, TypeError) as exc:
                raise DatabaseError(f"{path}:{lineno}: {exc}") from exc
            if rec.key in seen:
                raise DatabaseError(f"{path}:{lineno}: duplicate key {rec.key} "
                                    f"(first on line {seen[rec.key]})")
            seen[rec.key] = lineno
            out.append(rec)
    return out


def read_jsonl(path) -> list[PassportRecord]:
    return _read(path, PassportRecord)


def read_orbits(path) -> list[OrbitRecord]:
    return _read(path, OrbitRecord)


def write_orbits(path, orbits: Iterable[OrbitRecord]) -> None:
    write_jsonl(path, orbits)


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

def format_fraction(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_fraction(s) -> Fraction:
    return Fraction(s) if isinstance(s, (int, Fraction)) else Fraction(str(s).strip())


def passport_weight(size: int, parts: Sequence[int]) -> Fraction:
    """``1`` for ``size == 1``, else ``sum (l_i - 1)^2 / (size - 1)^2``."""
    parts = [int(x) for x in parts]
    if sum(parts) != size or any(x < 1 for x in parts):
        raise ValueError(f"orbit sizes {parts} do not partition {size}")
    if size == 1:
        return Fraction(1)
    return Fraction(sum((x - 1) ** 2 for x in parts), (size - 1) ** 2)


@dataclass
class StatsTable:
    counts: dict  # (degree, genus) -> number of passports
    max_sizes: dict = field(default_factory=dict)
    betas: dict = field(default_factory=dict)  # degree -> Fraction or (lo, hi)

    @property
    def degrees(self) -> list[int]:
        return sorted({d for d, _ in self.counts})

    @property
    def genera(self) -> list[int]:
        return sorted({g for _, g in self.counts})

    def row(self, d: int) -> list[int]:
        """Counts for genus 0, 1, ... up to the largest genus occurring in degree ``d``."""
        gs = [g for dd, g in self.counts if dd == d]
        return [self.counts.get((d, g), 0) for g in range(max(gs) + 1)] if gs else []

    def degree_total(self, d: int) -> int:
        return sum(self.row(d))

    def genus_total(self, g: int) -> int:
        return sum(n for (d, gg), n in self.counts.items() if gg == g)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def summary_line(self, d: int) -> str:
        return f"d={d}: " + ",".join(str(n) for n in self.row(d)) + f" (total {self.degree_total(d)})"

    def lines(self) -> list[str]:
        out = [self.summary_line(d) for d in self.degrees]
        if self.degrees:
            out.append("per genus: " + ", ".join(f"g={g}: {self.genus_total(g)}"
                                                 for g in self.genera)
                       + f" (total {self.total})")
        for d in sorted(self.max_sizes):
            out.append(f"max size d={d}: {self.max_sizes[d]}")
        for d in sorted(self.betas):
            out.append(f"beta({d}) = {format_beta(self.betas[d])}")
        return out


def format_beta(b) -> str:
    if isinstance(b, tuple):
        lo, hi = b
        return f"[{format_fraction(lo)}, {format_fraction(hi)}] ~ [{float(lo):.5f}, {float(hi):.5f}]"
    return f"{format_fraction(b)} ~ {float(b):.5f}"


def counts_table(records: Iterable[PassportRecord]) -> StatsTable:
    counts = defaultdict(int)
    for r in records:
        counts[(r.degree, r.genus)] += 1
    return StatsTable(dict(sorted(counts.items())))


def max_size_table(records: Iterable[PassportRecord]) -> dict[int, int]:
    out = {}
    for r in records:
        out[r.degree] = max(out.get(r.degree, 0), r.size)
    return dict(sorted(out.items()))


def beta(records: Iterable[PassportRecord], orbits: Iterable[OrbitRecord] | dict, d: int):
    """Mean weight over all passports of degree at most ``d``.

    Size-one passports have weight 1.  Larger passports without orbit data
    count with weight anywhere in ``[0, 1]``; in that case the result is the
    interval ``(lo, hi)``, otherwise an exact ``Fraction``.
    """
    if isinstance(orbits, dict):
        by_key = orbits
    else:
        by_key = {}
        for o in orbits:
            if o.key in by_key:
                raise DatabaseError(f"duplicate key {o.key}")
            by_key[o.key] = o
    known = Fraction(0)
    unresolved = 0
    n = 0
    for r in records:
        if r.degree > d:
            continue
        n += 1
        o = by_key.get(r.key)
        if o is not None:
            known += passport_weight(r.size, o.parts)
        elif r.size == 1:
            known += 1
        else:
            unresolved += 1
    if n == 0:
        raise ValueError(f"no passports of degree <= {d}")
    if unresolved == 0:
        return known / n
    return (known / n, (known + unresolved) / n)


def stats(records: Sequence[PassportRecord], orbits=None, beta_degrees=None) -> StatsTable:
    records = list(records)
    table = counts_table(records)
    table.max_sizes = max_size_table(records)
    orbits = list(orbits or [])
    for d in (table.degrees if beta_degrees is None else beta_degrees):
        table.betas[d] = beta(records, orbits, d)
    return table
