"""Incidence structures for the square, the pentagram and the doily.

Points are small integers with a fixed order per structure:

* ``square``: row-major ``A B C / a b c / alpha beta gamma``.
* ``pentagram``: the two-row layout ``A B b_c C D / b_d a_b a_d c_d a_c``.
* ``doily``: row-major over the ``chi_kl`` grid, ``chi01 chi02 chi03 chi10 ... chi33``.

Assignments are handled internally as bitmasks, bit ``p`` set meaning point
``p`` takes the value -1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from .pauli import PauliOperator, Sign, commutes, context_sign, format_pauli, parse_pauli

EXHAUSTIVE_LIMIT = 24
AUTOMORPHISM_LIMIT = 15


class StructureError(ValueError):
    pass


class UnknownPointError(StructureError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown point"


@dataclass(frozen=True)
class IncidenceStructure:
    name: str
    point_names: tuple[str, ...]
    blocks: tuple[tuple[int, ...], ...]
    block_signs: tuple[int, ...]
    labels: tuple[PauliOperator, ...] | None = None
    regular: bool = True

    def __post_init__(self) -> None:
        n = len(self.point_names)
        if len(set(self.point_names)) != n:
            raise StructureError("duplicate point names")
        if len(self.block_signs) != len(self.blocks):
            raise StructureError("one sign per block required")
        for sign in self.block_signs:
            if sign not in (1, -1):
                raise StructureError(f"block sign must be +1 or -1, got {sign!r}")
        for b in self.blocks:
            if len(b) < 2:
                raise StructureError(f"block {b} has fewer than 2 points")
            if len(set(b)) != len(b) or any(not 0 <= p < n for p in b):
                raise StructureError(f"block {b} has invalid or repeated points")
        degrees = [0] * n
        for b in self.blocks:
            for p in b:
                degrees[p] += 1
        if 0 in degrees:
            raise StructureError(f"point {self.point_names[degrees.index(0)]} lies on no block")
        if self.regular and (len(set(degrees)) != 1 or len({len(b) for b in self.blocks}) != 1):
            raise StructureError("structure declared regular but degrees or block sizes vary")
        if self.labels is not None:
            self._validate_labels()

    def _validate_labels(self) -> None:
        labels = self.labels
        if len(labels) != len(self.point_names):
            raise StructureError("one Pauli label per point required")
        for bi, b in enumerate(self.blocks):
            sign = context_sign([labels[p] for p in b])
            if sign != self.block_signs[bi]:
                raise StructureError(
                    f"block {bi} has recorded sign {self.block_signs[bi]:+d} "
                    f"but its operators multiply to {int(sign):+d}"
                )
        for p, q in combinations(range(len(labels)), 2):
            if commutes(labels[p], labels[q]) != self.compatible_ids(p, q):
                raise StructureError(
                    f"compatibility of {self.point_names[p]},{self.point_names[q]} "
                    "disagrees with commutation of their labels"
                )

    # -- basic lookups -------------------------------------------------

    @property
    def num_points(self) -> int:
        return len(self.point_names)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @cached_property
    def point_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.point_names)}

    def point_id(self, point: int | str) -> int:
        if isinstance(point, str):
            try:
                return self.point_index[point]
            except KeyError:
                raise UnknownPointError(f"{self.name} has no point named {point!r}") from None
        if isinstance(point, int) and 0 <= point < self.num_points:
            return point
        raise UnknownPointError(f"{self.name} has no point {point!r}")

    @cached_property
    def block_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << p for p in b) for b in self.blocks)

    @cached_property
    def negative_mask(self) -> int:
        return sum(1 << i for i, s in enumerate(self.block_signs) if s == -1)

    @cached_property
    def blocks_through(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            tuple(bi for bi, b in enumerate(self.blocks) if p in b) for p in range(self.num_points)
        )

    @cached_property
    def blocks_through_mask(self) -> tuple[int, ...]:
        return tuple(sum(1 << bi for bi in bs) for bs in self.blocks_through)

    @cached_property
    def neighbor_masks(self) -> tuple[int, ...]:
        """Bitmask of points sharing a block with each point (itself included)."""
        masks = []
        for p in range(self.num_points):
            m = 1 << p
            for bi in self.blocks_through[p]:
                m |= self.block_masks[bi]
            masks.append(m)
        return tuple(masks)

    def compatible_ids(self, p: int, q: int) -> bool:
        return bool(self.neighbor_masks[p] >> q & 1)

    def common_compatible(self, points: Iterable[int]) -> tuple[int, ...]:
        """Points compatible with every member of ``points`` (members included)."""
        mask = (1 << self.num_points) - 1
        for p in points:
            mask &= self.neighbor_masks[p]
        return tuple(p for p in range(self.num_points) if mask >> p & 1)

    def block_id(self, points: Iterable[int | str]) -> int:
        target = frozenset(self.point_id(p) for p in points)
        for bi, b in enumerate(self.blocks):
            if frozenset(b) == target:
                return bi
        raise StructureError(f"{sorted(target)} is not a block of {self.name}")

    def block_label(self, bi: int) -> str:
        return "{" + ",".join(self.point_names[p] for p in self.blocks[bi]) + "}"


# -- built-in structures ---------------------------------------------------

SQUARE_POINTS = ("A", "B", "C", "a", "b", "c", "alpha", "beta", "gamma")
SQUARE_LABELS = ("ZI", "IZ", "ZZ", "IX", "XI", "XX", "ZX", "XZ", "YY")

PENTAGRAM_POINTS = ("A", "B", "b_c", "C", "D", "b_d", "a_b", "a_d", "c_d", "a_c")
PENTAGRAM_LABELS = {
    "A": "XXZ", "B": "XZX", "C": "ZXX", "D": "ZZZ",
    "a_b": "XII", "c_d": "ZII", "a_c": "IXI", "b_d": "IZI", "b_c": "IIX", "a_d": "IIZ",
}
PENTAGRAM_LINES = (
    ("A", "a_b", "a_c", "a_d"),
    ("a_b", "B", "b_c", "b_d"),
    ("a_c", "b_c", "C", "c_d"),
    ("a_d", "b_d", "c_d", "D"),
    ("A", "B", "C", "D"),
)

DOILY_POINTS = tuple(f"chi{k}{l}" for k in range(4) for l in range(4) if (k, l) != (0, 0))
DOILY_LINES = tuple(
    (f"chi{k}0", f"chi{k}{l}", f"chi0{l}") for k in range(1, 4) for l in range(1, 4)
) + (
    ("chi11", "chi23", "chi32"),
    ("chi12", "chi21", "chi33"),
    ("chi13", "chi22", "chi31"),
    ("chi11", "chi22", "chi33"),
    ("chi12", "chi23", "chi31"),
    ("chi13", "chi21", "chi32"),
)


def _labelled(name: str, points: Sequence[str], labels: Sequence[str], lines) -> IncidenceStructure:
    index = {p: i for i, p in enumerate(points)}
    ops = tuple(parse_pauli(t) for t in labels)
    blocks = tuple(tuple(index[p] for p in line) for line in lines)
    signs = tuple(int(context_sign([ops[p] for p in b])) for b in blocks)
    return IncidenceStructure(name, tuple(points), blocks, signs, ops)


def _square() -> IncidenceStructure:
    rows = [SQUARE_POINTS[3 * r: 3 * r + 3] for r in range(3)]
    cols = [SQUARE_POINTS[c::3] for c in range(3)]
    return _labelled("square", SQUARE_POINTS, SQUARE_LABELS, rows + cols)


def _pentagram() -> IncidenceStructure:
    labels = [PENTAGRAM_LABELS[p] for p in PENTAGRAM_POINTS]
    return _labelled("pentagram", PENTAGRAM_POINTS, labels, PENTAGRAM_LINES)


def _doily() -> IncidenceStructure:
    labels = []
    for name in DOILY_POINTS:
        k, l = int(name[3]), int(name[4])
        labels.append("IXYZ"[k] + "IXYZ"[l])
    return _labelled("doily", DOILY_POINTS, labels, DOILY_LINES)


_BUILDERS = {"square": _square, "pentagram": _pentagram, "doily": _doily}
_CACHE: dict[str, IncidenceStructure] = {}

STRUCTURE_NAMES = tuple(_BUILDERS)


def build_structure(name: str) -> IncidenceStructure:
    if name not in _BUILDERS:
        raise StructureError(f"unknown structure {name!r}; expected one of {', '.join(_BUILDERS)}")
    if name not in _CACHE:
        _CACHE[name] = _BUILDERS[name]()
    return _CACHE[name]


# -- assignments and contextuality degree -----------------------------------

def compatible(s: IncidenceStructure, p: int | str, q: int | str) -> bool:
    return s.compatible_ids(s.point_id(p), s.point_id(q))


def assignment_mask(s: IncidenceStructure, assignment: Sequence[int]) -> int:
    if len(assignment) != s.num_points:
        raise StructureError(
            f"assignment covers {len(assignment)} of {s.num_points} points of {s.name}"
        )
    mask = 0
    for p, v in enumerate(assignment):
        if v == -1:
            mask |= 1 << p
        elif v != 1:
            raise StructureError(f"assignment value for point {p} must be +1 or -1")
    return mask


def mask_to_assignment(s: IncidenceStructure, mask: int) -> tuple[Sign, ...]:
    return tuple(Sign.MINUS if mask >> p & 1 else Sign.PLUS for p in range(s.num_points))


def violated_mask(s: IncidenceStructure, mask: int) -> int:
    out = 0
    for bi, bm in enumerate(s.block_masks):
        negative = (mask & bm).bit_count() & 1
        if negative != (s.block_signs[bi] == -1):
            out |= 1 << bi
    return out


def violated_blocks(s: IncidenceStructure, assignment: Sequence[int]) -> frozenset[int]:
    vm = violated_mask(s, assignment_mask(s, assignment))
    return frozenset(bi for bi in range(s.num_blocks) if vm >> bi & 1)


def _require_exhaustive(s: IncidenceStructure) -> None:
    if s.num_points > EXHAUSTIVE_LIMIT:
        raise StructureError(
            f"{s.name} has {s.num_points} points; exhaustive mode supports at most {EXHAUSTIVE_LIMIT}"
        )


def _all_violated(s: IncidenceStructure) -> list[int]:
    """Violated-block mask for every assignment mask, indexed by the mask.

    Walks a Gray code: flipping point p toggles exactly the blocks through p.
    """
    _require_exhaustive(s)
    n = s.num_points
    table = [0] * (1 << n)
    current = s.negative_mask  # all +1 violates exactly the negative blocks
    assignment = 0
    table[0] = current
    for k in range(1, 1 << n):
        p = (k & -k).bit_length() - 1
        assignment ^= 1 << p
        current ^= s.blocks_through_mask[p]
        table[assignment] = current
    return table


_VIOLATED_CACHE: dict[IncidenceStructure, list[int]] = {}


def _violated_table(s: IncidenceStructure) -> list[int]:
    if s not in _VIOLATED_CACHE:
        _VIOLATED_CACHE[s] = _all_violated(s)
    return _VIOLATED_CACHE[s]


def contextuality_degree(s: IncidenceStructure) -> tuple[int, tuple[Sign, ...]]:
    table = _violated_table(s)
    best_mask = min(range(len(table)), key=lambda m: (table[m].bit_count(), m))
    return table[best_mask].bit_count(), mask_to_assignment(s, best_mask)


def witness_bounds(s: IncidenceStructure) -> tuple[int, int]:
    """(noncontextual maximum, quantum value) of the signed sum of context correlators."""
    degree, _ = contextuality_degree(s)
    return s.num_blocks - 2 * degree, s.num_blocks


def minimal_contradiction_masks(s: IncidenceStructure) -> list[int]:
    achievable = sorted(set(_violated_table(s)), key=lambda m: (m.bit_count(), m))
    minimal: list[int] = []
    for m in achievable:
        if not any(mm & m == mm for mm in minimal):
            minimal.append(m)
    return minimal


def minimal_contradiction_sets(s: IncidenceStructure) -> dict[int, list[tuple[int, ...]]]:
    """Inclusion-minimal achievable sets of violated blocks, grouped by size."""
    out: dict[int, list[tuple[int, ...]]] = {}
    for m in minimal_contradiction_masks(s):
        blocks = tuple(bi for bi in range(s.num_blocks) if m >> bi & 1)
        out.setdefault(len(blocks), []).append(blocks)
    for size in out:
        out[size].sort()
    return dict(sorted(out.items()))


def nonsimple_quota(s: IncidenceStructure) -> int:
    """Fewest points meeting every block of some minimal contradiction set twice.

    Each state of a machine has a contradiction set containing a minimal one, and
    each contradiction context needs two nonsimple vertices, so this bounds the
    number of nonsimple vertices per state from below.
    """
    if s not in _QUOTA_CACHE:
        _QUOTA_CACHE[s] = _nonsimple_quota(s)
    return _QUOTA_CACHE[s]


_QUOTA_CACHE: dict[IncidenceStructure, int] = {}


def _nonsimple_quota(s: IncidenceStructure) -> int:
    minimal = minimal_contradiction_masks(s)
    for size in range(s.num_points + 1):
        for points in combinations(range(s.num_points), size):
            pm = sum(1 << p for p in points)
            for m in minimal:
                if all(
                    (pm & s.block_masks[bi]).bit_count() >= 2
                    for bi in range(s.num_blocks)
                    if m >> bi & 1
                ):
                    return size
    raise StructureError(f"{s.name} has no point set covering a contradiction set twice")


def neighborhood_cover(s: IncidenceStructure, p: int | str, q: int | str) -> int:
    """Number of points on some block through ``p`` or through ``q``."""
    pi, qi = s.point_id(p), s.point_id(q)
    if pi == qi:
        raise StructureError("neighborhood_cover needs two distinct points")
    return (s.neighbor_masks[pi] | s.neighbor_masks[qi]).bit_count()


# -- isomorphisms and automorphisms ------------------------------------------

def _block_lookup(s: IncidenceStructure) -> dict[int, int]:
    return {bm: bi for bi, bm in enumerate(s.block_masks)}


def iter_isomorphisms(
    src: IncidenceStructure, dst: IncidenceStructure, *, signed: bool = True
) -> Iterable[tuple[int, ...]]:
    """Yield point bijections ``src -> dst`` mapping blocks onto blocks.

    With ``signed`` the image of every block must carry the same sign.  Results
    are produced in lexicographic order of the image tuple.
    """
    n = src.num_points
    if n != dst.num_points or src.num_blocks != dst.num_blocks:
        return
    if sorted(map(len, src.blocks)) != sorted(map(len, dst.blocks)):
        return
    dst_blocks = _block_lookup(dst)
    # blocks of src that become fully mapped once point k is assigned
    completes: list[list[int]] = [[] for _ in range(n)]
    for bi, b in enumerate(src.blocks):
        completes[max(b)].append(bi)
    src_deg = [len(bs) for bs in src.blocks_through]
    dst_deg = [len(bs) for bs in dst.blocks_through]
    image = [-1] * n
    used = 0

    def extend(k: int):
        nonlocal used
        if k == n:
            yield tuple(image)
            return
        for t in range(n):
            if used >> t & 1 or src_deg[k] != dst_deg[t]:
                continue
            ok = True
            for j in range(k):
                if src.compatible_ids(j, k) != dst.compatible_ids(image[j], t):
                    ok = False
                    break
            if not ok:
                continue
            image[k] = t
            for bi in completes[k]:
                bm = sum(1 << image[p] for p in src.blocks[bi])
                target = dst_blocks.get(bm)
                if target is None or (signed and dst.block_signs[target] != src.block_signs[bi]):
                    ok = False
                    break
            if ok:
                used |= 1 << t
                yield from extend(k + 1)
                used &= ~(1 << t)
            image[k] = -1

    yield from extend(0)


def find_isomorphism(
    src: IncidenceStructure, dst: IncidenceStructure, *, signed: bool = True
) -> tuple[int, ...] | None:
    return next(iter(iter_isomorphisms(src, dst, signed=signed)), None)


def _compose(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    """Apply ``b`` first, then ``a``."""
    return tuple(a[b[i]] for i in range(len(b)))


def _closure(generators: list[tuple[int, ...]], n: int) -> set[tuple[int, ...]]:
    identity = tuple(range(n))
    group = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for g in frontier:
            for h in generators:
                gh = _compose(h, g)
                if gh not in group:
                    group.add(gh)
                    nxt.append(gh)
        frontier = nxt
    return group


@dataclass(frozen=True)
class AutomorphismGroup:
    structure: str
    signed: bool
    order: int
    generators: tuple[tuple[int, ...], ...]
    elements: tuple[tuple[int, ...], ...] = field(repr=False)


_AUT_CACHE: dict[tuple[IncidenceStructure, bool], AutomorphismGroup] = {}


def automorphisms(s: IncidenceStructure, *, signed: bool = True) -> AutomorphismGroup:
    """All point permutations preserving blocks (and block signs when ``signed``)."""
    if s.num_points > AUTOMORPHISM_LIMIT:
        raise StructureError(
            f"automorphism enumeration supports at most {AUTOMORPHISM_LIMIT} points"
        )
    key = (s, signed)
    if key in _AUT_CACHE:
        return _AUT_CACHE[key]
    elements = tuple(iter_isomorphisms(s, s, signed=signed))
    generators: list[tuple[int, ...]] = []
    generated = {tuple(range(s.num_points))}
    for g in elements:
        if g not in generated:
            generators.append(g)
            generated = _closure(generators, s.num_points)
    group = AutomorphismGroup(s.name, signed, len(elements), tuple(generators), elements)
    _AUT_CACHE[key] = group
    return group


# -- duad model and the ten squares ---------------------------------------------

SIX = (1, 2, 3, 4, 5, 6)
DUADS = tuple(combinations(SIX, 2))
# the three negative doily lines correspond to a triangle of duads
DUAD_NEGATIVE = ((1, 2), (1, 3), (2, 3))


def _synthemes() -> list[tuple[tuple[int, int], ...]]:
    return sorted(
        trio for trio in combinations(DUADS, 3) if len({x for d in trio for x in d}) == 6
    )


def duad_name(d: tuple[int, int]) -> str:
    return f"{d[0]}{d[1]}"


@dataclass(frozen=True)
class DuadModel:
    structure: IncidenceStructure
    point_map: tuple[int, ...]  # duad-model point -> Pauli doily point
    block_map: tuple[int, ...]  # duad-model block -> Pauli doily block
    duads: tuple[tuple[int, int], ...]
    synthemes: tuple[tuple[tuple[int, int], ...], ...]

    def doily_block(self, duad: Sequence[int]) -> int:
        return self.block_map[self.duads.index(tuple(sorted(duad)))]

    def duad_of_block(self, doily_block: int) -> tuple[int, int]:
        return self.duads[self.block_map.index(doily_block)]


_DUAD_CACHE: list[DuadModel] = []


def doily_duad_model() -> DuadModel:
    """Duad/syntheme model of the doily with a sign-consistent map onto the Pauli labels."""
    if _DUAD_CACHE:
        return _DUAD_CACHE[0]
    synthemes = _synthemes()
    names = tuple("|".join(duad_name(d) for d in syn) for syn in synthemes)
    blocks = tuple(
        tuple(i for i, syn in enumerate(synthemes) if d in syn) for d in DUADS
    )
    signs = tuple(-1 if d in DUAD_NEGATIVE else 1 for d in DUADS)
    model = IncidenceStructure("doily-duads", names, blocks, signs)
    doily = build_structure("doily")
    iso = find_isomorphism(model, doily, signed=True)
    if iso is None:
        raise AssertionError("no sign-consistent isomorphism between duad model and Pauli doily")
    lookup = _block_lookup(doily)
    block_map = tuple(lookup[sum(1 << iso[p] for p in b)] for b in blocks)
    result = DuadModel(model, iso, block_map, DUADS, tuple(synthemes))
    _DUAD_CACHE.append(result)
    return result


@dataclass(frozen=True)
class SquareInDoily:
    rows_set: tuple[int, int, int]
    cols_set: tuple[int, int, int]
    row_blocks: tuple[int, int, int]  # doily block ids
    col_blocks: tuple[int, int, int]
    structure: IncidenceStructure  # 9 points, row-major, rows then columns


def pm_square_decomposition() -> list[SquareInDoily]:
    """The ten 3x3 grids of doily lines, one per split of {1..6} into two triples."""
    model = doily_duad_model()
    doily = build_structure("doily")
    squares = []
    for first in combinations(SIX, 3):
        if 1 not in first:
            continue
        second = tuple(x for x in SIX if x not in first)
        row_duads = list(combinations(first, 2))
        col_duads = list(combinations(second, 2))
        rows = tuple(model.doily_block(d) for d in row_duads)
        cols = tuple(model.doily_block(d) for d in col_duads)
        grid = []
        for r in rows:
            for c in cols:
                common = set(doily.blocks[r]) & set(doily.blocks[c])
                if len(common) != 1:
                    raise AssertionError("row and column lines of a square must meet once")
                grid.append(common.pop())
        local = {p: i for i, p in enumerate(grid)}
        sub_blocks = tuple(
            tuple(sorted((local[p] for p in doily.blocks[b]), key=lambda i: i)) for b in rows + cols
        )
        sub = IncidenceStructure(
            "square-" + "".join(map(str, first)) + "|" + "".join(map(str, second)),
            tuple(doily.point_names[p] for p in grid),
            sub_blocks,
            tuple(doily.block_signs[b] for b in rows + cols),
            tuple(doily.labels[p] for p in grid),
        )
        squares.append(SquareInDoily(first, second, rows, cols, sub))
    return squares


def equivalent_up_to_flips(
    s: IncidenceStructure, target: IncidenceStructure
) -> tuple[tuple[int, ...], int] | None:
    """Find (isomorphism, flip mask) making ``s`` match ``target`` including signs.

    Flipping a point negates every block through it (relabelling an observable
    by its negative).  Returns ``None`` when no such pair exists.
    """
    for iso in iter_isomorphisms(s, target, signed=False):
        for flips in range(1 << s.num_points):
            ok = True
            for bi, b in enumerate(s.blocks):
                sign = s.block_signs[bi] * (-1) ** (flips & s.block_masks[bi]).bit_count()
                image = frozenset(iso[p] for p in b)
                ti = target.block_id(image)
                if target.block_signs[ti] != sign:
                    ok = False
                    break
            if ok:
                return iso, flips
    return None


# -- structure files -----------------------------------------------------------

def structure_to_dict(s: IncidenceStructure) -> dict:
    points = []
    for i, name in enumerate(s.point_names):
        entry = {"id": i, "name": name}
        if s.labels is not None:
            entry["pauli"] = format_pauli(s.labels[i])
        points.append(entry)
    return {
        "name": s.name,
        "points": points,
        "blocks": [list(b) for b in s.blocks],
        "signs": list(s.block_signs),
    }


def dumps_structure(s: IncidenceStructure) -> str:
    d = structure_to_dict(s)
    lines = ["{", f'  "name": {json.dumps(d["name"])},', '  "points": [']
    lines += [
        "    " + json.dumps(p, separators=(", ", ": ")) + ("," if i < len(d["points"]) - 1 else "")
        for i, p in enumerate(d["points"])
    ]
    lines.append("  ],")
    lines.append('  "blocks": [')
    lines += [
        "    " + json.dumps(b) + ("," if i < len(d["blocks"]) - 1 else "")
        for i, b in enumerate(d["blocks"])
    ]
    lines.append("  ],")
    lines.append(f'  "signs": {json.dumps(d["signs"])}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def loads_structure(text: str) -> IncidenceStructure:
    d = json.loads(text)
    try:
        points = sorted(d["points"], key=lambda p: p["id"])
        if [p["id"] for p in points] != list(range(len(points))):
            raise StructureError("point ids must be 0..n-1")
        names = tuple(p.get("name", str(p["id"])) for p in points)
        has_labels = [("pauli" in p) for p in points]
        if any(has_labels) and not all(has_labels):
            raise StructureError("either every point or no point carries a Pauli label")
        labels = tuple(parse_pauli(p["pauli"]) for p in points) if all(has_labels) else None
        blocks = tuple(tuple(int(x) for x in b) for b in d["blocks"])
        signs = tuple(int(x) for x in d["signs"])
        name = d["name"]
    except (KeyError, TypeError) as exc:
        raise StructureError(f"malformed structure file: {exc}") from exc
    regular = len({len(b) for b in blocks}) == 1
    if regular:
        degrees = [0] * len(names)
        for b in blocks:
            for p in b:
                if 0 <= p < len(degrees):
                    degrees[p] += 1
        regular = len(set(degrees)) == 1
    return IncidenceStructure(name, names, blocks, signs, labels, regular=regular)


def save_structure(s: IncidenceStructure, path: str | Path) -> None:
    Path(path).write_text(dumps_structure(s))


def load_structure(path: str | Path) -> IncidenceStructure:
    return loads_structure(Path(path).read_text())


def resolve_structure(name_or_path: str) -> IncidenceStructure:
    if name_or_path in _BUILDERS:
        return build_structure(name_or_path)
    return load_structure(name_or_path)


__all__ = [
    "AutomorphismGroup",
    "DuadModel",
    "IncidenceStructure",
    "SquareInDoily",
    "StructureError",
    "UnknownPointError",
    "automorphisms",
    "build_structure",
    "compatible",
    "contextuality_degree",
    "doily_duad_model",
    "equivalent_up_to_flips",
    "minimal_contradiction_sets",
    "neighborhood_cover",
    "pm_square_decomposition",
    "violated_blocks",
    "witness_bounds",
]
