"""Synthetic Java corpora with planted clones, logging calls and decoys.

Methods are generated as statement lists over named variable slots, so a
clone can rename slots consistently (Type-2) and swap or drop a few
statements (Type-3) before being rendered to Java text. Everything flows
through the real ingestion path, nothing is injected into token bags
directly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from .clones import bag_of, similarity
from .ingest import Corpus, IngestConfig, MethodDefinition, SourceFile, extract_methods

_SYLLABLES = (
    "ba be bi bo bu da de di do du fa fe fi fo ga ge gi go ka ke ki ko ku la le li lo lu ma me mi mo mu "
    "na ne ni no nu pa pe pi po pu ra re ri ro ru sa se si so su ta te ti to tu va ve vi vo za ze zi zo"
).split()

_WORDS = (
    "cannot find open close read write load save start stop connect send receive update remove create "
    "parse resolve register lookup refresh flush commit rollback block node file stream session request "
    "response queue buffer cache token user table region server client channel lease segment snapshot "
    "partition replica volume handler listener"
).split()

# Statement templates; {a} {b} {c} are int slots, {o} an object slot, {s} a string slot,
# {i} a loop slot, {e} an exception slot. {N}, {M}, {f} are baked at creation.
_TEMPLATES = (
    "int {c} = {a} + {N};",
    "{a} = {b} * {N} - {c};",
    "if ({a} > {N}) {{\n    {b} = {a} - {M};\n}}",
    "for (int {i} = 0; {i} < {a}; {i}++) {{\n    {b} += {i} * {N};\n}}",
    "while ({a} < {N}) {{\n    {a} = {a} * 2 + {M};\n}}",
    "{o}.{f}({a}, {b});",
    "{b} = {o}.{f}({a}) % {N};",
    "try {{\n    {o}.{f}({c});\n}} catch (IllegalStateException {e}) {{\n    {c} = -{N};\n}}",
    "String {s} = {o}.{f}();",
    "if ({s} == null || {s}.isEmpty()) {{\n    return {N};\n}}",
    "switch ({c}) {{\n    case {N}:\n        {a}++;\n        break;\n    default:\n        {b}--;\n}}",
    "{c} = Math.max({a}, {b}) + {N};",
)

SLOTS = ("a", "b", "c", "o", "s", "i", "e")


@dataclass
class LogCall:
    position: int  # inserted before statement `position`
    level: str
    words: list[str]
    var_slot: str = "a"
    receiver: str = "log"

    def render(self, names: dict[str, str]) -> str:
        text = " ".join(self.words)
        text = text[:1].upper() + text[1:]
        return f'{self.receiver}.{self.level}("{text} " + {names[self.var_slot]});'


@dataclass
class GenMethod:
    name: str
    names: dict[str, str]
    statements: list[str]
    logs: list[LogCall] = field(default_factory=list)
    role: str = ""
    family: int = -1

    def render(self, indent: str = "    ") -> str:
        n = self.names
        lines = [f"public int {self.name}(int {n['a']}, int {n['b']}, Service {n['o']}) {{"]
        body: list[str] = [f"int {n['c']} = {n['a']} - {n['b']};"]
        by_pos: dict[int, list[LogCall]] = {}
        for call in self.logs:
            by_pos.setdefault(call.position, []).append(call)
        for k, stmt in enumerate(self.statements):
            body.extend(c.render(n) for c in by_pos.get(k, ()))
            body.append(stmt.format(**n))
        body.extend(c.render(n) for c in by_pos.get(len(self.statements), ()))
        body.append(f"return {n['c']};")
        for stmt in body:
            lines.extend(indent + line for line in stmt.split("\n"))
        lines.append("}")
        return "\n".join(lines)


class JavaSynth:
    """Seeded generator of Java methods; identifiers are unique across one generator."""

    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)
        self._used: set[str] = set()

    def identifier(self, syllables: int = 3) -> str:
        while True:
            word = "".join(self.rng.choice(_SYLLABLES) for _ in range(syllables))
            if self.rng.random() < 0.5:
                word += self.rng.choice(_SYLLABLES).capitalize() + self.rng.choice(_SYLLABLES)
            if word not in self._used:
                self._used.add(word)
                return word

    def statement(self) -> str:
        # keeps slot placeholders and escaped braces for the final render
        stmt = self.rng.choice(_TEMPLATES)
        for key, value in (("N", self.rng.randint(2, 999)), ("M", self.rng.randint(2, 999)), ("f", self.identifier(2))):
            stmt = stmt.replace("{" + key + "}", str(value))
        return stmt

    def method(self, n_statements: tuple[int, int] = (6, 9), role: str = "", family: int = -1) -> GenMethod:
        names = {slot: self.identifier() for slot in SLOTS}
        stmts = [self.statement() for _ in range(self.rng.randint(*n_statements))]
        return GenMethod(self.identifier(), names, stmts, role=role, family=family)

    def message(self, n_words: int = 4) -> list[str]:
        return [self.rng.choice(_WORDS) for _ in range(n_words)]

    def add_log(self, m: GenMethod, level: str, words: list[str] | None = None, receiver: str = "log") -> GenMethod:
        pos = self.rng.randint(0, len(m.statements))
        call = LogCall(pos, level, words or self.message(), self.rng.choice(("a", "b", "c")), receiver)
        return replace(m, logs=m.logs + [call])

    def clone(self, m: GenMethod, renames: int = 1, edit_fraction: float = 0.2, role: str = "clone") -> GenMethod:
        """Type-2/3 variant: ``renames`` slots renamed, at most ``edit_fraction`` of statements edited."""
        names = dict(m.names)
        for slot in self.rng.sample(("a", "b", "c", "o", "s"), renames):
            names[slot] = self.identifier()
        stmts = list(m.statements)
        n_edits = int(edit_fraction * len(stmts))
        for _ in range(n_edits):
            k = self.rng.randrange(len(stmts))
            if self.rng.random() < 0.5:
                stmts[k] = self.statement()
            else:
                # swap with neighbour: same tokens, different order
                j = min(k + 1, len(stmts) - 1)
                stmts[k], stmts[j] = stmts[j], stmts[k]
        logs = [replace(c, position=min(c.position, len(stmts))) for c in m.logs]
        return GenMethod(self.identifier(), names, stmts, logs, role=role, family=m.family)


def render_class(class_name: str, methods: Iterable[GenMethod]) -> str:
    body = "\n\n".join(_indent(m.render()) for m in methods)
    return f"package synth;\n\npublic class {class_name} {{\n\n{body}\n}}\n"


def _indent(text: str) -> str:
    return "\n".join("    " + line if line else line for line in text.split("\n"))


def to_corpus(groups: dict[str, list[GenMethod]], config: IngestConfig | None = None) -> tuple[Corpus, dict[str, GenMethod]]:
    """Ingest generated classes in memory; returns the corpus and method_id -> GenMethod."""
    files, methods = [], []
    for class_name in sorted(groups):
        text = render_class(class_name, groups[class_name])
        sf = SourceFile.from_text(f"synth/{class_name}.java", f"synth/{class_name}.java", text)
        files.append(sf)
        methods.extend(extract_methods(sf, config))
    by_name = {g.name: g for gs in groups.values() for g in gs}
    corpus = Corpus(files=files, methods=methods)
    return corpus, {m.method_id: by_name[m.name] for m in methods}


def write_tree(groups: dict[str, list[GenMethod]], root: str | Path) -> Path:
    root = Path(root)
    (root / "synth").mkdir(parents=True, exist_ok=True)
    for class_name, methods in groups.items():
        (root / "synth" / f"{class_name}.java").write_text(render_class(class_name, methods), encoding="utf-8")
    return root


def _chunks(items: list[GenMethod], size: int, prefix: str) -> dict[str, list[GenMethod]]:
    return {f"{prefix}{k // size:03d}": items[k : k + size] for k in range(0, len(items), size)}


def _bag(m: GenMethod, mode: str = "log_aware"):
    (md,) = extract_methods(SourceFile.from_text("tmp.java", "tmp.java", render_class("Tmp", [m])))
    return bag_of(md, mode)


def _max_similarity(m: GenMethod, others: list) -> float:
    bag = _bag(m)
    return max((similarity(bag, o) for o in others), default=0.0)


def clone_within(synth: JavaSynth, m: GenMethod, theta: float, margin: float = 0.02, **kw) -> GenMethod:
    """A clone of ``m`` whose log-aware similarity to ``m`` is at least theta + margin."""
    base = _bag(m)
    for _ in range(200):
        c = synth.clone(m, **kw)
        if similarity(base, _bag(c)) >= theta + margin:
            return c
    raise RuntimeError(f"could not plant a clone of {m.name} above {theta}")


def fresh_unlike(synth: JavaSynth, others: list, theta: float, margin: float = 0.1, **kw) -> GenMethod:
    """A fresh method whose log-aware similarity to every bag in ``others`` stays below theta - margin."""
    for _ in range(200):
        m = synth.method(**kw)
        if _max_similarity(m, others) < theta - margin:
            return m
    raise RuntimeError("could not generate a method unlike the given ones")


# ---------------------------------------------------------------------------
# ready-made corpora


LEVEL_CHOICES = ("debug", "info", "warn", "error")


def random_corpus(n_methods: int, seed: int = 0, clone_share: float = 0.4, logged_share: float = 0.5) -> Corpus:
    """Mixed corpus: fresh methods plus clones of earlier ones, about half of them logged."""
    synth = JavaSynth(seed)
    rng = synth.rng
    methods: list[GenMethod] = []
    while len(methods) < n_methods:
        if methods and rng.random() < clone_share:
            src = rng.choice(methods)
            m = synth.clone(src, renames=rng.randint(0, 2), edit_fraction=rng.choice((0.0, 0.15, 0.3)))
            if rng.random() < 0.2:
                m = replace(m, logs=[])
            elif not m.logs and rng.random() < 0.2:
                m = synth.add_log(m, rng.choice(LEVEL_CHOICES))
        else:
            m = synth.method(role="fresh")
            if rng.random() < logged_share:
                m = synth.add_log(m, rng.choice(LEVEL_CHOICES))
        methods.append(m)
    corpus, _ = to_corpus(_chunks(methods, 25, "Gen"))
    return corpus


@dataclass
class PlantedLocation:
    corpus: Corpus
    originals: list[str]
    clones: list[str]
    decoys: list[str]
    roles: dict[str, GenMethod]


def near_miss_decoy(synth: JavaSynth, m: GenMethod, original_bags: list, theta: float, attempts: int = 150) -> GenMethod | None:
    """An unlogged variant of logged ``m`` that only a log-unaware detector calls a clone.

    Its log-aware similarity to every original stays below theta while its
    full-bag similarity to ``m`` reaches theta, carried by ``m``'s log text
    re-emitted through a receiver that is not a logger.
    """
    full = _bag(m, "log_unaware")
    for _ in range(attempts):
        d = synth.clone(m, renames=synth.rng.choice((2, 3)), edit_fraction=synth.rng.choice((0.3, 0.4, 0.5)), role="decoy")
        d = replace(d, logs=[replace(c, receiver="events") for c in d.logs[:1]])
        aware = _bag(d)
        if max(similarity(aware, o) for o in original_bags) < theta - 0.005 and similarity(full, _bag(d, "log_unaware")) >= theta:
            return d
    return None


def planted_location_corpus(n: int = 50, theta: float = 0.7, seed: int = 7) -> PlantedLocation:
    """``n`` logged originals, ``n`` logged Type-2/3 clones of them, ``n`` unlogged decoys.

    Each decoy carries the log text of one original through a non-logger
    receiver. Where possible it is a near miss of that original (see
    ``near_miss_decoy``); otherwise fresh code unlike every original.
    """
    synth = JavaSynth(seed)
    originals, clones, decoys = [], [], []
    original_bags = []
    for f in range(n):
        m = synth.method(role="original", family=f)
        m = synth.add_log(m, synth.rng.choice(LEVEL_CHOICES))
        originals.append(m)
        original_bags.append(_bag(m))
    for m in originals:
        clones.append(clone_within(synth, m, theta, renames=1, edit_fraction=0.2))
    for m in originals:
        d = near_miss_decoy(synth, m, original_bags, theta)
        if d is None:
            d = fresh_unlike(synth, original_bags, theta, role="decoy", family=m.family)
            call = m.logs[0]
            d = replace(d, logs=[replace(call, position=min(call.position, len(d.statements)), receiver="events")])
        decoys.append(d)
    groups = {}
    groups.update(_chunks(originals, 25, "Original"))
    groups.update(_chunks(clones, 25, "Clone"))
    groups.update(_chunks(decoys, 25, "Decoy"))
    corpus, roles = to_corpus(groups)

    def ids(kind: str) -> list[str]:
        return [mid for mid, g in roles.items() if g.role == kind]

    return PlantedLocation(corpus, ids("original"), ids("clone"), ids("decoy"), roles)


@dataclass
class PlantedDescription:
    corpus: Corpus
    train: list[str]
    test: list[str]
    references: dict[str, list[str]]


def planted_description_corpus(
    families: int = 10, fillers: int = 9, theta: float = 0.7, seed: int = 11
) -> PlantedDescription:
    """Clone descriptions that differ from the reference in one token the model knows better.

    Family f: the train original logs ``[w1, w2, rare, w3]``, its test clone
    logs ``[w1, w2, common, w3]``, and ``fillers`` unrelated train methods log
    ``[w1, w2, common, w3]``; so the model sees ``common`` ``fillers`` times
    as often as ``rare`` after ``w1 w2``.
    """
    synth = JavaSynth(seed)
    rng = synth.rng
    vocab = [synth.identifier(2).lower() for _ in range(families * 5)]
    originals, clones, filler_methods = [], [], []
    bags = []
    for f in range(families):
        w1, w2, w3, rare, common = vocab[5 * f : 5 * f + 5]
        level = rng.choice(LEVEL_CHOICES)
        m = synth.method(role="original", family=f)
        m = replace(m, logs=[LogCall(2, level, [w1, w2, rare, w3])])
        originals.append(m)
        bags.append(_bag(m))
        c = clone_within(synth, m, theta, renames=1, edit_fraction=0.2)
        c = replace(c, role="clone", logs=[replace(c.logs[0], words=[w1, w2, common, w3])])
        clones.append(c)
        bags.append(_bag(c))
    for f in range(families):
        w1, w2, w3, rare, common = vocab[5 * f : 5 * f + 5]
        for _ in range(fillers):
            d = fresh_unlike(synth, bags, theta, role="filler", family=f)
            filler_methods.append(replace(d, logs=[LogCall(1, "info", [w1, w2, common, w3])]))
    groups = {}
    groups.update(_chunks(originals, 25, "Original"))
    groups.update(_chunks(clones, 25, "Clone"))
    groups.update(_chunks(filler_methods, 25, "Filler"))
    corpus, roles = to_corpus(groups)
    train = [mid for mid, g in roles.items() if g.role in ("original", "filler")]
    test = [mid for mid, g in roles.items() if g.role == "clone"]
    refs = {mid: corpus[mid].lps_list[0].lsd_tokens for mid in test}
    return PlantedDescription(corpus, train, test, refs)


def planted_level_corpus(families: int = 40, clones_per_family: int = 2, theta: float = 0.7, seed: int = 5):
    """Logged and unlogged clone families; every clone keeps its original's level and log presence."""
    synth = JavaSynth(seed)
    rng = synth.rng
    members: list[GenMethod] = []
    bags = []
    for f in range(families):
        m = fresh_unlike(synth, bags, theta, margin=0.05, role="original", family=f)
        logged = f % 4 != 3
        if logged:
            m = synth.add_log(m, LEVEL_CHOICES[f % len(LEVEL_CHOICES)])
        members.append(m)
        bags.append(_bag(m))
        for _ in range(clones_per_family):
            c = clone_within(synth, m, theta, renames=1, edit_fraction=0.2)
            members.append(c)
            bags.append(_bag(c))
    rng.shuffle(members)
    corpus, roles = to_corpus(_chunks(members, 30, "Family"))
    return corpus, roles


def throughput_corpus(n_methods: int = 1000, seed: int = 3) -> dict[str, list[GenMethod]]:
    """Class groups for an ``n_methods`` corpus, ready for ``write_tree``."""
    synth = JavaSynth(seed)
    rng = synth.rng
    methods: list[GenMethod] = []
    while len(methods) < n_methods:
        if methods and rng.random() < 0.4:
            methods.append(synth.clone(rng.choice(methods), renames=1, edit_fraction=0.2))
        else:
            m = synth.method(role="fresh")
            if rng.random() < 0.5:
                m = synth.add_log(m, rng.choice(LEVEL_CHOICES))
            methods.append(m)
    return _chunks(methods, 50, "Bulk")


def method_by_name(corpus: Corpus, name: str) -> MethodDefinition:
    return next(m for m in corpus.methods if m.name == name)
