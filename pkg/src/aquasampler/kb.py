"""Typed knowledge base with subsumption reasoning.

The class hierarchy is rooted in the upper-level split of entity into
continuant and occurrent; lower levels (mid, domain, application) are added
cumulatively on top. Reasoning scope is deliberately small: reflexive
transitive subsumption plus domain/range checking of assertions. Knowledge
bases are immutable snapshots; every mutating operation returns a new one.

Persisted form is a line-based text format, one statement per line:

    C <iri> <parent-iri|-> <level>       class (one line per parent edge)
    P <iri> <Object|Data> <domain> <range>
    I <iri> <class>[,<class>...]
    A <subj> <pred> <obj-iri | "lexical"^^type>
    T <template-id> <json payload>
    # comment

"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from datetime import date
from decimal import Decimal, InvalidOperation
from enum import Enum
from io import StringIO
from pathlib import Path
from typing import IO, Iterable, Mapping, Optional, Union


class KbError(Exception):
    """Base class for knowledge-base violations."""


class DuplicateClass(KbError):
    pass


class UnknownClass(KbError):
    pass


class UnknownParent(KbError):
    pass


class CycleDetected(KbError):
    pass


class LevelViolation(KbError):
    pass


class DuplicateIndividual(KbError):
    pass


class UnknownIndividual(KbError):
    pass


class UnknownPredicate(KbError):
    pass


class DuplicateProperty(KbError):
    pass


class DomainViolation(KbError):
    pass


class RangeViolation(KbError):
    pass


class UnknownTemplate(KbError):
    pass


class DuplicateTemplate(KbError):
    pass


class MissingSlot(KbError):
    pass


class ParseError(KbError):
    def __init__(self, line_number: int, message: str) -> None:
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class OntologyLevel(str, Enum):
    TOP = "Top"
    MID = "Mid"
    DOMAIN = "Domain"
    APPLICATION = "Application"

    @property
    def rank(self) -> int:
        return _LEVEL_RANK[self]


_LEVEL_RANK = {
    OntologyLevel.TOP: 0,
    OntologyLevel.MID: 1,
    OntologyLevel.DOMAIN: 2,
    OntologyLevel.APPLICATION: 3,
}


class PropertyKind(str, Enum):
    OBJECT = "Object"
    DATA = "Data"


LITERAL_TYPES = ("string", "integer", "decimal", "date", "boolean")


@dataclass(frozen=True)
class Literal:
    """Typed literal value kept in lexical form."""

    lexical: str
    datatype: str = "string"

    def __post_init__(self) -> None:
        if self.datatype not in LITERAL_TYPES:
            raise KbError(f"unknown literal datatype {self.datatype!r}")
        validator = _LITERAL_VALIDATORS[self.datatype]
        if not validator(self.lexical):
            raise KbError(f"lexical form {self.lexical!r} is not a valid {self.datatype}")

    def __str__(self) -> str:
        escaped = self.lexical.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"^^{self.datatype}'


def _is_int(text: str) -> bool:
    try:
        int(text)
        return True
    except ValueError:
        return False


def _is_decimal(text: str) -> bool:
    try:
        Decimal(text)
        return True
    except InvalidOperation:
        return False


def _is_date(text: str) -> bool:
    try:
        date.fromisoformat(text)
        return True
    except ValueError:
        return False


_LITERAL_VALIDATORS = {
    "string": lambda s: True,
    "integer": _is_int,
    "decimal": _is_decimal,
    "date": _is_date,
    "boolean": lambda s: s in ("true", "false"),
}

Term = Union[str, Literal]


@dataclass(frozen=True)
class ClassDef:
    class_iri: str
    parents: frozenset[str]
    level: OntologyLevel


@dataclass(frozen=True)
class PropertyDef:
    prop_iri: str
    kind: PropertyKind
    domain_class: str
    range_ref: str


@dataclass(frozen=True)
class Individual:
    ind_iri: str
    asserted_classes: frozenset[str]


@dataclass(frozen=True)
class Assertion:
    subject: str
    predicate: str
    obj: Term

    def sort_key(self) -> tuple[str, str, str]:
        return (self.subject, self.predicate, _term_text(self.obj))


@dataclass(frozen=True)
class Template:
    """Assertion patterns with ``?slot`` placeholders over declared slots."""

    template_id: str
    slots: tuple[str, ...]
    patterns: tuple[tuple[Term, Term, Term], ...]

    def __post_init__(self) -> None:
        declared = set(self.slots)
        for pattern in self.patterns:
            for term in pattern:
                if isinstance(term, str) and term.startswith("?") and term[1:] not in declared:
                    raise KbError(
                        f"template {self.template_id}: placeholder {term} not in slot list"
                    )


@dataclass(frozen=True)
class Finding:
    kind: str
    detail: str


@dataclass(frozen=True)
class ConsistencyReport:
    findings: tuple[Finding, ...]

    @property
    def is_consistent(self) -> bool:
        return not self.findings


_IRI_RE = re.compile(r"^[^\s\"]+$")


def _check_iri(iri: str, what: str = "IRI") -> str:
    if not iri or not _IRI_RE.match(iri) or iri.startswith("?"):
        raise KbError(f"bad {what}: {iri!r}")
    return iri


def _term_text(term: Term) -> str:
    return str(term) if isinstance(term, Literal) else term


@dataclass(frozen=True)
class KnowledgeBase:
    """Immutable snapshot of classes, properties, individuals, assertions, templates."""

    classes: Mapping[str, ClassDef] = field(default_factory=dict)
    properties: Mapping[str, PropertyDef] = field(default_factory=dict)
    individuals: Mapping[str, Individual] = field(default_factory=dict)
    assertions: frozenset[Assertion] = frozenset()
    templates: Mapping[str, Template] = field(default_factory=dict)
    # per-snapshot ancestor cache; safe because snapshots never mutate
    _closures: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    # -- class hierarchy ----------------------------------------------------

    def add_class(
        self,
        class_iri: str,
        parents: Iterable[str],
        level: OntologyLevel,
    ) -> "KnowledgeBase":
        _check_iri(class_iri, "class IRI")
        parent_set = frozenset(parents)
        if class_iri in self.classes:
            raise DuplicateClass(class_iri)
        if class_iri in parent_set:
            raise CycleDetected(f"{class_iri} cannot be its own parent")
        for parent in parent_set:
            if parent not in self.classes:
                raise UnknownParent(parent)
            if self.classes[parent].level.rank > level.rank:
                raise LevelViolation(
                    f"{class_iri} ({level.value}) cannot sit under "
                    f"{parent} ({self.classes[parent].level.value})"
                )
        updated = dict(self.classes)
        updated[class_iri] = ClassDef(class_iri, parent_set, level)
        return replace(self, classes=updated)

    def add_parent(self, class_iri: str, parent_iri: str) -> "KnowledgeBase":
        """Add one parent edge to an existing class, rejecting cycles."""
        if class_iri not in self.classes:
            raise UnknownClass(class_iri)
        if parent_iri not in self.classes:
            raise UnknownParent(parent_iri)
        current = self.classes[class_iri]
        if parent_iri in current.parents:
            return self
        if class_iri == parent_iri or class_iri in self.subclass_closure(parent_iri):
            raise CycleDetected(f"edge {class_iri} -> {parent_iri} would close a cycle")
        if self.classes[parent_iri].level.rank > current.level.rank:
            raise LevelViolation(
                f"{class_iri} ({current.level.value}) cannot sit under "
                f"{parent_iri} ({self.classes[parent_iri].level.value})"
            )
        updated = dict(self.classes)
        updated[class_iri] = replace(current, parents=current.parents | {parent_iri})
        return replace(self, classes=updated)

    def subclass_closure(self, class_iri: str) -> frozenset[str]:
        """Reflexive transitive ancestor set of a class."""
        if class_iri not in self.classes:
            raise UnknownClass(class_iri)
        cached = self._closures.get(class_iri)
        if cached is not None:
            return cached
        seen = {class_iri}
        stack = [class_iri]
        while stack:
            for parent in self.classes[stack.pop()].parents:
                if parent not in seen:
                    seen.add(parent)
                    stack.append(parent)
        result = frozenset(seen)
        self._closures[class_iri] = result
        return result

    # -- individuals and assertions -----------------------------------------

    def add_property(
        self,
        prop_iri: str,
        kind: PropertyKind,
        domain_class: str,
        range_ref: str,
    ) -> "KnowledgeBase":
        _check_iri(prop_iri, "property IRI")
        if prop_iri in self.properties:
            raise DuplicateProperty(prop_iri)
        if domain_class not in self.classes:
            raise UnknownClass(f"property {prop_iri}: unknown domain {domain_class}")
        if kind is PropertyKind.OBJECT:
            if range_ref not in self.classes:
                raise UnknownClass(f"property {prop_iri}: unknown range class {range_ref}")
        elif range_ref not in LITERAL_TYPES:
            raise KbError(f"property {prop_iri}: unknown datatype {range_ref!r}")
        updated = dict(self.properties)
        updated[prop_iri] = PropertyDef(prop_iri, kind, domain_class, range_ref)
        return replace(self, properties=updated)

    def assert_individual(self, ind_iri: str, classes: Iterable[str]) -> "KnowledgeBase":
        _check_iri(ind_iri, "individual IRI")
        class_set = frozenset(classes)
        if not class_set:
            raise KbError(f"individual {ind_iri} needs at least one class")
        if ind_iri in self.individuals:
            raise DuplicateIndividual(ind_iri)
        for class_iri in class_set:
            if class_iri not in self.classes:
                raise UnknownClass(class_iri)
        updated = dict(self.individuals)
        updated[ind_iri] = Individual(ind_iri, class_set)
        return replace(self, individuals=updated)

    def inferred_classes(self, ind_iri: str) -> frozenset[str]:
        individual = self.individuals.get(ind_iri)
        if individual is None:
            raise UnknownIndividual(ind_iri)
        out: set[str] = set()
        for class_iri in individual.asserted_classes:
            out |= self.subclass_closure(class_iri)
        return frozenset(out)

    def assert_relation(self, subject: str, predicate: str, obj: Term) -> "KnowledgeBase":
        prop = self.properties.get(predicate)
        if prop is None:
            raise UnknownPredicate(predicate)
        if subject not in self.individuals:
            raise UnknownIndividual(subject)
        if prop.domain_class not in self.inferred_classes(subject):
            raise DomainViolation(
                f"{subject} is not a {prop.domain_class}, required by {predicate}"
            )
        if prop.kind is PropertyKind.OBJECT:
            if isinstance(obj, Literal):
                raise RangeViolation(f"{predicate} expects an individual, got literal {obj}")
            if obj not in self.individuals:
                raise UnknownIndividual(obj)
            if prop.range_ref not in self.inferred_classes(obj):
                raise RangeViolation(f"{obj} is not a {prop.range_ref}, required by {predicate}")
        else:
            if not isinstance(obj, Literal):
                raise RangeViolation(f"{predicate} expects a {prop.range_ref} literal, got {obj}")
            if obj.datatype != prop.range_ref:
                raise RangeViolation(
                    f"{predicate} expects {prop.range_ref}, got {obj.datatype} literal"
                )
        assertion = Assertion(subject, predicate, obj)
        return replace(self, assertions=self.assertions | {assertion})

    # -- reasoning and query -------------------------------------------------

    def instances_of(self, class_iri: str, inferred: bool = False) -> frozenset[str]:
        if class_iri not in self.classes:
            raise UnknownClass(class_iri)
        if not inferred:
            return frozenset(
                iri
                for iri, ind in self.individuals.items()
                if class_iri in ind.asserted_classes
            )
        return frozenset(
            iri
            for iri, ind in self.individuals.items()
            if any(class_iri in self.subclass_closure(c) for c in ind.asserted_classes)
        )

    def query(self, pattern: tuple[Term, Term, Term]) -> list[dict[str, Term]]:
        """Match one triple pattern; ``?name`` terms are variables.

        Returns one binding map per matching assertion, ordered
        lexicographically by (subject, predicate, object).
        """
        results: list[tuple[tuple[str, str, str], dict[str, Term]]] = []
        for assertion in self.assertions:
            bindings: dict[str, Term] = {}
            if _match_term(pattern[0], assertion.subject, bindings) and _match_term(
                pattern[1], assertion.predicate, bindings
            ) and _match_term(pattern[2], assertion.obj, bindings):
                results.append((assertion.sort_key(), bindings))
        results.sort(key=lambda item: item[0])
        return [bindings for _, bindings in results]

    # -- templates ------------------------------------------------------------

    def add_template(self, template: Template) -> "KnowledgeBase":
        if template.template_id in self.templates:
            raise DuplicateTemplate(template.template_id)
        updated = dict(self.templates)
        updated[template.template_id] = template
        return replace(self, templates=updated)

    def instantiate_template(
        self, template_id: str, bindings: Mapping[str, Term]
    ) -> "KnowledgeBase":
        """Ground every pattern and insert; all-or-nothing on failure."""
        template = self.templates.get(template_id)
        if template is None:
            raise UnknownTemplate(template_id)
        for slot in template.slots:
            if slot not in bindings:
                raise MissingSlot(f"template {template_id}: slot {slot!r} unbound")
        kb = self
        for pattern in template.patterns:
            subject, predicate, obj = (_ground(term, bindings) for term in pattern)
            if isinstance(subject, Literal) or isinstance(predicate, Literal):
                raise RangeViolation(
                    f"template {template_id}: subject/predicate slots must bind to IRIs"
                )
            kb = kb.assert_relation(subject, predicate, obj)
        return kb

    # -- consistency -----------------------------------------------------------

    def check_consistency(self) -> ConsistencyReport:
        """Full independent scan: cycles, dangling IRIs, domain/range, classless."""
        findings: list[Finding] = []
        findings.extend(self._find_cycles())
        for class_iri, cdef in sorted(self.classes.items()):
            for parent in sorted(cdef.parents):
                if parent not in self.classes:
                    findings.append(Finding("dangling", f"class {class_iri} parent {parent}"))
        for prop in sorted(self.properties.values(), key=lambda p: p.prop_iri):
            if prop.domain_class not in self.classes:
                findings.append(
                    Finding("dangling", f"property {prop.prop_iri} domain {prop.domain_class}")
                )
            if prop.kind is PropertyKind.OBJECT and prop.range_ref not in self.classes:
                findings.append(
                    Finding("dangling", f"property {prop.prop_iri} range {prop.range_ref}")
                )
        for ind in sorted(self.individuals.values(), key=lambda i: i.ind_iri):
            if not ind.asserted_classes:
                findings.append(Finding("classless-individual", ind.ind_iri))
            for class_iri in sorted(ind.asserted_classes):
                if class_iri not in self.classes:
                    findings.append(Finding("dangling", f"individual {ind.ind_iri} class {class_iri}"))
        for assertion in sorted(self.assertions, key=Assertion.sort_key):
            findings.extend(self._check_assertion(assertion))
        return ConsistencyReport(tuple(findings))

    def _find_cycles(self) -> list[Finding]:
        findings = []
        state: dict[str, int] = {}  # 0 visiting, 1 done

        def visit(node: str, trail: tuple[str, ...]) -> None:
            mark = state.get(node)
            if mark == 1:
                return
            if mark == 0:
                cycle = trail[trail.index(node):] + (node,)
                findings.append(Finding("cycle", " -> ".join(cycle)))
                return
            state[node] = 0
            for parent in sorted(self.classes[node].parents):
                if parent in self.classes:
                    visit(parent, trail + (node,))
            state[node] = 1

        for class_iri in sorted(self.classes):
            visit(class_iri, ())
        return findings

    def _check_assertion(self, assertion: Assertion) -> list[Finding]:
        where = f"({assertion.subject}, {assertion.predicate}, {_term_text(assertion.obj)})"
        prop = self.properties.get(assertion.predicate)
        if prop is None:
            return [Finding("dangling", f"assertion {where}: unknown predicate")]
        findings = []
        subject = self.individuals.get(assertion.subject)
        if subject is None:
            findings.append(Finding("dangling", f"assertion {where}: unknown subject"))
        else:
            inferred: set[str] = set()
            for class_iri in subject.asserted_classes:
                if class_iri in self.classes:
                    inferred |= self.subclass_closure(class_iri)
            if prop.domain_class not in inferred:
                findings.append(Finding("domain-violation", where))
        if prop.kind is PropertyKind.OBJECT:
            if isinstance(assertion.obj, Literal):
                findings.append(Finding("range-violation", where))
            else:
                target = self.individuals.get(assertion.obj)
                if target is None:
                    findings.append(Finding("dangling", f"assertion {where}: unknown object"))
                else:
                    inferred = set()
                    for class_iri in target.asserted_classes:
                        if class_iri in self.classes:
                            inferred |= self.subclass_closure(class_iri)
                    if prop.range_ref not in inferred:
                        findings.append(Finding("range-violation", where))
        else:
            if not isinstance(assertion.obj, Literal) or assertion.obj.datatype != prop.range_ref:
                findings.append(Finding("range-violation", where))
        return findings


def _match_term(pattern: Term, value: Term, bindings: dict[str, Term]) -> bool:
    if isinstance(pattern, str) and pattern.startswith("?"):
        name = pattern[1:]
        if name in bindings:
            return bindings[name] == value
        bindings[name] = value
        return True
    return pattern == value


def _ground(term: Term, bindings: Mapping[str, Term]) -> Term:
    if isinstance(term, str) and term.startswith("?"):
        return bindings[term[1:]]
    return term


# ---------------------------------------------------------------------------
# Upper-level skeleton
# ---------------------------------------------------------------------------

ENTITY = "bfo:Entity"
CONTINUANT = "bfo:Continuant"
OCCURRENT = "bfo:Occurrent"
INDEPENDENT_CONTINUANT = "bfo:IndependentContinuant"
SPECIFICALLY_DEPENDENT_CONTINUANT = "bfo:SpecificallyDependentContinuant"
GENERICALLY_DEPENDENT_CONTINUANT = "bfo:GenericallyDependentContinuant"
PROCESS = "bfo:Process"
TEMPORAL_REGION = "bfo:TemporalRegion"
SPATIOTEMPORAL_REGION = "bfo:SpatiotemporalRegion"


def load_bfo_skeleton() -> KnowledgeBase:
    """Upper-level class tree: entity splits into continuant and occurrent."""
    kb = KnowledgeBase().add_class(ENTITY, (), OntologyLevel.TOP)
    for class_iri, parent in (
        (CONTINUANT, ENTITY),
        (OCCURRENT, ENTITY),
        (INDEPENDENT_CONTINUANT, CONTINUANT),
        (SPECIFICALLY_DEPENDENT_CONTINUANT, CONTINUANT),
        (GENERICALLY_DEPENDENT_CONTINUANT, CONTINUANT),
        (PROCESS, OCCURRENT),
        (TEMPORAL_REGION, OCCURRENT),
        (SPATIOTEMPORAL_REGION, OCCURRENT),
    ):
        kb = kb.add_class(class_iri, (parent,), OntologyLevel.TOP)
    return kb


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

_LITERAL_RE = re.compile(r'^"((?:[^"\\]|\\.)*)"\^\^(\w+)$')


def parse_term(text: str) -> Term:
    match = _LITERAL_RE.match(text)
    if match:
        lexical = match.group(1).replace('\\"', '"').replace("\\\\", "\\")
        return Literal(lexical, match.group(2))
    return text


def save_kb(kb: KnowledgeBase, sink: Union[str, Path, IO[str]]) -> None:
    """Write the line-based text form; ordering is canonical (sorted)."""
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8") as handle:
            save_kb(kb, handle)
        return
    sink.write("# knowledge base snapshot\n")
    for class_iri in sorted(kb.classes):
        cdef = kb.classes[class_iri]
        parents = sorted(cdef.parents) or ["-"]
        for parent in parents:
            sink.write(f"C {class_iri} {parent} {cdef.level.value}\n")
    for prop_iri in sorted(kb.properties):
        prop = kb.properties[prop_iri]
        sink.write(f"P {prop_iri} {prop.kind.value} {prop.domain_class} {prop.range_ref}\n")
    for ind_iri in sorted(kb.individuals):
        classes = ",".join(sorted(kb.individuals[ind_iri].asserted_classes))
        sink.write(f"I {ind_iri} {classes}\n")
    for assertion in sorted(kb.assertions, key=Assertion.sort_key):
        sink.write(f"A {assertion.subject} {assertion.predicate} {_term_text(assertion.obj)}\n")
    for template_id in sorted(kb.templates):
        template = kb.templates[template_id]
        payload = {
            "slots": list(template.slots),
            "patterns": [[_template_term_json(t) for t in p] for p in template.patterns],
        }
        sink.write(f"T {template_id} {json.dumps(payload, ensure_ascii=False)}\n")


def dumps_kb(kb: KnowledgeBase) -> str:
    buffer = StringIO()
    save_kb(kb, buffer)
    return buffer.getvalue()


def _template_term_json(term: Term) -> object:
    if isinstance(term, Literal):
        return {"lit": term.lexical, "type": term.datatype}
    return term


def _template_term_from_json(raw: object) -> Term:
    if isinstance(raw, dict):
        return Literal(str(raw["lit"]), str(raw.get("type", "string")))
    return str(raw)


def load_kb(source: Union[str, Path, IO[str]]) -> KnowledgeBase:
    """Parse the text form back into a knowledge base.

    Class lines may appear in any order; insertion is deferred until all
    parents are known. Raises :class:`ParseError` with the offending line.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            return load_kb(handle)

    class_lines: list[tuple[int, str, Optional[str], OntologyLevel]] = []
    prop_lines: list[tuple[int, str, PropertyKind, str, str]] = []
    ind_lines: list[tuple[int, str, list[str]]] = []
    assertion_lines: list[tuple[int, str, str, Term]] = []
    template_lines: list[tuple[int, str, object]] = []

    for line_number, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, _, rest = line.partition(" ")
        try:
            if kind == "C":
                parts = rest.split()
                if len(parts) != 3:
                    raise KbError("expected: C <iri> <parent|-> <level>")
                parent = None if parts[1] == "-" else parts[1]
                class_lines.append((line_number, parts[0], parent, OntologyLevel(parts[2])))
            elif kind == "P":
                parts = rest.split()
                if len(parts) != 4:
                    raise KbError("expected: P <iri> <Object|Data> <domain> <range>")
                prop_lines.append(
                    (line_number, parts[0], PropertyKind(parts[1]), parts[2], parts[3])
                )
            elif kind == "I":
                parts = rest.split()
                if len(parts) != 2:
                    raise KbError("expected: I <iri> <class>[,<class>...]")
                ind_lines.append((line_number, parts[0], parts[1].split(",")))
            elif kind == "A":
                parts = rest.split(None, 2)
                if len(parts) != 3:
                    raise KbError("expected: A <subj> <pred> <obj>")
                assertion_lines.append((line_number, parts[0], parts[1], parse_term(parts[2])))
            elif kind == "T":
                template_id, _, payload = rest.partition(" ")
                if not template_id or not payload:
                    raise KbError("expected: T <id> <json>")
                template_lines.append((line_number, template_id, json.loads(payload)))
            else:
                raise KbError(f"unknown statement kind {kind!r}")
        except (KbError, ValueError, json.JSONDecodeError) as exc:
            raise ParseError(line_number, str(exc)) from None

    kb = KnowledgeBase()

    # Classes: insert once all parents are present; merge extra parent edges.
    pending = list(class_lines)
    while pending:
        progressed = False
        remaining = []
        for item in pending:
            line_number, class_iri, parent, level = item
            try:
                if class_iri in kb.classes:
                    if parent is not None:
                        kb = kb.add_parent(class_iri, parent)
                elif parent is None:
                    kb = kb.add_class(class_iri, (), level)
                elif parent in kb.classes:
                    kb = kb.add_class(class_iri, (parent,), level)
                else:
                    remaining.append(item)
                    continue
                progressed = True
            except KbError as exc:
                raise ParseError(line_number, str(exc)) from None
        if not progressed:
            line_number, class_iri, parent, _ = remaining[0]
            raise ParseError(line_number, f"unresolved parent {parent} for {class_iri}")
        pending = remaining

    for line_number, prop_iri, kind, domain_class, range_ref in prop_lines:
        try:
            kb = kb.add_property(prop_iri, kind, domain_class, range_ref)
        except KbError as exc:
            raise ParseError(line_number, str(exc)) from None
    for line_number, ind_iri, classes in ind_lines:
        try:
            kb = kb.assert_individual(ind_iri, classes)
        except KbError as exc:
            raise ParseError(line_number, str(exc)) from None
    for line_number, subject, predicate, obj in assertion_lines:
        try:
            kb = kb.assert_relation(subject, predicate, obj)
        except KbError as exc:
            raise ParseError(line_number, str(exc)) from None
    for line_number, template_id, payload in template_lines:
        try:
            if not isinstance(payload, dict):
                raise KbError("template payload must be a JSON object")
            slots = tuple(str(s) for s in payload.get("slots", ()))
            patterns = tuple(
                (
                    _template_term_from_json(p[0]),
                    _template_term_from_json(p[1]),
                    _template_term_from_json(p[2]),
                )
                for p in payload.get("patterns", ())
            )
            kb = kb.add_template(Template(template_id, slots, patterns))
        except (KbError, IndexError, TypeError) as exc:
            raise ParseError(line_number, str(exc)) from None
    return kb


def loads_kb(text: str) -> KnowledgeBase:
    return load_kb(StringIO(text))
