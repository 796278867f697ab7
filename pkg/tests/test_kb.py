import random
from dataclasses import replace

import pytest

from aquasampler import kb as kbmod
from aquasampler.kb import (
    Assertion,
    CycleDetected,
    DomainViolation,
    DuplicateClass,
    DuplicateIndividual,
    KnowledgeBase,
    Literal,
    MissingSlot,
    OntologyLevel,
    ParseError,
    PropertyKind,
    RangeViolation,
    Template,
    UnknownClass,
    UnknownParent,
    UnknownPredicate,
    dumps_kb,
    load_bfo_skeleton,
    loads_kb,
)


def bfs_ancestors(classes: dict[str, frozenset[str]], start: str) -> frozenset[str]:
    """Independent reachability oracle over the parent graph."""
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for parent in classes[node]:
            if parent not in seen:
                seen.add(parent)
                frontier.append(parent)
    return frozenset(seen)


class TestSkeleton:
    def test_continuant_under_entity(self):
        kb = load_bfo_skeleton()
        assert kb.classes[kbmod.CONTINUANT].parents == {kbmod.ENTITY}
        assert kb.classes[kbmod.OCCURRENT].parents == {kbmod.ENTITY}

    def test_process_closure_reaches_entity(self):
        kb = load_bfo_skeleton()
        assert {kbmod.OCCURRENT, kbmod.ENTITY} <= kb.subclass_closure(kbmod.PROCESS)

    def test_acyclic(self):
        kb = load_bfo_skeleton()
        assert kb.check_consistency().is_consistent

    def test_root_closure_is_itself(self):
        kb = load_bfo_skeleton()
        assert kb.subclass_closure(kbmod.ENTITY) == {kbmod.ENTITY}


class TestAddClass:
    def test_cumulative_extension(self):
        kb = load_bfo_skeleton().add_class(
            "app:SamplingProcess", (kbmod.PROCESS,), OntologyLevel.APPLICATION
        )
        assert kbmod.OCCURRENT in kb.subclass_closure("app:SamplingProcess")

    def test_duplicate(self):
        kb = load_bfo_skeleton()
        with pytest.raises(DuplicateClass):
            kb.add_class(kbmod.PROCESS, (kbmod.OCCURRENT,), OntologyLevel.TOP)

    def test_unknown_parent(self):
        with pytest.raises(UnknownParent):
            load_bfo_skeleton().add_class("x:New", ("x:Nope",), OntologyLevel.DOMAIN)

    def test_self_parent_cycle(self):
        with pytest.raises(CycleDetected):
            load_bfo_skeleton().add_class("x:Selfish", ("x:Selfish",), OntologyLevel.DOMAIN)

    def test_multi_parent_edit_cycle(self):
        kb = load_bfo_skeleton()
        kb = kb.add_class("x:A", (kbmod.ENTITY,), OntologyLevel.MID)
        kb = kb.add_class("x:B", ("x:A",), OntologyLevel.MID)
        with pytest.raises(CycleDetected):
            kb.add_parent("x:A", "x:B")

    def test_level_ordering_enforced(self):
        kb = load_bfo_skeleton().add_class("x:App", (kbmod.ENTITY,), OntologyLevel.APPLICATION)
        with pytest.raises(kbmod.LevelViolation):
            kb.add_class("x:Mid", ("x:App",), OntologyLevel.MID)


class TestIndividualsAndRelations:
    @pytest.fixture()
    def kb(self):
        kb = load_bfo_skeleton()
        kb = kb.add_class("app:SamplingPoint", (kbmod.INDEPENDENT_CONTINUANT,), OntologyLevel.DOMAIN)
        kb = kb.add_class("app:SamplingZone", (kbmod.INDEPENDENT_CONTINUANT,), OntologyLevel.DOMAIN)
        kb = kb.add_property(
            "app:locatedInZone", PropertyKind.OBJECT, "app:SamplingPoint", "app:SamplingZone"
        )
        kb = kb.add_property("app:label", PropertyKind.DATA, "app:SamplingPoint", "string")
        kb = kb.assert_individual("pt:P-101", ("app:SamplingPoint",))
        kb = kb.assert_individual("zone:Z-A", ("app:SamplingZone",))
        return kb

    def test_assert_individual(self, kb):
        assert "pt:P-101" in kb.instances_of("app:SamplingPoint")

    def test_unknown_class(self, kb):
        with pytest.raises(UnknownClass):
            kb.assert_individual("x:i", ("x:Nope",))

    def test_duplicate_individual(self, kb):
        with pytest.raises(DuplicateIndividual):
            kb.assert_individual("pt:P-101", ("app:SamplingPoint",))

    def test_relation_accepted_via_subsumption(self, kb):
        kb2 = kb.assert_relation("pt:P-101", "app:locatedInZone", "zone:Z-A")
        assert Assertion("pt:P-101", "app:locatedInZone", "zone:Z-A") in kb2.assertions

    def test_domain_violation(self, kb):
        with pytest.raises(DomainViolation):
            kb.assert_relation("zone:Z-A", "app:locatedInZone", "zone:Z-A")

    def test_literal_for_object_property(self, kb):
        with pytest.raises(RangeViolation):
            kb.assert_relation("pt:P-101", "app:locatedInZone", Literal("Z-A"))

    def test_individual_for_data_property(self, kb):
        with pytest.raises(RangeViolation):
            kb.assert_relation("pt:P-101", "app:label", "zone:Z-A")

    def test_datatype_mismatch(self, kb):
        with pytest.raises(RangeViolation):
            kb.assert_relation("pt:P-101", "app:label", Literal("5", "integer"))

    def test_unknown_predicate(self, kb):
        with pytest.raises(UnknownPredicate):
            kb.assert_relation("pt:P-101", "app:nope", "zone:Z-A")

    def test_range_subsumption_uses_closure(self, kb):
        kb = kb.add_class("app:SteamPoint", ("app:SamplingPoint",), OntologyLevel.APPLICATION)
        kb = kb.assert_individual("pt:S-1", ("app:SteamPoint",))
        kb = kb.add_property(
            "app:pairedWith", PropertyKind.OBJECT, "app:SamplingPoint", "app:SamplingPoint"
        )
        kb = kb.assert_relation("pt:S-1", "app:pairedWith", "pt:P-101")
        assert Assertion("pt:S-1", "app:pairedWith", "pt:P-101") in kb.assertions


class TestQuery:
    @pytest.fixture()
    def kb(self, demo_kb):
        return demo_kb

    def test_points_in_zone(self, kb, registry):
        bindings = kb.query(("?p", "app:locatedInZone", "zone:Z-A"))
        found = {str(b["p"]) for b in bindings}
        expected = {
            f"pt:{p.point_id}" for p in registry.points.values() if p.zone_id == "Z-A"
        }
        assert found == expected

    def test_ground_pattern_yields_empty_binding(self, kb):
        bindings = kb.query(("pt:P-101", "app:locatedInZone", "zone:Z-A"))
        assert bindings == [{}]

    def test_full_wildcard_returns_everything(self, kb):
        assert len(kb.query(("?s", "?p", "?o"))) == len(kb.assertions)

    def test_order_deterministic(self, kb):
        first = kb.query(("?s", "?p", "?o"))
        second = kb.query(("?s", "?p", "?o"))
        assert first == second
        keys = [(str(b["s"]), str(b["p"]), str(b["o"])) for b in first]
        assert keys == sorted(keys)

    def test_repeated_variable_must_agree(self, kb):
        assert kb.query(("?x", "app:locatedInZone", "?x")) == []

    def test_linear_scan_oracle(self, kb):
        pattern = ("?p", "app:hasWaterType", Literal("PurifiedWater"))
        expected = sorted(
            a.subject
            for a in kb.assertions
            if a.predicate == "app:hasWaterType" and a.obj == Literal("PurifiedWater")
        )
        assert [str(b["p"]) for b in kb.query(pattern)] == expected


class TestTemplates:
    def test_raci_grounding_matches_manual(self, demo_kb):
        manual = Assertion("role:Technician", "raci:Responsible", "action:CheckIn")
        assert manual in demo_kb.assertions

    def test_missing_slot_leaves_kb_unchanged(self, demo_kb):
        before = dumps_kb(demo_kb)
        with pytest.raises(MissingSlot):
            demo_kb.instantiate_template("raci-assignment", {"role": "role:Technician"})
        assert dumps_kb(demo_kb) == before

    def test_template_atomic_on_domain_violation(self, demo_kb):
        before = dumps_kb(demo_kb)
        with pytest.raises(DomainViolation):
            demo_kb.instantiate_template(
                "raci-assignment",
                {
                    "role": "action:CheckIn",  # wrong side: actions are not roles
                    "action": "role:Technician",
                    "level": "raci:Responsible",
                },
            )
        assert dumps_kb(demo_kb) == before

    def test_multi_pattern_atomicity(self):
        kb = load_bfo_skeleton()
        kb = kb.add_class("x:Thing", (kbmod.ENTITY,), OntologyLevel.DOMAIN)
        kb = kb.add_property("x:name", PropertyKind.DATA, "x:Thing", "string")
        kb = kb.add_property("x:rank", PropertyKind.DATA, "x:Thing", "integer")
        kb = kb.assert_individual("x:i", ("x:Thing",))
        kb = kb.add_template(
            Template(
                "pair",
                slots=("who", "name", "rank"),
                patterns=(("?who", "x:name", "?name"), ("?who", "x:rank", "?rank")),
            )
        )
        with pytest.raises(RangeViolation):
            kb.instantiate_template(
                "pair",
                {"who": "x:i", "name": Literal("ok"), "rank": Literal("not-int")},
            )
        # first pattern would have been insertable; atomicity keeps it out
        assert not any(a.predicate == "x:name" for a in kb.assertions)


class TestConsistency:
    def test_fresh_skeleton_clean(self):
        assert load_bfo_skeleton().check_consistency().findings == ()

    def test_dangling_parent_detected(self):
        kb = load_bfo_skeleton()
        broken = replace(
            kb,
            classes={
                **dict(kb.classes),
                "x:Orphan": kbmod.ClassDef("x:Orphan", frozenset({"x:Ghost"}), OntologyLevel.MID),
            },
        )
        report = broken.check_consistency()
        assert [f.kind for f in report.findings] == ["dangling"]

    def test_injected_cycle_detected(self):
        kb = load_bfo_skeleton()
        cyclic = replace(
            kb,
            classes={
                **dict(kb.classes),
                kbmod.ENTITY: kbmod.ClassDef(
                    kbmod.ENTITY, frozenset({kbmod.PROCESS}), OntologyLevel.TOP
                ),
            },
        )
        report = cyclic.check_consistency()
        assert any(f.kind == "cycle" for f in report.findings)

    def test_randomly_corrupted_kb_matches_oracle(self, demo_kb):
        rng = random.Random(7)
        kb = demo_kb
        classes = dict(kb.classes)
        individuals = dict(kb.individuals)
        # Inject: dangling class parent, classless individual, bad assertion.
        classes["x:Orphan"] = kbmod.ClassDef("x:Orphan", frozenset({"x:Ghost"}), OntologyLevel.MID)
        individuals["x:empty"] = kbmod.Individual("x:empty", frozenset())
        assertions = set(kb.assertions)
        assertions.add(Assertion("zone:Z-A", "app:locatedInZone", "zone:Z-B"))  # domain violation
        assertions.add(Assertion("pt:P-101", "app:locatedInZone", Literal("oops")))  # range
        broken = replace(
            kb, classes=classes, individuals=individuals, assertions=frozenset(assertions)
        )
        report = broken.check_consistency()
        kinds = sorted(f.kind for f in report.findings)
        assert kinds.count("dangling") == 1
        assert kinds.count("classless-individual") == 1
        assert kinds.count("domain-violation") == 1
        assert kinds.count("range-violation") == 1


class TestClosureOracle:
    def random_dag(self, rng: random.Random, n_classes: int, n_edges: int) -> KnowledgeBase:
        kb = KnowledgeBase().add_class("c000", (), OntologyLevel.TOP)
        names = ["c000"]
        extra_edges = []
        for i in range(1, n_classes):
            name = f"c{i:03d}"
            parent = rng.choice(names)
            kb = kb.add_class(name, (parent,), OntologyLevel.TOP)
            names.append(name)
        attempts = 0
        while len(extra_edges) < n_edges - (n_classes - 1) and attempts < n_edges * 4:
            attempts += 1
            child, parent = rng.sample(names, 2)
            # only child -> earlier-created parent keeps the graph acyclic
            if child < parent:
                child, parent = parent, child
            if parent == child:
                continue
            try:
                kb = kb.add_parent(child, parent)
                extra_edges.append((child, parent))
            except CycleDetected:
                continue
        return kb

    def test_closure_matches_bfs_on_random_dags(self):
        rng = random.Random(42)
        for _ in range(10):
            kb = self.random_dag(rng, rng.randint(5, 60), rng.randint(10, 120))
            parent_map = {iri: c.parents for iri, c in kb.classes.items()}
            for iri in kb.classes:
                assert kb.subclass_closure(iri) == bfs_ancestors(parent_map, iri)

    def test_universal_root_collects_all_individuals(self, demo_kb):
        everything = demo_kb.instances_of(kbmod.ENTITY, inferred=True)
        assert everything == frozenset(demo_kb.individuals)

    def test_instances_union_rule(self):
        rng = random.Random(99)
        kb = self.random_dag(rng, 30, 60)
        names = sorted(kb.classes)
        for i in range(40):
            count = rng.randint(1, 3)
            kb = kb.assert_individual(f"ind{i:03d}", rng.sample(names, count))
        for class_iri in names:
            direct_union = set()
            for other in names:
                if class_iri in kb.subclass_closure(other):
                    direct_union |= kb.instances_of(other, inferred=False)
            assert kb.instances_of(class_iri, inferred=True) == frozenset(direct_union)
            assert kb.instances_of(class_iri, inferred=False) <= kb.instances_of(
                class_iri, inferred=True
            )


class TestAcyclicityPreserved:
    def test_random_mutation_sequences_never_yield_cycles(self):
        rng = random.Random(314)
        for _ in range(15):
            kb = load_bfo_skeleton()
            names = list(kb.classes)
            for step in range(60):
                try:
                    if rng.random() < 0.5 or len(names) < 3:
                        name = f"n{step:03d}"
                        kb = kb.add_class(
                            name, rng.sample(names, rng.randint(1, 2)), OntologyLevel.TOP
                        )
                        names.append(name)
                    else:
                        kb = kb.add_parent(rng.choice(names), rng.choice(names))
                except kbmod.KbError:
                    continue
            assert not any(f.kind == "cycle" for f in kb.check_consistency().findings)


class TestPersistence:
    def test_roundtrip_skeleton(self):
        kb = load_bfo_skeleton()
        assert loads_kb(dumps_kb(kb)) == kb

    def test_roundtrip_demo(self, demo_kb):
        assert loads_kb(dumps_kb(demo_kb)) == demo_kb

    def test_empty_file_is_empty_kb(self):
        assert loads_kb("") == KnowledgeBase()

    def test_parse_error_carries_line_number(self):
        lines = dumps_kb(load_bfo_skeleton()).splitlines()
        lines[4] = "C broken"
        with pytest.raises(ParseError) as err:
            loads_kb("\n".join(lines))
        assert err.value.line_number == 5

    def test_comments_and_blanks_ignored(self):
        text = "# header\n\nC x:Root - Top\n"
        kb = loads_kb(text)
        assert set(kb.classes) == {"x:Root"}

    def test_literal_escaping_roundtrip(self):
        kb = load_bfo_skeleton()
        kb = kb.add_class("x:T", (kbmod.ENTITY,), OntologyLevel.DOMAIN)
        kb = kb.add_property("x:note", PropertyKind.DATA, "x:T", "string")
        kb = kb.assert_individual("x:i", ("x:T",))
        tricky = 'he said "10\\" pipe" twice'
        kb = kb.assert_relation("x:i", "x:note", Literal(tricky))
        restored = loads_kb(dumps_kb(kb))
        assert restored == kb
        [assertion] = [a for a in restored.assertions if a.predicate == "x:note"]
        assert isinstance(assertion.obj, Literal) and assertion.obj.lexical == tricky

    def test_forward_reference_classes_load(self):
        # child line appears before its parent line
        text = "C x:Child x:Parent Mid\nC x:Parent - Top\n"
        kb = loads_kb(text)
        assert kb.subclass_closure("x:Child") == {"x:Child", "x:Parent"}

    def test_unresolved_parent_reports_line(self):
        with pytest.raises(ParseError) as err:
            loads_kb("C x:Child x:Ghost Mid\n")
        assert err.value.line_number == 1
