import pytest

from regraft.reeng.generate import generate_model
from regraft.reeng.javasrc import parse_java
from regraft.reeng.runner import load_assets


def test_minimal_two_class_corpus():
    sources = generate_model(1, 1, 0, 7)
    names = [s.name for s in sources]
    assert "State.java" in names
    assert len(sources) >= 2
    g = parse_java(sources, load_assets().metamodel)
    assert g.validate() == []


def test_same_seed_is_byte_identical():
    a = generate_model(12, 3, 2, 99)
    b = generate_model(12, 3, 2, 99)
    assert [(s.name, s.text) for s in a] == [(s.name, s.text) for s in b]


def test_different_seeds_differ():
    a = generate_model(12, 3, 2, 1)
    b = generate_model(12, 3, 2, 2)
    assert [(s.name, s.text) for s in a] != [(s.name, s.text) for s in b]


@pytest.mark.parametrize("seed", range(20))
def test_every_generated_corpus_parses(seed):
    sources = generate_model(3 + seed % 10, 1 + seed % 4, seed % 4, seed)
    g = parse_java(sources, load_assets().metamodel)
    assert g.validate() == []
    roots = [c for c in g.nodes_of_type("Class")
             if g.get_attribute(c, "name") == "State"]
    assert len(roots) == 1


def test_requested_state_count():
    sources = generate_model(17, 2, 1, 3)
    g = parse_java(sources, load_assets().metamodel)
    concrete = [c for c in g.nodes_of_type("Class")
                if not g.get_attribute(c, "abstract")]
    assert len(concrete) == 17


def test_rejects_zero_states():
    with pytest.raises(ValueError):
        generate_model(0, 1, 1, 0)
