"""Built-in datasets: the People-and-Hair ontology and random small models.

``hair10`` is a ten-person toy ontology.  ``hair100`` scales the same profile
up so that three laws come out with round probabilities:

* 50 people under 16, 49 of them students (49/50);
* 20 green-haired people aged 16-24, 19 of them not researchers (19/20);
* 1000 people aged 50 or more, 999 of them not green-haired (999/1000).

The remaining groups only exist to keep the premise-free base rates below
those figures.
"""

import random

from .concepts import CategoryIs, Compare, Concept, ConceptSet, parse_concepts
from .facts import Categorical, FactualModel, Link, Property

__all__ = [
    "HAIR_CONCEPTS",
    "hair_concepts",
    "hair10",
    "hair100",
    "person_facts",
    "random_model",
]

HAIR_CONCEPTS = """\
# People and Hair
T1 := HasHairColor = "Brunette"
T2 := HasHairColor = "Blonde"
T3 := HasHairColor = "Green"
T4 := Age < 16
T5 := Age >= 16 & Age < 25
T6 := Age >= 25 & Age < 50
T7 := Age >= 50
T8 := HasOccupation = "Musician"
T9 := HasOccupation = "Researcher"
T10 := HasOccupation = "Student"
"""

COLORS = ("Brunette", "Blonde", "Green")
OCCUPATIONS = ("Musician", "Researcher", "Student")

HAIR10_PEOPLE = (
    ("Ann", 15, "Brunette", "Student"),
    ("Bob", 12, "Brunette", "Student"),
    ("Cat", 14, "Brunette", "Student"),
    ("Dan", 13, "Brunette", "Musician"),
    ("Eve", 20, "Green", "Student"),
    ("Finn", 22, "Green", "Musician"),
    ("Nataly", 30, "Blonde", "Researcher"),
    ("Gus", 40, "Blonde", "Researcher"),
    ("Victor", 55, "Brunette", "Musician"),
    ("Hal", 60, "Blonde", "Musician"),
)


def hair_concepts(model=None):
    return parse_concepts(HAIR_CONCEPTS, model=model)


def _vocabulary_facts():
    for color in COLORS:
        yield Categorical("HairColor", color)
    for occupation in OCCUPATIONS:
        yield Categorical("Occupation", occupation)


def person_facts(name, age, color, occupation):
    yield Categorical("Person", name)
    yield Property("Age", name, age)
    yield Link("HasHairColor", name, color)
    yield Link("HasOccupation", name, occupation)


def hair10():
    """Ten people plus the hair-colour and occupation objects they link to."""
    model = FactualModel(_vocabulary_facts())
    for person in HAIR10_PEOPLE:
        model.extend(person_facts(*person))
    return model


def _group(rows, prefix, start):
    for i, (age, color, occupation) in enumerate(rows):
        yield (f"{prefix}{start + i:04d}", age, color, occupation)


def _hair100_rows():
    young = [(6 + i % 10, COLORS[i % 2], "Student") for i in range(49)]
    young.append((15, "Brunette", "Musician"))
    # 10 students, 9 musicians, 1 researcher
    green_youth = [(16 + i % 9, "Green", occ) for i, occ in
                   enumerate(["Researcher"] + ["Student"] * 10 + ["Musician"] * 9)]
    old = [(50 + i % 40, "Green" if i == 0 else COLORS[i % 2],
            "Researcher" if i % 10 < 3 else "Musician") for i in range(1000)]
    youth = [(16 + i % 9, COLORS[i % 2], "Researcher" if i < 20 else "Student") for i in range(40)]
    middle = [(25 + i % 25, "Green", "Researcher" if i < 5 else "Musician") for i in range(10)]
    return young + green_youth + old + youth + middle


def hair100():
    """The scaled People-and-Hair ontology (1120 people)."""
    model = FactualModel(_vocabulary_facts())
    for person in _group(_hair100_rows(), "p", 1):
        model.extend(person_facts(*person))
    return model


# -- random small models ------------------------------------------------------


def random_model(rng, n_objects=None, n_concepts=None, missing=0.15):
    """A random factual model with random concepts over it.

    Objects carry two small integer properties, a colour, a flag and an
    optional category; each property is dropped with probability
    ``missing`` so that concepts are sometimes undefined.

    Returns ``(model, concepts)``.
    """
    if isinstance(rng, int):
        rng = random.Random(rng)
    n_objects = rng.randint(0, 12) if n_objects is None else n_objects
    n_concepts = rng.randint(1, 8) if n_concepts is None else n_concepts
    model = FactualModel()
    for i in range(n_objects):
        obj = f"o{i}"
        model.assert_fact(Categorical("Thing", obj))
        if rng.random() < 0.5:
            model.assert_fact(Categorical("K", obj))
        for key in ("A", "B"):
            if rng.random() >= missing:
                model.assert_fact(Property(key, obj, rng.randint(0, 4)))
        if rng.random() >= missing:
            model.assert_fact(Property("C", obj, rng.choice(("red", "green", "blue"))))
        if rng.random() >= missing:
            model.assert_fact(Property("D", obj, rng.random() < 0.5))

    def atom():
        pick = rng.randrange(5)
        if pick == 0:
            return CategoryIs("K")
        if pick in (1, 2):
            return Compare("AB"[pick - 1], rng.choice(("<", "<=", ">", ">=", "=", "!=")), rng.randint(0, 4))
        if pick == 3:
            return Compare("C", rng.choice(("=", "!=")), rng.choice(("red", "green", "blue")))
        return Compare("D", "=", rng.random() < 0.5)

    concepts = []
    for j in range(n_concepts):
        body = (atom(),) if rng.random() < 0.75 else (atom(), atom())
        concepts.append(Concept(f"C{j}", body))
    return model, ConceptSet(concepts)
