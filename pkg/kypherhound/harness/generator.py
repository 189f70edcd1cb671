"""Deterministic synthetic Wikidata-like corpora.

Every file draws from its own random stream seeded by (seed, file name), and
facts several files must agree on (who is an artist, who has a VIAF id, who
has a label) come from a hash of (seed, fact, entity). A corpus can therefore
be written one file at a time without holding it in memory.
"""

import hashlib
import logging
import os
import random
from collections.abc import Iterator
from dataclasses import dataclass
from itertools import accumulate
from pathlib import Path

from kypherhound.errors import UsageError
from kypherhound.model.io import write_edges
from kypherhound.model.schema import LABEL, NODE1, NODE2, ColumnSchema
from kypherhound.model.values import LangString, String, Symbol

logger = logging.getLogger(__name__)

ENTITY = "Q35120"
HUMAN = "Q5"
SCIENTIFIC_PUBLICATION = "Q591041"
CANCER = "Q12078"
FILM = "Q11424"

FIXED_CLASSES = {
    ENTITY: "entity",
    HUMAN: "human",
    SCIENTIFIC_PUBLICATION: "scientific publication",
    CANCER: "cancer",
    FILM: "film",
}
CLASS_FAMILIES = (SCIENTIFIC_PUBLICATION, CANCER, FILM, ENTITY)

CLASS_BASE = 1_000_000
PERSON_BASE = 2_000_000
GIVEN_NAME_BASE = 3_000_000
PUBLICATION_BASE = 4_000_000
FILM_BASE = 5_000_000
ULAN_BASE = 500_000_000

INSTANCE_OF = Symbol("P31")
SUBCLASS_OF = Symbol("P279")
GIVEN_NAME = Symbol("P735")
AUTHOR = Symbol("P50")
MAIN_SUBJECT = Symbol("P921")
VIAF_ID = Symbol("P214")
ULAN_ID = Symbol("P245")
LABEL_PROPERTY = Symbol("label")
SPOUSE = Symbol("property:spouse")
OCCUPATION = Symbol("property:occupation")
ALMA_MATER = Symbol("property:almaMater")

EDGE_SCHEMA = ColumnSchema((NODE1, LABEL, NODE2))
NODE_SCHEMA = ColumnSchema((NODE1,))

CORPUS_FILES = ("p31", "p279", "items", "labels", "external_ids", "infobox", "ulan")

FIRST_NAMES = (
    "John", "William", "Robert", "Thomas", "James", "Mary", "Anna", "Maria", "Elizabeth", "David",
    "Michael", "Susan", "Jorge", "Hagop", "Farhad", "Olga", "Gloria", "Noemi", "Patrick", "Fernando",
)  # fmt: skip
FAMILY_NAMES = (
    "Smith", "Garcia", "Kantarjian", "Cortes", "Ferenczy", "Fialka", "Lopez", "Robyn", "Lee", "Carrillo",
    "O'Brien", "Montacute", "Ravandi", "Nguyen", "Kowalski", "Okafor", "Tanaka", "Muller", "Rossi", "Silva",
)  # fmt: skip
OCCUPATIONS = ("Fashion designer", "Painter", "Sculptor", "Photographer", "Architect")

ARTIST_FRACTION = 0.3
UNKNOWN_ULAN_FRACTION = 0.1
GIVEN_NAME_COVERAGE = 0.9
LABEL_COVERAGE = 0.9
SPOUSE_FRACTION = 0.5
OFF_TOPIC_PUBLICATIONS = 0.1
CANCER_SUBJECTS = 0.5


@dataclass(frozen=True)
class CorpusSpec:
    """Size and noise knobs of a generated corpus.

    Args:
        seed: Same seed and sizes give byte-identical files.
        persons: Instances of human (Q5).
        classes: Generated classes below the fixed ones.
        publications: Publications with P50 authors and a P921 subject.
        films: Instances of film classes.
        max_authors_per_pub: Authors per publication are drawn from 1..this.
        identifier_coverage: Fraction of artists with a ULAN id that also get a VIAF id.
        noisy_literal_fraction: Fraction of infobox spouse values that are literals.
    """

    seed: int = 1
    persons: int = 10
    classes: int = 5
    publications: int = 5
    films: int = 3
    max_authors_per_pub: int = 3
    identifier_coverage: float = 0.5
    noisy_literal_fraction: float = 0.3

    def __post_init__(self):
        for name in ("persons", "classes", "publications", "films"):
            if getattr(self, name) < 0:
                raise UsageError(f"{name} must not be negative")
        if self.max_authors_per_pub < 1:
            raise UsageError("max_authors_per_pub must be at least 1")
        for name in ("identifier_coverage", "noisy_literal_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise UsageError(f"{name} must be within [0, 1]")

    @classmethod
    def tiny(cls, seed: int = 1) -> "CorpusSpec":
        return cls(seed=seed)

    @classmethod
    def acceptance(cls, seed: int = 1) -> "CorpusSpec":
        return cls(seed=seed, persons=1000, classes=100, publications=500, films=100)

    @classmethod
    def large(cls, seed: int = 1) -> "CorpusSpec":
        """Roughly 10^7 edges across all files."""
        return cls(seed=seed, persons=1_500_000, classes=10_000, publications=600_000, films=100_000)

    @classmethod
    def preset(cls, name: str, seed: int = 1) -> "CorpusSpec":
        presets = {"tiny": cls.tiny, "acceptance": cls.acceptance, "large": cls.large}
        try:
            return presets[name](seed)
        except KeyError:
            raise UsageError(f"unknown corpus preset '{name}' (choose from {', '.join(presets)})") from None


def qnode(base: int, index: int) -> Symbol:
    return Symbol(f"Q{base + index}")


def _fraction(seed: int, fact: str, index: int) -> float:
    digest = hashlib.sha256(f"{seed}:{fact}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def _stream(spec: CorpusSpec, name: str) -> random.Random:
    return random.Random(f"{spec.seed}:{name}")


class _Corpus:
    """Shared derived facts of one CorpusSpec."""

    def __init__(self, spec: CorpusSpec):
        self.spec = spec
        rng = _stream(spec, "classes")
        # parents of each generated class always come earlier, so P279 stays acyclic
        self.parents: list[list[str]] = []
        members: dict[str, list[str]] = {family: [family] for family in CLASS_FAMILIES}
        for k in range(spec.classes):
            # the first few classes cover every family, the rest are drawn at random
            family = CLASS_FAMILIES[k] if k < len(CLASS_FAMILIES) else rng.choice(CLASS_FAMILIES)
            candidates = members[family]
            parents = [rng.choice(candidates)]
            if len(candidates) > 1 and rng.random() < 0.2:
                extra = rng.choice(candidates)
                if extra not in parents:
                    parents.append(extra)
            self.parents.append(parents)
            members[family].append(qnode(CLASS_BASE, k).text)
        self.members = members
        self.given_names = max(3, spec.persons // 20)

    def is_artist(self, person: int) -> bool:
        return _fraction(self.spec.seed, "artist", person) < ARTIST_FRACTION

    def has_viaf(self, person: int) -> bool:
        if not self.is_artist(person):
            return False
        return _fraction(self.spec.seed, "viaf", person) < self.spec.identifier_coverage

    def has_label(self, person: int) -> bool:
        return _fraction(self.spec.seed, "label", person) < LABEL_COVERAGE

    def person_name(self, person: int) -> str:
        first = FIRST_NAMES[person % len(FIRST_NAMES)]
        family = FAMILY_NAMES[(person // len(FIRST_NAMES)) % len(FAMILY_NAMES)]
        return f"{first} {family}"

    def given_name_label(self, index: int) -> str:
        base = FIRST_NAMES[index % len(FIRST_NAMES)]
        round_ = index // len(FIRST_NAMES)
        return base if round_ == 0 else f"{base} {round_ + 1}"

    def ulan(self, person: int) -> String:
        return String(str(ULAN_BASE + person))

    def viaf(self, person: int) -> String:
        return String(str(int(_fraction(self.spec.seed, "viaf-number", person) * 10**9)))


def _p31(corpus: _Corpus) -> Iterator[tuple]:
    spec = corpus.spec
    rng = _stream(spec, "p31")
    for i in range(spec.persons):
        yield (qnode(PERSON_BASE, i), INSTANCE_OF, Symbol(HUMAN))
    publication_classes = corpus.members[SCIENTIFIC_PUBLICATION]
    other_classes = corpus.members[ENTITY]
    for p in range(spec.publications):
        pool = other_classes if rng.random() < OFF_TOPIC_PUBLICATIONS else publication_classes
        yield (qnode(PUBLICATION_BASE, p), INSTANCE_OF, Symbol(rng.choice(pool)))
    film_classes = corpus.members[FILM]
    for f in range(spec.films):
        yield (qnode(FILM_BASE, f), INSTANCE_OF, Symbol(rng.choice(film_classes)))


def _p279(corpus: _Corpus) -> Iterator[tuple]:
    for cls in (HUMAN, SCIENTIFIC_PUBLICATION, CANCER, FILM):
        yield (Symbol(cls), SUBCLASS_OF, Symbol(ENTITY))
    for k, parents in enumerate(corpus.parents):
        for parent in parents:
            yield (qnode(CLASS_BASE, k), SUBCLASS_OF, Symbol(parent))


def _items(corpus: _Corpus) -> Iterator[tuple]:
    spec = corpus.spec
    rng = _stream(spec, "items")
    weights = list(accumulate(1.0 / (j + 1) for j in range(corpus.given_names)))
    for i in range(spec.persons):
        if _fraction(spec.seed, "given-name", i) < GIVEN_NAME_COVERAGE:
            j = rng.choices(range(corpus.given_names), cum_weights=weights)[0]
            yield (qnode(PERSON_BASE, i), GIVEN_NAME, qnode(GIVEN_NAME_BASE, j))

    cancer_subjects = corpus.members[CANCER]
    other_subjects = corpus.members[ENTITY]
    for p in range(spec.publications):
        pub = qnode(PUBLICATION_BASE, p)
        if spec.persons:
            count = min(spec.persons, rng.randint(1, spec.max_authors_per_pub))
            for author in sorted(rng.sample(range(spec.persons), count)):
                yield (pub, AUTHOR, qnode(PERSON_BASE, author))
        pool = cancer_subjects if rng.random() < CANCER_SUBJECTS else other_subjects
        yield (pub, MAIN_SUBJECT, Symbol(rng.choice(pool)))


def _labels(corpus: _Corpus) -> Iterator[tuple]:
    spec = corpus.spec
    for qid, name in FIXED_CLASSES.items():
        yield (Symbol(qid), LABEL_PROPERTY, LangString(name, "en"))
    for k in range(spec.classes):
        yield (qnode(CLASS_BASE, k), LABEL_PROPERTY, LangString(f"class {k}", "en"))
    for i in range(spec.persons):
        if corpus.has_label(i):
            yield (qnode(PERSON_BASE, i), LABEL_PROPERTY, LangString(corpus.person_name(i), "en"))
    for j in range(corpus.given_names):
        yield (qnode(GIVEN_NAME_BASE, j), LABEL_PROPERTY, LangString(corpus.given_name_label(j), "en"))
    for p in range(spec.publications):
        yield (qnode(PUBLICATION_BASE, p), LABEL_PROPERTY, LangString(f"publication {p}", "en"))
    for f in range(spec.films):
        yield (qnode(FILM_BASE, f), LABEL_PROPERTY, LangString(f"film {f}", "en"))


def _external_ids(corpus: _Corpus) -> Iterator[tuple]:
    for i in range(corpus.spec.persons):
        if corpus.is_artist(i):
            person = qnode(PERSON_BASE, i)
            yield (person, ULAN_ID, corpus.ulan(i))
            if corpus.has_viaf(i):
                yield (person, VIAF_ID, corpus.viaf(i))


def _ulan(corpus: _Corpus) -> Iterator[tuple]:
    spec = corpus.spec
    for i in range(spec.persons):
        if corpus.is_artist(i):
            yield (corpus.ulan(i),)
    # identifiers the knowledge graph does not know
    unknown = int(spec.persons * ARTIST_FRACTION * UNKNOWN_ULAN_FRACTION)
    for u in range(unknown):
        yield (String(str(ULAN_BASE + spec.persons + u)),)


def _infobox(corpus: _Corpus) -> Iterator[tuple]:
    spec = corpus.spec
    rng = _stream(spec, "infobox")
    classes = corpus.members[ENTITY]
    for i in range(spec.persons):
        if not corpus.is_artist(i):
            continue
        person = qnode(PERSON_BASE, i)
        yield (person, ALMA_MATER, Symbol(rng.choice(classes)))
        yield (person, OCCUPATION, LangString(rng.choice(OCCUPATIONS), "en"))
        if rng.random() < SPOUSE_FRACTION:
            spouse = rng.randrange(spec.persons)
            if rng.random() < spec.noisy_literal_fraction:
                yield (person, SPOUSE, LangString(corpus.person_name(spouse), "en"))
            else:
                yield (person, SPOUSE, qnode(PERSON_BASE, spouse))


_WRITERS = {
    "p31": (EDGE_SCHEMA, _p31),
    "p279": (EDGE_SCHEMA, _p279),
    "items": (EDGE_SCHEMA, _items),
    "labels": (EDGE_SCHEMA, _labels),
    "external_ids": (EDGE_SCHEMA, _external_ids),
    "infobox": (EDGE_SCHEMA, _infobox),
    "ulan": (NODE_SCHEMA, _ulan),
}


def generate_corpus(spec: CorpusSpec, out_dir: str | os.PathLike, compress: bool = False) -> list[Path]:
    """Write every corpus file into ``out_dir`` and return their paths.

    Files are ``<name>.tsv`` (or ``.tsv.gz`` with ``compress``) for each name
    in CORPUS_FILES.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = _Corpus(spec)
    suffix = ".tsv.gz" if compress else ".tsv"
    paths = []
    for name in CORPUS_FILES:
        schema, rows = _WRITERS[name]
        path = out / f"{name}{suffix}"
        count = write_edges(path, schema, rows(corpus), compress=compress)
        logger.info("Wrote %d rows to %s", count, path)
        paths.append(path)
    return paths
