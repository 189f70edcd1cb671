"""The seven use-case queries, run through the CLI with cold and warm caches.

Query texts are kept as written for the use cases, with two corrections:

- the cancer network query returned ``author2 as node1`` (now ``node2``);
- the author network query listed a ``time`` input it never used (dropped).

File names are substituted with ``{corpus}``/``{out}`` placeholders.
"""

import csv
import gzip
import logging
import os
import time
from dataclasses import dataclass
from pathlib import Path

from kypherhound.config import Config
from kypherhound.errors import KgtkIOError, KypherError, ResultMismatchError
from kypherhound.harness.closure import closure_p279star
from kypherhound.harness.oracle import compare_results, load_graphs, oracle_query
from kypherhound.model.values import parse_value
from kypherhound.query.ast import InputSpec
from kypherhound.query.parser import assemble_query
from kypherhound.services import find_graph_file

logger = logging.getLogger(__name__)

REPORT_FILENAME = "report.tsv"
REPORT_COLUMNS = ("query", "configuration", "minutes", "rows", "oracle")


@dataclass(frozen=True)
class UseCase:
    name: str
    inputs: tuple[tuple[str, str | None], ...]
    match: str
    returns: str
    output: str
    opts: tuple[str, ...] = ()
    where: str | None = None
    order_by: str | None = None
    limit: int | None = None

    def input_specs(self, corpus_dir: Path, out_dir: Path) -> list[InputSpec]:
        return [
            InputSpec(text.format(corpus=corpus_dir, out=out_dir), alias) for text, alias in self.inputs
        ]

    def argv(self, corpus_dir: Path, cache_path: Path, out_dir: Path) -> list[str]:
        args = ["query"]
        for spec in self.input_specs(corpus_dir, out_dir):
            args += ["-i", spec.path]
            if spec.alias:
                args += ["--as", spec.alias]
        args += ["--match", self.match]
        for opt in self.opts:
            args += ["--opt", opt]
        if self.where:
            args += ["--where", self.where]
        args += ["--return", self.returns]
        if self.order_by:
            args += ["--order-by", self.order_by]
        if self.limit is not None:
            args += ["--limit", str(self.limit)]
        args += ["-o", str(out_dir / self.output)]
        args += ["--cache", str(cache_path), "--graph-dir", str(corpus_dir)]
        return args


USECASES = (
    UseCase(
        name="First names",
        inputs=(("items", None), ("p31", None), ("labels", None)),
        match="""
    p31: (person)-[:P31]->(:Q5), # Q5 is person
    items: (person)-[:P735]->(given_name), # P735 is first name
    labels: (given_name)-[:label]->(given_name_label)""",
        returns="""distinct given_name as node1, count(given_name) as node2,
given_name_label as `node1;label`, "count_names" as label""",
        order_by="node2 desc",
        output="given-names.tsv",
    ),
    UseCase(
        name="Class instances",
        inputs=(("p31", None), ("p279star", None)),
        match="""
    p31: (entity)-[:P31]->(class),
    p279star: (class)-[:P279star]->(super_class)""",
        returns="""distinct super_class as node1, count(distinct entity) as
    node2, "entity_count" as label""",
        order_by="node2 desc, node1",
        output="class.count.tsv.gz",
    ),
    UseCase(
        name="Film instances",
        inputs=(("p279star", None), ("labels", None), ("{out}/class.count.tsv.gz", "count")),
        match="""
    p279star: (class)-[]->(:Q11424), # Q11424 is film
    count: (class)-[:entity_count]->(count),
    labels: (class)-[:label]->(class_label)""",
        returns="class as node1, class_label as `node1;label`, count as node2",
        order_by="cast(count, integer) desc",
        limit=10,
        output="film-classes.tsv",
    ),
    UseCase(
        name="Author network",
        inputs=(("p31", None), ("p279star", None), ("items", None), ("labels", None)),
        match="""
    p31: (pub)-[:P31]->(class),
    p279star: (class)-[:P279star]->(:Q591041), # node for scientific publication
    items: (pub)-[:P50]->(author1), # P50 is author
    items: (pub)-[:P50]->(author2)""",
        where="author1 > author2",
        returns="""distinct author1 as node1, "Pcoauthor" as label,
author2 as node2, count(distinct pub) as count_publications""",
        order_by="count_publications desc",
        output="coauthors.tsv.gz",
    ),
    UseCase(
        name="Cancer network",
        inputs=(("p31", None), ("p279star", None), ("items", None), ("labels", None)),
        match="""
    p31: (pub)-[:P31]->(class),
    p279star: (class)-[:P279star]->(:Q591041), # scientific publication
    items: (pub)-[:P50]->(author1),            # P50 is author
    items: (pub)-[:P50]->(author2),
    items: (pub)-[:P921]->(cancer_type),       # P921 is main subject
    p279star: (cancer_type)-[:P279star]->(:Q12078), # Q12078 is cancer
    labels: (author1)-[:label]->(author1_label),
    labels: (author2)-[:label]->(author2_label)""",
        where="author1 > author2",
        returns="""
    distinct author1 as node1, "Pcoauthor" as label, author2 as node2,
    count(distinct pub) as count_publications,
    author1_label as `node1;label`, author2_label as `node2;label`""",
        order_by="count_publications desc",
        output="coauthors.cancer.tsv.gz",
    ),
    UseCase(
        name="ULAN identifiers",
        inputs=(("items", None), ("external_ids", None), ("labels", None), ("ulan", None)),
        match="""
    ulan: (ulan_id)-[]->(),
    # P214 is VIAF ID, P245 is Union List of Artist Names ID
    external_ids: (viaf_id)<-[:P214]-(artist)-[:P245]->(ulan_id),
    labels: (artist)-[]->(artist_label)""",
        returns="""
    artist as node1, viaf_id as node1;P214, ulan_id as node1;P245,
    artist_label as node1;label""",
        output="ulan-to-viaf.tsv",
    ),
    UseCase(
        name="DBpedia spouses",
        inputs=(("infobox", None), ("p31", None), ("labels", None)),
        match="""
    infobox: (artist)-[:`property:spouse`]->(spouse),
    p31: (spouse)-[]->(:Q5)""",
        opts=("labels: (spouse)-[:label]->(spouse_label)",),
        returns="""artist as node1, "P26" as label, spouse as node2,
          spouse_label as `node2;label`""",
        output="spouses.dbpedia.qnodes.tsv",
    ),
)


@dataclass
class UseCaseResult:
    name: str
    cold_seconds: float = 0.0
    warm_seconds: float = 0.0
    rows: int = 0
    oracle: str = "skipped"

    @property
    def speedup(self) -> float | None:
        return self.cold_seconds / self.warm_seconds if self.warm_seconds > 0 else None


def read_result(path: str | os.PathLike) -> tuple[tuple[str, ...], list[tuple]]:
    """Header and parsed rows of a query result file.

    Results need not be valid edge files (node1 may be empty), so cells are
    parsed without the edge checks.
    """
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rt", encoding="utf-8", newline="") as handle:
        lines = [line.rstrip("\r\n") for line in handle]
    if not lines:
        return (), []
    columns = tuple(lines[0].split("\t"))
    rows = [tuple(parse_value(cell) for cell in line.split("\t")) for line in lines[1:] if line]
    return columns, rows


def _corpus_file(corpus_dir: Path, name: str) -> Path | None:
    for suffix in Config.GRAPH_FILE_SUFFIXES:
        candidate = corpus_dir / f"{name}{suffix}"
        if candidate.is_file():
            return candidate
    return None


def ensure_p279star(corpus_dir: Path) -> Path:
    """Build ``p279star.tsv`` from the corpus P279 file unless it exists."""
    existing = _corpus_file(corpus_dir, "p279star")
    if existing is not None:
        return existing
    p279 = _corpus_file(corpus_dir, "p279")
    if p279 is None:
        raise KypherError(f"no p279 file in {corpus_dir}; run 'kypherhound generate' first")
    return closure_p279star(p279, corpus_dir / "p279star.tsv")


def _clear_cache(cache_path: Path):
    for suffix in ("", "-wal", "-shm", "-journal"):
        Path(f"{cache_path}{suffix}").unlink(missing_ok=True)


def _invoke(usecase: UseCase, corpus_dir: Path, cache_path: Path, out_dir: Path) -> float:
    from kypherhound.cli import run

    start = time.perf_counter()
    code = run(usecase.argv(corpus_dir, cache_path, out_dir))
    elapsed = time.perf_counter() - start
    if code != 0:
        raise KypherError(f"{usecase.name}: query failed with exit code {code}")
    return elapsed


def check_against_oracle(usecase: UseCase, corpus_dir: Path, out_dir: Path) -> str:
    """Compare the written result with the oracle's.

    Returns:
        "match", or "skipped" when an input is too large to enumerate.

    Raises:
        ResultMismatchError: The results differ.
    """
    specs = usecase.input_specs(corpus_dir, out_dir)
    files = {}
    for spec in specs:
        path = find_graph_file(spec.path, corpus_dir)
        if path is None:
            raise KgtkIOError(f"{usecase.name}: input not found: {spec.path}")
        files[spec.name] = path
    graphs = load_graphs(files)
    largest = max(len(records) for _, records in graphs.values())
    if largest > Config.ORACLE_MAX_EDGES:
        logger.warning("%s: skipping oracle, a graph has %d edges", usecase.name, largest)
        return "skipped"

    spec = assemble_query(
        specs,
        usecase.match,
        usecase.opts,
        where_text=usecase.where,
        return_text=usecase.returns,
        order_text=usecase.order_by,
        limit=usecase.limit,
    )
    expected = oracle_query(spec, graphs)
    full = oracle_query(spec, graphs, apply_limit=False) if spec.limit is not None else None
    columns, rows = read_result(out_dir / usecase.output)
    if columns != expected.columns:
        raise ResultMismatchError(usecase.name, f"columns {columns} != {expected.columns}")
    difference = compare_results(rows, expected.rows, spec, full.rows if full else None)
    if difference is not None:
        raise ResultMismatchError(usecase.name, difference)
    return "match"


def write_report(results: list[UseCaseResult], path: Path) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for result in results:
            for configuration, seconds in (("cold", result.cold_seconds), ("warm", result.warm_seconds)):
                minutes = f"{seconds / 60:.4f}"
                writer.writerow([result.name, configuration, minutes, result.rows, result.oracle])
    return path


def run_usecases(
    corpus_dir: str | os.PathLike,
    cache_path: str | os.PathLike,
    out_dir: str | os.PathLike,
    oracle: bool = True,
) -> list[UseCaseResult]:
    """Run every use case cold (empty cache) then warm, checking each against the oracle.

    Queries run one after another in the listed order; the film query reads
    the class-count query's output.

    Raises:
        ResultMismatchError: A result differs from the oracle's.
    """
    corpus_dir, cache_path, out_dir = Path(corpus_dir), Path(cache_path), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache_path.parent.mkdir(parents=True, exist_ok=True)
    ensure_p279star(corpus_dir)

    results = []
    for usecase in USECASES:
        _clear_cache(cache_path)
        result = UseCaseResult(usecase.name)
        result.cold_seconds = _invoke(usecase, corpus_dir, cache_path, out_dir)
        result.warm_seconds = _invoke(usecase, corpus_dir, cache_path, out_dir)
        result.rows = len(read_result(out_dir / usecase.output)[1])
        if oracle:
            result.oracle = check_against_oracle(usecase, corpus_dir, out_dir)
        logger.info(
            "%s: cold %.2fs, warm %.2fs, %d rows, oracle %s",
            usecase.name,
            result.cold_seconds,
            result.warm_seconds,
            result.rows,
            result.oracle,
        )
        results.append(result)

    write_report(results, out_dir / REPORT_FILENAME)
    return results
