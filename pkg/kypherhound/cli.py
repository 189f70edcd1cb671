import dataclasses
import functools
import logging
import sys
from pathlib import Path

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from kypherhound.cache.store import drop_graph, list_graphs, open_cache
from kypherhound.config import Config
from kypherhound.errors import EXIT_OK, EXIT_USAGE, KgtkIOError, KypherError
from kypherhound.executor.operators import JOIN_STRATEGIES
from kypherhound.harness.closure import closure_p279star
from kypherhound.harness.generator import CorpusSpec, generate_corpus
from kypherhound.harness.oracle import load_graphs, oracle_query
from kypherhound.harness.usecases import run_usecases
from kypherhound.model.schema import ColumnSchema
from kypherhound.query.ast import InputSpec
from kypherhound.query.parser import assemble_query
from kypherhound.services import STDOUT, Invocation, find_graph_file, run_query, write_result

console = Console()
err_console = Console(stderr=True)

PRESETS = ("tiny", "acceptance", "large")


def setup_logging(level: str | int = Config.LOG_LEVEL):
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )
    logging.getLogger("kypherhound").setLevel(logging.NOTSET)


class KypherGroup(click.Group):
    """Click group that maps every failure to the documented exit codes.

    Click's own usage errors would exit with 2, which is reserved for
    query errors here.
    """

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            code = super().main(
                args=args, prog_name=prog_name, complete_var=complete_var, standalone_mode=False, **extra
            )
            if not isinstance(code, int):
                code = EXIT_OK
        except click.UsageError as e:
            e.show()
            code = EXIT_USAGE
        except click.ClickException as e:
            e.show()
            code = e.exit_code
        except click.Abort:
            err_console.print("Aborted!")
            code = EXIT_USAGE
        if standalone_mode:
            sys.exit(code)
        return code


def handle_errors(f):
    """Report a KypherError on stderr and exit with its code."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except KypherError as e:
            err_console.print(f"Error: {e}", style="red", markup=False, highlight=False, soft_wrap=True)
            raise click.exceptions.Exit(e.exit_code) from e

    return wrapper


class QueryCommand(click.Command):
    """Command whose --as and --owhere attach to the option just before them.

    Click collects repeated options into separate lists, which loses the
    pairing, so the raw arguments are scanned first.
    """

    def _value_options(self) -> set[str]:
        names = set()
        for param in self.params:
            if isinstance(param, click.Option) and not param.is_flag:
                names.update(param.opts)
                names.update(param.secondary_opts)
        return names

    def parse_args(self, ctx, args):
        takes_value = self._value_options()
        inputs: list[list] = []
        optionals: list[list] = []
        i = 0
        while i < len(args):
            arg = args[i]
            if arg == "--":
                break
            if arg.startswith("--") and "=" in arg:
                name, value = arg.split("=", 1)
                step = 1
            elif arg.startswith("-i") and len(arg) > 2 and not arg.startswith("--"):
                name, value = "-i", arg[2:]
                step = 1
            elif arg in takes_value:
                name, value = arg, args[i + 1] if i + 1 < len(args) else None
                step = 2
            else:
                name, value, step = arg, None, 1
            if value is None and name in takes_value:
                break
            if name in ("-i", "--input-file"):
                inputs.append([value, None])
            elif name == "--as":
                if not inputs or inputs[-1][1] is not None:
                    raise click.UsageError("--as must directly follow an -i/--input-file option", ctx=ctx)
                inputs[-1][1] = value
            elif name == "--opt":
                optionals.append([value, None])
            elif name == "--owhere":
                if not optionals or optionals[-1][1] is not None:
                    raise click.UsageError("--owhere must follow an --opt option", ctx=ctx)
                optionals[-1][1] = value
            i += step
        ctx.meta["kypher.inputs"] = [InputSpec(path, alias) for path, alias in inputs]
        ctx.meta["kypher.optionals"] = [(text, where) for text, where in optionals]
        return super().parse_args(ctx, args)


def query_options(f):
    """Options shared by ``query`` and ``oracle``."""
    options = [
        click.option("-i", "--input-file", "input_files", multiple=True, help="Input graph file or name"),
        click.option("--as", "aliases", multiple=True, help="Graph name for the preceding -i"),
        click.option("--match", required=True, help="Mandatory pattern clauses"),
        click.option("--opt", "opts", multiple=True, help="Optional pattern clauses (one group each)"),
        click.option("--owhere", "owheres", multiple=True, help="Condition for the preceding --opt"),
        click.option("--where", help="Filter over bound variables"),
        click.option("--return", "return_", help="Output columns (default: every bound variable)"),
        click.option("--order-by", help="Sort keys, optionally followed by asc/desc"),
        click.option("--limit", type=click.IntRange(min=0), help="Maximum number of rows"),
        click.option("-o", "--output", default=STDOUT, show_default=True, help="Output file, - for stdout"),
        click.option("--graph-dir", help="Directory searched for bare input names"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _print_stats(stats):
    counters = ", ".join(f"{name}={value}" for name, value in stats.as_dict().items())
    err_console.print(f"Cache: {counters}", markup=False, highlight=False)


@click.group(cls=KypherGroup)
@click.version_option()
def cli():
    """Kypher Hound - Kypher queries over KGTK edge files"""
    setup_logging()


@cli.command(cls=QueryCommand)
@query_options
@click.option("--cache", help="Graph cache file or directory")
@click.option("--explain", is_flag=True, help="Print the plan instead of running it")
@click.option("--verbose", is_flag=True, help="Log planning and cache activity")
@click.option("--join-strategy", type=click.Choice(JOIN_STRATEGIES), hidden=True)
@handle_errors
def query(
    input_files,
    aliases,
    match,
    opts,
    owheres,
    where,
    return_,
    order_by,
    limit,
    output,
    graph_dir,
    cache,
    explain,
    verbose,
    join_strategy,
):
    """Run a Kypher query over KGTK files."""
    if verbose:
        logging.getLogger("kypherhound").setLevel(logging.INFO)
    ctx = click.get_current_context()
    optionals = ctx.meta["kypher.optionals"]
    invocation = Invocation(
        inputs=ctx.meta["kypher.inputs"],
        match=match,
        opts=[text for text, _ in optionals],
        owheres=[condition for _, condition in optionals],
        where=where,
        returns=return_,
        order_by=order_by,
        limit=limit,
        output=output,
        cache=cache,
        graph_dir=graph_dir,
        explain=explain,
        join_strategy=join_strategy,
    )
    outcome = run_query(invocation, stdout=click.get_binary_stream("stdout"))
    if verbose:
        _print_stats(outcome.stats)


@cli.command("graphs")
@click.option("--cache", help="Graph cache file or directory")
@click.option("--drop", multiple=True, metavar="NAME", help="Remove a graph from the cache")
@handle_errors
def graphs(cache, drop):
    """List cached graphs, or drop some."""
    with open_cache(Config.get_cache_path(cache)) as handle:
        if drop:
            for name in drop:
                drop_graph(handle, name)
                console.print(f"[green]Dropped graph:[/green] {name}")
            return

        descriptors = list_graphs(handle)
        if not descriptors:
            console.print("[yellow]No graphs cached yet.[/yellow]")
            return

        table = Table(title="Cached Graphs")
        table.add_column("Name", style="cyan")
        table.add_column("Edges", justify="right")
        table.add_column("Indexes", style="blue")
        table.add_column("Source", style="green")

        for d in descriptors:
            table.add_row(d.name, str(d.edge_count), ", ".join(sorted(d.indexes)) or "-", d.source_path)

        console.print(table)


@cli.command()
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--preset", type=click.Choice(PRESETS), default="tiny", show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--persons", type=int, help="Override the preset's person count")
@click.option("--classes", type=int, help="Override the preset's class count")
@click.option("--publications", type=int, help="Override the preset's publication count")
@click.option("--films", type=int, help="Override the preset's film count")
@click.option("--max-authors", "max_authors_per_pub", type=int, help="Most authors per publication")
@click.option("--identifier-coverage", type=float, help="Fraction of ULAN artists with a VIAF id")
@click.option("--noisy-literal-fraction", type=float, help="Fraction of literal infobox spouses")
@click.option("--compress", is_flag=True, help="Write .tsv.gz files")
@handle_errors
def generate(out_dir, preset, seed, compress, **overrides):
    """Generate a synthetic Wikidata-shaped corpus."""
    spec = CorpusSpec.preset(preset, seed)
    changes = {name: value for name, value in overrides.items() if value is not None}
    if changes:
        spec = dataclasses.replace(spec, **changes)
    paths = generate_corpus(spec, out_dir, compress=compress)
    console.print(f"[green]Generated {len(paths)} files in[/green] {out_dir}")


@cli.command()
@click.argument("p279_file", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", help="Output file (default: p279star.tsv next to the input)")
@handle_errors
def closure(p279_file, output):
    """Write the reflexive-transitive P279star closure of a P279 file."""
    target = Path(output) if output else Path(p279_file).with_name("p279star.tsv")
    closure_p279star(p279_file, target)
    console.print(f"[green]Wrote[/green] {target}")


@cli.command(cls=QueryCommand)
@query_options
@handle_errors
def oracle(input_files, aliases, match, opts, owheres, where, return_, order_by, limit, output, graph_dir):
    """Evaluate a query by brute force, without the cache or planner."""
    ctx = click.get_current_context()
    inputs = ctx.meta["kypher.inputs"]
    optionals = ctx.meta["kypher.optionals"]
    directory = Config.get_graph_dir(graph_dir)

    files = {}
    for spec in inputs:
        path = find_graph_file(spec.path, directory)
        if path is None:
            raise KgtkIOError(f"input not found: {spec.path}")
        files[spec.name] = path

    spec = assemble_query(
        inputs,
        match,
        [text for text, _ in optionals],
        where_text=where,
        return_text=return_,
        order_text=order_by,
        limit=limit,
        opt_where_texts=[condition for _, condition in optionals],
    )
    result = oracle_query(spec, load_graphs(files))
    write_result(output, ColumnSchema(result.columns), result.rows, click.get_binary_stream("stdout"))


@cli.command()
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", default="usecase-results", show_default=True, help="Result directory")
@click.option("--cache", help="Cache file, emptied before each cold run (default: inside --out)")
@click.option("--no-oracle", is_flag=True, help="Skip the oracle comparison")
@handle_errors
def usecases(corpus_dir, out_dir, cache, no_oracle):
    """Run the seven use-case queries cold and warm, and report timings."""
    cache_path = Path(cache) if cache else Path(out_dir) / "usecases.sqlite3"
    results = run_usecases(corpus_dir, cache_path, out_dir, oracle=not no_oracle)

    table = Table(title="Use-case Timings")
    table.add_column("Query", style="cyan")
    table.add_column("Cold (min)", justify="right")
    table.add_column("Warm (min)", justify="right")
    table.add_column("Speedup", justify="right")
    table.add_column("Rows", justify="right")
    table.add_column("Oracle", style="green")

    for r in results:
        speedup = f"{r.speedup:.1f}x" if r.speedup is not None else "-"
        table.add_row(
            r.name,
            f"{r.cold_seconds / 60:.3f}",
            f"{r.warm_seconds / 60:.3f}",
            speedup,
            str(r.rows),
            r.oracle,
        )

    console.print(table)
    console.print(f"Report written to {Path(out_dir) / 'report.tsv'}")


def run(argv: list[str]) -> int:
    """Run the CLI in-process and return its exit code."""
    return cli.main(args=list(argv), prog_name="kypherhound", standalone_mode=False)


if __name__ == "__main__":
    cli()
