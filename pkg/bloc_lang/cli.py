"""
Command-line interface: ``bloc <subcommand>``.

Machine-readable results go to ``--output`` (``-`` for standard output); the
human-readable summary goes to standard output, or to standard error when the
results themselves are written to standard output.
"""

import json
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, Optional, TextIO

import click
from pydantic import ValidationError as PydanticValidationError

from bloc_lang.api.botdetect import load_model, predict_dataset, save_model
from bloc_lang.api.coorddetect import knn_driver_eval, windowed_eval
from bloc_lang.api.langmodel import write_transition_table
from bloc_lang.api.vectorspace import build_vocabulary, vectorize, write_sparse_matrix
from bloc_lang.exceptions import BlocError, ConfigError
from bloc_lang.models.alphabet import DEFAULT_PAUSE_GLYPHS, render_word, word_key
from bloc_lang.models.config import RunConfig
from bloc_lang.models.coorddetect import ClusterReport, KnnReport, SimilarityMethod
from bloc_lang.models.language import LanguageConfig
from bloc_lang.models.timeline import Label
from bloc_lang.v1 import Client
from bloc_lang.version import describe_versions

logger = logging.getLogger(__name__)

STDOUT = "-"


class BlocCommandError(click.ClickException):
    """A BlocError surfaced on the command line with its categorized exit code."""

    def __init__(self, error: BlocError) -> None:
        super().__init__(error.message)
        self.exit_code = error.exit_code


class BlocGroup(click.Group):
    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except BlocError as exc:
            logger.debug(f"{type(exc).__name__}: {exc.message}", exc_info=True)
            raise BlocCommandError(exc) from exc


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _print_version(ctx: click.Context, _param: click.Parameter, value: bool) -> None:
    if not value or ctx.resilient_parsing:
        return
    click.echo(describe_versions())
    ctx.exit()


def _parse_glyphs(value: Optional[str]) -> dict[str, str]:
    glyphs = dict(DEFAULT_PAUSE_GLYPHS)
    if not value:
        return glyphs
    for item in value.split(","):
        symbol, separator, glyph = item.partition("=")
        if not separator or symbol.strip() not in glyphs:
            raise click.BadParameter(f"expected SYMBOL=GLYPH pairs for {', '.join(glyphs)}; got {item!r}")
        glyphs[symbol.strip()] = glyph
    return glyphs


def data_options(labels: bool = False) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
    """Input files; each falls back to the ``data``, ``graph`` and ``labels`` configuration keys."""

    def decorator(func: Callable[..., Any]) -> Callable[..., Any]:
        path_type = click.Path(path_type=Path, dir_okay=False)
        func = click.option("--graph", type=path_type, default=None, help="JSON friend graph.")(func)
        if labels:
            func = click.option("--labels", type=path_type, default=None, help="CSV of account labels.")(func)
        return click.option("--data", type=path_type, default=None, help="JSON Lines post file.")(func)

    return decorator


def language_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """BLOC language parameters overriding the configuration file."""
    options = [
        click.option("--p1", default=None, help="Session threshold, e.g. 60s, 1m, 2h."),
        click.option("--p2", type=click.Choice(["f1", "f2"]), default=None, help="Pause alphabet."),
        click.option("--p3/--no-p3", default=None, help="Content words per session."),
        click.option("--p4", default=None, help="Tokenization: pause or ngram(n)."),
        click.option("--p5/--no-p5", default=None, help="Sort symbols within words."),
        click.option("--p6", type=int, default=None, help="Word truncation length."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def output_option(required_path: bool = False, help_text: str = "Output file, '-' for standard output.") -> Any:
    default = None if required_path else STDOUT
    return click.option("--output", "-o", default=default, help=help_text)


def _client(
        ctx: click.Context,
        preset: Optional[LanguageConfig] = None,
        language: Optional[dict[str, Any]] = None,
        **overrides: Any,
) -> Client:
    """Validate the effective configuration and bind it to a client."""
    config: RunConfig = ctx.obj.with_overrides(**overrides)
    effective = config.language_or(preset or LanguageConfig())
    updates = {key: value for key, value in (language or {}).items() if value is not None}
    if updates:
        try:
            effective = LanguageConfig.model_validate({**effective.model_dump(), **updates})
        except PydanticValidationError as exc:
            raise ConfigError(f"Invalid language parameters: {exc}") from exc
    return Client(config, language=effective)


def _output_path(output: Optional[str], config: RunConfig, name: str) -> str:
    if output is not None:
        return output
    if config.paths.output is not None:
        return str(config.paths.output)
    raise click.UsageError(f"{name} needs --output or 'output' in the configuration")


def _summary(output: str, message: str) -> None:
    click.echo(message, err=output == STDOUT)


@click.group(name="bloc", cls=BlocGroup)
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path, exists=True, dir_okay=False, readable=True),
    default=None,
    help="Flat TOML run configuration.",
)
@click.option("-v", "--verbose", count=True, help="Log progress (-v) or details (-vv) to standard error.")
@click.option(
    "--version",
    is_flag=True,
    expose_value=False,
    is_eager=True,
    callback=_print_version,
    help="Show the package version and the schema version of every file format.",
)
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[Path], verbose: int) -> None:
    """Behavioral Language for Online Classification."""
    _configure_logging(verbose)
    ctx.obj = RunConfig.from_file(config_path) if config_path is not None else RunConfig()
    logger.debug(f"Effective configuration: {ctx.obj.to_flat()}")


@cli.command(name="encode")
@data_options()
@language_options
@click.option("--pause-glyphs", default=None, help="Pause rendering as SYMBOL=GLYPH pairs, e.g. 't_h=H,t_d=D'.")
@output_option()
@click.pass_context
def encode_command(
        ctx: click.Context,
        data: Optional[Path],
        graph: Optional[Path],
        pause_glyphs: Optional[str],
        output: str,
        **language: Any,
) -> None:
    """Encode every account as ACCOUNT<TAB>ACTION<TAB>(w1)(w2)... lines."""
    glyphs = _parse_glyphs(pause_glyphs)
    client = _client(ctx, language=language, data=data, graph=graph)
    documents = client.encoder.encode_dataset(client.timeline.load())
    with click.open_file(output, "w", encoding="utf-8") as stream:
        for account_id, doc in documents.items():
            content = "".join(f"({render_word(word, glyphs)})" for word in doc.content_words)
            stream.write(f"{account_id}\t{doc.action_string(glyphs)}\t{content}\n")
    _summary(output, f"Encoded {len(documents)} accounts")


@cli.command(name="tokenize")
@data_options()
@language_options
@output_option()
@click.pass_context
def tokenize_command(
        ctx: click.Context,
        data: Optional[Path],
        graph: Optional[Path],
        output: str,
        **language: Any,
) -> None:
    """Tokenize every account as ACCOUNT<TAB>word:count,... lines."""
    client = _client(ctx, language=language, data=data, graph=graph)
    terms = client.vectors.terms(client.timeline.load())
    with click.open_file(output, "w", encoding="utf-8") as stream:
        for account_id, counts in terms.items():
            entries = ",".join(
                f"{render_word(word)}:{counts[word]}" for word in sorted(counts, key=word_key) if counts[word] > 0
            )
            stream.write(f"{account_id}\t{entries}\n")
    _summary(output, f"Tokenized {len(terms)} accounts under {client.vectors.language().p4}")


@cli.command(name="vectorize")
@data_options(labels=True)
@language_options
@click.option("--top-words", type=click.IntRange(min=1), default=None, help="K most frequent words per label.")
@output_option()
@click.pass_context
def vectorize_command(
        ctx: click.Context,
        data: Optional[Path],
        graph: Optional[Path],
        labels: Optional[Path],
        top_words: Optional[int],
        output: str,
        **language: Any,
) -> None:
    """Write TF-IDF vectors as a sparse matrix: 'D k', then ACCOUNT dim:weight ... lines."""
    client = _client(ctx, language=language, data=data, graph=graph, labels=labels)
    dataset = client.timeline.load()
    terms = client.vectors.terms(dataset)
    vocabulary = build_vocabulary([terms[account] for account in sorted(terms)])
    with click.open_file(output, "w", encoding="utf-8") as stream:
        write_sparse_matrix(vectorize(terms, vocabulary), vocabulary, stream)
    _summary(output, f"Vectorized {len(terms)} accounts over {len(vocabulary)} words")
    if top_words is not None:
        for label, words in client.vectors.top_words_by_label(dataset, top_words).items():
            _summary(output, f"{label.value}: {' '.join(render_word(word) for word in words)}")


@cli.command(name="langmodel")
@data_options()
@language_options
@output_option()
@click.pass_context
def langmodel_command(
        ctx: click.Context,
        data: Optional[Path],
        graph: Optional[Path],
        output: str,
        **language: Any,
) -> None:
    """Fit a Markov chain over the action strings and write from,to,prob rows."""
    client = _client(ctx, language=language, data=data, graph=graph)
    documents = client.encoder.encode_dataset(client.timeline.load())
    model = client.langmodel.fit(documents.values())
    with click.open_file(output, "w", encoding="utf-8") as stream:
        write_transition_table(model, stream)
    entropies = [client.langmodel.entropy(doc) for doc in documents.values() if doc.action]
    mean = sum(entropies) / len(entropies) if entropies else 0.0
    _summary(output, f"Fit {len(model.states())} states over {len(documents)} accounts; mean entropy {mean:.3f} bits")


def _cluster_payload(report: ClusterReport) -> dict[str, Any]:
    partition = report.partition
    return {
        "start": report.start.isoformat() if report.start else None,
        "end": report.end.isoformat() if report.end else None,
        "accounts": report.accounts,
        "threshold": report.threshold,
        "nodes": len(report.network.nodes),
        "edges": len(report.network.edges),
        "modularity": partition.modularity if partition is not None else None,
        "communities": [community.model_dump(mode="json") for community in partition] if partition is not None else [],
    }


@cli.command(name="cluster")
@data_options()
@language_options
@click.option("--threshold", type=click.FloatRange(0.0, 1.0), default=None, help="Minimum cosine similarity.")
@click.option("--monthly", is_flag=True, help="Cluster each calendar month separately.")
@click.option("--seed", type=int, default=None, help="Louvain seed.")
@output_option(required_path=True, help_text="Directory for the edge lists and the community report.")
@click.pass_context
def cluster_command(
        ctx: click.Context,
        data: Optional[Path],
        graph: Optional[Path],
        threshold: Optional[float],
        monthly: bool,
        seed: Optional[int],
        output: Optional[str],
        **language: Any,
) -> None:
    """Link near-identical accounts and report their Louvain communities."""
    client = _client(
        ctx, preset=LanguageConfig.behavioral_clusters(), language=language,
        data=data, graph=graph, threshold=threshold, seed=seed,
    )
    directory = Path(_output_path(output, client.config, "cluster"))
    reports = client.coordination.clusters(client.timeline.load(), monthly=monthly)

    directory.mkdir(parents=True, exist_ok=True)
    for report in reports:
        name = f"edges-{report.start:%Y-%m}.csv" if report.start is not None else "edges.csv"
        with (directory / name).open("w", encoding="utf-8", newline="") as stream:
            stream.write("a,b,weight\n")
            for edge in report.network.edges:
                stream.write(f"{edge.a},{edge.b},{edge.weight!r}\n")
    payload = [_cluster_payload(report) for report in reports]
    (directory / "communities.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    for entry in payload:
        period = entry["start"][:7] if entry["start"] else "all"
        click.echo(f"{period}: {entry['accounts']} accounts, {entry['edges']} edges, "
                   f"{len(entry['communities'])} communities")


@cli.command(name="bot-train")
@data_options(labels=True)
@language_options
@click.option("--trees", type=click.IntRange(min=1), default=None, help="Ensemble size.")
@click.option("--seed", type=int, default=None, help="Random seed.")
@output_option(required_path=True, help_text="Model file to write.")
@click.pass_context
def bot_train_command(
        ctx: click.Context,
        data: Optional[Path],
        graph: Optional[Path],
        labels: Optional[Path],
        trees: Optional[int],
        seed: Optional[int],
        output: Optional[str],
        **language: Any,
) -> None:
    """Train a bot classifier on a bot/human labeled dataset."""
    client = _client(
        ctx, preset=LanguageConfig.bot_detection(), language=language,
        data=data, graph=graph, labels=labels, trees=trees, seed=seed,
    )
    path = _output_path(output, client.config, "bot-train")
    model = client.bots.train(client.timeline.load())
    save_model(model, path)
    click.echo(f"Trained {model.trees} trees over {len(model.vocabulary)} words; saved to {path}")


@cli.command(name="bot-predict")
@data_options()
@click.option(
    "--model", "model_path", type=click.Path(path_type=Path, exists=True, dir_okay=False), required=True,
    help="Model file written by bot-train.",
)
@output_option()
@click.pass_context
def bot_predict_command(
        ctx: click.Context,
        data: Optional[Path],
        graph: Optional[Path],
        model_path: Path,
        output: str,
) -> None:
    """Classify every account as account_id,label,score rows."""
    client = _client(ctx, data=data, graph=graph)
    model = load_model(model_path)
    predictions = predict_dataset(model, client.timeline.load())
    with click.open_file(output, "w", encoding="utf-8") as stream:
        stream.write("account_id,label,score\n")
        for prediction in predictions:
            stream.write(f"{prediction.account_id},{prediction.label.value},{prediction.score!r}\n")
    bots = sum(1 for prediction in predictions if prediction.label is Label.BOT)
    _summary(output, f"Classified {len(predictions)} accounts: {bots} bot, {len(predictions) - bots} human")


@cli.command(name="bot-eval")
@data_options(labels=True)
@language_options
@click.option("--folds", type=click.IntRange(min=2), default=None, help="Cross-validation folds.")
@click.option("--trees", type=click.IntRange(min=1), default=None, help="Ensemble size.")
@click.option("--seed", type=int, default=None, help="Random seed.")
@click.option("--balance/--no-balance", default=None, help="Downsample the majority class.")
@click.option("--n-jobs", type=int, default=None, help="Parallel jobs per forest.")
@output_option()
@click.pass_context
def bot_eval_command(
        ctx: click.Context,
        data: Optional[Path],
        graph: Optional[Path],
        labels: Optional[Path],
        folds: Optional[int],
        trees: Optional[int],
        seed: Optional[int],
        balance: Optional[bool],
        n_jobs: Optional[int],
        output: str,
        **language: Any,
) -> None:
    """Cross-validate the bot classifier and write the report as JSON."""
    client = _client(
        ctx, preset=LanguageConfig.bot_detection(), language=language,
        data=data, graph=graph, labels=labels, folds=folds, trees=trees, seed=seed, balance=balance, n_jobs=n_jobs,
    )
    report = client.bots.evaluate(client.timeline.load())
    with click.open_file(output, "w", encoding="utf-8") as stream:
        stream.write(report.model_dump_json(indent=2) + "\n")
    _summary(output, f"precision={report.precision:.3f} recall={report.recall:.3f} f1={report.f1:.3f} "
                     f"({report.accounts} accounts, {report.folds} folds)")


def _write_knn_rows(stream: TextIO, weeks: str, report: KnnReport) -> None:
    for point in report.per_k:
        stream.write(f"{weeks},{point.k},{point.precision!r},{point.recall!r},{point.f1!r}\n")


@cli.command(name="coord-eval")
@data_options(labels=True)
@language_options
@click.option("--method", type=click.Choice([m.value for m in SimilarityMethod]), default=None, help="Similarity.")
@click.option("--window-weeks", type=click.IntRange(min=1), default=None, help="Weeks added per evaluation window.")
@click.option("--max-windows", type=click.IntRange(min=1), default=None, help="Stop after this many windows.")
@click.option("--k-max", type=click.IntRange(min=1), default=None, help="Evaluate k = 1 .. K.")
@click.option("--windowed/--whole", default=True, help="Cumulative windows, or the whole dataset at once.")
@output_option()
@click.pass_context
def coord_eval_command(
        ctx: click.Context,
        data: Optional[Path],
        graph: Optional[Path],
        labels: Optional[Path],
        method: Optional[str],
        window_weeks: Optional[int],
        max_windows: Optional[int],
        k_max: Optional[int],
        windowed: bool,
        output: str,
        **language: Any,
) -> None:
    """Leave-one-out KNN driver detection, written as weeks,k,precision,recall,f1 rows."""
    client = _client(
        ctx, preset=LanguageConfig.behavioral_clusters(), language=language,
        data=data, graph=graph, labels=labels,
        method=method, window_weeks=window_weeks, max_windows=max_windows, k_max=k_max,
    )
    dataset = client.timeline.load()
    settings = client.config.coordination
    k_range = range(1, settings.k_max + 1)
    cfg = client.coordination.language(LanguageConfig.behavioral_clusters())

    with click.open_file(output, "w", encoding="utf-8") as stream:
        stream.write("weeks,k,precision,recall,f1\n")
        if windowed:
            series = windowed_eval(
                dataset, settings.method, settings.window_weeks, settings.max_windows, k_range, cfg,
            )
            for point in series:
                _write_knn_rows(stream, str(point.weeks), point.report)
            for point in series:
                _summary(output, f"week {point.weeks}: {point.drivers} drivers, {point.controls} controls, "
                                 f"f1={point.f1:.3f}")
        else:
            report = knn_driver_eval(dataset, settings.method, k_range, cfg)
            _write_knn_rows(stream, "all", report)
            _summary(output, f"{report.method.value}: best f1={report.best_f1:.3f} "
                             f"({report.drivers} drivers, {report.controls} controls)")


def main() -> None:
    """Console script entry point."""
    cli(prog_name="bloc")


if __name__ == "__main__":  # pragma: no cover
    main()
