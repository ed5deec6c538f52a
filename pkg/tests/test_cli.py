"""
Unit tests for the command-line interface.
"""

import json

import pytest
from click.testing import CliRunner

from bloc_lang.cli import cli
from bloc_lang.models.timeline import Label
from bloc_lang.version import __version__
from tests import factories


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def nasa_file(tmp_path):
    return factories.write_posts(tmp_path / "nasa.jsonl", factories.nasa_posts())


@pytest.fixture
def separable_files(tmp_path, separable_dataset):
    posts = factories.write_posts(tmp_path / "posts.jsonl", factories.all_posts(separable_dataset))
    labels = factories.write_labels(tmp_path / "labels.csv", separable_dataset.labels)
    return posts, labels


@pytest.fixture
def campaign_files(tmp_path, campaign_dataset):
    posts = factories.write_posts(tmp_path / "campaign.jsonl", factories.all_posts(campaign_dataset))
    labels = factories.write_labels(tmp_path / "campaign.csv", campaign_dataset.labels)
    return posts, labels


class TestGroup:
    """Test cases for global options and error handling."""

    def test_version(self, runner):
        """Test --version lists the package and format versions."""
        result = runner.invoke(cli, ["--version"])

        assert result.exit_code == 0
        assert f"bloc-lang {__version__}" in result.output
        assert "tree-ensemble: v1" in result.output

    def test_unknown_subcommand(self, runner):
        """Test an unknown subcommand is a usage error."""
        result = runner.invoke(cli, ["translate"])

        assert result.exit_code == 2

    def test_invalid_config(self, runner, tmp_path, nasa_file):
        """Test an invalid configuration value exits with code 2."""
        config = tmp_path / "run.toml"
        config.write_text('p2 = "f9"\n', encoding="utf-8")

        result = runner.invoke(cli, ["--config", str(config), "encode", "--data", str(nasa_file)])

        assert result.exit_code == 2
        assert "Invalid configuration" in result.output

    def test_unknown_config_key(self, runner, tmp_path, nasa_file):
        """Test an unknown configuration key exits with code 2."""
        config = tmp_path / "run.toml"
        config.write_text("colour = 3\n", encoding="utf-8")

        result = runner.invoke(cli, ["--config", str(config), "encode", "--data", str(nasa_file)])

        assert result.exit_code == 2
        assert "colour" in result.output

    def test_invalid_language_flag(self, runner, nasa_file):
        """Test an invalid language parameter exits with code 2."""
        result = runner.invoke(cli, ["encode", "--data", str(nasa_file), "--p1", "soon"])

        assert result.exit_code == 2

    def test_bad_data(self, runner, tmp_path):
        """Test malformed input data exits with code 3."""
        data = tmp_path / "bad.jsonl"
        data.write_text('{"id": "1"\n', encoding="utf-8")

        result = runner.invoke(cli, ["encode", "--data", str(data)])

        assert result.exit_code == 3
        assert "line 1" in result.output

    def test_undecodable_data(self, runner, tmp_path):
        """Test a post file that is not UTF-8 exits with code 3."""
        data = tmp_path / "bad.jsonl"
        data.write_bytes(b"\xff\xfe")

        result = runner.invoke(cli, ["encode", "--data", str(data)])

        assert result.exit_code == 3
        assert "not valid UTF-8" in result.output

    def test_missing_data(self, runner):
        """Test a command without a post file exits with code 2."""
        result = runner.invoke(cli, ["encode"])

        assert result.exit_code == 2


class TestEncodeCommands:
    """Test cases for encode, tokenize, vectorize and langmodel."""

    def test_encode(self, runner, nasa_file):
        """Test the encoded TSV line."""
        result = runner.invoke(cli, ["encode", "--data", str(nasa_file), "--p2", "f1"])

        assert result.exit_code == 0
        assert "nasa\tp.T.r\t(Emt)(mmt)(mmmmmtU)" in result.output

    def test_encode_config_file(self, runner, tmp_path, nasa_file):
        """Test language parameters and paths from a configuration file."""
        config = tmp_path / "run.toml"
        config.write_text(f'p2 = "f1"\ndata = "{nasa_file.as_posix()}"\n', encoding="utf-8")
        output = tmp_path / "out.tsv"

        result = runner.invoke(cli, ["--config", str(config), "encode", "-o", str(output)])

        assert result.exit_code == 0
        assert output.read_text(encoding="utf-8").startswith("nasa\tp.T.r\t")
        assert "Encoded 1 accounts" in result.output

    def test_pause_glyphs(self, runner, tmp_path):
        """Test custom pause glyphs."""
        data = factories.write_posts(tmp_path / "alice.jsonl", factories.alice_posts())
        graph = factories.write_graph(tmp_path / "graph.json", factories.alice_graph())

        result = runner.invoke(cli, [
            "encode", "--data", str(data), "--graph", str(graph), "--pause-glyphs", "t_h=h,t_w=w",
        ])

        assert result.exit_code == 0
        assert "alice\tThpπwR\t" in result.output

    def test_tokenize(self, runner, nasa_file):
        """Test bi-gram token counts."""
        result = runner.invoke(cli, ["tokenize", "--data", str(nasa_file), "--p2", "f1", "--p4", "ngram(2)"])

        assert result.exit_code == 0
        line = next(line for line in result.output.splitlines() if line.startswith("nasa\t"))
        assert "p.:1" in line
        assert "mm:5" in line

    def test_vectorize(self, runner, tmp_path, separable_files):
        """Test the sparse matrix header and top words."""
        posts, labels = separable_files
        output = tmp_path / "vectors.txt"

        result = runner.invoke(cli, [
            "vectorize", "--data", str(posts), "--labels", str(labels), "--top-words", "3", "-o", str(output),
        ])

        assert result.exit_code == 0
        lines = output.read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("200 ")
        assert len(lines) == 201
        assert "bot:" in result.output
        assert "human:" in result.output

    def test_langmodel(self, runner, nasa_file):
        """Test the transition table."""
        result = runner.invoke(cli, ["langmodel", "--data", str(nasa_file), "--p2", "f1"])

        assert result.exit_code == 0
        assert "from,to,prob" in result.output
        assert "p,.,1.0" in result.output


class TestBotCommands:
    """Test cases for bot-train, bot-predict and bot-eval."""

    def test_train_and_predict(self, runner, tmp_path, separable_files):
        """Test a saved model classifies accounts."""
        posts, labels = separable_files
        model = tmp_path / "model.joblib"
        predictions = tmp_path / "predictions.csv"

        trained = runner.invoke(cli, [
            "bot-train", "--data", str(posts), "--labels", str(labels), "--trees", "10", "-o", str(model),
        ])
        predicted = runner.invoke(cli, [
            "bot-predict", "--data", str(posts), "--model", str(model), "-o", str(predictions),
        ])

        assert trained.exit_code == 0
        assert predicted.exit_code == 0
        rows = predictions.read_text(encoding="utf-8").splitlines()
        assert rows[0] == "account_id,label,score"
        assert len(rows) == 201
        assert rows[1].startswith("bot000,bot,")

    def test_train_needs_output(self, runner, separable_files):
        """Test bot-train needs a model path."""
        posts, labels = separable_files

        result = runner.invoke(cli, ["bot-train", "--data", str(posts), "--labels", str(labels)])

        assert result.exit_code == 2

    def test_predict_bad_model(self, runner, tmp_path, nasa_file):
        """Test a file that is not a model exits with code 3."""
        model = tmp_path / "model.joblib"
        model.write_bytes(b"not a model")

        result = runner.invoke(cli, ["bot-predict", "--data", str(nasa_file), "--model", str(model)])

        assert result.exit_code == 3

    def test_eval(self, runner, tmp_path, separable_files):
        """Test the cross-validation report."""
        posts, labels = separable_files
        output = tmp_path / "report.json"

        result = runner.invoke(cli, [
            "bot-eval", "--data", str(posts), "--labels", str(labels), "--trees", "25", "-o", str(output),
        ])

        assert result.exit_code == 0
        report = json.loads(output.read_text(encoding="utf-8"))
        assert report["f1"] >= 0.95
        assert report["folds"] == 5
        assert "f1=" in result.output

    def test_eval_deterministic(self, runner, tmp_path, separable_files):
        """Test equal seeds write identical reports."""
        posts, labels = separable_files
        outputs = [tmp_path / "first.json", tmp_path / "second.json"]

        for output in outputs:
            result = runner.invoke(cli, [
                "bot-eval", "--data", str(posts), "--labels", str(labels),
                "--trees", "5", "--folds", "3", "--seed", "4", "-o", str(output),
            ])
            assert result.exit_code == 0

        assert outputs[0].read_bytes() == outputs[1].read_bytes()

    def test_eval_single_class(self, runner, tmp_path):
        """Test an all-bot dataset exits with code 2."""
        posts = [post for index in range(6) for post in factories.bot_posts(index)]
        data = factories.write_posts(tmp_path / "bots.jsonl", posts)
        labels = factories.write_labels(
            tmp_path / "bots.csv", {f"bot{i:03d}": Label.BOT for i in range(6)},
        )

        result = runner.invoke(cli, ["bot-eval", "--data", str(data), "--labels", str(labels), "--trees", "3"])

        assert result.exit_code == 2
        assert "too few samples to stratify" in result.output


class TestCoordinationCommands:
    """Test cases for cluster and coord-eval."""

    def test_cluster(self, runner, tmp_path, campaign_files):
        """Test the edge list and community report."""
        posts, _ = campaign_files
        output = tmp_path / "clusters"

        result = runner.invoke(cli, ["cluster", "--data", str(posts), "-o", str(output)])

        assert result.exit_code == 0
        assert (output / "edges.csv").read_text(encoding="utf-8").startswith("a,b,weight\n")
        [report] = json.loads((output / "communities.json").read_text(encoding="utf-8"))
        assert report["accounts"] == 220
        assert any(community["members"][0] == "d00" for community in report["communities"])

    def test_coord_eval_whole(self, runner, campaign_files):
        """Test whole-dataset KNN rows."""
        posts, labels = campaign_files

        result = runner.invoke(cli, [
            "coord-eval", "--data", str(posts), "--labels", str(labels),
            "--method", "coretweet", "--whole", "--k-max", "3",
        ])

        assert result.exit_code == 0
        rows = [line for line in result.output.splitlines() if line.startswith("all,")]
        assert [row.split(",")[1] for row in rows] == ["1", "2", "3"]
        assert rows[0].endswith(",1.0")

    def test_coord_eval_windowed(self, runner, tmp_path):
        """Test cumulative-window rows."""
        dataset = factories.late_campaign_dataset()
        posts = factories.write_posts(tmp_path / "late.jsonl", factories.all_posts(dataset))
        labels = factories.write_labels(tmp_path / "late.csv", dataset.labels)
        output = tmp_path / "windows.csv"

        result = runner.invoke(cli, [
            "coord-eval", "--data", str(posts), "--labels", str(labels),
            "--method", "coretweet", "--k-max", "1", "-o", str(output),
        ])

        assert result.exit_code == 0
        assert output.read_text(encoding="utf-8").splitlines() == [
            "weeks,k,precision,recall,f1",
            "2,1,0.0,0.0,0.0",
            "4,1,1.0,1.0,1.0",
        ]


def _snapshot(path):
    if path.is_dir():
        return {str(item.relative_to(path)): item.read_bytes() for item in sorted(path.rglob("*")) if item.is_file()}
    return path.read_bytes()


class TestDeterminism:
    """Test cases for byte-identical output across repeated runs."""

    @pytest.mark.parametrize("command, extra, files", [
        ("encode", ["--p2", "f1"], "separable_files"),
        ("tokenize", ["--p4", "ngram(2)"], "separable_files"),
        ("vectorize", ["--labels", "{labels}", "--top-words", "3"], "separable_files"),
        ("langmodel", [], "separable_files"),
        ("bot-predict", ["--model", "{model}"], "separable_files"),
        ("cluster", ["--seed", "3"], "campaign_files"),
        ("coord-eval", ["--labels", "{labels}", "--method", "coretweet", "--whole", "--k-max", "2"], "campaign_files"),
    ])
    def test_two_runs_identical(self, runner, tmp_path, request, command, extra, files):
        """Test two runs with the same inputs and seed write the same bytes."""
        posts, labels = request.getfixturevalue(files)
        model = tmp_path / "model.joblib"
        if command == "bot-predict":
            trained = runner.invoke(cli, [
                "bot-train", "--data", str(posts), "--labels", str(labels), "--trees", "5", "--seed", "1",
                "-o", str(model),
            ])
            assert trained.exit_code == 0
        arguments = [argument.format(labels=labels, model=model) for argument in extra]

        outputs = [tmp_path / "first", tmp_path / "second"]
        for output in outputs:
            result = runner.invoke(cli, [command, "--data", str(posts), *arguments, "-o", str(output)])
            assert result.exit_code == 0, result.output

        assert _snapshot(outputs[0]) == _snapshot(outputs[1])
