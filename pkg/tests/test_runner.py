import json

import pytest
import yaml

from nativemix import cli
from nativemix.corpus import load_corpus
from nativemix.errors import ConfigError
from nativemix.runner import ExperimentConfig, run
from synthdata import write_experiment_corpora


def base_config(paths, tmp_path, experiment="native_mix", models=None, seeds=None):
    return {
        "corpora": {
            "cm": {"path": str(paths["cm"]), "format": "jsonl",
                   "source": "codemixed"},
            "alpha": {"path": str(paths["alpha"]), "format": "jsonl",
                      "source": "hindi"},
            "beta": {"path": str(paths["beta"]), "format": "jsonl",
                     "source": "english"},
        },
        "base": "cm",
        "donors": ["alpha", "beta"],
        "experiment": experiment,
        "split": {"train": 0.7, "val": 0.15, "test": 0.15, "seed": 5},
        "mix": {"seed": 9},
        "features": {"ngram_orders": [1, 2], "min_doc_freq": 2},
        "models": models or [
            {"name": "nb", "kind": "nb", "alpha": 1.0},
            {"name": "svm", "kind": "svm", "lam": 1e-4, "epochs": 5},
        ],
        "seeds": seeds or [1, 2],
        "output_dir": str(tmp_path / "runs"),
    }


@pytest.fixture
def corpora_paths(tmp_path):
    return write_experiment_corpora(tmp_path)


class TestConfigValidation:
    def test_missing_file_fails_before_work(self, tmp_path, corpora_paths):
        raw = base_config(corpora_paths, tmp_path)
        raw["corpora"]["cm"]["path"] = str(tmp_path / "nope.jsonl")
        config = ExperimentConfig.from_dict(raw)
        with pytest.raises(ConfigError):
            config.validate()
        assert not (tmp_path / "runs").exists()

    def test_unknown_experiment(self, tmp_path, corpora_paths):
        raw = base_config(corpora_paths, tmp_path, experiment="exp9")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(raw).validate()

    def test_duplicate_seeds(self, tmp_path, corpora_paths):
        raw = base_config(corpora_paths, tmp_path, seeds=[1, 1])
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(raw).validate()

    def test_unknown_model_kind(self, tmp_path, corpora_paths):
        raw = base_config(corpora_paths, tmp_path,
                          models=[{"name": "x", "kind": "mystery"}])
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(raw).validate()


class TestExp1:
    def test_cell_grid_and_artifacts(self, tmp_path, corpora_paths):
        raw = base_config(corpora_paths, tmp_path)
        config = ExperimentConfig.from_dict(raw)
        result = run(config, run_dir_name="r1")

        # 3 training sets x 2 models x 2 seeds
        assert len(result.reports) == 12
        assert result.training_set_names == ["cm", "mix-equal", "mix-ratio"]

        run_dir = result.run_dir
        assert (run_dir / "results.csv").exists()
        assert (run_dir / "summary.csv").exists()
        assert (run_dir / "table.txt").exists()
        assert (run_dir / "manifest.json").exists()
        for name in result.training_set_names:
            assert (run_dir / "training_sets" / f"{name}.jsonl").exists()
            manifest = json.loads(
                (run_dir / "training_sets" / f"{name}.manifest.json").read_text())
            assert manifest["prng"] == "numpy-pcg64"

        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["status"] == "complete"
        assert manifest["config_hash"] == config.config_hash()

    def test_no_leakage_into_training_sets(self, tmp_path, corpora_paths):
        raw = base_config(corpora_paths, tmp_path)
        result = run(ExperimentConfig.from_dict(raw), run_dir_name="r2")
        run_dir = result.run_dir
        test_ids = {s.id for s in
                    load_corpus(run_dir / "splits" / "cm-test.jsonl").samples}
        for name in result.training_set_names:
            train = load_corpus(run_dir / "training_sets" / f"{name}.jsonl")
            assert not ({s.id for s in train.samples} & test_ids)

    def test_rerun_reproduces_results_csv(self, tmp_path, corpora_paths):
        raw = base_config(corpora_paths, tmp_path)
        first = run(ExperimentConfig.from_dict(raw), run_dir_name="a")
        second = run(ExperimentConfig.from_dict(raw), run_dir_name="b")
        bytes_a = (first.run_dir / "results.csv").read_bytes()
        bytes_b = (second.run_dir / "results.csv").read_bytes()
        assert bytes_a == bytes_b

    def test_grid_selection_recorded(self, tmp_path, corpora_paths):
        models = [{"name": "nb", "kind": "nb",
                   "grid": {"alpha": [0.5, 1.0]}}]
        raw = base_config(corpora_paths, tmp_path, models=models, seeds=[1])
        result = run(ExperimentConfig.from_dict(raw), run_dir_name="g")
        report = json.loads(
            (result.run_dir / "cells" / "cm" / "nb" / "seed-1" /
             "report.json").read_text())
        assert report["params"]["alpha"] in (0.5, 1.0)


class TestExp2:
    def test_sweep_sets_and_csv(self, tmp_path, corpora_paths):
        raw = base_config(corpora_paths, tmp_path, experiment="batch_sweep",
                          models=[{"name": "nb", "kind": "nb"}], seeds=[1, 2])
        raw["sweep"] = {"batch_size_per_language": 10, "num_steps": 3,
                        "ratio_modes": ["equal", "base"]}
        result = run(ExperimentConfig.from_dict(raw), run_dir_name="s")
        assert len(result.training_set_names) == 6  # 2 modes x 3 steps
        sweep_csv = (result.run_dir / "sweep.csv").read_text()
        header = sweep_csv.splitlines()[0]
        assert header == "model,ratio,metric,10,20,30"
        assert len(sweep_csv.splitlines()) == 1 + 2 * 4  # 1 model x 2 modes x 4 metrics


class TestExp3:
    def test_native_only_sets(self, tmp_path, corpora_paths):
        raw = base_config(corpora_paths, tmp_path,
                          experiment="native_only",
                          models=[{"name": "nb", "kind": "nb"}], seeds=[1])
        result = run(ExperimentConfig.from_dict(raw), run_dir_name="n")
        assert result.training_set_names == [
            "native-alpha", "native-beta", "native-alpha+beta"]
        native = load_corpus(
            result.run_dir / "training_sets" / "native-alpha.jsonl")
        counts = list(native.counts.values())
        assert counts[0] == counts[1]
        assert all(s.id.startswith("alpha") for s in native.samples)


class TestMlmDelegation:
    def test_job_descriptors_emitted(self, tmp_path, corpora_paths):
        models = [{"name": "nb", "kind": "nb"},
                  {"name": "xlmr", "kind": "mlm", "model_id": "xlm-r",
                   "head": "four_transformer_layers", "batch_size": 8}]
        raw = base_config(corpora_paths, tmp_path, experiment="baseline_only",
                          models=models, seeds=[1, 2])
        result = run(ExperimentConfig.from_dict(raw), run_dir_name="m")
        # statistical cells ran, mlm cells were delegated
        assert {r.model_name for r in result.reports} == {"nb"}
        for seed in (1, 2):
            job_path = (result.run_dir / "cells" / "cm" / "xlmr" /
                        f"seed-{seed}" / "job.json")
            assert job_path.exists()
            job = json.loads(job_path.read_text())
            assert job["model_id"] == "xlm-r"
            assert job["learning_rate"] == 2e-5
            assert job["scheduler_decay"] == 0.9
            assert job["max_epochs"] == 25
            assert job["patience"] == 4
            assert job["batch_size"] == 8
            assert job["seed"] == seed


class TestCli:
    def test_run_and_report(self, tmp_path, corpora_paths, capsys):
        raw = base_config(corpora_paths, tmp_path, seeds=[1, 2])
        config_path = tmp_path / "config.yaml"
        config_path.write_text(yaml.safe_dump(raw))
        rc = cli.main(["run", "--config", str(config_path),
                       "--run-dir-name", "cli-run"])
        assert rc == 0
        run_dir = tmp_path / "runs" / "cli-run"
        rc = cli.main(["report", "--results", str(run_dir)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "mix-equal" in out

    def test_set_flag_overrides_config_scalar(self, tmp_path, corpora_paths):
        raw = base_config(corpora_paths, tmp_path, seeds=[1],
                          models=[{"name": "nb", "kind": "nb"}],
                          experiment="baseline_only")
        config_path = tmp_path / "config.yaml"
        config_path.write_text(yaml.safe_dump(raw))
        for name, seed in (("o1", 5), ("o2", 6)):
            rc = cli.main(["run", "--config", str(config_path),
                           "--set", f"split.seed={seed}",
                           "--run-dir-name", name])
            assert rc == 0
        split_a = (tmp_path / "runs" / "o1" / "splits" / "cm-train.jsonl")
        split_b = (tmp_path / "runs" / "o2" / "splits" / "cm-train.jsonl")
        assert split_a.read_bytes() != split_b.read_bytes()

    def test_per_corpus_label_mapping(self, tmp_path):
        # HASOC-style labels remapped via the corpus config
        path = tmp_path / "hof.jsonl"
        lines = [
            json.dumps({"id": f"s{i}", "text": f"word{i} tok",
                        "label": "HOF" if i % 2 == 0 else "NOT"})
            for i in range(12)
        ]
        path.write_text("\n".join(lines) + "\n")
        raw = {
            "corpora": {"cm": {"path": str(path), "source": "codemixed",
                               "labels": {"HOF": "hate", "NOT": "non-hate"}}},
            "base": "cm",
            "experiment": "baseline_only",
            "split": {"train": 0.5, "val": 0.25, "test": 0.25, "seed": 1},
            "models": [{"name": "nb", "kind": "nb"}],
            "seeds": [1],
            "features": {"ngram_orders": [1], "min_doc_freq": 1},
            "output_dir": str(tmp_path / "runs"),
        }
        result = run(ExperimentConfig.from_dict(raw), run_dir_name="hof")
        assert len(result.reports) == 1

    def test_run_validation_error_exit_code(self, tmp_path, corpora_paths):
        raw = base_config(corpora_paths, tmp_path)
        raw["corpora"]["cm"]["path"] = str(tmp_path / "missing.jsonl")
        config_path = tmp_path / "config.yaml"
        config_path.write_text(yaml.safe_dump(raw))
        assert cli.main(["run", "--config", str(config_path)]) == 1

    def test_split_mix_round_trip(self, tmp_path, corpora_paths, capsys):
        outdir = tmp_path / "splits"
        rc = cli.main(["split", "--input", str(corpora_paths["cm"]),
                       "--seed", "3", "--outdir", str(outdir)])
        assert rc == 0
        assert (outdir / "cm-train.jsonl").exists()

        plan = {
            "name": "mini-mix",
            "seed": 4,
            "base": {"path": str(outdir / "cm-train.jsonl"),
                     "source": "codemixed"},
            "additions": [
                {"corpus": {"path": str(corpora_paths["alpha"]),
                            "source": "hindi"},
                 "counts": {"hate": 5, "non-hate": 5}},
            ],
        }
        plan_path = tmp_path / "plan.yaml"
        plan_path.write_text(yaml.safe_dump(plan))
        out_path = tmp_path / "mixed.jsonl"
        assert cli.main(["mix", "--plan", str(plan_path),
                         "--out", str(out_path)]) == 0
        mixed = load_corpus(out_path)
        base = load_corpus(outdir / "cm-train.jsonl")
        assert len(mixed) == len(base) + 10
        manifest = json.loads(
            out_path.with_suffix(".manifest.json").read_text())
        assert manifest["seed"] == 4

        # identical seeds give byte-identical outputs
        out2 = tmp_path / "mixed2.jsonl"
        assert cli.main(["mix", "--plan", str(plan_path),
                         "--out", str(out2)]) == 0
        assert out_path.read_bytes() == out2.read_bytes()

    def test_train_predict_evaluate(self, tmp_path, corpora_paths, capsys):
        model_dir = tmp_path / "model"
        rc = cli.main(["train", "--train", str(corpora_paths["cm"]),
                       "--model-kind", "nb", "--out", str(model_dir),
                       "--ngram-orders", "1", "--min-df", "1"])
        assert rc == 0
        predictions = tmp_path / "predictions.jsonl"
        rc = cli.main(["predict", "--model", str(model_dir),
                       "--input", str(corpora_paths["cm"]),
                       "--out", str(predictions)])
        assert rc == 0
        rc = cli.main(["evaluate", "--predictions", str(predictions),
                       "--out", str(tmp_path / "metrics.json")])
        assert rc == 0
        metrics = json.loads((tmp_path / "metrics.json").read_text())
        assert metrics["acc"] > 0.9  # planted cues make training data easy

    def test_cmi_subcommand(self, tmp_path, capsys):
        corpus_path = tmp_path / "tagged.jsonl"
        corpus_path.write_text(
            '{"id": "a", "text": "ek one", "label": "hate", '
            '"lang_tags": ["hi", "en"]}\n')
        csv_path = tmp_path / "per_sample.csv"
        summary_path = tmp_path / "summary.json"
        rc = cli.main(["cmi", "--input", str(corpus_path),
                       "--csv", str(csv_path),
                       "--summary", str(summary_path)])
        assert rc == 0
        assert "50.00" in csv_path.read_text()
        summary = json.loads(summary_path.read_text())
        assert summary["avg_cmi"] == 50.0
        assert summary["avg_burstiness"] == -1.0
