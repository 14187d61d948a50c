from pathlib import Path

import pytest

from zeroday.autoencoder import Activation, LossKind
from zeroday.cli.config import Command, RunConfig, parse_auto, validate
from zeroday.errors import ConfigError


@pytest.mark.config_file("sample-run.yml")
class TestSampleConfig:
    def test_paths_are_relative_to_the_config(self, run_config, data_dir):
        assert run_config.dataset.train == data_dir / "sample-flows.csv"
        assert run_config.out == data_dir / "runs" / "sample"
        assert run_config.source == data_dir / "sample-run.yml"

    def test_sections(self, run_config):
        assert run_config.seed == 7
        assert run_config.threads == 2
        assert run_config.dataset.force_categorical == ("port",)
        assert run_config.preprocess.effective_threshold == 0.9
        assert run_config.autoencoder.loss is LossKind.MAE
        assert run_config.autoencoder.activation is Activation.TANH
        assert run_config.ocsvm is None
        assert run_config.detector == "autoencoder"

    def test_sweep_keeps_auto_entries(self, run_config):
        assert run_config.sweep == (0.15, 0.05, 0.1, "auto:0.9")

    def test_validates_for_every_autoencoder_command(self, run_config):
        for command in (Command.PREPROCESS, Command.TRAIN_AE, Command.EVALUATE):
            assert validate(run_config, command) is run_config

    def test_overrides(self, run_config, tmp_path):
        config = run_config.with_overrides(seed=9, out=tmp_path)
        assert config.seed == 9
        assert config.threads == 2
        assert config.out == tmp_path.resolve()

    def test_architecture_follows_the_pipeline_width(self, run_config):
        arch = run_config.autoencoder.architecture(7)
        assert arch.layer_widths == (7, 4, 2, 4, 7)


def test_all_problems_reported_together(data_dir):
    config = RunConfig.load(data_dir / "broken-run.yml")
    with pytest.raises(ConfigError) as raised:
        validate(config, Command.EVALUATE)
    problems = raised.value.problems
    assert len(problems) >= 4
    assert any("seed" in p for p in problems)
    assert any("no-such-file.csv" in p for p in problems)
    assert any("exactly one detector" in p for p in problems)
    assert any("-0.2" in p for p in problems)


class TestStructure:
    def test_wrong_type(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"seed": "seven"})

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"sede": 7})
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"autoencoder": {"hiden": [4, 2, 4]}})

    def test_unknown_loss(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"autoencoder": {"loss": "huber"}})

    def test_bad_fraction(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"dataset": {"id": "x", "train": "x.csv", "train_fraction": 1.5}})

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "run.yml"
        path.write_text("- just\n- a list\n")
        with pytest.raises(ConfigError):
            RunConfig.load(path)

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "run.yml"
        path.write_text("seed: [1\n")
        with pytest.raises(ConfigError):
            RunConfig.load(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="does not exist"):
            RunConfig.load(tmp_path / "run.yml")

    def test_defaults(self):
        config = RunConfig.from_dict({"ocsvm": {}}, Path("/runs/run.yml"))
        assert config.out == Path("/runs/runs").resolve()
        assert config.ocsvm.gamma == "scale"
        assert config.ocsvm.kernel.gamma == "scale"
        assert config.preprocess.prune


class TestValidate:
    def base(self, tmp_path, **changes):
        train = tmp_path / "train.csv"
        train.write_text("a,label\n1,benign\n")
        data = {"dataset": {"id": "t", "train": str(train)}} | changes
        return RunConfig.from_dict(data, tmp_path / "run.yml")

    def test_nu_sweep_rules(self, tmp_path):
        config = self.base(tmp_path, ocsvm={"gamma": 0.5}, sweep=[0.1, 1.5, "auto:0.9"])
        with pytest.raises(ConfigError) as raised:
            validate(config, Command.TRAIN_SVM)
        assert len(raised.value.problems) == 2

    def test_auto_target_range(self, tmp_path):
        config = self.base(tmp_path, autoencoder={}, sweep=["auto:1.5", "auto:x", "median"])
        with pytest.raises(ConfigError) as raised:
            validate(config, Command.EVALUATE)
        assert len(raised.value.problems) == 3

    def test_empty_sweep(self, tmp_path):
        with pytest.raises(ConfigError, match="sweep"):
            validate(self.base(tmp_path, autoencoder={}), Command.EVALUATE)

    def test_command_sections(self, tmp_path):
        config = self.base(tmp_path)
        for command in (Command.TRAIN_AE, Command.TRAIN_SVM, Command.SEARCH, Command.SYNTH):
            with pytest.raises(ConfigError, match=str(command)):
                validate(config, command)
        assert validate(config, Command.PREPROCESS) is config

    def test_compare_needs_no_dataset(self):
        config = RunConfig.from_dict({})
        assert validate(config, Command.COMPARE) is config

    def test_empty_search_space(self, tmp_path):
        search = {"hidden": [], "learning_rates": [0.01], "epoch_counts": [], "l2_lambdas": [0]}
        with pytest.raises(ConfigError) as raised:
            validate(self.base(tmp_path, search=search), Command.SEARCH)
        assert len(raised.value.problems) == 2


def test_parse_auto():
    assert parse_auto("auto:0.9") == 0.9
    assert parse_auto(0.9) is None
    assert parse_auto("0.9") is None
