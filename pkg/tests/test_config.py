"""Run configuration: config file parsing, flag layering, data root
resolution, and the report file format."""

import json

import pytest

from citescope.config import (DATA_ROOT_ENV, DEFAULT_SEEDS, RunConfig,
                              build_run_config, parse_config_file)
from citescope.errors import ConfigError, ParseError, ValidationError
from citescope.reports import (doc_scores, format_table, load_report,
                               write_report)


class TestParseConfigFile:
    def test_key_value_lines(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# a comment\n"
                     "task = saliency\n"
                     "\n"
                     "lr = 0.5\n"
                     "seeds = 1, 2, 3\n")
        assert parse_config_file(p) == {"task": "saliency", "lr": "0.5",
                                        "seeds": "1, 2, 3"}

    def test_malformed_line_rejected_with_location(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("task = mention\nnot a setting\n")
        with pytest.raises(ConfigError, match=":2"):
            parse_config_file(p)

    def test_missing_file_is_config_error(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config_file(tmp_path / "nope.cfg")


class TestBuildRunConfig:
    def test_defaults(self):
        cfg = build_run_config(env={})
        assert cfg.seeds == DEFAULT_SEEDS
        assert cfg.task == "relation"
        assert cfg.deterministic is True

    def test_flags_override_config_file(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("task = mention\nlr = 0.5\nuse_tfidf = true\n")
        cfg = build_run_config(p, {"lr": 0.9}, env={})
        assert cfg.task == "mention"
        assert cfg.lr == 0.9
        assert cfg.use_tfidf is True

    def test_seed_list_coercion(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("seeds = 7 8 9\n")
        assert build_run_config(p, env={}).seeds == (7, 8, 9)

    def test_unknown_key_rejected(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("tsak = mention\n")
        with pytest.raises(ConfigError):
            build_run_config(p, env={})

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError):
            build_run_config(overrides={"epochs": "soon"}, env={})

    def test_data_root_resolves_relative_paths(self, tmp_path):
        cfg = build_run_config(
            overrides={"corpus": "data/c.jsonl",
                       "report": "/abs/r.jsonl"},
            env={DATA_ROOT_ENV: str(tmp_path)})
        assert cfg.corpus == str(tmp_path / "data" / "c.jsonl")
        assert cfg.report == "/abs/r.jsonl"

    def test_validate_inputs_requires_existing_paths(self, tmp_path):
        missing = tmp_path / "gone.jsonl"
        cfg = build_run_config(overrides={"corpus": str(missing)}, env={})
        with pytest.raises(ConfigError, match="corpus"):
            cfg.validate_inputs()
        missing.write_text("")
        cfg.validate_inputs()

    def test_invalid_task_and_fusion(self):
        with pytest.raises(ConfigError):
            RunConfig(task="coref")
        with pytest.raises(ConfigError):
            RunConfig(fusion="stage3")
        with pytest.raises(ConfigError):
            RunConfig(seeds=())

    def test_settings_is_json_serializable(self):
        settings = RunConfig().settings()
        assert json.dumps(settings)
        assert settings["seeds"] == list(DEFAULT_SEEDS)


class TestReports:
    def test_round_trip_with_header(self, tmp_path):
        path = tmp_path / "r.jsonl"
        rows = [{"doc_id": "a", "score": 0.5},
                {"doc_id": "b", "score": 1.0}]
        write_report(path, {"task": "relation"}, rows,
                     summary={"mean": 0.75})
        header, got = load_report(path)
        assert header["settings"]["task"] == "relation"
        assert header["summary"]["mean"] == 0.75
        assert "degenerate_document" in header["conventions"]
        assert got == rows

    def test_doc_scores_extraction(self):
        rows = [{"doc_id": "a", "score": 0.5}]
        assert doc_scores(rows) == {"a": 0.5}
        with pytest.raises(ValidationError):
            doc_scores([{"doc_id": "a"}])

    def test_headerless_file_rejected(self, tmp_path):
        path = tmp_path / "r.jsonl"
        path.write_text('{"doc_id": "a", "score": 1.0}\n')
        with pytest.raises(ParseError):
            load_report(path)

    def test_format_table_alignment(self):
        text = format_table([{"doc_id": "a", "score": 0.5}],
                            ["doc_id", "score"])
        lines = text.splitlines()
        assert lines[0].startswith("doc_id")
        assert "0.5000" in lines[2]
