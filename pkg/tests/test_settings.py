"""
Tests for examiner settings and filter-rule files.
"""
import pytest

from clawex.clawex import InputError
from clawex.settings import (
    DEFAULT_WINDOW_MS,
    INDEX_ALIASES,
    ExaminerSettings,
    load_filter_rules,
    load_settings,
)


def test_defaults():
    settings = ExaminerSettings()
    assert settings.window_ms == DEFAULT_WINDOW_MS == 5000
    assert settings.reveal is False
    assert settings.capture_time is None


def test_negative_window_rejected():
    with pytest.raises(InputError):
        ExaminerSettings(window_ms=-1)


def test_with_overrides_ignores_none():
    settings = ExaminerSettings().with_overrides(window_ms=None, capture_time=42, reveal=None)
    assert settings.window_ms == DEFAULT_WINDOW_MS
    assert settings.capture_time == 42
    assert settings.reveal is False


def test_from_mapping_merges_aliases():
    settings = ExaminerSettings.from_mapping(
        {"index_aliases": {"sessionId": "sid"}, "schema_markers": "tool schema", "window_ms": 900}
    )
    assert settings.index_aliases["sessionId"] == ("sid",)
    assert settings.index_aliases["spawned_by"] == INDEX_ALIASES["spawned_by"]
    assert settings.schema_markers == ("tool schema",)
    assert settings.window_ms == 900


@pytest.mark.parametrize(
    "data",
    [
        {"no_such_setting": 1},
        {"index_aliases": {"no_such_field": ["x"]}},
        ["not", "a", "mapping"],
    ],
)
def test_from_mapping_rejects(data):
    with pytest.raises(InputError):
        ExaminerSettings.from_mapping(data)


def test_to_dict_is_plain_data():
    data = ExaminerSettings(filter_rules=("**/*.tmp",)).to_dict()
    assert data["filter_rules"] == ["**/*.tmp"]
    assert data["schema_markers"] == list(ExaminerSettings().schema_markers)
    assert list(data["index_aliases"]) == sorted(data["index_aliases"])
    assert all(isinstance(v, list) for v in data["log_aliases"].values())


def test_load_settings(tmp_path):
    path = tmp_path / "settings.yaml"
    path.write_text("window_ms: 2500\nstage_markers: [agent start, agent end]\n")
    settings = load_settings(str(path))
    assert settings.window_ms == 2500
    assert settings.stage_markers == ("agent start", "agent end")


def test_load_settings_missing_or_broken(tmp_path):
    with pytest.raises(InputError):
        load_settings(str(tmp_path / "absent.yaml"))
    path = tmp_path / "broken.yaml"
    path.write_text("window_ms: [unclosed\n")
    with pytest.raises(InputError):
        load_settings(str(path))


@pytest.mark.parametrize(
    "text",
    [
        "- '**/*.tmp'\n- 'logs/**'\n",
        "exclude:\n  - '**/*.tmp'\n  - 'logs/**'\n",
        "# noise\n**/*.tmp\nlogs/**  # rotated\n\n",
    ],
)
def test_load_filter_rules_forms(tmp_path, text):
    path = tmp_path / "filter"
    path.write_text(text)
    assert load_filter_rules(str(path)) == ("**/*.tmp", "logs/**")


def test_load_filter_rules_missing(tmp_path):
    with pytest.raises(InputError):
        load_filter_rules(str(tmp_path / "absent"))
