import pytest

from commtwin.config import (ConfigError, ProviderSettings, RunConfig,
                             config_from_dict, load_config)


def test_defaults_match_reference_operating_points():
    cfg = RunConfig()
    assert cfg.curation.cap == 10000
    assert cfg.filter.max_perplexity == 400.0
    assert cfg.filter.max_rouge == 0.7
    assert cfg.filter.cap == 6000
    assert cfg.generation.per_topic == 1000
    assert cfg.generation.exemplars == 250
    assert cfg.screening.samples == 50
    assert cfg.evaluation.toxicity_threshold == 0.05
    assert cfg.community.top_clusters == 20


def test_empty_dict_gives_defaults():
    assert config_from_dict({}).as_dict() == RunConfig().as_dict()


def test_sections_override_selectively():
    cfg = config_from_dict({
        "seed": 9,
        "workdir": "out",
        "filter": {"cap": 100},
        "screening": {"samples": 5},
    })
    assert cfg.seed == 9 and cfg.workdir == "out"
    assert cfg.filter.cap == 100
    assert cfg.filter.max_rouge == 0.7          # untouched default
    assert cfg.screening.samples == 5


def test_unknown_keys_are_rejected_with_location():
    with pytest.raises(ConfigError, match="unknown config keys"):
        config_from_dict({"filtering": {}})
    with pytest.raises(ConfigError, match=r"filter: unknown keys.*max_rogue"):
        config_from_dict({"filter": {"max_rogue": 0.5}})
    with pytest.raises(ConfigError, match="providers.base"):
        config_from_dict({"providers": {"base": {"endpoont": "x"}}})


def test_provider_roles_are_fixed():
    cfg = config_from_dict({"providers": {
        "base": {"kind": "http", "endpoint": "http://scorer:8000"},
        "tuned": {"kind": "http", "endpoint": "http://gen:8000",
                  "model": "twin-{community}"},
    }})
    assert cfg.provider_for("base").endpoint == "http://scorer:8000"
    assert cfg.provider_for("tuned").model == "twin-{community}"
    with pytest.raises(ConfigError, match="unknown provider role"):
        config_from_dict({"providers": {"judge": {}}})


def test_provider_for_defaults_to_mock():
    cfg = RunConfig()
    assert cfg.provider_for("base").kind == "mock"
    assert cfg.provider_for("tuned").kind == "mock"


def test_http_provider_requires_endpoint():
    with pytest.raises(ConfigError, match="endpoint"):
        ProviderSettings(kind="http")
    with pytest.raises(ConfigError, match="mock or http"):
        ProviderSettings(kind="local")


@pytest.mark.parametrize("section,key,value", [
    ("community", "resolution", 0.0),
    ("curation", "cap", 0),
    ("demos", "general_fraction", 1.5),
    ("generation", "per_topic", 0),
    ("filter", "max_rouge", 1.2),
    ("evaluation", "origin_test_fraction", 0.0),
    ("screening", "samples", 0),
])
def test_section_validation(section, key, value):
    with pytest.raises(ConfigError):
        config_from_dict({section: {key: value}})


def test_general_fraction_needs_a_path():
    with pytest.raises(ConfigError, match="general_path"):
        config_from_dict({"demos": {"general_fraction": 0.1}})


def test_digest_is_stable_and_sensitive():
    a = config_from_dict({"seed": 1})
    b = config_from_dict({"seed": 1})
    c = config_from_dict({"seed": 2})
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()
    assert len(a.digest()) == 64


def test_load_config_yaml_round_trip(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(
        "seed: 4\n"
        "offline: true\n"
        "filter:\n"
        "  cap: 500\n"
        "providers:\n"
        "  base:\n"
        "    kind: http\n"
        "    endpoint: http://localhost:9000\n",
        encoding="utf-8")
    cfg = load_config(path)
    assert cfg.seed == 4 and cfg.offline
    assert cfg.filter.cap == 500
    assert cfg.provider_for("base").endpoint == "http://localhost:9000"


def test_load_config_reports_bad_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("filter: [unclosed", encoding="utf-8")
    with pytest.raises(ConfigError, match="invalid YAML"):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")


def test_config_root_must_be_mapping():
    with pytest.raises(ConfigError, match="mapping"):
        config_from_dict(["not", "a", "dict"])
