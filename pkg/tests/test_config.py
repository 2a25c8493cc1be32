import json

import pytest

from bansa.config import ModelConfig, RunConfig, dump, from_dict, load, validate
from bansa.errors import ConfigError


class TestDefaults:
    def test_published_setting(self):
        c = RunConfig()
        assert (c.m, c.k, c.p, c.tau, c.model.steps) == (10, 10, 0.2, 0.7, 50)
        assert c.criterion == "argmin"
        assert (c.model.n_tokens, c.model.dim, c.model.layers) == (16, 8, 8)

    def test_first_step_probe(self):
        assert RunConfig().timesteps() == [50]
        assert RunConfig(probe_timesteps=(50, 25)).timesteps() == [50, 25]

    def test_depth_index(self):
        assert RunConfig().depth_index() == 7
        assert RunConfig(d_star=3).depth_index() == 2


class TestValidation:
    def test_enumerates_every_problem(self):
        with pytest.raises(ConfigError) as info:
            validate(RunConfig(m=0, k=0, p=1.5, criterion="best", model=ModelConfig(layers=0)))
        fields = [p.split(":")[0] for p in info.value.problems]
        assert fields == ["m", "k", "p", "criterion", "model.layers"]

    def test_d_star_range(self):
        with pytest.raises(ConfigError):
            validate(RunConfig(d_star=9))
        validate(RunConfig(d_star=8))

    def test_timesteps_range(self):
        with pytest.raises(ConfigError):
            validate(RunConfig(probe_timesteps=(51,)))

    def test_unknown_fields(self):
        with pytest.raises(ConfigError) as info:
            from_dict({"mm": 3, "model": {"layerz": 2}})
        assert info.value.problems == ["mm: unknown field", "model.layerz: unknown field"]

    def test_not_an_object(self):
        with pytest.raises(ConfigError):
            from_dict([1, 2])


class TestRoundTrip:
    def test_dict(self):
        c = RunConfig(m=3, probe_timesteps=(50, 40), model=ModelConfig(layers=4))
        assert from_dict(c.to_dict()) == c

    def test_file(self, tmp_path):
        c = RunConfig(criterion="argmax", base_seed=2**63)
        dump(c, tmp_path / "c.json")
        assert load(tmp_path / "c.json") == c

    def test_bad_json(self, tmp_path):
        (tmp_path / "c.json").write_text("{nope")
        with pytest.raises(ConfigError):
            load(tmp_path / "c.json")

    def test_partial_file(self, tmp_path):
        (tmp_path / "c.json").write_text(json.dumps({"m": 4, "model": {"dim": 6}}))
        c = load(tmp_path / "c.json")
        assert (c.m, c.model.dim, c.k) == (4, 6, 10)

    def test_replace(self):
        c = RunConfig().replace(m=2, model={"layers": 3})
        assert (c.m, c.model.layers, c.model.dim) == (2, 3, 8)
