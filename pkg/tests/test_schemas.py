import json

import numpy as np
import pytest

from qtl.core.exceptions import ConfigurationError, StorageError
from qtl.core.schemas import ExperimentKind, InteractionKind, load_scenario, parse_scenario
from qtl.presets import list_presets, load_preset
from qtl.storage.results import ResultStore

from conftest import scenario_data


def test_presets_validate():
    names = list_presets()
    assert names == ["canonical-2x3", "canonical-5x5", "fluctuation-sweep", "histogram", "micro-2x50"]
    for name in names:
        assert load_preset(name).name == name


def test_preset_dimensions():
    assert load_preset("micro-2x50").composite().dimension == 100
    assert load_preset("canonical-2x3").composite().dimension == 700
    assert load_preset("canonical-5x5").composite().dimension == 930
    sweep = load_preset("fluctuation-sweep")
    assert sweep.experiment is ExperimentKind.FLUCTUATION_SWEEP
    assert sweep.sweep.sizes == [8, 16, 32, 64, 128]


def test_unknown_preset():
    with pytest.raises(ConfigurationError) as info:
        load_preset("nope")
    assert "micro-2x50" in str(info.value)


def test_defaults():
    config = parse_scenario(scenario_data(interaction={}, times={}))
    assert config.interaction.kind is InteractionKind.FULL
    assert config.interaction.delta == 0.01
    assert config.times.samples == 1000
    assert config.times.times()[-1] == 200.0


@pytest.mark.parametrize(
    "overrides, field_path",
    [
        ({"container": {"levels": []}}, "container.levels"),
        ({"container": {"levels": [[1, 5], [0, 5]]}}, "container.levels"),
        ({"interaction": {"deltaI": -0.1}}, "interaction.deltaI"),
        ({"initial_states": [{"gas_weights": [0.5, 0.6], "container_level": 0}]}, "initial_states.0.gas_weights"),
        ({"seeds": [-1]}, "seeds"),
        ({"name": "bad name"}, "name"),
        ({"unexpected": 1}, "unexpected"),
    ],
)
def test_field_path_in_errors(overrides, field_path):
    with pytest.raises(ConfigurationError) as info:
        parse_scenario(scenario_data(**overrides))
    assert info.value.field_path == field_path
    assert str(info.value).startswith(field_path)


@pytest.mark.parametrize(
    "state",
    [
        {"gas_weights": [0.5, 0.5]},
        {"gas_weights": [0.5, 0.5], "gas_amplitudes": [[1, 0], [0, 0]], "container_level": 0},
        {"gas_amplitudes": [[1, 0], [1, 0]], "container_level": 0},
    ],
)
def test_invalid_initial_states(state):
    with pytest.raises(ConfigurationError):
        parse_scenario(scenario_data(initial_states=[state]))


@pytest.mark.parametrize(
    "state",
    [
        {"gas_weights": [1.0], "container_level": 0},
        {"gas_weights": [0.5, 0.5], "container_level": 3},
        {"gas_weights": [0.5, 0.5], "container_weights": [0.5, 0.5]},
        {"gas_amplitudes": [[1, 0]], "container_level": 0},
    ],
)
def test_initial_state_shape_mismatch(state):
    with pytest.raises(ConfigurationError):
        parse_scenario(scenario_data(initial_states=[state]))


def test_amplitudes_become_normalized_vectors():
    config = parse_scenario(
        scenario_data(initial_states=[{"gas_amplitudes": [[0.6, 0.0], [0.0, 0.8]], "container_level": 1}])
    )
    state = config.initial_states[0]
    assert np.allclose(state.gas_vector(), [0.6, 0.8j])
    assert state.container_level_weights(3) == [0.0, 1.0, 0.0]


def test_sweep_validation():
    with pytest.raises(ConfigurationError) as info:
        parse_scenario(scenario_data(experiment="fluctuation-sweep", sweep={"sizes": [8, 15, 32]}))
    assert info.value.field_path == "sweep.sizes"
    with pytest.raises(ConfigurationError):
        parse_scenario(scenario_data(experiment="fluctuation-sweep"))
    with pytest.raises(ConfigurationError):
        parse_scenario(scenario_data(experiment="fluctuation-sweep", sweep={"sizes": [8, 8, 16]}))


def test_sweep_container():
    config = parse_scenario(scenario_data(experiment="fluctuation-sweep", sweep={"sizes": [2, 4, 8]}))
    container = config.sweep_container(8)
    assert list(container.degeneracies) == [4, 8, 16]
    with pytest.raises(ConfigurationError):
        config.sweep_container(7)


def test_json_roundtrip():
    config = parse_scenario(scenario_data())
    assert parse_scenario(json.loads(config.to_json())) == config
    assert '"deltaI":0.02' in config.to_json()


def test_overrides():
    config = parse_scenario(scenario_data())
    changed = config.with_overrides(experiment="histogram", seed=99, samples=500, bins=10)
    assert changed.experiment is ExperimentKind.HISTOGRAM
    assert changed.seeds == [99]
    assert changed.histogram.samples == 500
    assert changed.histogram.bins == 10
    assert config.seeds == [1, 2]
    with pytest.raises(ConfigurationError):
        config.with_overrides(samples=0)


def test_load_scenario_from_json(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario_data()))
    assert load_scenario(path) == parse_scenario(scenario_data())


def test_load_scenario_replays_csv_header(tmp_path):
    config = parse_scenario(scenario_data())
    store = ResultStore(tmp_path, config.name, config.to_json())
    path = store.write_table("evolve", ["a"], [[1.0]])
    assert load_scenario(path) == config


def test_load_scenario_errors(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigurationError):
        load_scenario(broken)

    array = tmp_path / "array.json"
    array.write_text("[1, 2]")
    with pytest.raises(ConfigurationError):
        load_scenario(array)

    headerless = tmp_path / "plain.csv"
    headerless.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigurationError):
        load_scenario(headerless)

    with pytest.raises(StorageError):
        load_scenario(tmp_path / "missing.json")
