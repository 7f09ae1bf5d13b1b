import pytest

from config.loader import load_config_file, section
from config.settings import PathConfig, TTLConfig
from core.errors import ConfigError


def test_ttl_grid():
    grid = TTLConfig.ttl_grid()
    assert grid[0] == 900
    assert grid[-1] == 86400
    assert len(grid) == 96


def test_load_config_file(tmp_path):
    path = tmp_path / 'run.env'
    path.write_text('# comment\nWORKLOAD_N_HOTELS=4\nSUPPLIER_QPS_LIMIT=3\n')
    assert load_config_file(str(path)) == {'WORKLOAD_N_HOTELS': '4', 'SUPPLIER_QPS_LIMIT': '3'}
    assert load_config_file(None) == {}


def test_load_config_file_errors(tmp_path):
    with pytest.raises(ConfigError, match='not found'):
        load_config_file(str(tmp_path / 'missing.env'))
    path = tmp_path / 'stray.env'
    path.write_text('QPS=3\n')
    with pytest.raises(ConfigError, match='QPS'):
        load_config_file(str(path))


def test_section_strips_prefix_and_rejects_unknown_keys():
    values = {'SUPPLIER_QPS_LIMIT': '3', 'WORKLOAD_SEED': '1'}
    assert section(values, 'SUPPLIER_', ['QPS_LIMIT']) == {'QPS_LIMIT': '3'}
    with pytest.raises(ConfigError):
        section({'SUPPLIER_QPS': '3'}, 'SUPPLIER_', ['QPS_LIMIT'])


def test_demo_configs_load():
    for name in ('demo_workload.env', 'demo_experiment.env'):
        assert load_config_file(PathConfig.get_demo_config_path(name))
