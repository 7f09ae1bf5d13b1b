import logging

import pandas as pd
import pytest

from cli.experiment import ExperimentConfig
from cli.main import build_parser, main
from config.settings import PathConfig
from scheduler.value_table import ValueRow, ValueTable
from smartttl.ttl_table import TTL_TABLE_COLUMNS
from tests.helpers import make_itinerary

DEMO_LOG = PathConfig.get_demo_fetch_log_path()

SMALL_EXPERIMENT = """\
WORKLOAD_N_HOTELS=4
WORKLOAD_ITINERARIES_PER_HOTEL=3
WORKLOAD_N_USERS=100
WORKLOAD_SEARCHES_PER_SECOND=0.02
WORKLOAD_DC_TRAFFIC_PROFILES=flat
PRICE_DURATION_DEFAULT=exponential:3600
SUPPLIER_QPS_LIMIT=2
EXPERIMENT_HORIZON_DAYS=1
EXPERIMENT_SEEDS=1
EXPERIMENT_POLICIES=passive_fixed_ttl:900;passive_smart_ttl;aggressive_smart_scheduler
EXPERIMENT_ARM_A=passive_fixed_ttl:900
EXPERIMENT_ARM_B=passive_smart_ttl
"""


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / 'small.env'
    path.write_text(SMALL_EXPERIMENT)
    return str(path)


def test_parser_knows_every_command():
    required = {
        'build-ttl': ['--fetch-log', 'x'],
        'build-schedule': ['--ttl-table', 'x', '--value-table', 'y', '--mu', '1'],
        'audit-plan': ['--plan', 'p', '--ttl-table', 'x', '--mu', '1'],
    }
    parser = build_parser()
    for command in ('gen-trace', 'build-ttl', 'build-schedule', 'audit-plan', 'run', 'ab', 'estimate'):
        assert callable(parser.parse_args([command] + required.get(command, [])).handler)


def test_demo_configs_parse():
    for name in ('demo_workload.env', 'demo_experiment.env'):
        config = ExperimentConfig.from_file(PathConfig.get_demo_config_path(name))
        config.validate()
    assert len(config.policies) == 4
    assert config.supplier.qps_limit == 2


def test_zero_mu_is_rejected(caplog):
    with caplog.at_level(logging.ERROR):
        assert main(['build-schedule', '--ttl-table', 'x', '--value-table', 'y', '--mu', '0']) == 1
    assert "mu must be > 0" in caplog.text


def test_build_ttl_on_demo_log_is_reproducible(tmp_path, capsys):
    first, second = tmp_path / 'a.csv', tmp_path / 'b.csv'
    assert main(['build-ttl', '--fetch-log', DEMO_LOG, '--out', str(first)]) == 0
    assert main(['build-ttl', '--fetch-log', DEMO_LOG, '--out', str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()

    df = pd.read_csv(first)
    assert list(df.columns) == TTL_TABLE_COLUMNS
    assert 0 < len(df) <= 732
    assert (df['ttl_seconds'] % 900 == 0).all()
    assert "clusters:" in capsys.readouterr().out


def test_build_ttl_without_price_changes(tmp_path, caplog):
    log = tmp_path / 'empty.csv'
    log.write_text('timestamp_s,hotel_id,checkin,checkout,adults,children,rooms,price_minor,available\n')
    with caplog.at_level(logging.ERROR):
        assert main(['build-ttl', '--fetch-log', str(log), '--out', str(tmp_path / 't.csv')]) == 1
    assert "no duration samples" in caplog.text


def test_missing_trace_is_reported(tmp_path, caplog):
    missing = tmp_path / 'nope.csv'
    with caplog.at_level(logging.ERROR):
        assert main(['build-ttl', '--fetch-log', DEMO_LOG, '--trace', str(missing),
                     '--out', str(tmp_path / 't.csv')]) == 1
    assert str(missing) in caplog.text


def test_gen_trace(tmp_path, small_config, capsys):
    out = tmp_path / 'trace.csv'
    assert main(['gen-trace', '--config', small_config, '--seed', '3', '--header', '--out', str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith('timestamp_s,')
    assert f"Wrote {len(lines) - 1:,} searches" in capsys.readouterr().out


def test_build_and_audit_schedule(tmp_path):
    ttl_path = tmp_path / 'ttl.csv'
    assert main(['build-ttl', '--fetch-log', DEMO_LOG, '--out', str(ttl_path)]) == 0
    values = ValueTable([ValueRow(make_itinerary(hotel=h, lead=7 + h % 3), 0.1, 0.9, 5.0) for h in range(50)])
    value_path = tmp_path / 'values.csv'
    values.write_csv(str(value_path))

    plan_path = tmp_path / 'plan.csv'
    assert main(['build-schedule', '--ttl-table', str(ttl_path), '--value-table', str(value_path),
                 '--mu', '1', '--out', str(plan_path)]) == 0
    assert plan_path.exists()
    assert 'violations: 0' in (tmp_path / 'plan_audit.txt').read_text()
    assert main(['audit-plan', '--plan', str(plan_path), '--ttl-table', str(ttl_path), '--mu', '1']) == 0


def test_run_ab_and_estimate(tmp_path, small_config, capsys):
    out = tmp_path / 'out'
    assert main(['run', '--config', small_config, '--out', str(out)]) == 0
    metrics = pd.read_csv(out / 'metrics_seed1.csv')
    assert set(metrics['arm']) == {'passive_fixed_ttl:900', 'passive_smart_ttl', 'aggressive_smart_scheduler'}
    assert (out / 'qps_seed1.csv').exists()
    assert (out / 'run_seed1.gp').exists()
    utilization = pd.read_csv(out / 'utilization_seed1.csv')
    assert set(utilization['arm']) == set(metrics['arm'])
    assert utilization.groupby('arm')['accepted'].sum().min() > 0
    assert 'passive_smart_ttl: searches' in capsys.readouterr().out

    assert main(['ab', '--config', small_config, '--out', str(out)]) == 0
    assert set(pd.read_csv(out / 'ab_seed1.csv')['arm']) == {'A', 'B'}
    assert len(pd.read_csv(out / 'ab_deltas_seed1.csv')) == 1
    assert (out / 'ab_plot_seed1.csv').exists()
    assert "set output 'ab_plot_seed1.png'" in (out / 'ab_plot_seed1.gp').read_text()
    assert set(pd.read_csv(out / 'ab_utilization_seed1.csv')['arm']) == {'A', 'B'}

    assert main(['estimate', '--config', small_config, '--out', str(out), '--seed', '2']) == 0
    for name in ('fetch_log_seed2.csv', 'ttl_table_seed2.csv', 'value_table_seed2.csv'):
        assert (out / name).exists()
