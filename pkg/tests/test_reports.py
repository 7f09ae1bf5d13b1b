import pandas as pd

from analytics.reports import (QPS_COLUMNS, UTILIZATION_COLUMNS, gnuplot_script, metrics_frame, summary_lines,
                               write_metrics_csv, write_plot, write_qps_csv, write_utilization_csv)
from simulation.metrics import METRICS_COLUMNS, DayMetrics, Metrics


def sample_metrics(arm, hits):
    m = Metrics(arm, [DayMetrics(searches=10, hits=h, fetches=10 - h, attempts=2, bookings=1) for h in hits])
    m.qps = pd.Series([1, 2], index=pd.Index([0, 5], name='second'))
    return m


def test_metrics_csv(tmp_path):
    path = tmp_path / 'out' / 'metrics.csv'
    write_metrics_csv([sample_metrics('A', [2, 4]), sample_metrics('B', [5, 5])], str(path))
    df = pd.read_csv(path)
    assert list(df.columns) == METRICS_COLUMNS
    assert len(df) == 6
    total_a = df[(df['arm'] == 'A') & (df['day'] == 'total')].iloc[0]
    assert total_a['hits'] == 6
    assert total_a['hit_rate'] == 0.3


def test_empty_metrics_frame():
    assert metrics_frame([]).empty


def test_qps_csv(tmp_path):
    quiet = Metrics('quiet', [DayMetrics()])
    path = tmp_path / 'qps.csv'
    assert write_qps_csv([sample_metrics('A', [1]), quiet], str(path)) == 2
    df = pd.read_csv(path)
    assert list(df.columns) == QPS_COLUMNS
    assert df['accepted'].tolist() == [1, 2]
    assert write_qps_csv([quiet], str(path)) == 0


def test_plot_files(tmp_path):
    data_path, script_path = write_plot([sample_metrics('A', [2, 4]), sample_metrics('B', [5, 5])],
                                        str(tmp_path), stem='plot')
    with open(data_path) as handle:
        lines = handle.read().splitlines()
    assert lines[0] == '# day,bookings_A,bookings_B,hit_rate_A,hit_rate_B'
    assert lines[1] == '0,1,1,0.2,0.5'
    script = open(script_path).read()
    assert "histogram" in script
    assert "axes x1y2" in script
    assert "set output 'plot.png'" in script


def test_gnuplot_columns():
    script = gnuplot_script('d.csv', ['A', 'B'], 't', 'd.png')
    assert "using 2:xtic(1)" in script
    assert "using 3 title 'B bookings'" in script
    assert "using 0:4 with linespoints axes x1y2 title 'A cache hit'" in script


def test_summary_lines():
    lines = summary_lines([sample_metrics('A', [2, 4])])
    assert lines[0].startswith('A: searches 20, hit 0.3000')


def test_utilization_csv(tmp_path):
    busy = sample_metrics('A', [1])
    busy.utilization = pd.DataFrame({'dc_id': [0, 1, 0], 'second': [0, 0, 3],
                                     'accepted': [1, 0, 2], 'rejected': [0, 0, 1]})
    path = tmp_path / 'util.csv'
    assert write_utilization_csv([busy, Metrics('quiet', [DayMetrics()])], str(path)) == 3
    df = pd.read_csv(path)
    assert list(df.columns) == UTILIZATION_COLUMNS
    assert set(df['arm']) == {'A'}
    assert df['accepted'].sum() == 3
    assert write_utilization_csv([], str(path)) == 0
    assert pd.read_csv(path).columns.tolist() == UTILIZATION_COLUMNS
