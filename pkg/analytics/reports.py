import logging
import os
from typing import Iterable, List, Sequence, Tuple

import pandas as pd

from simulation.metrics import Metrics

logger = logging.getLogger(__name__)

QPS_COLUMNS = ['arm', 'second', 'accepted']
UTILIZATION_COLUMNS = ['arm', 'dc_id', 'second', 'accepted', 'rejected']


def _ensure_parent(path: str):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def metrics_frame(metrics: Iterable[Metrics], include_total: bool = True) -> pd.DataFrame:
    frames = [m.to_frame(include_total) for m in metrics]
    if not frames:
        return pd.DataFrame()
    return pd.concat(frames, ignore_index=True)


def write_metrics_csv(metrics: Sequence[Metrics], path: str) -> pd.DataFrame:
    df = metrics_frame(metrics)
    _ensure_parent(path)
    df.to_csv(path, index=False, lineterminator='\n')
    logger.info(f"Wrote metrics for {len(metrics)} arm(s) to {path}")
    return df


def write_qps_csv(metrics: Sequence[Metrics], path: str) -> int:
    """Accepted supplier calls per active second, one block per arm."""
    frames = []
    for m in metrics:
        if m.qps is None or m.qps.empty:
            continue
        frames.append(pd.DataFrame({'arm': m.arm, 'second': m.qps.index.to_numpy(),
                                    'accepted': m.qps.to_numpy()}))
    df = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=QPS_COLUMNS)
    _ensure_parent(path)
    df.to_csv(path, index=False, lineterminator='\n')
    logger.info(f"Wrote {len(df):,} per-second QPS rows to {path}")
    return len(df)


def write_utilization_csv(metrics: Sequence[Metrics], path: str) -> int:
    """Per data centre and second supplier calls (accepted, rejected), one block per arm."""
    frames = [m.utilization.assign(arm=m.arm) for m in metrics if m.utilization is not None]
    if frames:
        df = pd.concat(frames, ignore_index=True)[UTILIZATION_COLUMNS]
    else:
        df = pd.DataFrame(columns=UTILIZATION_COLUMNS)
    _ensure_parent(path)
    df.to_csv(path, index=False, lineterminator='\n')
    logger.info(f"Wrote {len(df):,} utilization rows to {path}")
    return len(df)


def write_frame_csv(df: pd.DataFrame, path: str):
    _ensure_parent(path)
    df.to_csv(path, index=False, lineterminator='\n')


def plot_frame(metrics: Sequence[Metrics]) -> pd.DataFrame:
    """Wide per-day table: bookings per arm, then cache hit per arm."""
    n_days = max((len(m.days) for m in metrics), default=0)
    data = {'day': list(range(n_days))}
    for m in metrics:
        data[f"bookings_{m.arm}"] = [d.bookings for d in m.days]
    for m in metrics:
        data[f"hit_rate_{m.arm}"] = [round(d.hit_rate, 6) for d in m.days]
    return pd.DataFrame(data)


def gnuplot_script(data_file: str, arms: List[str], title: str, image_file: str) -> str:
    n = len(arms)
    bars = [f"'{data_file}' using {2 + i}{':xtic(1)' if i == 0 else ''} title '{arm} bookings'"
            for i, arm in enumerate(arms)]
    lines = [f"'{data_file}' using 0:{2 + n + i} with linespoints axes x1y2 title '{arm} cache hit'"
             for i, arm in enumerate(arms)]
    return "\n".join([
        "set datafile separator ','",
        "set terminal pngcairo size 1000,600 noenhanced",
        f"set output '{image_file}'",
        f"set title '{title}'",
        "set style data histograms",
        "set style histogram clustered gap 1",
        "set style fill solid 0.6 border -1",
        "set xlabel 'day'",
        "set ylabel 'bookings'",
        "set y2label 'cache hit'",
        "set yrange [0:*]",
        "set y2range [0:1]",
        "set ytics nomirror",
        "set y2tics",
        "set key outside top center horizontal",
        "plot " + ", \\\n     ".join(bars + lines),
        "",
    ])


def write_plot(metrics: Sequence[Metrics], out_dir: str, stem: str = 'bookings_hit',
               title: str = 'Bookings and cache hit per day') -> Tuple[str, str]:
    """Write the plot data CSV and a gnuplot script drawing bookings as bars and cache hit as lines."""
    df = plot_frame(metrics)
    data_path = os.path.join(out_dir, f"{stem}.csv")
    script_path = os.path.join(out_dir, f"{stem}.gp")
    _ensure_parent(data_path)
    with open(data_path, 'w', newline='') as handle:
        # header as a '#' comment line for gnuplot
        handle.write('# ' + ','.join(df.columns) + '\n')
        df.to_csv(handle, index=False, header=False, lineterminator='\n')
    with open(script_path, 'w') as handle:
        handle.write(gnuplot_script(os.path.basename(data_path), [m.arm for m in metrics], title, f"{stem}.png"))
    logger.info(f"Wrote plot data {data_path} and script {script_path}")
    return data_path, script_path


def summary_lines(metrics: Sequence[Metrics]) -> List[str]:
    lines = []
    for m in metrics:
        t = m.total()
        lines.append(f"{m.arm}: searches {t.searches:,}, hit {t.hit_rate:.4f}, fetches {t.fetches:,} "
                     f"(rejected {t.rejected:,}), attempts {t.attempts:,}, bookings {t.bookings:,}, "
                     f"accuracy {t.accuracy:.4f}")
    return lines
