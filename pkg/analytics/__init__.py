from .reports import summary_lines, write_metrics_csv, write_plot, write_qps_csv

__all__ = ['summary_lines', 'write_metrics_csv', 'write_plot', 'write_qps_csv']
