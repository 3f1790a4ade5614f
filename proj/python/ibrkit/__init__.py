"""Darknet traffic analysis: ingest, detection, concentration and entropy
metrics, synthetic corpora, and reports.

The heavy lifting happens in the _ibrkit extension; this wrapper turns the
report JSON into plain dicts.
"""

import json as _json

from ._ibrkit import (
    __version__,
    analyze_file_json,
    gini,
    lorenz,
    plot_series_csv,
    plot_series_names,
    shannon_entropy,
    synth_files,
    synth_strings,
    validate_file,
    write_report_files,
)


def analyze_file(input, **kwargs):
    """Run the full pipeline on a connection-record CSV, returning the report
    as a dict. Accepts the same keyword options as analyze_file_json."""
    return _json.loads(analyze_file_json(input, **kwargs))


def synth(config, out_dir):
    """Generate corpus.csv and ground_truth.json under out_dir. The config may
    be a dict or a JSON string; returns a summary dict with the file paths."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return synth_files(config, out_dir)


__all__ = [
    "__version__",
    "analyze_file",
    "analyze_file_json",
    "gini",
    "lorenz",
    "plot_series_csv",
    "plot_series_names",
    "shannon_entropy",
    "synth",
    "synth_files",
    "synth_strings",
    "validate_file",
    "write_report_files",
]
