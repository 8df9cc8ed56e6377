#!/usr/bin/env python3
"""Render closed-loop traces produced by the afdrkit CLI.

Reads the trace CSV (and optional summary/aggregate JSON) written by
`afdrkit simulate` / `afdrkit monte-carlo` and draws the output signal
against time with a vertical marker where the adaptive path switches on.

    plot_run.py <trace.csv ...|dir> --summary <json> --t-on 10 --out fig.png

Passing several CSVs stacks one panel per trace; passing a directory
overlays every trace it contains in a single panel.  Annotated statistics
are always taken verbatim from the JSON, never recomputed here.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

TRACE_HEADER = ["k", "t", "d", "n", "what", "r_circ", "r", "y",
                "saturated", "theta_norm"]

EXIT_USAGE = 1
EXIT_SCHEMA = 2


class SchemaError(Exception):
    pass


def read_trace(path):
    """Return (t, y) arrays from one trace CSV, validating the header."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != TRACE_HEADER:
            raise SchemaError(f"{path}: header {header!r} does not match "
                              f"the trace schema")
        t, y = [], []
        for row in reader:
            if len(row) != len(TRACE_HEADER):
                raise SchemaError(f"{path}: malformed row {row!r}")
            t.append(float(row[1]))
            y.append(float(row[7]))
    return t, y


def collect_traces(sources):
    """Expand file/directory arguments into (label, path) pairs.

    Returns the pairs plus a flag saying whether a directory batch was
    expanded, which selects the overlaid rendering style.
    """
    traces = []
    from_dir = False
    for src in sources:
        p = Path(src)
        if p.is_dir():
            found = sorted(p.glob("**/trace*.csv"))
            if not found:
                raise FileNotFoundError(f"no trace CSVs under {p}")
            traces.extend((f.parent.name or f.stem, f) for f in found)
            from_dir = True
        elif p.is_file():
            traces.append((p.stem if p.stem != "trace" else p.parent.name, p))
        else:
            raise FileNotFoundError(f"no such trace file: {p}")
    return traces, from_dir


def summary_text(summary):
    """Annotation string for either a run summary or a batch aggregate."""
    if "std_pre" in summary and not isinstance(summary.get("std_pre"), dict):
        pre, post = summary.get("std_pre"), summary.get("std_post")
        pre_s = "n/a" if pre is None else f"{pre:.4f}"
        post_s = "unstable" if post is None else f"{post:.4f}"
        return f"std: {pre_s} / {post_s}"
    if "std_post" in summary and isinstance(summary["std_post"], dict):
        agg = summary["std_post"]
        if agg.get("mean") is None:
            return f"{summary.get('unstable_count', '?')} unstable runs"
        return (f"mean std {agg['mean']:.4f} "
                f"[{agg['min']:.4f}, {agg['max']:.4f}], "
                f"{summary.get('unstable_count', 0)} unstable")
    raise SchemaError("summary JSON has neither run nor aggregate schema")


def render(traces, t_on, out_path, summary=None, overlay=False):
    if overlay:
        fig, ax = plt.subplots(figsize=(8, 3.5))
        axes = [ax] * len(traces)
    else:
        fig, axes = plt.subplots(len(traces), 1, sharex=True,
                                 figsize=(8, 2.6 * len(traces)),
                                 squeeze=False)
        axes = list(axes[:, 0])
    for (label, path), ax in zip(traces, axes):
        t, y = read_trace(path)
        alpha = 0.25 if overlay else 1.0
        ax.plot(t, y, lw=0.8, alpha=alpha,
                color="tab:blue" if overlay else None)
        ax.axvline(t_on, color="k", ls="--", lw=0.8)
        ax.set_ylabel("y")
        if not overlay:
            ax.set_title(label, fontsize=9)
    axes[-1].set_xlabel("t [s]")
    if overlay:
        axes[0].set_title(f"{len(traces)} overlaid runs", fontsize=9)
    if summary is not None:
        axes[0].annotate(summary_text(summary), xy=(0.02, 0.93),
                         xycoords="axes fraction", fontsize=8,
                         va="top",
                         bbox=dict(boxstyle="round", fc="white", alpha=0.8))
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="plot afdrkit trace CSVs")
    parser.add_argument("traces", nargs="+",
                        help="trace CSV files or a directory of them")
    parser.add_argument("--summary", help="summary or aggregate JSON to annotate")
    parser.add_argument("--t-on", type=float, default=10.0,
                        help="vertical marker position in seconds")
    parser.add_argument("--out", default="fig.png", help="output image path")
    args = parser.parse_args(argv)

    try:
        traces, from_dir = collect_traces(args.traces)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    summary = None
    if args.summary:
        try:
            with open(args.summary) as f:
                summary = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read summary: {exc}", file=sys.stderr)
            return EXIT_USAGE
    overlay = from_dir and len(traces) > 1
    try:
        render(traces, args.t_on, args.out, summary, overlay)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    print(f"wrote {args.out} ({len(traces)} trace"
          f"{'s' if len(traces) != 1 else ''})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
