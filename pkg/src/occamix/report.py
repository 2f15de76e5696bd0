"""
JSON, markdown and SVG renderings of evaluation results.

Markdown is always rendered from the JSON document, never from the live
result objects, so the two cannot disagree on a number.
"""

from __future__ import annotations

import json
from typing import Iterable, Sequence

import numpy as np

from .mixture import Method, brier_score, confidence_map  # noqa: F401  (re-exported)
from .tasks import EvaluationResult, MethodResult

NDIGITS = 6

# standard ARC palette, indexed by colour
ARC_PALETTE = (
    "#000000", "#0074D9", "#FF4136", "#2ECC40", "#FFDC00",
    "#AAAAAA", "#F012BE", "#FF851B", "#7FDBFF", "#870C25",
)


def rnd(x: float | None) -> float | None:
    if x is None:
        return None
    return round(float(x), NDIGITS) + 0.0  # +0.0 folds -0.0


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# JSON


def breakdown_rows(result: EvaluationResult) -> list[dict]:
    rows = []
    for rank, b in enumerate(result.scores, 1):
        rows.append({
            "rank": rank,
            "id": b.hypothesis_id,
            "description": b.description,
            "length": b.length,
            "program_length": b.program_length,
            "simplicity": rnd(b.simplicity),
            "accuracy": rnd(b.accuracy),
            "raw_score": rnd(b.raw_score),
            "solomonoff_weight": rnd(b.solomonoff_weight),
            "n_correct": b.n_correct,
            "n_wrong": b.n_wrong,
            "bma_log_likelihood": rnd(b.bma_log_likelihood),
            "bma_weight": rnd(b.bma_weight),
        })
    return rows


def method_json(m: MethodResult) -> dict:
    return {
        "prediction": m.prediction.to_rows(),
        "top1_accuracy": rnd(m.top1_accuracy),
        "top1_accuracy_nonbg": rnd(m.top1_accuracy_nonbg),
        "brier": rnd(m.brier),
        "mean_confidence": rnd(m.mean_confidence),
        "mean_entropy": rnd(m.mean_entropy),
        "weight_entropy": rnd(m.weight_entropy),
        "max_weight": rnd(m.max_weight),
        "confidence": [[rnd(v) for v in row] for row in confidence_map(m.matrix)],
        "matrix": m.matrix.to_json(NDIGITS),
    }


def scores_json(result: EvaluationResult, run_config: dict, source: str, pool_hash: str) -> dict:
    return {
        "task_id": result.task_id,
        "held_out_index": result.held_out_index,
        "run_config": run_config,
        "source": source,
        "pool_hash": pool_hash,
        "policy": result.config.to_json()["policy"],
        "degenerate_uniform": result.scores.degenerate_uniform,
        "warnings": list(result.scores.warnings),
        "hypotheses": breakdown_rows(result),
    }


def result_json(result: EvaluationResult, run_config: dict, source: str, pool_hash: str) -> dict:
    doc = scores_json(result, run_config, source, pool_hash)
    doc["truth"] = result.truth.to_rows() if result.truth is not None else None
    doc["argmax_tie_break"] = "smallest colour"
    doc["methods"] = {
        Method.SOLOMONOFF.value: method_json(result.solomonoff),
        Method.BMA.value: method_json(result.bma),
    }
    return doc


def _mean(values: Iterable[float | None]) -> float | None:
    vals = [v for v in values if v is not None]
    return rnd(np.mean(vals)) if vals else None


SUMMARY_FIELDS = ("top1_accuracy", "max_weight", "weight_entropy", "brier", "mean_confidence")


def comparison_json(task_docs: Sequence[dict], failures: Sequence[dict], run_config: dict) -> dict:
    """Per-task summary rows plus per-method means across tasks."""
    rows = []
    for d in task_docs:
        row = {"task_id": d["task_id"], "held_out_index": d["held_out_index"],
               "source": d["source"], "pool_hash": d["pool_hash"], "n_hypotheses": len(d["hypotheses"])}
        for method, m in d["methods"].items():
            row[method] = {f: m[f] for f in SUMMARY_FIELDS}
        rows.append(row)
    aggregate = {
        method.value: {f: _mean(r[method.value][f] for r in rows) for f in SUMMARY_FIELDS}
        for method in Method
    }
    return {"run_config": run_config, "tasks": rows, "aggregate": aggregate,
            "failures": list(failures)}


# ---------------------------------------------------------------------------
# markdown


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, float):
        return f"{v:.{NDIGITS}f}"
    return str(v)


def _grid_block(rows: list[list]) -> str:
    return "```\n" + "\n".join(" ".join(_fmt(v) if isinstance(v, float) else str(v) for v in r)
                              for r in rows) + "\n```"


def _md_escape(text: str) -> str:
    return text.replace("|", "\\|")


def ranked_table_md(doc: dict) -> str:
    lines = [
        "| Rank | Id | Hypothesis | Length | Simplicity | Accuracy | Score | Solomonoff Weight | BMA Weight |",
        "|---:|---|---|---:|---:|---:|---:|---:|---:|",
    ]
    for h in doc["hypotheses"]:
        lines.append(
            f"| {h['rank']} | {h['id']} | {_md_escape(h['description'])} | {h['length']} "
            f"| {_fmt(h['simplicity'])} | {_fmt(h['accuracy'])} | {_fmt(h['raw_score'])} "
            f"| {_fmt(h['solomonoff_weight'])} | {_fmt(h['bma_weight'])} |"
        )
    return "\n".join(lines)


def _config_md(doc: dict) -> list[str]:
    rc = doc["run_config"]
    ev = rc["evaluation"]
    return [
        f"- accuracy policy: `{ev['policy']}`",
        f"- epsilon: {ev['epsilon']}, colours: {ev['num_colors']}, simplicity floor: {ev['delta']}",
        f"- connectivity: {ev['connectivity']}, split: {ev['split']}",
        f"- source: `{doc['source']}`",
        f"- pool hash: `{doc['pool_hash']}`",
    ]


def scores_md(doc: dict) -> str:
    out = [f"# {doc['task_id']}: ranked hypotheses", ""]
    out += _config_md(doc)
    if doc["warnings"]:
        out.append(f"- warnings: {', '.join(doc['warnings'])}")
    out += ["", ranked_table_md(doc), ""]
    return "\n".join(out)


def result_md(doc: dict) -> str:
    out = [scores_md(doc).rstrip("\n"), ""]
    out.append(f"Held-out example index: {doc['held_out_index']}; "
               f"argmax ties go to the {doc['argmax_tie_break']}.")
    out.append("")
    out.append("| Method | Top-1 accuracy | Non-bg accuracy | Mean confidence | Mean cell entropy "
               "| Weight entropy | Max weight | Brier |")
    out.append("|---|---:|---:|---:|---:|---:|---:|---:|")
    for name, m in doc["methods"].items():
        out.append(f"| {name} | {_fmt(m['top1_accuracy'])} | {_fmt(m['top1_accuracy_nonbg'])} "
                   f"| {_fmt(m['mean_confidence'])} | {_fmt(m['mean_entropy'])} "
                   f"| {_fmt(m['weight_entropy'])} | {_fmt(m['max_weight'])} | {_fmt(m['brier'])} |")
    for name, m in doc["methods"].items():
        out += ["", f"## {name}", "", "Prediction:", "", _grid_block(m["prediction"]),
                "", "Confidence:", "", _grid_block(m["confidence"])]
    if doc["truth"] is not None:
        out += ["", "## ground truth", "", _grid_block(doc["truth"])]
    out.append("")
    return "\n".join(out)


def comparison_md(doc: dict) -> str:
    methods = [m.value for m in Method]
    head = "| Task | " + " | ".join(f"{m} {f}" for m in methods for f in SUMMARY_FIELDS) + " |"
    sep = "|---|" + "---:|" * (len(methods) * len(SUMMARY_FIELDS))
    lines = ["# Method comparison", "", f"- accuracy policy: `{doc['run_config']['evaluation']['policy']}`",
             f"- source: `{doc['run_config']['source']}`", "", head, sep]
    for r in doc["tasks"]:
        cells = [_fmt(r[m][f]) for m in methods for f in SUMMARY_FIELDS]
        lines.append(f"| {r['task_id']} | " + " | ".join(cells) + " |")
    agg = [_fmt(doc["aggregate"][m][f]) for m in methods for f in SUMMARY_FIELDS]
    lines.append("| **mean** | " + " | ".join(agg) + " |")
    if doc["failures"]:
        lines += ["", "## failures", ""]
        for f in doc["failures"]:
            lines.append(f"- `{f['task']}`: {f['error']} (exit {f['exit_code']})")
    lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# SVG

CELL = 48


def heatmap_svg(method_doc: dict, title: str) -> str:
    """Cells coloured by argmax label, opacity equal to confidence, labelled
    with the probability of that label."""
    pred = method_doc["prediction"]
    conf = method_doc["confidence"]
    R, C = len(pred), len(pred[0])
    top = 24
    width, height = C * CELL, R * CELL + top
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="4" y="16" font-family="monospace" font-size="12">{title}</text>',
        f'<rect x="0" y="{top}" width="{width}" height="{R * CELL}" fill="#ffffff"/>',
    ]
    for r in range(R):
        for c in range(C):
            x, y = c * CELL, top + r * CELL
            p = conf[r][c]
            label = pred[r][c]
            text_fill = "#ffffff" if p > 0.5 and label in (0, 1, 9) else "#000000"
            parts.append(
                f'<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{ARC_PALETTE[label]}" '
                f'fill-opacity="{p:.3f}" stroke="#555555" stroke-width="1"/>'
            )
            parts.append(
                f'<text x="{x + CELL // 2}" y="{y + CELL // 2 + 4}" text-anchor="middle" '
                f'font-family="monospace" font-size="12" fill="{text_fill}">{p:.2f}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
