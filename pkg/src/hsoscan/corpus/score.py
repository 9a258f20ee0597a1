"""Precision/recall of a report against planted ground truth."""

from __future__ import annotations

from fractions import Fraction

from .planted import GroundTruth


class MismatchError(ValueError):
    pass


def _ratio(num: int, den: int) -> float:
    # vacuous ratios count as perfect: nothing predicted, nothing missed
    return float(Fraction(num, den)) if den else 1.0


def _prf(predicted: set, expected: set) -> dict:
    tp = len(predicted & expected)
    return {
        "tp": tp,
        "fp": len(predicted - expected),
        "fn": len(expected - predicted),
        "precision": _ratio(tp, len(predicted)),
        "recall": _ratio(tp, len(expected)),
    }


def _triple(d: dict) -> tuple:
    return (d["method"], d["condStmt"], d["arm"])


def predicted_category(hso: dict) -> str:
    cats = hso["trigger"]["categories"]
    return cats[0] if len(cats) == 1 else "+".join(cats) or "none"


def score(report: dict, truth: GroundTruth) -> dict:
    if report.get("appId") != truth.app_id:
        raise MismatchError(f"report is for {report.get('appId')!r}, truth for {truth.app_id!r}")
    suspicious = {_triple(h): h for h in report["hsos"] if h["verdict"] == "Suspicious"}
    conventional = {_triple(h): h for h in report["hsos"] if h["verdict"] == "Conventional"}
    exp_hso = {_triple(h): h for h in truth.hsos}
    exp_conv = {_triple(h): h for h in truth.conventional}

    confusion = {}
    correct = matched = 0
    for key, h in sorted(exp_hso.items()):
        if key not in suspicious:
            continue
        matched += 1
        got = predicted_category(suspicious[key])
        row = confusion.setdefault(h["category"], {})
        row[got] = row.get(got, 0) + 1
        correct += got == h["category"]
    conv_ok = sum(1 for k, h in exp_conv.items()
                  if k in conventional and conventional[k].get("category") == h["category"])
    by_depth = {}
    for key, h in exp_hso.items():
        d = by_depth.setdefault(str(h.get("depth", 0)), {"planted": 0, "found": 0})
        d["planted"] += 1
        d["found"] += key in suspicious
    return {
        "appId": truth.app_id,
        "suspicious": _prf(set(suspicious), set(exp_hso)),
        "conventional": _prf(set(conventional), set(exp_conv)),
        "categoryAccuracy": _ratio(correct, matched),
        "conventionalCategoryAccuracy": _ratio(conv_ok, len(set(conventional) & set(exp_conv))),
        "falseSuspicious": len(set(suspicious) & set(exp_conv)),
        "recallByDepth": dict(sorted(by_depth.items())),
        "confusion": {k: dict(sorted(v.items())) for k, v in sorted(confusion.items())},
        "hsdfs": {"expected": truth.hsdfs, "reported": len(report.get("hsdfs", []))},
    }
