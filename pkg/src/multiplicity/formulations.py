"""Builders that translate a dataset into the three integer programs.

Variable layout shared by all three models, for n examples and d+1
coefficient slots:

    [0, n)                 binary indicators (mistake or agreement)
    [n, n+d+1)             positive coefficient parts  w+_j in [0, 1]
    [n+d+1, n+2(d+1))      negative coefficient parts  w-_j in [-1, 0]

The effective coefficient w_j = w+_j + w-_j is substituted directly into
every row rather than materialized, and the l1 normalization row fixes
sum_j (w+_j - w-_j) = 1.  Objectives carry integer example weights, so
optimal values are exact weighted counts.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .branch_bound import MipModel
from .core import Dataset, LinearClassifier, empirical_risk, predictions
from .simplex import EQUAL, GREATER_EQUAL, LinearProgram

DEFAULT_GAMMA = 1e-4
MARGIN_AUDIT_SLACK = 1e-9

BASELINE = "baseline"
DISC = "disc"
FLIP = "flip"


@dataclass(frozen=True)
class FormulationParams:
    """Margin and Big-M controls shared by the three builders.

    ``big_m_override`` accepts a positive number (broadcast to every
    example) or the string ``"tight"`` to use the per-example value
    gamma + ||x_i||_inf instead of the global maximum.
    """

    gamma: float = DEFAULT_GAMMA
    big_m_override: Union[float, str, None] = None

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if isinstance(self.big_m_override, str) and self.big_m_override != "tight":
            raise ValueError("big_m_override must be a number, 'tight', or None")


def compute_big_m(dataset: Dataset, gamma: float) -> np.ndarray:
    """Per-example Big-M vector: gamma + max over examples of ||x||_inf.

    A single value broadcast to every example.  Valid because the l1
    normalization fixes ||w||_1 = 1, so |w.x| <= ||x||_inf by Holder's
    inequality and gamma + ||x||_inf bounds every Big-M row activation.
    """
    max_inf = float(np.abs(dataset.X).max())
    return np.full(len(dataset.examples), gamma + max_inf)


def _big_m_vector(dataset: Dataset, params: FormulationParams) -> np.ndarray:
    if params.big_m_override is None:
        return compute_big_m(dataset, params.gamma)
    if params.big_m_override == "tight":
        return params.gamma + np.abs(dataset.X).max(axis=1)
    return np.full(len(dataset.examples), float(params.big_m_override))


def _layout(dataset: Dataset):
    n = len(dataset.examples)
    nc = dataset.d + 1
    return n, nc, n + 2 * nc


def _coef_bounds(n: int, nc: int):
    lo = np.concatenate([np.zeros(n), np.zeros(nc), -np.ones(nc)])
    hi = np.concatenate([np.ones(n), np.ones(nc), np.zeros(nc)])
    return lo, hi


def _l1_row(n: int, nc: int, total: int) -> np.ndarray:
    row = np.zeros(total)
    row[n : n + nc] = 1.0
    row[n + nc :] = -1.0
    return row


def _mistake_rows(dataset: Dataset, big_m: np.ndarray, gamma: float, total: int):
    """Big-M rows  M_i e_i + y_i sum_j w_j x_ij >= gamma  for all i.

    e_i is forced to 1 exactly when the signed score y_i w.x_i falls below
    the margin, for either label; a point only counts as correct once its
    score clears gamma on the right side.
    """
    n, nc, _ = _layout(dataset)
    rows = np.zeros((n, total))
    signed = dataset.X * dataset.y[:, None]
    rows[:, :n] = np.diag(big_m)
    rows[:, n : n + nc] = signed
    rows[:, n + nc :] = signed
    rhs = np.full(n, gamma)
    return rows, rhs


def build_baseline_mip(
    dataset: Dataset, params: Optional[FormulationParams] = None
) -> MipModel:
    """Error-minimizing training model with conflict-pair strengthening."""
    params = params or FormulationParams()
    n, nc, total = _layout(dataset)
    big_m = _big_m_vector(dataset, params)

    rows, rhs = _mistake_rows(dataset, big_m, params.gamma, total)
    all_rows = [rows]
    all_rhs = [rhs]
    relations = [GREATER_EQUAL] * n
    for i, j in dataset.conflict_pairs:
        row = np.zeros(total)
        row[i] = 1.0
        row[j] = 1.0
        all_rows.append(row[None, :])
        all_rhs.append(np.array([1.0]))
        relations.append(EQUAL)
    all_rows.append(_l1_row(n, nc, total)[None, :])
    all_rhs.append(np.array([1.0]))
    relations.append(EQUAL)

    objective = np.zeros(total)
    objective[:n] = dataset.weights
    lo, hi = _coef_bounds(n, nc)
    lp = LinearProgram(
        objective=objective,
        row_coefs=np.vstack(all_rows),
        row_relations=tuple(relations),
        row_rhs=np.concatenate(all_rhs),
        var_lo=lo,
        var_hi=hi,
    )
    model = MipModel(
        lp=lp,
        binary_vars=tuple(range(n)),
        metadata={
            "kind": BASELINE,
            "gamma": params.gamma,
            "big_m": big_m,
            "groups": {
                "mistake_indicators": tuple(range(n)),
                "coef_pos": tuple(range(n, n + nc)),
                "coef_neg": tuple(range(n + nc, total)),
            },
        },
    )
    return _attach_rounding_heuristic(model, dataset)


def build_disc_mip(
    dataset: Dataset,
    h0: LinearClassifier,
    epsilon,
    params: Optional[FormulationParams] = None,
) -> MipModel:
    """Agreement-minimizing model over the epsilon-level set around ``h0``.

    The agreement indicators are pinned from both sides so that a_i equals
    1[h(x_i) = h0(x_i)] exactly for every feasible assignment:

        M_i a_i - h0(x_i) w.x_i >= gamma        (a_i = 0 needs a clear flip)
        h0(x_i) w.x_i - M_i a_i >= gamma - M_i  (a_i = 1 needs clear agreement)

    One-sided indicators would let the solver hide risk-increasing flips
    behind a_i = 1 and overstate discrepancy when flips come with forced
    collateral flips (duplicated feature vectors).  The level-set row then
    uses the exact identity
    risk(h) = risk(h0) + (1/n) sum_i w_i y_i h0(x_i) (1 - a_i), recorded in
    the metadata so solutions can be cross-checked after decoding.
    """
    params = params or FormulationParams()
    eps = Fraction(epsilon) if not isinstance(epsilon, Fraction) else epsilon
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    n, nc, total = _layout(dataset)
    big_m = _big_m_vector(dataset, params)
    base_preds = predictions(h0, dataset)

    # M_i a_i - h0(x_i) sum_j w_j x_ij >= gamma
    rows = np.zeros((n, total))
    signed = dataset.X * (-base_preds[:, None])
    rows[:, :n] = np.diag(big_m)
    rows[:, n : n + nc] = signed
    rows[:, n + nc :] = signed
    rhs = np.full(n, params.gamma)

    # h0(x_i) sum_j w_j x_ij - M_i a_i >= gamma - M_i
    rows_rev = np.zeros((n, total))
    rows_rev[:, :n] = np.diag(-big_m)
    rows_rev[:, n : n + nc] = -signed
    rows_rev[:, n + nc :] = -signed
    rhs_rev = params.gamma - big_m

    # Level set:  sum_i w_i y_i h0(x_i) a_i >= S - n*eps,  S = sum_i w_i y_i h0(x_i)
    signed_weights = dataset.weights * dataset.y * base_preds
    s_total = int(signed_weights.sum())
    level_row = np.zeros(total)
    level_row[:n] = signed_weights
    level_rhs = float(s_total - eps * dataset.n)

    l1 = _l1_row(n, nc, total)
    objective = np.zeros(total)
    objective[:n] = dataset.weights
    lo, hi = _coef_bounds(n, nc)
    lp = LinearProgram(
        objective=objective,
        row_coefs=np.vstack([rows, rows_rev, level_row[None, :], l1[None, :]]),
        row_relations=tuple([GREATER_EQUAL] * (2 * n + 1) + [EQUAL]),
        row_rhs=np.concatenate([rhs, rhs_rev, [level_rhs], [1.0]]),
        var_lo=lo,
        var_hi=hi,
    )
    base_report = empirical_risk(h0, dataset)
    model = MipModel(
        lp=lp,
        binary_vars=tuple(range(n)),
        metadata={
            "kind": DISC,
            "gamma": params.gamma,
            "big_m": big_m,
            "epsilon": eps,
            "base_predictions": base_preds,
            "risk_identity": {
                "base_mistakes": base_report.mistakes,
                "signed_weights": signed_weights,
                "n": dataset.n,
            },
            "groups": {
                "agreement_indicators": tuple(range(n)),
                "coef_pos": tuple(range(n, n + nc)),
                "coef_neg": tuple(range(n + nc, total)),
            },
        },
    )
    return _attach_rounding_heuristic(model, dataset)


def build_flip_mip(
    dataset: Dataset,
    h0: LinearClassifier,
    index: int,
    params: Optional[FormulationParams] = None,
) -> MipModel:
    """Error-minimizing model forced to disagree with ``h0`` on one example."""
    params = params or FormulationParams()
    n, nc, total = _layout(dataset)
    if not 0 <= index < n:
        raise IndexError(f"example index {index} out of range [0, {n})")
    big_m = _big_m_vector(dataset, params)
    base_preds = predictions(h0, dataset)

    rows, rhs = _mistake_rows(dataset, big_m, params.gamma, total)
    # Flip row:  -h0(x_i) sum_j w_j x_ij >= gamma
    flip_row = np.zeros(total)
    flip_coefs = -float(base_preds[index]) * dataset.X[index]
    flip_row[n : n + nc] = flip_coefs
    flip_row[n + nc :] = flip_coefs
    l1 = _l1_row(n, nc, total)

    objective = np.zeros(total)
    objective[:n] = dataset.weights
    lo, hi = _coef_bounds(n, nc)
    lp = LinearProgram(
        objective=objective,
        row_coefs=np.vstack([rows, flip_row[None, :], l1[None, :]]),
        row_relations=tuple([GREATER_EQUAL] * (n + 1) + [EQUAL]),
        row_rhs=np.concatenate([rhs, [params.gamma], [1.0]]),
        var_lo=lo,
        var_hi=hi,
    )
    model = MipModel(
        lp=lp,
        binary_vars=tuple(range(n)),
        metadata={
            "kind": FLIP,
            "gamma": params.gamma,
            "big_m": big_m,
            "flip_index": index,
            "base_predictions": base_preds,
            "groups": {
                "mistake_indicators": tuple(range(n)),
                "coef_pos": tuple(range(n, n + nc)),
                "coef_neg": tuple(range(n + nc, total)),
            },
        },
    )
    return _attach_rounding_heuristic(model, dataset)


# -- solution encoding / decoding ---------------------------------------


def _attach_rounding_heuristic(model: MipModel, dataset: Dataset) -> MipModel:
    """Register the decode/re-encode primal heuristic on the model.

    Any node LP solution carries a coefficient split; decoding it to a
    classifier and re-encoding the indicator values it forces yields a
    candidate incumbent whenever that assignment is feasible (for the
    level-set model it can fail, and is then simply discarded).
    """

    def heuristic(values):
        h = classifier_from_solution(model, values)
        return assignment_from_classifier(model, dataset, h)

    model.metadata["incumbent_heuristic"] = heuristic
    return model


def classifier_from_solution(model: MipModel, values) -> LinearClassifier:
    """Decode the coefficient split of a solved model into a classifier.

    The l1 row fixes sum(w+ - w-) = 1 but allows overlapping splits whose
    combined coefficients have smaller norm, so the decoded vector is
    rescaled to unit l1 norm (predictions are scale-invariant).  An all-zero
    decode is replaced by the equivalent always-negative classifier (-1, 0,
    ..., 0).
    """
    groups = model.metadata["groups"]
    values = np.asarray(values, dtype=float)
    w = values[list(groups["coef_pos"])] + values[list(groups["coef_neg"])]
    norm = float(np.abs(w).sum())
    if norm < 1e-9:
        coefs = np.zeros_like(w)
        coefs[0] = -1.0
        return LinearClassifier(tuple(coefs))
    return LinearClassifier(tuple(w / norm))


def assignment_from_classifier(
    model: MipModel, dataset: Dataset, h: LinearClassifier
) -> np.ndarray:
    """Build the minimal feasible-looking assignment that encodes ``h``.

    Indicators are set to the values the Big-M rows force for h's scores;
    the result still has to pass ``check_feasible`` (it can fail when a
    score sits inside the margin band or, for disc models, when h lies
    outside the level set).
    """
    gamma = model.metadata["gamma"]
    kind = model.metadata["kind"]
    n, nc, total = _layout(dataset)
    w = np.asarray(h.coefficients, dtype=float)
    scores = dataset.X @ w
    values = np.zeros(total)
    values[n : n + nc] = np.maximum(w, 0.0)
    values[n + nc :] = np.minimum(w, 0.0)
    if kind == DISC:
        base = model.metadata["base_predictions"]
        values[:n] = (base * scores >= gamma - 1e-12).astype(float)
    else:
        values[:n] = (dataset.y * scores < gamma - 1e-12).astype(float)
    return values


def margin_clearance(h: LinearClassifier, dataset: Dataset, gamma: float) -> tuple:
    """Smallest |w.x_i| over the dataset and whether it clears the margin.

    Certified solutions are expected to keep every training score at
    distance >= gamma from zero; violations are reported as warnings by the
    callers because the indicator semantics are only exact outside the band.
    """
    scores = dataset.X @ np.asarray(h.coefficients)
    min_abs = float(np.abs(scores).min())
    return min_abs, min_abs >= gamma - MARGIN_AUDIT_SLACK


# -- MPS export ----------------------------------------------------------


def _column_names(model: MipModel) -> list:
    groups = model.metadata.get("groups", {})
    names = [""] * model.lp.n_vars
    prefix_map = {
        "mistake_indicators": ("ERR", 4, 1),
        "agreement_indicators": ("AGR", 4, 1),
        "coef_pos": ("WP", 2, 0),
        "coef_neg": ("WN", 2, 0),
    }
    for group, idx in groups.items():
        prefix, width, base = prefix_map.get(group, ("X", 4, 0))
        for k, j in enumerate(idx):
            names[j] = f"{prefix}{k + base:0{width}d}"
    for j, name in enumerate(names):
        if not name:
            names[j] = f"X{j:04d}"
    return names


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def export_mps(model: MipModel, path) -> None:
    """Write the model in fixed-format MPS with deterministic naming."""
    lp = model.lp
    cols = _column_names(model)
    row_names = [f"R{k + 1:04d}" for k in range(lp.n_rows)]
    rel_tag = {"<=": "L", ">=": "G", "=": "E"}
    binaries = set(model.binary_vars)

    def field_line(f1, f2, f3="", f4="", f5="", f6=""):
        line = f" {f1:<2} {f2:<8} {f3:<8} {f4:<12} {f5:<8} {f6:<12}"
        return line.rstrip()

    lines = [f"NAME          {model.metadata.get('kind', 'MODEL').upper()}"]
    lines.append("ROWS")
    lines.append(" N  OBJ")
    for k, rel in enumerate(lp.row_relations):
        lines.append(f" {rel_tag[rel]}  {row_names[k]}")
    lines.append("COLUMNS")
    marker_open = False
    for j in range(lp.n_vars):
        is_bin = j in binaries
        if is_bin and not marker_open:
            lines.append(
                "    MARKER                 'MARKER'                 'INTORG'"
            )
            marker_open = True
        if not is_bin and marker_open:
            lines.append(
                "    MARKER                 'MARKER'                 'INTEND'"
            )
            marker_open = False
        entries = []
        if lp.objective[j] != 0.0:
            entries.append(("OBJ", lp.objective[j]))
        for k in range(lp.n_rows):
            if lp.row_coefs[k, j] != 0.0:
                entries.append((row_names[k], lp.row_coefs[k, j]))
        if not entries:
            entries.append(("OBJ", 0.0))
        for a in range(0, len(entries), 2):
            chunk = entries[a : a + 2]
            if len(chunk) == 2:
                (r1, v1), (r2, v2) = chunk
                lines.append(field_line("", cols[j], r1, _fmt(v1), r2, _fmt(v2)))
            else:
                (r1, v1) = chunk[0]
                lines.append(field_line("", cols[j], r1, _fmt(v1)))
    if marker_open:
        lines.append("    MARKER                 'MARKER'                 'INTEND'")
    lines.append("RHS")
    for k in range(lp.n_rows):
        if lp.row_rhs[k] != 0.0:
            lines.append(field_line("", "RHS", row_names[k], _fmt(lp.row_rhs[k])))
    lines.append("BOUNDS")
    for j in range(lp.n_vars):
        lines.append(field_line("LO", "BND", cols[j], _fmt(lp.var_lo[j])))
        lines.append(field_line("UP", "BND", cols[j], _fmt(lp.var_hi[j])))
    lines.append("ENDATA")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def mps_filename(dataset_name: str, formulation: str, params: FormulationParams) -> str:
    digest = hashlib.sha256(
        f"{params.gamma}:{params.big_m_override}".encode()
    ).hexdigest()[:8]
    return f"{dataset_name}_{formulation}_{digest}.mps"
