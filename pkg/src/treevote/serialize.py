"""YAML serialization for schemas, trees, ensembles, and summaries.

One structured-text format for every artifact the toolkit reads or
writes. Documents round-trip exactly: loading a dumped model yields an
equal object.
"""

from __future__ import annotations

import yaml

from .data import CATEGORICAL, NUMERIC, Column, Schema
from .ensembles import EnsembleModel
from .errors import ConfigError
from .metrics import EvalSummary
from .trees import DecisionTree, SplitRule, TreeNode


def dump_yaml(payload) -> str:
    return yaml.safe_dump(payload, sort_keys=False, default_flow_style=False)


def load_yaml(text: str):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid document: {exc}") from exc


def _require(mapping, key, context):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ConfigError(f"{context}: missing field {key!r}")
    return mapping[key]


def schema_to_dict(schema: Schema) -> dict:
    return {
        "columns": [{"name": c.name, "kind": c.kind} for c in schema.columns],
        "target": schema.target,
        "classes": list(schema.classes),
    }


def schema_from_dict(payload) -> Schema:
    columns = _require(payload, "columns", "schema")
    if not isinstance(columns, list):
        raise ConfigError("schema: columns must be a list")
    cols = []
    for entry in columns:
        name = _require(entry, "name", "schema column")
        kind = _require(entry, "kind", "schema column")
        if kind not in (CATEGORICAL, NUMERIC):
            raise ConfigError(f"schema: unknown column kind {kind!r}")
        cols.append(Column(str(name), kind))
    try:
        return Schema(
            columns=tuple(cols),
            target=str(_require(payload, "target", "schema")),
            classes=tuple(str(c) for c in _require(payload, "classes", "schema")),
        )
    except ValueError as exc:
        raise ConfigError(f"schema: {exc}") from exc


def schema_to_yaml(schema: Schema) -> str:
    return dump_yaml(schema_to_dict(schema))


def schema_from_yaml(text: str) -> Schema:
    return schema_from_dict(load_yaml(text))


def _rule_to_dict(rule: SplitRule) -> dict:
    out = {"feature": rule.feature, "kind": rule.kind}
    if rule.threshold is not None:
        out["threshold"] = rule.threshold
    if rule.groups is not None:
        out["groups"] = [list(group) for group in rule.groups]
    if rule.boundaries is not None:
        out["boundaries"] = list(rule.boundaries)
    if rule.adjusted_p is not None:
        out["adjusted_p"] = rule.adjusted_p
    if rule.bonferroni_multiplier is not None:
        out["bonferroni_multiplier"] = rule.bonferroni_multiplier
    return out


def _rule_from_dict(payload) -> SplitRule:
    groups = payload.get("groups")
    boundaries = payload.get("boundaries")
    return SplitRule(
        feature=str(_require(payload, "feature", "split rule")),
        kind=str(_require(payload, "kind", "split rule")),
        threshold=payload.get("threshold"),
        groups=tuple(tuple(str(c) for c in g) for g in groups) if groups else None,
        boundaries=tuple(float(b) for b in boundaries) if boundaries else None,
        adjusted_p=payload.get("adjusted_p"),
        bonferroni_multiplier=payload.get("bonferroni_multiplier"),
    )


def _node_to_dict(node: TreeNode) -> dict:
    out = {
        "class_counts": list(node.class_counts),
        "prediction": node.prediction,
        "distribution": list(node.distribution),
    }
    if not node.is_leaf:
        out["rule"] = _rule_to_dict(node.rule)
        out["children"] = [_node_to_dict(child) for child in node.children]
    return out


def _node_from_dict(payload) -> TreeNode:
    rule = payload.get("rule")
    children = payload.get("children") or ()
    try:
        return TreeNode(
            class_counts=tuple(float(c) for c in _require(payload, "class_counts", "tree node")),
            prediction=str(_require(payload, "prediction", "tree node")),
            distribution=tuple(float(p) for p in _require(payload, "distribution", "tree node")),
            rule=_rule_from_dict(rule) if rule else None,
            children=tuple(_node_from_dict(c) for c in children),
        )
    except ValueError as exc:
        raise ConfigError(f"tree node: {exc}") from exc


def tree_to_dict(tree: DecisionTree) -> dict:
    return {
        "model_type": "tree",
        "kind": tree.kind,
        "schema": schema_to_dict(tree.schema),
        "root": _node_to_dict(tree.root),
    }


def tree_from_dict(payload) -> DecisionTree:
    return DecisionTree(
        schema=schema_from_dict(_require(payload, "schema", "tree")),
        root=_node_from_dict(_require(payload, "root", "tree")),
        kind=str(_require(payload, "kind", "tree")),
    )


def ensemble_to_dict(ensemble: EnsembleModel) -> dict:
    members = []
    for model, weight in ensemble.members:
        if isinstance(model, DecisionTree):
            entry = tree_to_dict(model)
        else:
            entry = ensemble_to_dict(model)
        members.append({"weight": weight, "model": entry})
    return {
        "model_type": "ensemble",
        "kind": ensemble.kind,
        "aggregation": ensemble.aggregation,
        "class_order": list(ensemble.class_order),
        "members": members,
    }


def ensemble_from_dict(payload) -> EnsembleModel:
    members = []
    for entry in _require(payload, "members", "ensemble"):
        weight = float(_require(entry, "weight", "ensemble member"))
        model = model_from_dict(_require(entry, "model", "ensemble member"))
        members.append((model, weight))
    try:
        return EnsembleModel(
            members=tuple(members),
            aggregation=str(_require(payload, "aggregation", "ensemble")),
            class_order=tuple(str(c) for c in _require(payload, "class_order", "ensemble")),
            kind=str(_require(payload, "kind", "ensemble")),
        )
    except ValueError as exc:
        raise ConfigError(f"ensemble: {exc}") from exc


def model_to_yaml(model) -> str:
    if isinstance(model, DecisionTree):
        return dump_yaml(tree_to_dict(model))
    if isinstance(model, EnsembleModel):
        return dump_yaml(ensemble_to_dict(model))
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(payload):
    model_type = _require(payload, "model_type", "model")
    if model_type == "tree":
        return tree_from_dict(payload)
    if model_type == "ensemble":
        return ensemble_from_dict(payload)
    raise ConfigError(f"model: unknown model_type {model_type!r}")


def model_from_yaml(text: str):
    return model_from_dict(load_yaml(text))


def summary_to_dict(summary: EvalSummary, classes) -> dict:
    auc = {c: v for c, v in zip(classes, summary.per_class_auc)}
    return {
        "accuracy": summary.accuracy,
        "error_rate": summary.error_rate,
        "std_error": summary.std_error,
        "per_class_auc": auc,
    }


def summary_from_dict(payload, classes) -> EvalSummary:
    auc_map = _require(payload, "per_class_auc", "summary")
    return EvalSummary(
        accuracy=float(_require(payload, "accuracy", "summary")),
        error_rate=float(_require(payload, "error_rate", "summary")),
        std_error=float(_require(payload, "std_error", "summary")),
        per_class_auc=tuple(auc_map.get(c) for c in classes),
    )
