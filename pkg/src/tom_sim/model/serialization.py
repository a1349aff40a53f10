"""
YAML round-trip for generative models.

The document lists factors, modalities (with parent lists and dense
tables), preferences, priors, actions, horizon and the self-factor block.
Floats are written with full precision so a load reproduces the tables
bit for bit.
"""

from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import yaml

from ..inference.belief import Categorical
from ..utils.errors import ExportError
from .generative_model import (
    FactorSpec,
    GenerativeModel,
    ModalitySpec,
    Preferences,
)

FORMAT_VERSION = 1


def model_to_dict(model: GenerativeModel) -> Dict[str, Any]:
    return {
        'format_version': FORMAT_VERSION,
        'name': model.name,
        'horizon': model.horizon,
        'actions': list(model.actions),
        'self_factors': list(model.self_factors),
        'factors': [
            {
                'name': f.name,
                'state_count': f.state_count,
                'parent_factors': list(f.parent_factors),
                'controlled': f.controlled,
                'state_labels': list(f.state_labels) if f.state_labels else None,
                'shape': list(f.transition.shape),
                'transition': f.transition.ravel().tolist(),
            }
            for f in model.factors
        ],
        'modalities': [
            {
                'name': m.name,
                'outcome_count': m.outcome_count,
                'parent_factors': list(m.parent_factors),
                'outcome_labels': list(m.outcome_labels) if m.outcome_labels else None,
                'shape': list(m.likelihood.shape),
                'likelihood': m.likelihood.ravel().tolist(),
            }
            for m in model.modalities
        ],
        'preferences': [c.tolist() for c in model.preferences.log_preferences],
        'priors': [p.probs.tolist() for p in model.priors],
    }


def model_from_dict(data: Dict[str, Any]) -> GenerativeModel:
    def table(entry: Dict[str, Any], key: str) -> np.ndarray:
        return np.array(entry[key], dtype=np.float64).reshape(entry['shape'])

    def labels(entry: Dict[str, Any], key: str) -> Any:
        return tuple(entry[key]) if entry.get(key) else None

    factors = tuple(
        FactorSpec(f['name'], int(f['state_count']), tuple(f['parent_factors']),
                   bool(f['controlled']), table(f, 'transition'), labels(f, 'state_labels'))
        for f in data['factors']
    )
    modalities = tuple(
        ModalitySpec(m['name'], int(m['outcome_count']), tuple(m['parent_factors']),
                     table(m, 'likelihood'), labels(m, 'outcome_labels'))
        for m in data['modalities']
    )
    return GenerativeModel(
        name=data['name'],
        factors=factors,
        modalities=modalities,
        preferences=Preferences(tuple(np.array(c, dtype=np.float64) for c in data['preferences'])),
        priors=tuple(Categorical(np.array(p, dtype=np.float64)) for p in data['priors']),
        actions=tuple(data['actions']),
        horizon=int(data['horizon']),
        self_factors=tuple(data.get('self_factors', ())),
    )


def dump_model(model: GenerativeModel, path: Union[str, Path]) -> Path:
    """Write a model as YAML."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            yaml.safe_dump(model_to_dict(model), f, default_flow_style=None, sort_keys=False)
    except OSError as e:
        raise ExportError(str(path), str(e)) from e
    return path


def load_model(path: Union[str, Path]) -> GenerativeModel:
    """Read a model written by :func:`dump_model`."""
    try:
        with open(path, 'r') as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ExportError(str(path), str(e)) from e
    return model_from_dict(data)


def models_equal(a: GenerativeModel, b: GenerativeModel) -> bool:
    """Structural and bitwise table equality."""
    if (a.name, a.horizon, a.actions, a.self_factors) != (b.name, b.horizon, b.actions,
                                                          b.self_factors):
        return False
    if len(a.factors) != len(b.factors) or len(a.modalities) != len(b.modalities):
        return False
    for fa, fb in zip(a.factors, b.factors):
        if (fa.name, fa.state_count, fa.parent_factors, fa.controlled, fa.state_labels) != \
                (fb.name, fb.state_count, fb.parent_factors, fb.controlled, fb.state_labels):
            return False
        if not np.array_equal(fa.transition, fb.transition):
            return False
    for ma, mb in zip(a.modalities, b.modalities):
        if (ma.name, ma.outcome_count, ma.parent_factors, ma.outcome_labels) != \
                (mb.name, mb.outcome_count, mb.parent_factors, mb.outcome_labels):
            return False
        if not np.array_equal(ma.likelihood, mb.likelihood):
            return False
    if not all(np.array_equal(x, y) for x, y in zip(a.preferences.log_preferences,
                                                    b.preferences.log_preferences)):
        return False
    return all(p == q for p, q in zip(a.priors, b.priors))
