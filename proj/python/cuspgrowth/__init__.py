import json

from ._core import (
    ConstraintError,
    CuspModel,
    NumericalError,
    ball_horoball_volume,
    command_names,
    displacement,
    exact_distance,
    flow_contraction,
    log_cuspidal_F,
    log_parabolic_counting,
    meeting_height,
    partial_poincare,
    quasigeodesic_distance,
    word_count,
)
from . import _core


def _dump(config):
    return json.dumps(config or {})


def config_hash(config=None):
    return _core.config_hash(_dump(config))


def build_model(config=None):
    return CuspModel.from_config(_dump(config))


def run(verb, config=None, out="out"):
    """Run a CLI verb in-process; returns (report dict, exit code)."""
    text, code = _core.run_command(verb, _dump(config), str(out))
    return json.loads(text), code
