"""JSON schemas for instance files and for every JSON document the CLI prints."""
from __future__ import annotations

import jsonschema

from .core import SCHEMA_TAG

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NULLABLE_NUM = {"type": ["number", "null"]}


def _obj(props: dict, required=None) -> dict:
    return {
        "type": "object",
        "properties": props,
        "required": list(props) if required is None else required,
    }


INSTANCE = _obj(
    {
        "schema": {"const": SCHEMA_TAG},
        "exponents": {"type": "array", "items": _POS, "minItems": 2},
        "wedge": _obj(
            {
                "i": {"type": "integer", "minimum": 0},
                "j": {"type": "integer", "minimum": 0},
                "p": _POS,
                "q": _POS,
            },
            ["p", "q"],
        ),
        "bounds": _obj({"l": _POS, "u": _POS}),
    },
    ["exponents", "wedge", "bounds"],
)

PARAMS = _obj(
    {k: _NUM for k in ("z0", "gamma", "beta", "d_i", "d_j", "eta_i", "eta_j", "lambda", "zeta", "sigma", "tau")}
    | {"identities_ok": {"type": "boolean"}}
)

VERDICT = _obj({"inside": {"type": "boolean"}, "margin": _NUM, "binding": {"type": "string"}})

EVAL = _obj(
    {
        "f": _NUM,
        "upper_env": _NUM,
        "lower_env": _NULLABLE_NUM,
        "z": _NULLABLE_NUM,
        "verdict": {"oneOf": [VERDICT, {"type": "null"}]},
    },
    ["f", "upper_env", "lower_env"],
)

VOLUME = _obj(
    {
        "closed_form": _NUM,
        "quadrature": _NULLABLE_NUM,
        "quadrature_error": _NULLABLE_NUM,
        "monte_carlo": _NULLABLE_NUM,
        "monte_carlo_stderr": _NULLABLE_NUM,
        "quad_agrees": {"type": ["boolean", "null"]},
        "mc_agrees": {"type": ["boolean", "null"]},
    },
    ["closed_form"],
)

BRANCH = _obj(
    {
        "kind": {"enum": ["ratio", "value"]},
        "point": _NUM,
        "left_volume": {"type": "number", "minimum": 0},
        "right_volume": {"type": "number", "minimum": 0},
        "total": _NUM,
    }
)

BRANCH_BOTH = _obj({"ratio": BRANCH, "value": BRANCH, "best": BRANCH})

LEVELSET = {
    "type": "array",
    "items": _obj(
        {"xi": _POS, "x1": _NUM, "x2": _NUM, "on_P": {"type": "boolean"}, "on_Q": {"type": "boolean"}}
    ),
}

COMPARE = _obj(
    {
        "grid": {"type": "integer"},
        "points": {"type": "integer"},
        "wedge_mean_gap": _NUM,
        "mccormick_mean_gap": _NUM,
        "dominance_violations": {"type": "integer"},
        "strictly_tighter": {"type": "boolean"},
    }
)

ERROR = _obj({"error": {"type": "string"}, "message": {"type": "string"}, "exit_code": {"type": "integer"}})

OUTPUTS = {
    "params": PARAMS,
    "eval": EVAL,
    "check": VERDICT,
    "volume": VOLUME,
    "branch": {"oneOf": [BRANCH, BRANCH_BOTH]},
    "levelset": LEVELSET,
    "compare": COMPARE,
}


def validate_instance(data) -> None:
    jsonschema.validate(data, INSTANCE)


def validate_output(command: str, data) -> None:
    jsonschema.validate(data, OUTPUTS[command])
