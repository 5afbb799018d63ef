"""Machine-checkable JSON Schemas for the wire protocol.

The service validates requests by hand (to control error wording); these
schemas are the normative shape used by the conformance tests and by any
other implementation that wants to self-check.
"""

REQUEST_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["task"],
    "properties": {
        "task": {"enum": ["score", "embed_frames", "embed_text", "embed_video", "iqa"]},
        "prompt": {"type": "string"},
        "frames": {"type": "array", "items": {"type": "string"}},
        "mode": {"enum": ["generative", "regression"]},
    },
}

RESPONSE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "text": {"type": "string"},
        "scores": {
            "type": "array",
            "items": {"type": "number", "minimum": 1.0, "maximum": 4.0},
            "minItems": 5,
            "maxItems": 5,
        },
        "vectors": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 1},
            "minItems": 1,
        },
        "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "error": {"type": "string"},
    },
    "oneOf": [
        {"required": ["text"]},
        {"required": ["scores"]},
        {"required": ["vectors"]},
        {"required": ["values"]},
        {"required": ["error"]},
    ],
}
