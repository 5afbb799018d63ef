"""Provider service speaking the videval wire protocol.

One POST endpoint answers every task (score, embed_frames, embed_text,
embed_video, iqa); /health reports the mode and configured models.  Stub
mode is fully deterministic and needs no model assets; real mode loads
encoder/scorer objects through dotted-path factories from the config.
"""

__version__ = "0.1.0"
