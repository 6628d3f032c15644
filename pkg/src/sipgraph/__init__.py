"""Streaming interactive proofs for graph problems over GF(2^61 - 1)."""
from .gstream import GraphStream, SetupError, graph_from_edges, parse_stream
from .session import Reject, Transcript, run_session, soundness_trial

__all__ = ["GraphStream", "SetupError", "graph_from_edges", "parse_stream", "Reject",
           "Transcript", "run_session", "soundness_trial"]
