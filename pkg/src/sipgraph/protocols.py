"""Protocol registry used by the session runner and the CLI."""
from __future__ import annotations

from . import basic_protocols, matching, spanning
from .sumcheck import Mode

PROTOCOLS = {
    "triangles": basic_protocols.count_triangles,
    "disj": basic_protocols.disjointness,
    "cc": spanning.count_components,
    "mst": spanning.mst_approx,
    "bipartite": spanning.bipartiteness,
    "mcm-bipartite": matching.mcm_bipartite,
    "mwm-bipartite": matching.mwm_bipartite,
    "mwm-general": matching.mwm_general,
    "mcm-general": matching.mcm_general,
    "tsp": matching.tsp_verify,
}


def default_mode(protocol: str) -> Mode:
    return Mode("const", 3) if protocol == "triangles" else Mode("log")
