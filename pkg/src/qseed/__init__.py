"""Hybrid quantum-classical edge classification for particle track seeding.

Subpackages: statevector (simulator), ttn (variational circuit), hitgraph
(graph construction), synthgen (toy events), training (harness), cli.
"""

__version__ = "0.1.0"
