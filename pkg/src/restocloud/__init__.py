"""restocloud: location-based restaurant platform.

Three node roles: the LSP (identity, auth, presence, locate), per-zone
Cloud Units (restaurant stores), and the CSP (CU directory + escalated
cross-zone search). The ``wire`` subpackage owns the HTTP surface, file
formats, CLI, and the multi-node demo harness.
"""

__version__ = "0.1.0"
