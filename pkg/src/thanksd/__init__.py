"""thanksd: a self-hostable appreciation pipeline for open source packages.

Detects package-interfacing lines in source files, records anonymous
thanks with optional personal notes, attributes each thanked object to
its recent contributors, and delivers batched digests.
"""

__version__ = "0.1.0"
