"""Natural-language wall detailing engine.

Turns spoken or typed design commands into validated wall assemblies through
a six-step pipeline: interpret, fill, match, structure, execute, check.
"""

__version__ = "0.1.0"
