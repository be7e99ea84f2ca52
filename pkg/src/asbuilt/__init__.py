"""As-built construction documentation toolkit.

Aligns a SLAM keyframe map to a building's CAD model, then answers spatial
image queries, extracts metric measurements from the retrieved images,
textures the model's planes, and evaluates measurement accuracy statistically.
"""

__version__ = "0.1.0"
