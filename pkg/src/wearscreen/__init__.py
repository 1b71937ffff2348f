"""Wearable-sensor mental-health screening pipeline.

Minute-level sensor CSVs -> cleaned series -> windowed aggregates at six
granularities -> Monday-Sunday feature records -> six from-scratch
classifiers under leave-one-participant-out evaluation -> result grids.
"""

__version__ = "0.1.0"
