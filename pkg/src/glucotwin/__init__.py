"""glucotwin: simulation-driven diabetes digital twin.

Subpackages cover CGM/tabular ingestion, temporal augmentation,
from-scratch supervised models, the benchmark evaluation protocol, latent
patient state, the counterfactual scenario engine, an HTTP service, and a
CLI that reproduces every shipped experiment.
"""

__version__ = "0.1.0"
