"""Physical-layer multi-factor authentication.

Subpackages and modules:

``coding``     Slepian-Wolf syndrome codes (polar SCL, LDPC BP+OSD, BCH)
``skg``        correlated sources, reconciliation and FER experiments
``proximity``  RSSI path-loss model, Kalman smoothing, region decisions
``puf``        simulated PUF and code-offset fuzzy extractor
``protocol``   enrollment, mutual authentication and 0-RTT resumption
``harness``    adversarial channel and attack scenarios
"""

from .bits import BitVector

__version__ = "0.1.0"

__all__ = ["BitVector", "__version__"]
