"""Settlement-failure probabilities for longest-chain proof-of-stake ledgers.

The package splits into:

* :mod:`settleprob.charstring` -- characteristic strings and samplers;
* :mod:`settleprob.fork` -- fork trees, axioms, and exhaustive oracles;
* :mod:`settleprob.margin` -- the reach / relative-margin recursions;
* :mod:`settleprob.adversary` -- optimal online fork builders and witnesses;
* :mod:`settleprob.exactprob` -- exact probabilities by dynamic programming;
* :mod:`settleprob.gfbounds` -- generating-function and Azuma tail bounds;
* :mod:`settleprob.game` -- the interactive settlement game and Monte Carlo;
* :mod:`settleprob.cli` -- the ``settleprob`` command-line tool.
"""

__version__ = "0.1.0"

from .charstring import BernoulliParams, CharString, MartingaleSource
from .fork import Fork, TineStats
from .margin import MarginWalk, is_forkable, mu, relative_margin, rho

__all__ = [
    "__version__",
    "BernoulliParams",
    "CharString",
    "MartingaleSource",
    "Fork",
    "TineStats",
    "MarginWalk",
    "is_forkable",
    "mu",
    "relative_margin",
    "rho",
]
