import logging

from .spectral import *
from .functionals import *
from .solver import *
from .diagnostics import *
from .stability import *
from .evolution import *
from .columns import *
from .protocols import *
from .exceptions import *
from .version import *
from .config import *
from .representations import *
from . import cli

logging.getLogger(__name__).addHandler(logging.NullHandler())

version = CURRENT_VERSION
