from .pipeline import *
from . import names
