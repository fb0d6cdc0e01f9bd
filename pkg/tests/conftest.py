import os
import sys

# Oracle helper modules live next to the tests.
sys.path.insert(0, os.path.dirname(__file__))
