# This file makes tests/services/ a Python package
