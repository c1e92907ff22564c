# This file makes tests/commands/ a Python package
