# This file makes phi4lambert/ a Python package
