"""
Makes ``src`` importable from the tests when pytest is run from the repository root.
"""
