"""Prints the dyadic and Walsh check table that the ``walsh`` command writes."""

from chromax.cli import walsh_checks

for name, value, threshold, passed in walsh_checks(seed=7):
    print(f"{name:36s} {value!r:>24} {threshold!r:>24} {passed}")
