"""__init__.py.

.. include:: README.md
"""
