"""__init__.py for lib package: max-stable dependence toolkit."""

__version__ = "0.1.0"
