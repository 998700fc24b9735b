"""__init__.py for engine package."""
