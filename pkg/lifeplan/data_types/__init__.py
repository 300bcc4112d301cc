"""Basic data types and the exception hierarchy shared by every layer."""
