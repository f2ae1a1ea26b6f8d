"""Pydantic payloads shared by the services and the command line."""
