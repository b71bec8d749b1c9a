"""
Common classifier interface and model file storage.
"""
