# Routes package
# All route modules should be imported directly in main.py to avoid circular imports
