"""C/C++ frontend: parsing, def-use graphs and binding registrations."""
