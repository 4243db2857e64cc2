"""JavaScript frontend: parsing, def-use graphs, native call sites and call graphs."""
