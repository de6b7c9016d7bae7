"""
treepack - balanced tree packing toolkit
Decomposition, embedding and packing of balanced trees into bipartite hosts
"""

__version__ = "1.0.0"
__author__ = "dev4"
