"""HTTP surface, file formats, CLI plumbing, and the multi-node harness."""
