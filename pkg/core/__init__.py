"""Domain core: geodesy, ingestion, trajectories, densification, ball tree,
visibility counting, statistics and the synthetic data generator."""
