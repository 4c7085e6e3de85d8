"""Random NOMA versus random-access baselines for massive machine-type uplink."""
