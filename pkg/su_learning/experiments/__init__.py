"""Trial execution, tracking and the experiment sweeps"""
