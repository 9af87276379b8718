"""Classical shadow tomography with quantum re-preparation of snapshots."""

__version__ = "0.1.0"
