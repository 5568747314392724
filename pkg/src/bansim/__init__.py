"""Body area network MAC/PHY toolkit.

Simulation, frame encoding, and analytic throughput models for a short-range
medical-grade radio stack: three physical layers (narrowband, ultra-wideband,
body-coupled), a beacon-framed superframe MAC with contended and scheduled
access phases, slotted CSMA/CA, and a three-level link security model.
"""

__version__ = "0.1.0"
