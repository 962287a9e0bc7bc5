"""Link-level simulation and link planning for D-band (150 GHz) systems."""
from . import channel, detect, fec, indexmod, linkplan, modem

__version__ = "0.1.0"
__all__ = ["channel", "detect", "fec", "indexmod", "linkplan", "modem"]
