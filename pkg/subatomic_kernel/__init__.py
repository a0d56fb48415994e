from subatomic_kernel.server import server
from subatomic_kernel.config import config, KernelConfig

__all__ = ["server", "config", "KernelConfig"]
__version__ = "0.1.0"
