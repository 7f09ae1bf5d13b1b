from .rate_limiter import RateLimiter
from .supplier import Supplier, SupplierConfig, even_allocation

__all__ = ['RateLimiter', 'Supplier', 'SupplierConfig', 'even_allocation']
