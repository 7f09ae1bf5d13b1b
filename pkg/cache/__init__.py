from .lru_cache import LruSearchCache
from .price_db import PriceDB

__all__ = ['PriceDB', 'LruSearchCache']
