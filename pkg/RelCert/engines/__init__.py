from .free_engine import FreeEngine
from .abelian_engine import AbelianEngine
from .cyclic_product_engine import CyclicProductEngine
from .product_engine import ProductEngine
from .rewriting_engine import RewritingEngine
