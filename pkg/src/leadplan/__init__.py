"""leadplan: municipal lead-service-line replacement planning toolkit.

Links messy municipal datasets into a parcel-level child-exposure model,
partitions streets into candidate replacement projects, scores each
project's harm-reduction value and cost, ranks by benefit-cost ratio under
a budget, and simulates competing replacement policies.
"""

__version__ = "0.1.0"
