"""Anonymity-set simulation for payment networks."""

from ._core import (
    BucketStrategy,
    DataError,
    Payment,
    active_sets,
    active_value_sets,
    bucket_cheap,
    bucket_expensive,
    bucket_fixed,
    epoch_experiment,
    generate,
    generate_measured,
    path_anon,
    pay_more,
    quartiles,
    read_payments_csv,
    relative_cost,
    wait_time_to_match,
    write_payments_csv,
)

__all__ = [
    "BucketStrategy",
    "DataError",
    "Payment",
    "active_sets",
    "active_value_sets",
    "bucket_cheap",
    "bucket_expensive",
    "bucket_fixed",
    "epoch_experiment",
    "generate",
    "generate_measured",
    "path_anon",
    "pay_more",
    "quartiles",
    "read_payments_csv",
    "relative_cost",
    "wait_time_to_match",
    "write_payments_csv",
]
