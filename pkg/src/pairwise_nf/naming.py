"""Names of the variables introduced by compilation.

Copies and timestamp vectors are named writer-first: ``x__i_j`` is the copy of
``x`` written by process i and read by process j, and ``tv__i_j__k`` is
component k of i's timestamp vector for reader j. ``t__i_j`` is the timestamp
t_i^j, which only exists as a variable in the intermediate program.
"""

import re

RESERVED = re.compile(r"__")


def copy_var(x, writer, reader):
    return f"{x}__{writer}_{reader}"


def ts_var(i, j):
    return f"t__{i}_{j}"


def tv_var(writer, reader, k):
    return f"tv__{writer}_{reader}__{k}"


def stamped_name(base, stamp):
    return f"{base}_t{''.join(str(d) for d in stamp)}"


def diagonal_partner(i, K):
    """Process that shares ``x_ii^i`` and ``tv_ii^i`` with process i: the
    smallest index other than i."""
    for j in range(1, K + 1):
        if j != i:
            return j
    return None


def partner(i, writer, K):
    """Neighbor block of process i in which a variable written by ``writer``
    and read by i is referenced."""
    return writer if writer != i else diagonal_partner(i, K)
