# SPDX-License-Identifier: AGPL-3.0-only

# valideer (all released versions) uses collections.Sequence/Mapping, which
# were removed in Python 3.10; restore the aliases before it is imported.
import collections as _collections
import collections.abc as _collections_abc

for _name in ("Mapping", "Sequence"):
    if not hasattr(_collections, _name):
        setattr(_collections, _name, getattr(_collections_abc, _name))
