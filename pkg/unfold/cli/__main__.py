# SPDX-License-Identifier: AGPL-3.0-only
import sys

from . import main

sys.exit(main())
