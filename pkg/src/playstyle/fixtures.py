"""The worked three-state example with a discrete three-action space.

Observations are 1x1x1 images whose single intensity (1, 2 or 3) names the
state, so the pixel mapper recovers the intended states exactly.

======  ====================  ====================
state   dataset A actions     dataset B actions
======  ====================  ====================
s1      0, 0, 0  -> (1,0,0)   1, 2   -> (0,.5,.5)
s2      1, 2     -> (0,.5,.5) 1      -> (0,1,0)
s3      2        -> (0,0,1)   1, 2   -> (0,.5,.5)
======  ====================  ====================

Expected distance: 0.940 with t=1, 1.225 with t=2.
"""

import numpy as np

from .dataset import ActionSpace, PlayDataset
from .discretizer import PixelMapper, build_state_table

N_ACTIONS = 3
_A = [(1, 0), (1, 0), (1, 0), (2, 1), (2, 2), (3, 2)]
_B = [(1, 1), (1, 2), (2, 1), (3, 1), (3, 2)]

EXPECTED_T1 = 0.940
EXPECTED_T2 = 1.225
UNIFORM_T1 = 0.880
PER_STATE_W2 = (1.225, 0.707, 0.707)


def _dataset(pairs, id):
    obs = np.array([s for s, _ in pairs], dtype=np.uint8).reshape(-1, 1, 1, 1)
    acts = np.array([a for _, a in pairs], dtype=np.uint32)
    return PlayDataset(ActionSpace.discrete(N_ACTIONS), (1, 1, 1), obs, acts, id)


def worked_example_datasets():
    return _dataset(_A, "A"), _dataset(_B, "B")


def worked_example_states():
    mapper = PixelMapper()
    return [mapper(np.full((1, 1, 1), v, np.uint8)) for v in (1, 2, 3)]


def worked_example_tables():
    a, b = worked_example_datasets()
    mapper = PixelMapper()
    return build_state_table(mapper, a), build_state_table(mapper, b)
