"""Hand references for the extractor tests, written before the code they check.

The contact case is worked out from integer-grid coordinates so every
distance is exact; the shuffle oracle is the independent control for
structure-aware scoring.
"""

from __future__ import annotations

import math
import random

# Six CA positions on a 3.8 A grid snake: (0,0) (3.8,0) (7.6,0) stay on one
# row, then (7.6,3.8) (3.8,3.8) (0,3.8) come back along the next. With an
# 8.0 A cutoff and sequence separation >= 3 the qualifying pairs are
# 0-4 (5.374), 0-5 (3.8), 1-4 (3.8), 1-5 (5.374); 0-3 and 2-5 sit at
# sqrt(7.6^2 + 3.8^2) = 8.497 and miss the cutoff.
SNAKE_COORDS = (
    (0.0, 0.0, 0.0),
    (3.8, 0.0, 0.0),
    (7.6, 0.0, 0.0),
    (7.6, 3.8, 0.0),
    (3.8, 3.8, 0.0),
    (0.0, 3.8, 0.0),
)
SNAKE_CONTACT_PAIRS = ((0, 4), (0, 5), (1, 4), (1, 5))
SNAKE_CONTACT_COUNTS = (2, 2, 0, 0, 2, 2)


def contact_pairs_by_hand(coords, cutoff, min_separation):
    """Quadratic scan over index pairs, 0-based, i < j."""
    pairs = []
    for i in range(len(coords)):
        for j in range(i + 1, len(coords)):
            if j - i >= min_separation and math.dist(coords[i], coords[j]) <= cutoff:
                pairs.append((i, j))
    return pairs


def log_softmax_by_hand(logits):
    shift = max(logits)
    log_norm = shift + math.log(sum(math.exp(v - shift) for v in logits))
    return [v - log_norm for v in logits]


def shuffle_composition(sequence, seed):
    """Same letters in a seeded random order: the control a structure-aware
    score must beat on the structure the original sequence belongs to."""
    letters = list(sequence)
    random.Random(seed).shuffle(letters)
    return "".join(letters)
